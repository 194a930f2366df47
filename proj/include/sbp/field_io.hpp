#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "sbp/errors.hpp"
#include "sbp/grid.hpp"

namespace sbp {

/// Binary field dump: header {magic "SBPF", version u32 = 1, N u32, L f64}
/// followed by N^3 little-endian f64 values, row-major.
inline void write_field(const std::string& path, const ScalarField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidParameter("write_field: cannot open " + path);
    const char magic[4] = {'S', 'B', 'P', 'F'};
    const std::uint32_t version = 1;
    const std::uint32_t n = static_cast<std::uint32_t>(f.grid().n());
    const double L = f.grid().half_length();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&L), 8);
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!out) throw InvalidParameter("write_field: write failed for " + path);
}

/// Reads a dump; validates magic, version, and payload length. When `grid`
/// is given the header must match it, otherwise a fresh grid is created.
inline ScalarField read_field(const std::string& path, GridPtr grid = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidParameter("read_field: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, n = 0;
    double L = 0.0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&L), 8);
    if (!in || std::memcmp(magic, "SBPF", 4) != 0)
        throw InvalidParameter("read_field: bad magic in " + path);
    if (version != 1)
        throw InvalidParameter("read_field: unsupported version in " + path);
    if (grid) {
        if (static_cast<int>(n) != grid->n() || L != grid->half_length())
            throw GridMismatch("read_field: header does not match the requested grid");
    } else {
        grid = Grid::make(L, static_cast<int>(n));
    }
    std::vector<double> values(grid->node_count());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in || in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
        throw InvalidParameter("read_field: truncated payload in " + path);
    return ScalarField(grid, std::move(values));
}

}  // namespace sbp
