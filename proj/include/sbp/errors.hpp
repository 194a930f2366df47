#pragma once

#include <stdexcept>
#include <string>

namespace sbp {

/// Invalid construction parameters (bad N, L, a, exponents, ...).
struct InvalidParameter : std::invalid_argument {
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Two fields from different grids were combined.
struct GridMismatch : std::logic_error {
    explicit GridMismatch(const std::string& what) : std::logic_error(what) {}
};

/// A solve or projection failed (zero field, bracket failure, sign collapse).
struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sbp
