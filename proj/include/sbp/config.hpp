#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>

#include "sbp/energy.hpp"
#include "sbp/errors.hpp"
#include "sbp/minimize.hpp"

namespace sbp {

struct RunConfig {
    double L = 8.0;
    int N = 32;
    double a = 1.0;
    double q = 1.0;
    std::string nonlinearity = "power";
    double p = 5.0;
    double v0 = 1.0;
    double omega = 0.25;
    SolveOptions solve{};
    int trials = 100;        // verify suite
    std::string out_dir = "runs";
    bool allow_local = false;

    ModelParams model_params() const {
        ModelParams m;
        m.a = a;
        m.q = q;
        m.f = (nonlinearity == "logpower") ? Nonlinearity::logpower()
                                           : Nonlinearity::power(p);
        m.V = Potential(v0, omega);
        return m;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

[[noreturn]] inline void config_fail(int line, const std::string& what) {
    throw InvalidParameter("config: line " + std::to_string(line) + ": " + what);
}

inline double to_double(const std::string& v, int line, const std::string& key) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        config_fail(line, key + ": expected a number, got \"" + v + "\"");
    }
    if (pos != v.size()) config_fail(line, key + ": trailing characters in \"" + v + "\"");
    return x;
}

inline long to_int(const std::string& v, int line, const std::string& key) {
    std::size_t pos = 0;
    long x = 0;
    try {
        x = std::stol(v, &pos);
    } catch (const std::exception&) {
        config_fail(line, key + ": expected an integer, got \"" + v + "\"");
    }
    if (pos != v.size()) config_fail(line, key + ": trailing characters in \"" + v + "\"");
    return x;
}

inline bool to_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    config_fail(line, key + ": expected a boolean, got \"" + v + "\"");
}

}  // namespace detail

/// Parses a sectioned key/value document ([grid], [model], [solve], [output]).
/// Unknown sections or keys and malformed values are errors that carry the
/// line number. Validation of cross-field constraints happens afterwards in
/// validate_config so CLI overrides (--allow-local, --grid-n) apply first.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (auto pos = s.find_first_of("#;"); pos != std::string::npos) s.erase(pos);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') detail::config_fail(line, "unterminated section header");
            section = s.substr(1, s.size() - 2);
            if (section != "grid" && section != "model" && section != "solve" &&
                section != "output")
                detail::config_fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) detail::config_fail(line, "expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string value = detail::unquote(detail::trim(s.substr(eq + 1)));
        if (key.empty()) detail::config_fail(line, "empty key");
        if (section.empty()) detail::config_fail(line, "key \"" + key + "\" outside any section");

        if (section == "grid") {
            if (key == "L") cfg.L = detail::to_double(value, line, key);
            else if (key == "N") cfg.N = static_cast<int>(detail::to_int(value, line, key));
            else detail::config_fail(line, "unknown key \"" + key + "\" in [grid]");
        } else if (section == "model") {
            if (key == "a") cfg.a = detail::to_double(value, line, key);
            else if (key == "q") cfg.q = detail::to_double(value, line, key);
            else if (key == "nonlinearity") cfg.nonlinearity = value;
            else if (key == "p") cfg.p = detail::to_double(value, line, key);
            else if (key == "v0" || key == "potential.v0")
                cfg.v0 = detail::to_double(value, line, key);
            else if (key == "omega" || key == "potential.omega")
                cfg.omega = detail::to_double(value, line, key);
            else detail::config_fail(line, "unknown key \"" + key + "\" in [model]");
        } else if (section == "solve") {
            if (key == "max_iters")
                cfg.solve.max_iters = static_cast<int>(detail::to_int(value, line, key));
            else if (key == "grad_tol") cfg.solve.grad_tol = detail::to_double(value, line, key);
            else if (key == "step0") cfg.solve.step0 = detail::to_double(value, line, key);
            else if (key == "projection_tol")
                cfg.solve.projection_tol = detail::to_double(value, line, key);
            else if (key == "precondition")
                cfg.solve.precondition = detail::to_bool(value, line, key);
            else if (key == "seed")
                cfg.solve.seed = static_cast<std::uint64_t>(detail::to_int(value, line, key));
            else if (key == "initializer") {
                if (value == "gaussian") cfg.solve.initializer = Initializer::gaussian;
                else if (value == "dipole") cfg.solve.initializer = Initializer::dipole;
                else detail::config_fail(line, "initializer must be \"gaussian\" or \"dipole\"");
            } else if (key == "trials")
                cfg.trials = static_cast<int>(detail::to_int(value, line, key));
            else detail::config_fail(line, "unknown key \"" + key + "\" in [solve]");
        } else {  // output
            if (key == "dir") cfg.out_dir = value;
            else detail::config_fail(line, "unknown key \"" + key + "\" in [output]");
        }
    }
    return cfg;
}

/// Cross-field validation, applied after any CLI overrides.
inline void validate_config(const RunConfig& cfg) {
    if (!(cfg.L > 0.0)) throw InvalidParameter("config: L must be positive");
    if (cfg.N < 8 || cfg.N > 256 || cfg.N % 2 != 0)
        throw InvalidParameter("config: N must be even and within [8, 256]");
    if (!(cfg.a > 0.0)) throw InvalidParameter("config: a must be positive");
    if (cfg.q == 0.0 && !cfg.allow_local)
        throw InvalidParameter(
            "config: the model requires q \xE2\x89\xA0 0; pass --allow-local to run the "
            "degenerate local equation");
    if (cfg.nonlinearity != "power" && cfg.nonlinearity != "logpower")
        throw InvalidParameter("config: nonlinearity must be \"power\" or \"logpower\"");
    if (cfg.nonlinearity == "power" && !(cfg.p > 4.0 && cfg.p < 6.0))
        throw InvalidParameter("config: p must lie in (4,6)");
    if (cfg.solve.max_iters < 1) throw InvalidParameter("config: max_iters must be >= 1");
    if (!(cfg.solve.grad_tol > 0.0)) throw InvalidParameter("config: grad_tol must be positive");
    if (cfg.trials < 1) throw InvalidParameter("config: trials must be >= 1");
}

}  // namespace sbp
