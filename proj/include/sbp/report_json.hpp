#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "sbp/config.hpp"
#include "sbp/minimize.hpp"
#include "sbp/verify.hpp"

namespace sbp {

using json = nlohmann::json;

inline json to_json(const EnergyBreakdown& e) {
    return json{{"kinetic_potential", e.kinetic_potential},
                {"nonlocal", e.nonlocal},
                {"nonlinear", e.nonlinear},
                {"total", e.total}};
}

inline json to_json(const NodalCoefficients& c) {
    return json{{"A_plus", c.Aplus}, {"A_minus", c.Aminus}, {"cross_grad", c.cross_grad},
                {"B_pp", c.Bpp},     {"B_mm", c.Bmm},       {"B_pm", c.Bpm}};
}

inline json to_json(const RunConfig& cfg) {
    return json{{"grid", {{"L", cfg.L}, {"N", cfg.N}}},
                {"model",
                 {{"a", cfg.a},
                  {"q", cfg.q},
                  {"nonlinearity", cfg.nonlinearity},
                  {"p", cfg.p},
                  {"v0", cfg.v0},
                  {"omega", cfg.omega}}},
                {"solve",
                 {{"max_iters", cfg.solve.max_iters},
                  {"grad_tol", cfg.solve.grad_tol},
                  {"seed", cfg.solve.seed},
                  {"precondition", cfg.solve.precondition},
                  {"initializer",
                   cfg.solve.initializer == Initializer::dipole ? "dipole" : "gaussian"}}}};
}

inline json to_json(const SolveReport& r, bool nodal) {
    json j{{"converged", r.converged},
           {"status", r.status},
           {"iterations", r.iterations},
           {"level", r.level},
           {"residual", r.residual},
           {"energy", to_json(r.energy)},
           {"min_u", r.min_u},
           {"max_u", r.max_u},
           {"boundary_max", r.boundary_max},
           {"projection",
            {{"t", r.t},
             {"bracket_lo", r.fiber_diag.bracket_lo},
             {"bracket_hi", r.fiber_diag.bracket_hi},
             {"iterations", r.fiber_diag.iterations}}}};
    if (nodal) {
        j["projection"]["s"] = r.s;
        j["norm_plus"] = r.norm_plus;
        j["norm_minus"] = r.norm_minus;
        j["comp_residual_plus"] = r.comp_residual_plus;
        j["comp_residual_minus"] = r.comp_residual_minus;
        if (r.coeffs) j["coefficients"] = to_json(*r.coeffs);
    }
    return j;
}

inline json to_json(const InvariantResult& r) {
    return json{{"invariant_id", r.id},       {"description", r.description},
                {"trials", r.trials},         {"max_violation", r.max_violation},
                {"tolerance", r.tolerance},   {"pass", r.pass}};
}

inline json to_json(const VerifyReport& r) {
    json inv = json::array();
    for (const auto& e : r.invariants) inv.push_back(to_json(e));
    return json{{"invariants", inv},
                {"coverage", r.coverage},
                {"rejections", r.rejections},
                {"nodal_skips", r.nodal_skips},
                {"monitored_phi6_ratio", r.monitored_phi6_ratio},
                {"all_pass", r.all_pass()}};
}

inline json to_json(const LevelComparison& c) {
    return json{{"c0", c.c0}, {"c1", c.c1}, {"margin", c.margin}, {"pass", c.pass}};
}

}  // namespace sbp
