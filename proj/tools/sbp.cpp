#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sbp/config.hpp"
#include "sbp/field_io.hpp"
#include "sbp/report_json.hpp"
#include "sbp/verify.hpp"

namespace fs = std::filesystem;
using sbp::json;

namespace {

void print_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

int read_thread_cap() {
    // worker-parallelism cap; the current implementation runs single-threaded,
    // so any positive value is honored trivially
    const char* env = std::getenv("SBP_THREADS");
    if (!env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
        throw sbp::InvalidParameter("SBP_THREADS must be a positive integer");
    return static_cast<int>(v);
}

fs::path make_run_dir(const std::string& out_root, std::uint64_t seed) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::localtime(&t));
    fs::path dir = fs::path(out_root) / (std::string(stamp) + "-seed" + std::to_string(seed));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw sbp::InvalidParameter("cannot open " + path.string() + " for writing");
    out << text;
}

void write_trace_csv(const fs::path& path, const sbp::SolveReport& rep, bool nodal) {
    std::ofstream out(path);
    out << "iter,total,kinetic_potential,nonlocal,nonlinear,residual,t";
    if (nodal) out << ",s";
    out << "\n";
    out.precision(17);
    for (const auto& row : rep.trace) {
        out << row.iter << ',' << row.total << ',' << row.kinetic_potential << ','
            << row.nonlocal << ',' << row.nonlinear << ',' << row.residual << ',' << row.t;
        if (nodal) out << ',' << row.s;
        out << "\n";
    }
}

int run_solve(const sbp::RunConfig& cfg, bool nodal) {
    const sbp::GridPtr grid = sbp::Grid::make(cfg.L, cfg.N);
    const sbp::Problem problem(grid, cfg.model_params());
    const fs::path dir = make_run_dir(cfg.out_dir, cfg.solve.seed);
    const std::string name = nodal ? "solve-nodal" : "solve-ground";

    sbp::SolveReport rep;
    try {
        rep = nodal ? sbp::solve_nodal(problem, cfg.solve)
                    : sbp::solve_ground(problem, cfg.solve);
    } catch (const sbp::SolveError& e) {
        print_error("solve", e.what());
        write_text(dir / "report.json",
                   json{{"subcommand", name}, {"converged", false}, {"error", e.what()},
                        {"config", sbp::to_json(cfg)}}
                       .dump(2) +
                       "\n");
        return 2;
    }

    json j = sbp::to_json(rep, nodal);
    j["subcommand"] = name;
    j["config"] = sbp::to_json(cfg);
    write_text(dir / "report.json", j.dump(2) + "\n");
    write_trace_csv(dir / "energy-trace.csv", rep, nodal);
    sbp::write_field((dir / "field.sbpf").string(), *rep.field);
    std::cout << "wrote " << (dir / "report.json").string() << "\n";
    std::cout << "level = " << rep.level << ", residual = " << rep.residual << ", status = "
              << rep.status << "\n";
    if (!rep.converged) {
        print_error("solve", name + " did not converge (status " + rep.status + ")");
        return 2;
    }
    return 0;
}

int run_verify(const sbp::RunConfig& cfg) {
    const sbp::GridPtr grid = sbp::Grid::make(cfg.L, cfg.N);
    const sbp::VerifyReport rep =
        sbp::run_invariant_suite(cfg.model_params(), grid, cfg.trials, cfg.solve.seed);
    const fs::path dir = make_run_dir(cfg.out_dir, cfg.solve.seed);
    json j = sbp::to_json(rep);
    j["subcommand"] = "verify";
    j["config"] = sbp::to_json(cfg);
    write_text(dir / "verdict.json", j.dump(2) + "\n");
    for (const auto& r : rep.invariants)
        std::cout << (r.pass ? "pass " : "FAIL ") << r.id << "  (max violation "
                  << r.max_violation << ", tol " << r.tolerance << ")\n";
    std::cout << "wrote " << (dir / "verdict.json").string() << "\n";
    if (!rep.all_pass()) {
        print_error("verify", "one or more invariants failed");
        return 4;
    }
    return 0;
}

int run_kernel_info(const sbp::RunConfig& cfg, double eps_top, double eps_bottom, double r_max) {
    const fs::path dir = make_run_dir(cfg.out_dir, cfg.solve.seed);
    std::ofstream out(dir / "kernel-info.csv");
    out << "eps,maxwell_truncated,bp_truncated\n";
    out.precision(17);
    for (double eps = eps_top; eps >= eps_bottom * (1.0 - 1e-12); eps *= 0.5) {
        const sbp::KernelEnergies e = sbp::kernel_energies(cfg.a, eps, r_max);
        out << eps << ',' << e.maxwell_truncated << ',' << e.bp_truncated << "\n";
    }
    std::cout << "wrote " << (dir / "kernel-info.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver for a nonlocal elliptic system: ground and nodal "
                 "energy minimizers on the Nehari manifold"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_n, max_iters;
    bool allow_local = false;
    app.add_option("--config", config_path, "configuration file path");
    app.add_option("--seed", seed, "random seed override");
    app.add_option("--out", out_dir, "output directory override");
    app.add_flag("--allow-local", allow_local, "permit q = 0 (degenerate local model)");
    app.add_option("--grid-n", grid_n, "grid resolution override");
    app.add_option("--max-iters", max_iters, "iteration cap override");

    auto* sg = app.add_subcommand("solve-ground", "minimize J on the Nehari manifold");
    auto* sn = app.add_subcommand("solve-nodal", "minimize J on the nodal set");
    auto* vf = app.add_subcommand("verify", "run the standing invariant suite");
    auto* ki = app.add_subcommand("kernel-info", "truncated kernel self-energies CSV");
    // the shared options above live on the parent; let "sbp solve-ground --config c"
    // route them up instead of rejecting them as unknown
    for (auto* sub : {sg, sn, vf, ki}) sub->fallthrough();
    double eps_top = 1e-1, eps_bottom = 1e-4, r_max = 50.0;
    ki->add_option("--eps-top", eps_top, "largest truncation radius");
    ki->add_option("--eps-bottom", eps_bottom, "smallest truncation radius");
    ki->add_option("--rmax", r_max, "outer integration radius");

    CLI11_PARSE(app, argc, argv);

    try {
        read_thread_cap();

        sbp::RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw sbp::InvalidParameter("config: cannot open " + config_path);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            cfg = sbp::parse_config(text);
        }
        cfg.allow_local = allow_local;
        if (seed) cfg.solve.seed = *seed;
        if (grid_n) cfg.N = *grid_n;
        if (max_iters) cfg.solve.max_iters = *max_iters;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        sbp::validate_config(cfg);

        if (sg->parsed()) return run_solve(cfg, false);
        if (sn->parsed()) {
            if (cfg.solve.initializer == sbp::Initializer::gaussian && config_path.empty())
                cfg.solve.initializer = sbp::Initializer::dipole;
            return run_solve(cfg, true);
        }
        if (vf->parsed()) return run_verify(cfg);
        return run_kernel_info(cfg, eps_top, eps_bottom, r_max);
    } catch (const sbp::SolveError& e) {
        print_error("solve", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("config", e.what());
        return 3;
    }
}
