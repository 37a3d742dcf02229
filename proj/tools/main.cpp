// charflow command-line tool: solve the characteristic initial value problem
// of spherically symmetric barotropic flow and inspect the solution.
//
// Subcommands:
//   constraints  solve the two data characteristics only
//   solve        full rectangle solve + hodograph outputs
//   verify       solve, then print residual / bound / contraction reports
//   convergence  resolution study with observed-order checks
//   bench        wall-clock timing of the pipeline stages
//
// Exit codes: 0 success, 1 error, 2 success with radius-guard truncation,
// 3 fixed-point iteration did not converge.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "charflow/runner.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    int threads = 1;
    double tol = 0.0;       // 0: keep the scenario's tolerance
    std::string grid;       // "NUxNV" override
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_solver_opts = true) {
    cmd->add_option("--config", o.config, "scenario config file (INI)")->required();
    cmd->add_option("--out", o.out, "output directory (default: [output] dir from the config)");
    if (with_solver_opts) {
        cmd->add_option("--threads", o.threads, "worker threads for the rectangle solve")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--tol", o.tol, "override [solver] tol");
        cmd->add_option("--grid", o.grid, "override [grid] as NUxNV, e.g. 64x128");
    }
}

charflow::Scenario load_scenario(const CommonOpts& o) {
    charflow::Scenario sc = charflow::Scenario::from_file(o.config);
    if (o.tol > 0.0) sc.solver.tol = o.tol;
    if (!o.grid.empty()) {
        const std::size_t x = o.grid.find('x');
        if (x == std::string::npos)
            throw charflow::ConfigError("--grid expects NUxNV, got '" + o.grid + "'");
        sc.grid.nu = charflow::detail::parse_int(o.grid.substr(0, x), "--grid nu");
        sc.grid.nv = charflow::detail::parse_int(o.grid.substr(x + 1), "--grid nv");
    }
    sc.validate();
    return sc;
}

std::string out_dir(const CommonOpts& o, const charflow::Scenario& sc) {
    return o.out.empty() ? sc.output.dir : o.out;
}

int cmd_constraints(const CommonOpts& o) {
    const charflow::Scenario sc = load_scenario(o);
    const charflow::ConstraintsOutcome res = charflow::run_constraints(sc);
    const std::string manifest = charflow::write_constraints_outputs(res, sc, out_dir(o, sc));
    std::printf("C+ nodes: %d (extent %.6g)\n", res.cp.n(), res.cp.param.back());
    std::printf("C- nodes: %d (extent %.6g)%s\n", res.cm.n(), res.cm.u_bar,
                res.truncated ? "  [truncated at radius guard]" : "");
    std::printf("corner mismatch (max abs): %.3e\n", res.corner.max_abs());
    std::printf("wrote %s\n", manifest.c_str());
    return res.truncated ? 2 : 0;
}

int cmd_solve(const CommonOpts& o) {
    const charflow::Scenario sc = load_scenario(o);
    const charflow::SolveOutcome res = charflow::run_solve(sc, o.threads);
    const std::string manifest = charflow::write_solve_outputs(res, sc, out_dir(o, sc));
    const auto& g = res.strip.grid;
    std::printf("grid: %d x %d cells, %d segment(s)\n", g.n_u, g.n_v, res.segments_used);
    for (std::size_t s = 0; s < res.strip.traces.size(); ++s)
        std::printf("  segment %zu: %d iterations, last update %.3e, bootstrap %s\n", s + 1,
                    res.strip.traces[s].iterations(), res.strip.traces[s].records.back().scaled,
                    res.strip.bootstrap[s].ok() ? "ok" : "violated");
    std::printf("recommended widths: h_rec %.6g, eps_rec %.6g\n", res.strip.estimate.h_rec,
                res.strip.estimate.eps_rec);
    std::printf("residual sup (all equations): %.3e\n", res.residuals.max_sup());
    std::printf("jacobian gap (analytic vs discrete): %.3e\n", res.jac.sup_gap);
    std::printf("degenerate nodes: %d raw, %d after future-cone masking\n",
                res.mask.n_raw_invalid, res.mask.n_masked);
    if (res.truncated)
        std::printf("C- truncated at u_bar = %.6g (radius guard)\n", res.chars.cm.u_bar);
    std::printf("wrote %s\n", manifest.c_str());
    return res.truncated ? 2 : 0;
}

int cmd_verify(const CommonOpts& o) {
    const charflow::Scenario sc = load_scenario(o);
    const charflow::SolveOutcome res = charflow::run_solve(sc, o.threads);
    charflow::write_solve_outputs(res, sc, out_dir(o, sc));

    std::printf("%-18s %12s %12s %18s\n", "residual", "sup", "rms", "argmax (u,v)");
    for (const auto& e : res.residuals.entries)
        std::printf("%-18s %12.4e %12.4e   (%.4g, %.4g)\n", e.name.c_str(), e.sup, e.rms, e.at_u,
                    e.at_v);
    std::printf("\nchi line checks:   growth margin min %.4e, representation sup %.4e\n",
                res.chi.growth_margin_min, res.chi.representation_sup);
    std::printf("\n%-14s %12s %12s %12s  %s\n", "bound", "limit", "attained", "margin", "status");
    for (const auto& b : res.bounds.entries)
        std::printf("%-14s %12.5g %12.5g %12.4e  %s\n", b.name.c_str(), b.bound, b.attained,
                    b.margin, b.margin >= 0.0 ? "inside" : "VIOLATED");
    std::printf("\ncontraction per segment:\n");
    for (std::size_t s = 0; s < res.strip.traces.size(); ++s) {
        const auto rep = charflow::contraction_report(res.strip.traces[s]);
        if (rep.immediate)
            std::printf("  segment %zu: converged immediately (%zu iteration(s))\n", s + 1,
                        rep.norms.size());
        else
            std::printf("  segment %zu: %zu iterations, geometric rate %.3f, max ratio %.3f\n",
                        s + 1, rep.norms.size(), rep.geometric_rate, rep.max_ratio);
    }
    return res.truncated ? 2 : 0;
}

int cmd_convergence(const CommonOpts& o, int levels) {
    const charflow::Scenario sc = load_scenario(o);
    const charflow::ConvergenceStudy st = charflow::run_convergence(sc, levels, o.threads);
    charflow::write_convergence_outputs(st, sc, out_dir(o, sc));
    std::printf("%-20s", "cells");
    for (int c : st.cells) std::printf(" %11d", c);
    std::printf("  %8s %-12s %s\n", "order", "target", "status");
    for (const auto& e : st.estimates) {
        std::printf("%-20s", e.name.c_str());
        std::size_t printed = 0;
        for (const auto& s : e.samples) {
            std::printf(" %11.3e", s.norm);
            ++printed;
        }
        for (std::size_t k = printed; k < st.cells.size(); ++k) std::printf(" %11s", "-");
        char target[32];
        if (std::isfinite(e.target_hi))
            std::snprintf(target, sizeof target, "%.2f..%.2f", e.target_lo, e.target_hi);
        else
            std::snprintf(target, sizeof target, ">=%.2f", e.target_lo);
        if (e.exact)
            std::printf("  %8s %-12s %s\n", "exact", target, "ok");
        else
            std::printf("  %8.2f %-12s %s\n", e.order, target, e.ok() ? "ok" : "MISSED");
    }
    if (!st.all_ok()) {
        std::fprintf(stderr, "error: some observed orders missed their targets\n");
        return 1;
    }
    return 0;
}

int cmd_bench(const CommonOpts& o, int reps) {
    const charflow::Scenario sc = load_scenario(o);
    using clock = std::chrono::steady_clock;
    auto time_ms = [&](auto&& fn) {
        std::vector<double> ms;
        for (int k = 0; k < reps; ++k) {
            const auto t0 = clock::now();
            fn();
            const auto t1 = clock::now();
            ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        double mn = ms[0], mean = 0.0;
        for (double x : ms) {
            mn = std::min(mn, x);
            mean += x / double(ms.size());
        }
        return std::pair<double, double>{mn, mean};
    };
    const auto [c_min, c_mean] = time_ms([&] { (void)charflow::run_constraints(sc); });
    const auto [s_min, s_mean] = time_ms([&] { (void)charflow::run_solve(sc, o.threads); });
    std::printf("constraints: min %.2f ms, mean %.2f ms (%d reps)\n", c_min, c_mean, reps);
    std::printf("solve:       min %.2f ms, mean %.2f ms (%d reps, %d thread(s))\n", s_min, s_mean,
                reps, o.threads);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"characteristic solver for spherically symmetric barotropic flow"};
    app.require_subcommand(1);

    CommonOpts oc, os, ov, og, ob;
    int levels = 4, reps = 5;

    CLI::App* constraints = app.add_subcommand("constraints", "solve the data characteristics");
    add_common(constraints, oc, false);
    CLI::App* solve = app.add_subcommand("solve", "full rectangle solve");
    add_common(solve, os);
    CLI::App* verify = app.add_subcommand("verify", "solve and print verification reports");
    add_common(verify, ov);
    CLI::App* conv = app.add_subcommand("convergence", "resolution study");
    add_common(conv, og);
    conv->add_option("--levels", levels, "number of doubling resolution levels")
        ->check(CLI::Range(2, 8));
    CLI::App* bench = app.add_subcommand("bench", "pipeline timings");
    add_common(bench, ob);
    bench->add_option("--reps", reps, "repetitions per timing")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (constraints->parsed()) return cmd_constraints(oc);
        if (solve->parsed()) return cmd_solve(os);
        if (verify->parsed()) return cmd_verify(ov);
        if (conv->parsed()) return cmd_convergence(og, levels);
        if (bench->parsed()) return cmd_bench(ob, reps);
    } catch (const charflow::NoConvergence& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const charflow::SolverError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
