#pragma once

// End-to-end pipeline: scenario -> characteristic data -> rectangle solve ->
// hodograph/physical view -> verification reports -> files on disk.

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "charflow/constraints.hpp"
#include "charflow/eos.hpp"
#include "charflow/goursat.hpp"
#include "charflow/hodograph.hpp"
#include "charflow/io.hpp"
#include "charflow/scenario.hpp"
#include "charflow/verify.hpp"

namespace charflow {

struct ConstraintsOutcome {
    CharacteristicData cp, cm;
    CornerReport corner{};
    bool truncated = false;
};

// Solve both data characteristics and transport the first-order data along
// them. The C- free datum is sampled on n_minus nodes over [0, extent_minus]
// (the solve may truncate at the radius guard); C+ on n_plus over
// [0, extent_plus]. Spec evaluation always uses the scenario's full extents,
// so refining the grid never changes the underlying data functions.
inline ConstraintsOutcome make_characteristics(const Scenario& sc, const EosModel& eos,
                                               int n_minus, double extent_minus, int n_plus,
                                               double extent_plus) {
    const double alpha0 = sc.data.alpha_minus.eval(0.0, sc.data.u_star);
    const double beta0 = sc.data.beta_plus.eval(0.0, sc.data.v_star);
    FreeData fm = sample_free_data(
        Side::cminus, extent_minus, n_minus,
        [&](double u) { return sc.data.alpha_minus.eval(u, sc.data.u_star); }, beta0, sc.data.r0);
    FreeData fp = sample_free_data(
        Side::cplus, extent_plus, n_plus,
        [&](double v) { return sc.data.beta_plus.eval(v, sc.data.v_star); }, alpha0, sc.data.r0);
    CharacteristicData cm0 = solve_cminus(fm, eos, sc.geometry, sc.data.epsilon_guard);
    CharacteristicData cp0 = solve_cplus(fp, eos, sc.geometry);
    if (cm0.n() < 5) throw EmptyDomain("radius guard left fewer than 5 C- nodes");
    const double gamma0 = num::derivative4(cm0.alpha, cm0.dx)[0];  // d alpha-/du at the corner
    const double delta0 = num::derivative4(cp0.beta, cp0.dx)[0];   // d beta+/dv at the corner
    ConstraintsOutcome out{derived_first_order(cp0, gamma0, eos, sc.geometry),
                           derived_first_order(cm0, delta0, eos, sc.geometry),
                           {},
                           cm0.truncated};
    out.corner = corner_compatibility(out.cp, out.cm);
    return out;
}

inline ConstraintsOutcome run_constraints(const Scenario& sc) {
    sc.validate();
    const EosModel eos = sc.make_eos();
    return make_characteristics(sc, eos, sc.data.n_samples, sc.data.u_star, sc.data.n_samples,
                                sc.data.v_star);
}

struct SolveOutcome {
    ConstraintsOutcome chars;
    StripResult strip;
    JacobianField jac;
    PhysicalField phys;
    ResidualReport residuals;
    ChiLineCheck chi{};
    BoundReport bounds;
    ValidityMask mask;
    int segments_used = 1;
    bool truncated = false;
};

inline int auto_segments(const StripWidthEstimate& est, double v_extent, int nv) {
    int segments = 1;
    if (std::isfinite(est.eps_rec) && est.eps_rec > 0.0 && est.eps_rec < v_extent)
        segments = int(std::ceil(v_extent / est.eps_rec));
    return std::clamp(segments, 1, std::max(1, nv / 2));
}

inline SolveOutcome run_solve(const Scenario& sc, int threads = 1) {
    sc.validate();
    const EosModel eos = sc.make_eos();
    const double h_req = sc.grid.h > 0.0 ? sc.grid.h : sc.data.u_star;
    SolveOutcome o;
    o.chars = make_characteristics(sc, eos, sc.grid.nu + 1, h_req, sc.grid.nv + 1,
                                   sc.data.v_star);
    o.truncated = o.chars.truncated;
    const StripWidthEstimate est =
        estimate_strip_width(o.chars.cp, o.chars.cm, eos, sc.geometry, sc.solver.l);
    const int segments = sc.solver.segments > 0
                             ? sc.solver.segments
                             : auto_segments(est, sc.data.v_star, sc.grid.nv);
    PicardOptions opt;
    opt.tol = sc.solver.tol;
    opt.max_iter = sc.solver.max_iter;
    opt.threads = threads;
    o.strip = extend_strip(o.chars.cp, o.chars.cm, eos, sc.geometry, segments, opt, &est);
    o.segments_used = int(o.strip.breakpoints.size()) - 1;
    o.jac = jacobian_field(o.strip.grid, eos);
    o.mask = validity_mask(o.strip.grid);
    o.phys = to_physical(o.strip.grid, eos);
    o.residuals = residual_suite(o.strip.grid, eos, sc.geometry, &o.chars.cp, &o.chars.cm);
    o.chi = chi_line_checks(o.chars.cp, eos);
    o.bounds = bound_checks(o.strip.grid, o.strip.estimate);
    return o;
}

// ---------------------------------------------------------------------------
// Manifest / output writing
// ---------------------------------------------------------------------------

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson scenario_json(const Scenario& sc) {
    ojson j;
    j["eos"] = {{"kind", sc.eos.kind},       {"gamma", sc.eos.gamma},
                {"kappa", sc.eos.kappa},     {"rho_ref", sc.eos.rho_ref},
                {"rho_lo", sc.eos.rho_lo},   {"rho_hi", sc.eos.rho_hi},
                {"table_path", sc.eos.table_path}};
    j["geometry"] = sc.geometry == Geometry::spherical ? "spherical" : "plane";
    j["data"] = {{"v_star", sc.data.v_star},
                 {"u_star", sc.data.u_star},
                 {"n_samples", sc.data.n_samples},
                 {"beta_plus", sc.data.beta_plus.repr},
                 {"alpha_minus", sc.data.alpha_minus.repr},
                 {"r0", sc.data.r0},
                 {"epsilon_guard", sc.data.epsilon_guard}};
    j["grid"] = {{"nu", sc.grid.nu}, {"nv", sc.grid.nv}, {"h", sc.grid.h}};
    j["solver"] = {{"tol", sc.solver.tol},
                   {"max_iter", sc.solver.max_iter},
                   {"segments", sc.solver.segments},
                   {"l", sc.solver.l}};
    j["output"] = {{"dir", sc.output.dir},
                   {"raster_nt", sc.output.raster_nt},
                   {"raster_nr", sc.output.raster_nr}};
    return j;
}

inline ojson corner_json(const CornerReport& c) {
    return ojson{{"d_alpha", c.d_alpha}, {"d_beta", c.d_beta},   {"d_t", c.d_t},
                 {"d_r", c.d_r},         {"d_gamma", c.d_gamma}, {"d_delta", c.d_delta},
                 {"max_abs", c.max_abs()}};
}

inline ojson estimate_json(const StripWidthEstimate& e) {
    ojson j;
    j["l"] = e.l;
    j["u_star"] = e.u_star;
    j["v_star"] = e.v_star;
    j["data_constants"] = {{"a0", e.a0}, {"b0", e.b0}, {"d0", e.d0},
                           {"r_m", e.r_m}, {"r_M", e.r_M}, {"m0", e.m0}, {"g0", e.g0}};
    j["box_constants"] = {{"A", e.A},       {"B", e.B},       {"D", e.D},
                          {"Fbar", e.Fbar}, {"F_alpha", e.F_alpha}, {"F_beta", e.F_beta},
                          {"F_r", e.F_r},   {"cp_dag", e.cp_dag},   {"cm_dag", e.cm_dag},
                          {"cp_var", e.cp_var}, {"cm_var", e.cm_var}};
    j["transport_constants"] = {{"Q1", e.Q1}, {"S1", e.S1}, {"Q2", e.Q2}, {"S2", e.S2},
                                {"G", e.G},   {"M", e.M},   {"Kbar", e.Kbar},
                                {"Lbar", e.Lbar}, {"H1", e.H1}, {"H2", e.H2}};
    ojson hb = ojson::object(), eb = ojson::object();
    for (const auto& [name, val] : e.h_bounds) hb[name] = val;
    for (const auto& [name, val] : e.eps_bounds) eb[name] = val;
    j["h_bounds"] = hb;
    j["eps_bounds"] = eb;
    j["h_box"] = e.h_box;
    j["h_rec"] = e.h_rec;
    j["eps_rec"] = e.eps_rec;
    j["floored"] = e.floored;
    return j;
}

inline ojson residuals_json(const ResidualReport& r) {
    ojson j = ojson::object();
    for (const auto& e : r.entries)
        j[e.name] = {{"sup", e.sup}, {"rms", e.rms}, {"at_u", e.at_u}, {"at_v", e.at_v}};
    return j;
}

inline ojson bounds_json(const BoundReport& b) {
    ojson j = ojson::array();
    for (const auto& e : b.entries)
        j.push_back({{"name", e.name},
                     {"bound", e.bound},
                     {"attained", e.attained},
                     {"margin", e.margin}});
    return j;
}

}  // namespace detail

inline std::string write_constraints_outputs(const ConstraintsOutcome& o, const Scenario& sc,
                                             const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    io::write_characteristic_csv(dir + "/cplus.csv", o.cp);
    io::write_characteristic_csv(dir + "/cminus.csv", o.cm);
    detail::ojson j;
    j["artifact"] = "charflow constraints";
    j["scenario"] = detail::scenario_json(sc);
    j["cplus"] = {{"nodes", o.cp.n()}, {"extent", o.cp.param.back()}};
    j["cminus"] = {{"nodes", o.cm.n()},
                   {"extent", o.cm.param.back()},
                   {"truncated", o.cm.truncated},
                   {"u_bar", o.cm.u_bar}};
    j["corner"] = detail::corner_json(o.corner);
    j["files"] = {"cplus.csv", "cminus.csv"};
    const std::string path = dir + "/manifest.json";
    io::write_text_file(path, j.dump(2) + "\n");
    return path;
}

inline std::string write_solve_outputs(const SolveOutcome& o, const Scenario& sc,
                                       const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> files;
    auto put = [&](const std::string& name) { files.push_back(name); return dir + "/" + name; };

    io::write_characteristic_csv(put("cplus.csv"), o.chars.cp);
    io::write_characteristic_csv(put("cminus.csv"), o.chars.cm);
    const GoursatGrid& g = o.strip.grid;
    io::write_field_csv(put("alpha.csv"), g.u, g.v, g.alpha, "alpha");
    io::write_field_csv(put("beta.csv"), g.u, g.v, g.beta, "beta");
    io::write_field_csv(put("t.csv"), g.u, g.v, g.t, "t");
    io::write_field_csv(put("r.csv"), g.u, g.v, g.r, "r");
    io::write_field_csv(put("mu.csv"), g.u, g.v, g.mu, "mu");
    io::write_field_csv(put("nu.csv"), g.u, g.v, g.nu, "nu");
    io::write_field_csv(put("jacobian_analytic.csv"), g.u, g.v, o.jac.analytic, "jacobian");
    io::write_field_csv(put("jacobian_discrete.csv"), g.u, g.v, o.jac.discrete, "jacobian");
    io::write_physical_csv(put("physical.csv"), o.phys);
    if (sc.output.raster_nt > 0)
        io::write_raster_csv(put("raster.csv"),
                             raster_physical(o.phys, sc.output.raster_nt, sc.output.raster_nr));

    // Companion gnuplot script: one block per artifact.
    {
        std::string gp;
        gp += "# gnuplot script for the solve outputs in this directory\n";
        gp += "set datafile separator ','\n";
        gp += "set term pngcairo size 1000,760\n\n";
        gp += "set output 'characteristics_tr.png'\n";
        gp += "set xlabel 'r'\nset ylabel 't'\n";
        gp += "plot 'cplus.csv' using 6:5 with lines title 'C+', \\\n";
        gp += "     'cminus.csv' using 6:5 with lines title 'C-'\n\n";
        gp += "set output 'grid_tr.png'\n";
        gp += "plot '< paste -d, t.csv r.csv' using 10:5 every ::1 with dots title 'grid image'\n\n";
        gp += "set output 'rho_physical.png'\n";
        gp += "set xlabel 'r'\nset ylabel 't'\nset cblabel 'rho'\n";
        gp += "plot 'physical.csv' using ($6==1?$2:NaN):1:3 every ::1 with points pt 5 ps 0.4 "
              "palette title 'rho'\n";
        if (sc.output.raster_nt > 0) {
            gp += "\nset output 'rho_raster.png'\n";
            gp += "plot 'raster.csv' using ($8==1?$4:NaN):3:5 every ::1 with points pt 5 ps 0.6 "
                  "palette title 'rho (raster)'\n";
        }
        io::write_text_file(dir + "/" + "plots.gp", gp);
        files.push_back("plots.gp");
    }

    detail::ojson j;
    j["artifact"] = "charflow solve";
    j["scenario"] = detail::scenario_json(sc);
    j["characteristics"] = {{"n_plus", o.chars.cp.n()},
                            {"n_minus", o.chars.cm.n()},
                            {"truncated", o.truncated},
                            {"u_bar", o.chars.cm.u_bar},
                            {"corner", detail::corner_json(o.chars.corner)}};
    j["estimate"] = detail::estimate_json(o.strip.estimate);
    {
        detail::ojson seg = detail::ojson::array();
        for (std::size_t s = 0; s < o.strip.traces.size(); ++s) {
            const auto& tr = o.strip.traces[s];
            const auto& bc = o.strip.bootstrap[s];
            seg.push_back({{"j_lo", o.strip.breakpoints[s]},
                           {"j_hi", o.strip.breakpoints[s + 1]},
                           {"iterations", tr.iterations()},
                           {"converged", tr.converged},
                           {"last_norm", tr.records.empty() ? 0.0 : tr.records.back().scaled},
                           {"bootstrap_ok", bc.ok()},
                           {"bootstrap_margins",
                            {{"nu", bc.margin_nu},
                             {"alpha", bc.margin_alpha},
                             {"beta", bc.margin_beta},
                             {"delta", bc.margin_delta},
                             {"r_lo", bc.margin_r_lo},
                             {"r_hi", bc.margin_r_hi}}}});
        }
        j["solve"] = {{"segments", o.segments_used},
                      {"grid_nu", g.n_u},
                      {"grid_nv", g.n_v},
                      {"segments_detail", seg}};
    }
    j["residuals"] = detail::residuals_json(o.residuals);
    j["chi_line"] = {{"growth_margin_min", o.chi.growth_margin_min},
                     {"representation_sup", o.chi.representation_sup}};
    j["bounds"] = detail::bounds_json(o.bounds);
    j["jacobian"] = {{"sup_gap", o.jac.sup_gap}};
    j["mask"] = {{"n_raw_invalid", o.mask.n_raw_invalid}, {"n_masked", o.mask.n_masked}};
    j["files"] = files;
    const std::string path = dir + "/manifest.json";
    io::write_text_file(path, j.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// Resolution study
// ---------------------------------------------------------------------------

struct ConvergenceStudy {
    std::vector<int> cells;  // nv per level (nu scales with it)
    std::vector<OrderEstimate> estimates;
    bool all_ok() const {
        for (const auto& e : estimates)
            if (!e.ok()) return false;
        return true;
    }
};

// Runs the pipeline at `levels` doubling resolutions and estimates observed
// orders: constraint ODE solves by nested-node self-comparison (target 4),
// rectangle residuals (target 2), gap to the independent marching solver
// (>= 1.7), analytic-vs-discrete Jacobian gap (ratio 4 per refinement, i.e.
// order log2(3)..log2(5)), and physical-equation residuals (>= 1).
inline ConvergenceStudy run_convergence(const Scenario& sc, int levels, int threads = 1) {
    if (levels < 2) throw ConfigError("convergence study needs >= 2 levels");
    sc.validate();
    const EosModel eos = sc.make_eos();

    ConvergenceStudy st;
    std::vector<SolveOutcome> runs;
    std::vector<Scenario> scens;
    for (int k = 0; k < levels; ++k) {
        Scenario s = sc;
        s.grid.nu = sc.grid.nu << k;
        s.grid.nv = sc.grid.nv << k;
        st.cells.push_back(s.grid.nv);
        runs.push_back(run_solve(s, threads));
        scens.push_back(s);
    }

    // Nested-node self-differences of the constraint solves (coarse level k
    // vs k+1; fine node 2m matches coarse node m).
    auto self_diff = [](const std::vector<double>& coarse, const std::vector<double>& fine) {
        double sup = 0.0;
        for (std::size_t m = 0; m < coarse.size(); ++m) {
            if (2 * m >= fine.size()) break;
            sup = std::max(sup, std::abs(coarse[m] - fine[2 * m]));
        }
        return sup;
    };
    std::vector<OrderSample> alpha_plus, mu_plus, beta_minus;
    for (int k = 0; k + 1 < levels; ++k) {
        alpha_plus.push_back(
            {st.cells[std::size_t(k)],
             self_diff(runs[std::size_t(k)].chars.cp.alpha, runs[std::size_t(k) + 1].chars.cp.alpha)});
        mu_plus.push_back(
            {st.cells[std::size_t(k)],
             self_diff(runs[std::size_t(k)].chars.cp.mu, runs[std::size_t(k) + 1].chars.cp.mu)});
        beta_minus.push_back(
            {st.cells[std::size_t(k)],
             self_diff(runs[std::size_t(k)].chars.cm.beta, runs[std::size_t(k) + 1].chars.cm.beta)});
    }
    st.estimates.push_back(make_order_estimate("cplus_alpha_self", alpha_plus, 1.0, 3.7, 4.3));
    st.estimates.push_back(make_order_estimate("cminus_beta_self", beta_minus, 1.0, 3.7, 4.3));
    st.estimates.push_back(make_order_estimate("cplus_mu_self", mu_plus, 1.0, 3.0, 4.5));

    std::vector<OrderSample> resid, dual, jacg, euler;
    for (int k = 0; k < levels; ++k) {
        const auto& run = runs[std::size_t(k)];
        const double res = std::max(run.residuals["char_alpha"].sup, run.residuals["char_beta"].sup);
        resid.push_back({st.cells[std::size_t(k)], res});
        jacg.push_back({st.cells[std::size_t(k)], run.jac.sup_gap});
        const GoursatGrid oracle =
            marching_oracle(run.chars.cp, run.chars.cm, eos, scens[std::size_t(k)].geometry);
        const GoursatGrid& g = run.strip.grid;
        double gap = 0.0;
        for (int i = 0; i <= g.n_u; ++i)
            for (int jj = 0; jj <= g.n_v; ++jj) {
                gap = std::max(gap, std::abs(g.alpha(i, jj) - oracle.alpha(i, jj)));
                gap = std::max(gap, std::abs(g.beta(i, jj) - oracle.beta(i, jj)));
                gap = std::max(gap, std::abs(g.t(i, jj) - oracle.t(i, jj)));
                gap = std::max(gap, std::abs(g.r(i, jj) - oracle.r(i, jj)));
                gap = std::max(gap, std::abs(g.mu(i, jj) - oracle.mu(i, jj)));
                gap = std::max(gap, std::abs(g.nu(i, jj) - oracle.nu(i, jj)));
            }
        dual.push_back({st.cells[std::size_t(k)], gap});
        const EulerResiduals er = euler_residuals(g, eos, scens[std::size_t(k)].geometry);
        euler.push_back({st.cells[std::size_t(k)], std::max(er.sup_continuity, er.sup_momentum)});
    }
    st.estimates.push_back(make_order_estimate("rectangle_residual", resid, 1.0, 1.7, 2.5));
    st.estimates.push_back(
        make_order_estimate("dual_solver_gap", dual, 1.0, 1.7,
                            std::numeric_limits<double>::infinity()));
    st.estimates.push_back(make_order_estimate("jacobian_gap", jacg, 1.0, std::log2(3.0),
                                               std::log2(5.0)));
    st.estimates.push_back(make_order_estimate("euler_residual", euler, 1.0, 1.0,
                                               std::numeric_limits<double>::infinity()));
    return st;
}

inline std::string write_convergence_outputs(const ConvergenceStudy& st, const Scenario& sc,
                                             const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::string csv = "name,cells,norm\n";
    for (const auto& e : st.estimates)
        for (const auto& s : e.samples)
            csv += e.name + ',' + std::to_string(s.cells) + ',' + io::g17(s.norm) + '\n';
    io::write_text_file(dir + "/convergence.csv", csv);
    detail::ojson j;
    j["artifact"] = "charflow convergence";
    j["scenario"] = detail::scenario_json(sc);
    j["levels"] = st.cells;
    detail::ojson est = detail::ojson::array();
    for (const auto& e : st.estimates) {
        detail::ojson samples = detail::ojson::array();
        for (const auto& s : e.samples) samples.push_back({{"cells", s.cells}, {"norm", s.norm}});
        est.push_back({{"name", e.name},
                       {"order", e.exact ? detail::ojson() : detail::ojson(e.order)},
                       {"exact", e.exact},
                       {"target_lo", e.target_lo},
                       {"target_hi", std::isfinite(e.target_hi) ? detail::ojson(e.target_hi)
                                                                : detail::ojson()},
                       {"ok", e.ok()},
                       {"samples", samples}});
    }
    j["estimates"] = est;
    const std::string path = dir + "/manifest.json";
    io::write_text_file(path, j.dump(2) + "\n");
    return path;
}

}  // namespace charflow
