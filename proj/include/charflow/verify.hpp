#pragma once

// Verification layer: everything here re-derives properties of an already
// computed solution and reports how well they hold.
//
//  * residual_suite    — plugs a solved grid back into the characteristic
//                        system (finite-difference form) and reports sup/RMS
//                        residuals per equation.
//  * chi_line_checks   — along the C+ data line, chi = alpha - beta satisfies
//                        an explicit integrating-factor representation and the
//                        growth bound |chi(v)| <= |chi(0)| + int |beta'|;
//                        both are re-evaluated from the data.
//  * bound_checks      — compares attained field magnitudes on a grid against
//                        the box constants of a StripWidthEstimate.
//  * contraction_report— turns an IterationTrace into per-step contraction
//                        ratios and a fitted geometric rate.
//  * order estimation  — helpers for resolution studies (fitted order = mean
//                        of the last two log2 error ratios; "exact" flags
//                        norms at the round-off floor).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "charflow/constraints.hpp"
#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/goursat.hpp"
#include "charflow/grid.hpp"
#include "charflow/numerics.hpp"
#include "charflow/state.hpp"

namespace charflow {

struct ResidualEntry {
    std::string name;
    double sup = 0.0, rms = 0.0;
    double at_u = 0.0, at_v = 0.0;  // argmax location
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    double max_sup() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.sup);
        return m;
    }
    const ResidualEntry& operator[](const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw ConfigError("no residual entry named '" + name + "'");
    }
};

namespace detail {

template <class F>
ResidualEntry fold_residual(const std::string& name, const GoursatGrid& g, F&& f) {
    ResidualEntry e;
    e.name = name;
    double ss = 0.0;
    long n = 0;
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = 0; j <= g.n_v; ++j) {
            const double r = f(i, j);
            if (!std::isfinite(r)) continue;
            if (std::abs(r) > e.sup) {
                e.sup = std::abs(r);
                e.at_u = g.u[std::size_t(i)];
                e.at_v = g.v[std::size_t(j)];
            }
            ss += r * r;
            ++n;
        }
    e.rms = n > 0 ? std::sqrt(ss / double(n)) : 0.0;
    return e;
}

}  // namespace detail

// Finite-difference residuals of the characteristic system on a solved grid.
// When the boundary data lines are supplied, a boundary_pin entry reports the
// worst deviation of the grid edges from them (identically zero for grids
// produced by the iteration, discretization-level for other solvers).
inline ResidualReport residual_suite(const GoursatGrid& g, const EosModel& eos, Geometry geom,
                                     const CharacteristicData* cp = nullptr,
                                     const CharacteristicData* cm = nullptr) {
    const int nu = g.n_u, nv = g.n_v;
    Grid2D<double> eta(nu + 1, nv + 1), F(nu + 1, nv + 1), cplus(nu + 1, nv + 1),
        cminus(nu + 1, nv + 1);
    for (int i = 0; i <= nu; ++i)
        for (int j = 0; j <= nv; ++j) {
            const CharState c{g.alpha(i, j), g.beta(i, j)};
            const double et = eos.eta_and_slope(c.chi_dagger()).eta;
            eta(i, j) = et;
            cplus(i, j) = 0.5 * c.chi() + et;
            cminus(i, j) = 0.5 * c.chi() - et;
            F(i, j) = geom == Geometry::plane ? 0.0 : -et * c.chi() / g.r(i, j);
        }

    ResidualReport rep;
    rep.entries.push_back(detail::fold_residual("char_alpha", g, [&](int i, int j) {
        return detail::d_dv(g.alpha, i, j, 0, nv, g.dv) - g.nu(i, j) * F(i, j);
    }));
    rep.entries.push_back(detail::fold_residual("char_beta", g, [&](int i, int j) {
        return detail::d_du(g.beta, i, j, nu, g.du) - g.mu(i, j) * F(i, j);
    }));
    rep.entries.push_back(detail::fold_residual("radius_v", g, [&](int i, int j) {
        return detail::d_dv(g.r, i, j, 0, nv, g.dv) - g.nu(i, j) * cplus(i, j);
    }));
    rep.entries.push_back(detail::fold_residual("radius_u", g, [&](int i, int j) {
        return detail::d_du(g.r, i, j, nu, g.du) - g.mu(i, j) * cminus(i, j);
    }));
    // t_u = mu and t_v = nu imply the mixed-derivative identity nu_u = mu_v.
    rep.entries.push_back(detail::fold_residual("time_mixed", g, [&](int i, int j) {
        return detail::d_du(g.nu, i, j, nu, g.du) - detail::d_dv(g.mu, i, j, 0, nv, g.dv);
    }));
    {
        // t(u,v) - t(u,0) - int_0^v nu dv'
        Grid2D<double> resid(nu + 1, nv + 1, 0.0);
        for (int i = 0; i <= nu; ++i) {
            double acc = 0.0;
            for (int j = 1; j <= nv; ++j) {
                acc += 0.5 * g.dv * (g.nu(i, j - 1) + g.nu(i, j));
                resid(i, j) = g.t(i, j) - g.t(i, 0) - acc;
            }
        }
        rep.entries.push_back(detail::fold_residual(
            "time_integral", g, [&](int i, int j) { return resid(i, j); }));
    }
    if (cp && cm) {
        ResidualEntry e;
        e.name = "boundary_pin";
        double ss = 0.0;
        long n = 0;
        auto probe = [&](double diff, double uu, double vv) {
            if (std::abs(diff) > e.sup) {
                e.sup = std::abs(diff);
                e.at_u = uu;
                e.at_v = vv;
            }
            ss += diff * diff;
            ++n;
        };
        for (int i = 0; i <= nu; ++i) {
            const std::size_t k = std::size_t(i);
            const double uu = g.u[k];
            probe(g.alpha(i, 0) - cm->alpha[k], uu, 0.0);
            probe(g.beta(i, 0) - cm->beta[k], uu, 0.0);
            probe(g.t(i, 0) - cm->t[k], uu, 0.0);
            probe(g.r(i, 0) - cm->r[k], uu, 0.0);
            probe(g.mu(i, 0) - cm->mu[k], uu, 0.0);
            probe(g.nu(i, 0) - cm->nu[k], uu, 0.0);
        }
        for (int j = 0; j <= nv; ++j) {
            const std::size_t k = std::size_t(j);
            const double vv = g.v[k];
            probe(g.alpha(0, j) - cp->alpha[k], 0.0, vv);
            probe(g.beta(0, j) - cp->beta[k], 0.0, vv);
            probe(g.t(0, j) - cp->t[k], 0.0, vv);
            probe(g.r(0, j) - cp->r[k], 0.0, vv);
            probe(g.mu(0, j) - cp->mu[k], 0.0, vv);
            probe(g.nu(0, j) - cp->nu[k], 0.0, vv);
        }
        e.rms = n > 0 ? std::sqrt(ss / double(n)) : 0.0;
        rep.entries.push_back(e);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Along-C+ identities for chi = alpha - beta
// ---------------------------------------------------------------------------

struct ChiLineCheck {
    double growth_margin_min;   // min over v of  |chi(0)| + int_0^v |beta'| - |chi(v)|
    double representation_sup;  // sup over v of  |chi(v) - integrating-factor form|
};

inline ChiLineCheck chi_line_checks(const CharacteristicData& cp, const EosModel& eos) {
    if (cp.side != Side::cplus) throw ConfigError("chi_line_checks expects C+ data");
    const std::size_t n = cp.alpha.size();
    std::vector<double> chi(n), eta_over_r(n), I(n), inner(n), Sv(n), absb(n), Bnd(n);
    for (std::size_t k = 0; k < n; ++k) {
        chi[k] = cp.alpha[k] - cp.beta[k];
        eta_over_r[k] = eos.eta_and_slope(cp.alpha[k] + cp.beta[k]).eta / cp.r[k];
    }
    const std::vector<double> dbeta = num::derivative4(cp.beta, cp.dx);
    num::cumtrapz(eta_over_r, cp.dx, I);
    for (std::size_t k = 0; k < n; ++k) {
        inner[k] = std::exp(I[k]) * dbeta[k];
        absb[k] = std::abs(dbeta[k]);
    }
    num::cumtrapz(inner, cp.dx, Sv);
    num::cumtrapz(absb, cp.dx, Bnd);
    ChiLineCheck out{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        const double repr = std::exp(-I[k]) * (chi[0] - Sv[k]);
        out.representation_sup = std::max(out.representation_sup, std::abs(chi[k] - repr));
        out.growth_margin_min =
            std::min(out.growth_margin_min, std::abs(chi[0]) + Bnd[k] - std::abs(chi[k]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Attained magnitudes vs the box constants of a width estimate
// ---------------------------------------------------------------------------

struct BoundEntry {
    std::string name;
    double bound, attained, margin;  // margin = bound - attained (>= 0 means inside)
};

struct BoundReport {
    std::vector<BoundEntry> entries;
    bool all_ok() const {
        for (const auto& e : entries)
            if (!(e.margin >= 0.0)) return false;
        return true;
    }
};

inline BoundReport bound_checks(const GoursatGrid& g, const StripWidthEstimate& est) {
    double sup_nu = 0, sup_mu = 0, sup_a = 0, sup_b = 0, sup_dbv = 0, sup_dau = 0;
    double rmin = g.r(0, 0), rmax = rmin;
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = 0; j <= g.n_v; ++j) {
            sup_nu = std::max(sup_nu, std::abs(g.nu(i, j)));
            sup_mu = std::max(sup_mu, std::abs(g.mu(i, j)));
            sup_a = std::max(sup_a, std::abs(g.alpha(i, j)));
            sup_b = std::max(sup_b, std::abs(g.beta(i, j)));
            sup_dbv = std::max(sup_dbv, std::abs(detail::d_dv(g.beta, i, j, 0, g.n_v, g.dv)));
            sup_dau = std::max(sup_dau, std::abs(detail::d_du(g.alpha, i, j, g.n_u, g.du)));
            rmin = std::min(rmin, g.r(i, j));
            rmax = std::max(rmax, g.r(i, j));
        }
    BoundReport rep;
    rep.entries.push_back({"nu_sup", est.l, sup_nu, est.l - sup_nu});
    rep.entries.push_back({"alpha_sup", est.A, sup_a, est.A - sup_a});
    rep.entries.push_back({"beta_sup", est.B, sup_b, est.B - sup_b});
    rep.entries.push_back({"dbeta_dv_sup", est.D, sup_dbv, est.D - sup_dbv});
    rep.entries.push_back({"radius_lo", 0.5 * est.r_m, rmin, rmin - 0.5 * est.r_m});
    rep.entries.push_back({"radius_hi", 1.5 * est.r_M, rmax, 1.5 * est.r_M - rmax});
    rep.entries.push_back({"dalpha_du_sup", est.G, sup_dau, est.G - sup_dau});
    rep.entries.push_back({"mu_sup", est.M, sup_mu, est.M - sup_mu});
    return rep;
}

// ---------------------------------------------------------------------------
// Contraction diagnostics of a Picard trace
// ---------------------------------------------------------------------------

struct ContractionReport {
    std::vector<double> norms;   // scaled update norm per iteration
    std::vector<double> ratios;  // norms[k] / norms[k-1], k >= 1
    double geometric_rate = 0.0; // exp(mean log ratio) over ratios with norms above floor
    double max_ratio = 0.0;      // worst ratio with both norms above floor
    bool immediate = false;      // converged within two iterations
    // Norms at or below this are treated as round-off floor and excluded from
    // the rate fit.
    static constexpr double noise_floor = 1e-13;
};

inline ContractionReport contraction_report(const IterationTrace& trace) {
    ContractionReport rep;
    for (const auto& r : trace.records) rep.norms.push_back(r.scaled);
    const int n = int(rep.norms.size());
    if (n <= 2) {
        if (trace.converged) {
            rep.immediate = true;
            return rep;
        }
        throw InsufficientIterations(n);
    }
    double sum_log = 0.0;
    int n_log = 0;
    for (int k = 1; k < n; ++k) {
        const double prev = rep.norms[std::size_t(k) - 1], cur = rep.norms[std::size_t(k)];
        if (!(prev > 0.0)) break;
        rep.ratios.push_back(cur / prev);
        if (prev > ContractionReport::noise_floor && cur > ContractionReport::noise_floor) {
            rep.max_ratio = std::max(rep.max_ratio, cur / prev);
            sum_log += std::log(cur / prev);
            ++n_log;
        }
    }
    rep.geometric_rate = n_log > 0 ? std::exp(sum_log / n_log) : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Resolution-study helpers
// ---------------------------------------------------------------------------

struct OrderSample {
    int cells;    // resolution (cells per direction at this level)
    double norm;  // error / residual norm at this level
};

struct OrderEstimate {
    std::string name;
    std::vector<OrderSample> samples;
    double order = 0.0;  // mean of the last two log2 norm ratios
    bool exact = false;  // all norms at the round-off floor; order meaningless
    double target_lo = 0.0, target_hi = std::numeric_limits<double>::infinity();
    bool ok() const { return exact || (order >= target_lo && order <= target_hi); }
};

// Mean of the last two log2(norm[k-1]/norm[k]) ratios (or the single one for
// two samples). Levels must be ordered coarse to fine with doubled cells.
inline double fitted_order(const std::vector<OrderSample>& s) {
    std::vector<double> logs;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k - 1].norm > 0.0 && s[k].norm > 0.0)
            logs.push_back(std::log2(s[k - 1].norm / s[k].norm));
    if (logs.empty()) return 0.0;
    if (logs.size() == 1) return logs[0];
    return 0.5 * (logs[logs.size() - 2] + logs[logs.size() - 1]);
}

inline bool effectively_exact(const std::vector<OrderSample>& s, double scale) {
    const double floor = 1e-13 * (1.0 + std::abs(scale));
    for (const auto& x : s)
        if (!(x.norm <= floor)) return false;
    return !s.empty();
}

inline OrderEstimate make_order_estimate(std::string name, std::vector<OrderSample> samples,
                                         double scale, double target_lo, double target_hi) {
    OrderEstimate e;
    e.name = std::move(name);
    e.samples = std::move(samples);
    e.exact = effectively_exact(e.samples, scale);
    e.order = e.exact ? std::numeric_limits<double>::quiet_NaN() : fitted_order(e.samples);
    e.target_lo = target_lo;
    e.target_hi = target_hi;
    return e;
}

}  // namespace charflow
