#pragma once

// Characteristic rectangle solver. Given full data on C+ (column u = 0) and
// C- (row v = 0), the six fields (alpha, beta, t, r, mu, nu) are computed on
// [0,h] x [0,v*] by Picard iteration of the integral form of the system:
//
//   1. K = (d c+ / du) / (c+ - c-),  L = (d c- / dv) / (c+ - c-)
//      with the u/v-derivatives expanded through the speed gradients and
//      evaluated by centered differences on the current iterate;
//   2. mu(u,v) = mu(u,0) e^{int_0^v L} - int_0^v e^{int_{v'}^v L} (K nu) dv'
//      nu(u,v) = nu(0,v) e^{-int_0^u K} + int_0^u e^{-int_{u'}^u K} (L mu) du'
//      (exponential integrating factors; composite trapezoid quadrature;
//      mu uses the previous iterate's nu, nu uses the fresh mu, so the fixed
//      point satisfies the coupled pair exactly);
//   3. t(u,v) = t(u,0) + int_0^v nu dv'
//      r(u,v) = r(u,0) + int_0^v nu c+ dv'
//   4. alpha(u,v) = alpha(u,0) + int_0^v nu F dv'
//      beta (u,v) = beta (0,v) + int_0^u mu F du'
//
// Boundary row/column always reproduce the input data bit-for-bit. The strip
// [0,h] x [0,v*] may be solved in one shot or as consecutive v-segments, each
// segment reusing the previously computed row as its bottom data line; the
// quadratures accumulate across segment seams in the same order as a single
// solve, so constant data gives bitwise identical results either way.
//
// marching_oracle is an independent cross-check discretization: a two-pass
// predictor-corrector marching scheme on the differential (not integral) form
// of the system, advancing (alpha,t,r,mu,gamma) along v-edges and
// (beta,nu,delta) along u-edges of each grid cell.
//
// estimate_strip_width computes the ladder of sup-constants behind the
// corner/strip existence argument and turns them into recommended widths
// (h_rec, eps_rec). The constants are diagnostics and defaults, not hard
// gates: suprema are sampled over the l-inflated hull of the *attained* data
// values (times the admissible radius interval), so constant data yields
// vanishing variation constants and unconstraining bounds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charflow/constraints.hpp"
#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/grid.hpp"
#include "charflow/numerics.hpp"
#include "charflow/parallel.hpp"
#include "charflow/state.hpp"

namespace charflow {

struct PicardOptions {
    double tol = 1e-10;  // scaled sup-norm of the (alpha, beta, mu, nu) update
    int max_iter = 60;
    int threads = 1;
};

struct IterationRecord {
    double d_alpha, d_beta;            // sup |update|
    double d_dalpha_du, d_dbeta_dv;    // sup |update| of the cross-derivatives
    double d_mu, d_nu;
    double scaled;                     // stopping norm: sup |update| / (1 + |field|)
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    int iterations() const { return int(records.size()); }
};

// Bootstrap inequalities monitored per segment: |nu| <= l, |alpha| <= A,
// |beta| <= B, |d beta/dv| <= D, r_m/2 <= r <= 3 r_M/2. Margins are
// bound - attained; equality holds identically for constant data, so ok()
// allows round-off-level negatives.
struct BootstrapCheck {
    double margin_nu, margin_alpha, margin_beta, margin_delta, margin_r_lo, margin_r_hi;
    bool ok() const {
        constexpr double slack = -1e-12;
        return margin_nu >= slack && margin_alpha >= slack && margin_beta >= slack &&
               margin_delta >= slack && margin_r_lo >= slack && margin_r_hi >= slack;
    }
};

struct StripWidthEstimate {
    double l = 2.0;
    double u_star = 0.0, v_star = 0.0;  // data extents (caps)
    double a0 = 0, b0 = 0, d0 = 0, r_m = 0, r_M = 0;  // C+ data magnitudes
    double A = 0, B = 0, D = 0;                        // inflated bounds
    double m0 = 0, g0 = 0;           // C- first-order magnitudes on the admissible prefix
    double h_box = 0;                // largest u with the C- data inside the box conditions
    double Fbar = 0, F_alpha = 0, F_beta = 0, F_r = 0;
    double cp_dag = 0, cm_dag = 0;   // sup |c+|, sup |c-| over the sampling box
    double cp_var = 0, cm_var = 0;   // c+ / c- variation (max - min) over the box
    double Cpa = 0, Cpb = 0, Cma = 0, Cmb = 0, Cpm = 0;  // speed-gradient sups, sup 1/(2 eta)
    double Q1 = 0, S1 = 0, Q2 = 0, S2 = 0;  // transport coefficient sups
    double G = 0, M = 0;             // growth bounds for (gamma, mu)
    double Kbar = 0, Lbar = 0, H1 = 0, H2 = 0;
    double h_rec = 0, eps_rec = 0;
    bool floored = false;  // some bound degenerated to <= 0 and was floored to one cell
    std::vector<std::pair<std::string, double>> h_bounds, eps_bounds;
};

struct StripResult {
    GoursatGrid grid;
    std::vector<IterationTrace> traces;        // one per segment
    std::vector<BootstrapCheck> bootstrap;     // one per segment
    std::vector<int> breakpoints;              // v-index seams, breakpoints.front()==0
    StripWidthEstimate estimate;
};

namespace detail {

// Second-order derivative along u at (i, j); centered in the interior,
// two-point fallback for single-cell grids. The first two nodes use stencils
// whose sample points all lie at i >= 1: column i = 0 holds prescribed data
// whose error profile differs from the quadrature-built interior, and a
// stencil straddling that column loses an order when differencing computed
// fields. Both variants are exact through quadratics.
inline double d_du(const Grid2D<double>& f, int i, int j, int n_u, double du) {
    if (n_u < 2) return (f(n_u, j) - f(0, j)) / (n_u * du);
    if (n_u >= 3) {
        if (i == 0) return (-5.0 * f(1, j) + 8.0 * f(2, j) - 3.0 * f(3, j)) / (2.0 * du);
        if (i == 1) return (-3.0 * f(1, j) + 4.0 * f(2, j) - f(3, j)) / (2.0 * du);
    } else if (i == 0) {
        return (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) / (2.0 * du);
    }
    if (i == n_u) return (3.0 * f(n_u, j) - 4.0 * f(n_u - 1, j) + f(n_u - 2, j)) / (2.0 * du);
    return (f(i + 1, j) - f(i - 1, j)) / (2.0 * du);
}

// Same along v, restricted to the segment rows [j_lo, j_hi]; the first two
// rows keep their sample points at j >= j_lo + 1 for the same reason (row
// j_lo is the data row of the segment).
inline double d_dv(const Grid2D<double>& f, int i, int j, int j_lo, int j_hi, double dv) {
    const int m = j_hi - j_lo;
    if (m < 2) return (f(i, j_hi) - f(i, j_lo)) / (m * dv);
    if (m >= 3) {
        if (j == j_lo)
            return (-5.0 * f(i, j + 1) + 8.0 * f(i, j + 2) - 3.0 * f(i, j + 3)) / (2.0 * dv);
        if (j == j_lo + 1)
            return (-3.0 * f(i, j) + 4.0 * f(i, j + 1) - f(i, j + 2)) / (2.0 * dv);
    } else if (j == j_lo) {
        return (-3.0 * f(i, j) + 4.0 * f(i, j + 1) - f(i, j + 2)) / (2.0 * dv);
    }
    if (j == j_hi) return (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * dv);
    return (f(i, j + 1) - f(i, j - 1)) / (2.0 * dv);
}

inline GoursatGrid make_boundary_grid(const CharacteristicData& cp, const CharacteristicData& cm) {
    if (cp.side != Side::cplus || cm.side != Side::cminus)
        throw ConfigError("rectangle solve expects (C+, C-) data");
    if (!cp.has_first_order || !cm.has_first_order)
        throw ConfigError("rectangle solve needs first-order characteristic data");
    if (cm.n() < 2 || cp.n() < 2)
        throw EmptyDomain("rectangle solve needs at least one cell per direction");
    GoursatGrid g(cm.param, cp.param);
    for (int i = 0; i <= g.n_u; ++i) {
        const std::size_t k = std::size_t(i);
        g.alpha(i, 0) = cm.alpha[k];
        g.beta(i, 0) = cm.beta[k];
        g.t(i, 0) = cm.t[k];
        g.r(i, 0) = cm.r[k];
        g.mu(i, 0) = cm.mu[k];
        g.nu(i, 0) = cm.nu[k];
    }
    for (int j = 0; j <= g.n_v; ++j) {
        const std::size_t k = std::size_t(j);
        g.alpha(0, j) = cp.alpha[k];
        g.beta(0, j) = cp.beta[k];
        g.t(0, j) = cp.t[k];
        g.r(0, j) = cp.r[k];
        g.mu(0, j) = cp.mu[k];
        g.nu(0, j) = cp.nu[k];
    }
    return g;
}

// One Picard solve on rows [j_lo, j_hi] of g. Row j_lo and column 0 are data
// (never written). Throws NoConvergence when max_iter is exhausted.
inline IterationTrace picard_segment(GoursatGrid& g, const EosModel& eos, Geometry geom,
                                     int j_lo, int j_hi, const PicardOptions& opt) {
    const int n_u = g.n_u, m = j_hi - j_lo;
    if (m < 1 || n_u < 1) throw EmptyDomain("picard segment needs at least one cell");
    const double du = g.du, dv = g.dv;
    const int mm = m + 1;

    // Initial iterate: alpha, mu, nu, t, r extend the bottom row; beta extends
    // the left column.
    for (int i = 1; i <= n_u; ++i)
        for (int j = j_lo + 1; j <= j_hi; ++j) {
            g.alpha(i, j) = g.alpha(i, j_lo);
            g.beta(i, j) = g.beta(0, j);
            g.mu(i, j) = g.mu(i, j_lo);
            g.nu(i, j) = g.nu(i, j_lo);
            g.t(i, j) = g.t(i, j_lo);
            g.r(i, j) = g.r(i, j_lo);
        }

    Grid2D<double> eta(n_u + 1, mm), etap(n_u + 1, mm), K(n_u + 1, mm), L(n_u + 1, mm),
        F(n_u + 1, mm), old_a(n_u + 1, mm), old_b(n_u + 1, mm), old_mu(n_u + 1, mm),
        old_nu(n_u + 1, mm), diff(n_u + 1, mm);
    const auto [chi_lo, chi_hi] = eos.chi_domain();
    const double chi_tol = 1e-12 * (1.0 + std::max(std::abs(chi_lo), std::abs(chi_hi)));

    IterationTrace trace;
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (int i = 0; i <= n_u; ++i)
            for (int j = j_lo; j <= j_hi; ++j) {
                old_a(i, j - j_lo) = g.alpha(i, j);
                old_b(i, j - j_lo) = g.beta(i, j);
                old_mu(i, j - j_lo) = g.mu(i, j);
                old_nu(i, j - j_lo) = g.nu(i, j);
            }

        // -- sound speed and slope on the current iterate
        parallel_for(n_u + 1, opt.threads, [&](int i) {
            for (int j = j_lo; j <= j_hi; ++j) {
                const double chid = g.alpha(i, j) + g.beta(i, j);
                if (!(chid >= chi_lo - chi_tol && chid <= chi_hi + chi_tol))
                    throw RangeError("chi_dagger left the eos range at (u=" +
                                     std::to_string(g.u[std::size_t(i)]) + ", v=" +
                                     std::to_string(g.v[std::size_t(j)]) + ")");
                const auto es = eos.eta_and_slope(chid);
                eta(i, j - j_lo) = es.eta;
                etap(i, j - j_lo) = es.deta_dchi;
            }
        });

        // -- K, L from centered differences of the invariants
        parallel_for(n_u + 1, opt.threads, [&](int i) {
            for (int j = j_lo; j <= j_hi; ++j) {
                const int jj = j - j_lo;
                const double p = 0.5 + etap(i, jj), q = 0.5 - etap(i, jj);
                const double dua = d_du(g.alpha, i, j, n_u, du);
                const double dub = d_du(g.beta, i, j, n_u, du);
                const double dva = d_dv(g.alpha, i, j, j_lo, j_hi, dv);
                const double dvb = d_dv(g.beta, i, j, j_lo, j_hi, dv);
                K(i, jj) = (p * dua + (etap(i, jj) - 0.5) * dub) / (2.0 * eta(i, jj));
                L(i, jj) = (q * dva - p * dvb) / (2.0 * eta(i, jj));
            }
        });

        // -- mu along each u = const line (reads the previous nu)
        parallel_for(n_u, opt.threads, [&](int ii) {
            const int i = ii + 1;
            const std::size_t msz = std::size_t(mm);
            std::vector<double> lam(msz), s(msz);
            lam[0] = 0.0;
            s[0] = 0.0;
            for (int jj = 1; jj < mm; ++jj) {
                lam[std::size_t(jj)] = lam[std::size_t(jj) - 1] +
                    0.5 * dv * (L(i, jj - 1) + L(i, jj));
                const double g0 = std::exp(-lam[std::size_t(jj) - 1]) * K(i, jj - 1) *
                                  old_nu(i, jj - 1);
                const double g1 = std::exp(-lam[std::size_t(jj)]) * K(i, jj) * old_nu(i, jj);
                s[std::size_t(jj)] = s[std::size_t(jj) - 1] + 0.5 * dv * (g0 + g1);
                g.mu(i, j_lo + jj) = std::exp(lam[std::size_t(jj)]) * (g.mu(i, j_lo) - s[std::size_t(jj)]);
            }
        });

        // -- nu along each v = const line (reads the fresh mu)
        parallel_for(m, opt.threads, [&](int jj0) {
            const int j = j_lo + jj0 + 1, jj = jj0 + 1;
            double kap_prev = 0.0, t_prev = 0.0;
            for (int i = 1; i <= n_u; ++i) {
                const double kap = kap_prev + 0.5 * du * (K(i - 1, jj) + K(i, jj));
                const double g0 = std::exp(kap_prev) * L(i - 1, jj) * g.mu(i - 1, j);
                const double g1 = std::exp(kap) * L(i, jj) * g.mu(i, j);
                const double tt = t_prev + 0.5 * du * (g0 + g1);
                g.nu(i, j) = std::exp(-kap) * (g.nu(0, j) + tt);
                kap_prev = kap;
                t_prev = tt;
            }
        });

        // -- t and r by v-quadrature from the bottom row
        parallel_for(n_u, opt.threads, [&](int ii) {
            const int i = ii + 1;
            double t_acc = g.t(i, j_lo), r_acc = g.r(i, j_lo);
            for (int jj = 1; jj < mm; ++jj) {
                const int j = j_lo + jj;
                const double cp0 = 0.5 * (g.alpha(i, j - 1) - g.beta(i, j - 1)) + eta(i, jj - 1);
                const double cp1 = 0.5 * (g.alpha(i, j) - g.beta(i, j)) + eta(i, jj);
                t_acc += 0.5 * dv * (g.nu(i, j - 1) + g.nu(i, j));
                r_acc += 0.5 * dv * (g.nu(i, j - 1) * cp0 + g.nu(i, j) * cp1);
                g.t(i, j) = t_acc;
                if (!(r_acc > 0.0))
                    throw NonPositiveRadius(g.u[std::size_t(i)], g.v[std::size_t(j)],
                                            "picard radius update");
                g.r(i, j) = r_acc;
            }
        });

        // -- source field on the current invariants and fresh radius
        parallel_for(n_u + 1, opt.threads, [&](int i) {
            for (int jj = 0; jj < mm; ++jj) {
                if (geom == Geometry::plane) {
                    F(i, jj) = 0.0;
                    continue;
                }
                F(i, jj) = -eta(i, jj) * (g.alpha(i, j_lo + jj) - g.beta(i, j_lo + jj)) /
                           g.r(i, j_lo + jj);
            }
        });

        // -- invariants: alpha by v-quadrature, beta by u-quadrature
        parallel_for(n_u, opt.threads, [&](int ii) {
            const int i = ii + 1;
            double acc = g.alpha(i, j_lo);
            std::vector<double> integ(static_cast<std::size_t>(mm));
            for (int jj = 0; jj < mm; ++jj) integ[std::size_t(jj)] = g.nu(i, j_lo + jj) * F(i, jj);
            for (int jj = 1; jj < mm; ++jj) {
                acc += 0.5 * dv * (integ[std::size_t(jj) - 1] + integ[std::size_t(jj)]);
                g.alpha(i, j_lo + jj) = acc;
            }
        });
        parallel_for(m, opt.threads, [&](int jj0) {
            const int j = j_lo + jj0 + 1, jj = jj0 + 1;
            double acc = g.beta(0, j);
            for (int i = 1; i <= n_u; ++i) {
                acc += 0.5 * du * (g.mu(i - 1, j) * F(i - 1, jj) + g.mu(i, j) * F(i, jj));
                g.beta(i, j) = acc;
            }
        });

        // -- update norms
        IterationRecord rec{};
        double scaled = 0.0;
        for (int i = 0; i <= n_u; ++i)
            for (int j = j_lo; j <= j_hi; ++j) {
                const int jj = j - j_lo;
                const double da = std::abs(g.alpha(i, j) - old_a(i, jj));
                const double db = std::abs(g.beta(i, j) - old_b(i, jj));
                const double dm = std::abs(g.mu(i, j) - old_mu(i, jj));
                const double dn = std::abs(g.nu(i, j) - old_nu(i, jj));
                rec.d_alpha = std::max(rec.d_alpha, da);
                rec.d_beta = std::max(rec.d_beta, db);
                rec.d_mu = std::max(rec.d_mu, dm);
                rec.d_nu = std::max(rec.d_nu, dn);
                scaled = std::max(scaled, da / (1.0 + std::abs(g.alpha(i, j))));
                scaled = std::max(scaled, db / (1.0 + std::abs(g.beta(i, j))));
                scaled = std::max(scaled, dm / (1.0 + std::abs(g.mu(i, j))));
                scaled = std::max(scaled, dn / (1.0 + std::abs(g.nu(i, j))));
            }
        for (int i = 0; i <= n_u; ++i)
            for (int j = j_lo; j <= j_hi; ++j)
                diff(i, j - j_lo) = g.alpha(i, j) - old_a(i, j - j_lo);
        for (int i = 0; i <= n_u; ++i)
            for (int jj = 0; jj < mm; ++jj)
                rec.d_dalpha_du = std::max(rec.d_dalpha_du, std::abs(d_du(diff, i, jj, n_u, du)));
        for (int i = 0; i <= n_u; ++i)
            for (int j = j_lo; j <= j_hi; ++j)
                diff(i, j - j_lo) = g.beta(i, j) - old_b(i, j - j_lo);
        for (int i = 0; i <= n_u; ++i)
            for (int jj = 0; jj < mm; ++jj)
                rec.d_dbeta_dv = std::max(rec.d_dbeta_dv, std::abs(d_dv(diff, i, jj, 0, m, dv)));
        rec.scaled = scaled;
        trace.records.push_back(rec);
        if (scaled < opt.tol) {
            trace.converged = true;
            break;
        }
    }
    if (!trace.converged)
        throw NoConvergence(trace.iterations(),
                            trace.records.empty() ? 0.0 : trace.records.back().scaled);

    for (int i = 0; i <= n_u; ++i)
        for (int j = j_lo; j <= j_hi; ++j)
            g.valid(i, j) = (g.mu(i, j) > 0.0 && g.nu(i, j) > 0.0) ? 1 : 0;
    return trace;
}

}  // namespace detail

inline std::pair<GoursatGrid, IterationTrace> picard_corner(const CharacteristicData& cp,
                                                            const CharacteristicData& cm,
                                                            const EosModel& eos, Geometry geom,
                                                            const PicardOptions& opt = {}) {
    GoursatGrid g = detail::make_boundary_grid(cp, cm);
    IterationTrace tr = detail::picard_segment(g, eos, geom, 0, g.n_v, opt);
    return {std::move(g), std::move(tr)};
}

// ---------------------------------------------------------------------------
// Strip-width estimate
// ---------------------------------------------------------------------------

inline StripWidthEstimate estimate_strip_width(const CharacteristicData& cp,
                                               const CharacteristicData& cm,
                                               const EosModel& eos, Geometry geom,
                                               double l = 2.0) {
    if (!(l > 1.0)) throw InvalidL(l);
    if (cp.side != Side::cplus || cm.side != Side::cminus)
        throw ConfigError("estimate_strip_width expects (C+, C-) data");
    if (!cp.has_first_order || !cm.has_first_order)
        throw ConfigError("estimate_strip_width needs first-order data");

    StripWidthEstimate e;
    e.l = l;
    e.u_star = cm.param.back();
    e.v_star = cp.param.back();

    auto max_abs = [](const std::vector<double>& a, std::size_t hi) {
        double m = 0.0;
        for (std::size_t k = 0; k <= hi; ++k) m = std::max(m, std::abs(a[k]));
        return m;
    };
    const std::size_t np = cp.alpha.size() - 1;
    e.a0 = max_abs(cp.alpha, np);
    e.b0 = max_abs(cp.beta, np);
    e.d0 = max_abs(cp.delta, np);
    e.r_m = *std::min_element(cp.r.begin(), cp.r.end());
    e.r_M = *std::max_element(cp.r.begin(), cp.r.end());
    e.A = l * e.a0;
    e.B = l * e.b0;
    e.D = l * e.d0;

    // Admissible prefix of the C- data: the box conditions hold (non-strictly)
    // up to this node.
    std::size_t pfx = 0;
    for (std::size_t k = 0; k < cm.alpha.size(); ++k) {
        const bool ok = std::abs(cm.alpha[k]) <= e.A && std::abs(cm.beta[k]) <= e.B &&
                        std::abs(cm.delta[k]) <= e.D && cm.r[k] >= 0.5 * e.r_m &&
                        cm.r[k] <= 1.5 * e.r_M;
        if (!ok) break;
        pfx = k;
    }
    e.h_box = cm.param[pfx];
    e.m0 = max_abs(cm.mu, pfx);
    e.g0 = max_abs(cm.gamma, pfx);
    const double sup_alpha_minus = max_abs(cm.alpha, pfx);
    const double sup_beta_minus = max_abs(cm.beta, pfx);
    double r_minus_lo = cm.r[0], r_minus_hi = cm.r[0];
    for (std::size_t k = 0; k <= pfx; ++k) {
        r_minus_lo = std::min(r_minus_lo, cm.r[k]);
        r_minus_hi = std::max(r_minus_hi, cm.r[k]);
    }

    // Sampling box: l-inflated hull of the attained (alpha, beta) values
    // (intersected with the eos range), times the admissible radius interval.
    double a_lo = cp.alpha[0], a_hi = cp.alpha[0], b_lo = cp.beta[0], b_hi = cp.beta[0];
    for (double x : cp.alpha) { a_lo = std::min(a_lo, x); a_hi = std::max(a_hi, x); }
    for (double x : cp.beta) { b_lo = std::min(b_lo, x); b_hi = std::max(b_hi, x); }
    for (std::size_t k = 0; k <= pfx; ++k) {
        a_lo = std::min(a_lo, cm.alpha[k]); a_hi = std::max(a_hi, cm.alpha[k]);
        b_lo = std::min(b_lo, cm.beta[k]);  b_hi = std::max(b_hi, cm.beta[k]);
    }
    const double a_mid = 0.5 * (a_lo + a_hi), a_rad = 0.5 * (a_hi - a_lo) * l;
    const double b_mid = 0.5 * (b_lo + b_hi), b_rad = 0.5 * (b_hi - b_lo) * l;
    const int nab = 64, nr = 33;
    const double r_lo = 0.5 * e.r_m, r_hi = 1.5 * e.r_M;
    const auto [chi_lo, chi_hi] = eos.chi_domain();

    double cp_min = std::numeric_limits<double>::infinity(), cp_max = -cp_min;
    double cm_min = cp_min, cm_max = -cp_min;
    double supA1 = 0, supA2 = 0, supB1 = 0, supB2 = 0, supC1 = 0, supC2 = 0;
    for (int ia = 0; ia < nab; ++ia) {
        const double a = a_rad == 0.0 ? a_mid : a_mid - a_rad + 2.0 * a_rad * ia / (nab - 1);
        for (int ib = 0; ib < nab; ++ib) {
            const double b = b_rad == 0.0 ? b_mid : b_mid - b_rad + 2.0 * b_rad * ib / (nab - 1);
            const double chid = a + b;
            if (chid < chi_lo || chid > chi_hi) continue;  // outside the eos range
            const auto es = eos.eta_and_slope(chid);
            const double etav = es.eta, ep = es.deta_dchi;
            const double chi = a - b, w = 0.5 * chi;
            const double cplus = w + etav, cminus = w - etav;
            cp_min = std::min(cp_min, cplus); cp_max = std::max(cp_max, cplus);
            cm_min = std::min(cm_min, cminus); cm_max = std::max(cm_max, cminus);
            e.cp_dag = std::max(e.cp_dag, std::abs(cplus));
            e.cm_dag = std::max(e.cm_dag, std::abs(cminus));
            const double p = 0.5 + ep, q = 0.5 - ep;
            e.Cpa = std::max(e.Cpa, std::abs(p));
            e.Cpb = std::max(e.Cpb, std::abs(ep - 0.5));
            e.Cma = std::max(e.Cma, std::abs(q));
            e.Cmb = std::max(e.Cmb, std::abs(-0.5 - ep));
            e.Cpm = std::max(e.Cpm, 1.0 / (2.0 * etav));
            const double abs_a2 = std::abs(-p / (2.0 * etav));
            supA2 = std::max(supA2, abs_a2);
            supB2 = std::max(supB2, abs_a2);  // B2 == A2
            if (geom == Geometry::spherical) {
                for (int ir = 0; ir < nr; ++ir) {
                    const double r = r_lo + (r_hi - r_lo) * ir / (nr - 1);
                    const double Fv = -etav * chi / r;
                    const double Fa = -(ep * chi + etav) / r;
                    const double Fb = -(ep * chi - etav) / r;
                    const double Fr = etav * chi / (r * r);
                    e.Fbar = std::max(e.Fbar, std::abs(Fv));
                    e.F_alpha = std::max(e.F_alpha, std::abs(Fa));
                    e.F_beta = std::max(e.F_beta, std::abs(Fb));
                    e.F_r = std::max(e.F_r, std::abs(Fr));
                    const double A1 = Fa - Fv / (2.0 * etav) * p;
                    const double B1 = -Fv / (2.0 * etav) * p;
                    const double C1 = Fb * Fv + Fr * cminus + Fv * Fv / etav * q;
                    const double C2 = Fv / etav * q;
                    supA1 = std::max(supA1, std::abs(A1));
                    supB1 = std::max(supB1, std::abs(B1));
                    supC1 = std::max(supC1, std::abs(C1));
                    supC2 = std::max(supC2, std::abs(C2));
                }
            } else {
                // plane mode: F vanishes identically; only A2 = B2 survives
                supA1 = std::max(supA1, 0.0);
            }
        }
    }
    if (std::isfinite(cp_max)) {
        e.cp_var = cp_max - cp_min;
        e.cm_var = cm_max - cm_min;
    }
    e.Q1 = l * supA1;
    e.S1 = supB1 * e.D + supC1 * l;
    e.Q2 = supB2 * e.D + supC2 * l;
    e.S2 = l * supA2;

    // Growth bounds for the first derivatives along C+ over [0, v*].
    const double vs = e.v_star;
    const double couple = vs * vs * e.S1 * e.S2 * std::exp(vs * (e.Q1 + e.Q2));
    const double f1b = std::exp(vs * e.Q1) * (1.0 + couple);
    const double f2b = vs * e.S1 * std::exp(vs * e.Q2) * f1b;
    const double f3b = std::exp(vs * e.Q2) * (1.0 + couple);
    const double f4b = vs * e.S2 * std::exp(vs * e.Q1) * f3b;
    e.G = f1b * e.g0 + f2b * e.m0;
    e.M = f3b * e.m0 + f4b * e.g0;

    e.Kbar = e.Cpm * (e.Cpa * e.G + e.Cpb * e.M * e.Fbar);
    e.Lbar = e.Cpm * (e.Cma * l * e.Fbar + e.Cmb * e.D);
    e.H1 = l * (e.F_alpha * e.G + e.F_beta * e.M * e.Fbar + e.F_r * e.cm_dag * e.M) +
           e.Fbar * (e.M * e.Lbar + l * e.Kbar);
    e.H2 = e.M * (e.F_alpha * l * e.Fbar + e.F_beta * e.D + e.F_r * e.cp_dag * l) +
           e.Fbar * (e.M * e.Lbar + l * e.Kbar);

    // A bound participates only if its denominator is positive (zero
    // denominators are unconstraining: nothing forces smallness); a
    // non-positive value from touching data floors the result at one cell.
    auto push_bound = [&](std::vector<std::pair<std::string, double>>& dst, const std::string& name,
                          double num, double den, double floor_cell) {
        if (!(den > 0.0)) return;
        double val = num / den;
        if (!(val > 0.0)) {
            e.floored = true;
            val = floor_cell;
        }
        dst.emplace_back(name, val);
    };

    e.h_bounds.emplace_back("u_extent", e.u_star);
    if (e.h_box > 0.0) e.h_bounds.emplace_back("data_box", e.h_box);
    else { e.floored = true; e.h_bounds.emplace_back("data_box", cm.dx); }
    push_bound(e.h_bounds, "alpha_growth", (l - 1.0) * e.a0, e.G, cm.dx);
    push_bound(e.h_bounds, "beta_growth", (l - 1.0) * e.b0, e.M * e.Fbar, cm.dx);
    push_bound(e.h_bounds, "radius_drift", e.r_m, 2.0 * e.cm_var * e.M, cm.dx);
    push_bound(e.h_bounds, "delta_growth", e.D - e.d0, e.H2, cm.dx);
    double h_rec = std::numeric_limits<double>::infinity();
    for (const auto& [name, val] : e.h_bounds) h_rec = std::min(h_rec, val);
    e.h_rec = h_rec;

    e.eps_bounds.emplace_back("v_extent", e.v_star);
    push_bound(e.eps_bounds, "beta_margin", e.B - sup_beta_minus, e.D, cp.dx);
    push_bound(e.eps_bounds, "alpha_margin", e.A - sup_alpha_minus, l * e.Fbar, cp.dx);
    push_bound(e.eps_bounds, "radius_margin",
               std::min(r_minus_lo - 0.5 * e.r_m, 1.5 * e.r_M - r_minus_hi),
               e.cp_var * l, cp.dx);
    push_bound(e.eps_bounds, "gamma_growth", e.G - e.g0, e.H1, cp.dx);

    // Bootstrap scan: largest eps with F1(h_rec, eps) <= l and F2 <= M, where
    // F1/F2 majorize |nu| and |mu| on [0,h] x [0,eps].
    if (e.Kbar > 0.0 || e.Lbar > 0.0) {
        const int ns = 1024;
        const double h = e.h_rec;
        std::vector<double> f1(ns + 1), f2(ns + 1), phi(ns + 1), w(ns + 1), iw(ns + 1), IF1(ns + 1);
        for (int k = 0; k <= ns; ++k) {
            const double v = e.v_star * k / ns;
            f1[std::size_t(k)] = std::exp(h * e.Kbar) * (1.0 + h * e.Lbar * std::exp(v * e.Lbar) * e.M);
            f2[std::size_t(k)] = h * e.Kbar * e.Lbar * std::exp(h * e.Kbar + v * e.Lbar);
        }
        num::cumtrapz(f2, e.v_star / ns, phi);
        for (int k = 0; k <= ns; ++k) w[std::size_t(k)] = f1[std::size_t(k)] * std::exp(-phi[std::size_t(k)]);
        num::cumtrapz(w, e.v_star / ns, iw);
        std::vector<double> F1(ns + 1);
        for (int k = 0; k <= ns; ++k)
            F1[std::size_t(k)] = f1[std::size_t(k)] +
                f2[std::size_t(k)] * std::exp(phi[std::size_t(k)]) * iw[std::size_t(k)];
        num::cumtrapz(F1, e.v_star / ns, IF1);
        double best = -1.0;
        const double tol1 = l * (1.0 + 1e-12), tol2 = e.M * (1.0 + 1e-12);
        for (int k = 0; k <= ns; ++k) {
            const double F2v = std::exp((e.v_star * k / ns) * e.Lbar) *
                               (e.m0 + e.Kbar * IF1[std::size_t(k)]);
            if (F1[std::size_t(k)] <= tol1 && F2v <= tol2) best = e.v_star * k / ns;
            else break;
        }
        if (best <= 0.0) { e.floored = true; best = cp.dx; }
        e.eps_bounds.emplace_back("derivative_bootstrap", best);
    }

    double eps_rec = std::numeric_limits<double>::infinity();
    for (const auto& [name, val] : e.eps_bounds) eps_rec = std::min(eps_rec, val);
    e.eps_rec = eps_rec;
    return e;
}

// ---------------------------------------------------------------------------
// Strip extension
// ---------------------------------------------------------------------------

inline BootstrapCheck bootstrap_check(const GoursatGrid& g, const StripWidthEstimate& est,
                                      int j_lo, int j_hi) {
    double sup_nu = 0, sup_a = 0, sup_b = 0, sup_d = 0;
    double rmin = g.r(0, j_lo), rmax = rmin;
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = j_lo; j <= j_hi; ++j) {
            sup_nu = std::max(sup_nu, std::abs(g.nu(i, j)));
            sup_a = std::max(sup_a, std::abs(g.alpha(i, j)));
            sup_b = std::max(sup_b, std::abs(g.beta(i, j)));
            sup_d = std::max(sup_d, std::abs(detail::d_dv(g.beta, i, j, j_lo, j_hi, g.dv)));
            rmin = std::min(rmin, g.r(i, j));
            rmax = std::max(rmax, g.r(i, j));
        }
    BootstrapCheck c{};
    c.margin_nu = est.l - sup_nu;
    c.margin_alpha = est.A - sup_a;
    c.margin_beta = est.B - sup_b;
    c.margin_delta = est.D - sup_d;
    c.margin_r_lo = rmin - 0.5 * est.r_m;
    c.margin_r_hi = 1.5 * est.r_M - rmax;
    return c;
}

inline StripResult extend_strip(const CharacteristicData& cp, const CharacteristicData& cm,
                                const EosModel& eos, Geometry geom, int segments,
                                const PicardOptions& opt = {},
                                const StripWidthEstimate* est = nullptr) {
    StripResult res;
    res.grid = detail::make_boundary_grid(cp, cm);
    res.estimate = est ? *est : estimate_strip_width(cp, cm, eos, geom);
    const int n_v = res.grid.n_v;
    segments = std::clamp(segments, 1, std::max(1, n_v / 2));
    res.breakpoints.push_back(0);
    for (int s = 1; s <= segments; ++s) {
        int j = int(std::lround(double(n_v) * s / segments));
        j = std::clamp(j, res.breakpoints.back() + 1, n_v);
        res.breakpoints.push_back(j);
        if (j == n_v) break;
    }
    for (std::size_t s = 0; s + 1 < res.breakpoints.size(); ++s) {
        const int j_lo = res.breakpoints[s], j_hi = res.breakpoints[s + 1];
        res.traces.push_back(detail::picard_segment(res.grid, eos, geom, j_lo, j_hi, opt));
        res.bootstrap.push_back(bootstrap_check(res.grid, res.estimate, j_lo, j_hi));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Independent marching solver (cross-check oracle)
// ---------------------------------------------------------------------------

inline GoursatGrid marching_oracle(const CharacteristicData& cp, const CharacteristicData& cm,
                                   const EosModel& eos, Geometry geom) {
    GoursatGrid g = detail::make_boundary_grid(cp, cm);
    const int n_u = g.n_u, n_v = g.n_v;
    const double du = g.du, dv = g.dv;
    Grid2D<double> ga(n_u + 1, n_v + 1), de(n_u + 1, n_v + 1);
    for (int i = 0; i <= n_u; ++i) {
        ga(i, 0) = cm.gamma[std::size_t(i)];
        de(i, 0) = cm.delta[std::size_t(i)];
    }
    for (int j = 0; j <= n_v; ++j) {
        ga(0, j) = cp.gamma[std::size_t(j)];
        de(0, j) = cp.delta[std::size_t(j)];
    }

    struct Node {
        double a, b, t, r, mu, nu, ga, de;
    };
    struct Rates {
        double av, tv, rv, muv, gav;  // v-direction rates
        double bu, tu, ru, nuu, deu;  // u-direction rates
    };
    auto rates = [&](const Node& s) -> Rates {
        const CharState c{s.a, s.b};
        const double eta = eos.eta_and_slope(c.chi_dagger()).eta;
        const double cplus = 0.5 * c.chi() + eta, cminus = 0.5 * c.chi() - eta;
        const double Fv = source_term(c, s.r, geom, eos);
        const auto kp = detail::cplus_transport(c, s.r, geom, eos);
        const auto km = detail::cminus_transport(c, s.r, geom, eos);
        Rates rr;
        rr.av = s.nu * Fv;
        rr.tv = s.nu;
        rr.rv = s.nu * cplus;
        rr.gav = kp.a1 * s.nu * s.ga + kp.b1 * s.mu * s.de + kp.c1 * s.mu * s.nu;
        rr.muv = kp.a2 * s.nu * s.ga + kp.b2 * s.mu * s.de + kp.c2 * s.mu * s.nu;
        rr.bu = s.mu * Fv;
        rr.tu = s.mu;
        rr.ru = s.mu * cminus;
        rr.deu = km.a1 * s.mu * s.de + km.b1 * s.nu * s.ga + km.c1 * s.mu * s.nu;
        rr.nuu = km.a2 * s.mu * s.de + km.b2 * s.nu * s.ga + km.c2 * s.mu * s.nu;
        return rr;
    };

    for (int d = 2; d <= n_u + n_v; ++d) {
        const int i_lo = std::max(1, d - n_v), i_hi = std::min(n_u, d - 1);
        for (int i = i_lo; i <= i_hi; ++i) {
            const int j = d - i;
            const Node bot{g.alpha(i, j - 1), g.beta(i, j - 1), g.t(i, j - 1), g.r(i, j - 1),
                           g.mu(i, j - 1), g.nu(i, j - 1), ga(i, j - 1), de(i, j - 1)};
            const Node lef{g.alpha(i - 1, j), g.beta(i - 1, j), g.t(i - 1, j), g.r(i - 1, j),
                           g.mu(i - 1, j), g.nu(i - 1, j), ga(i - 1, j), de(i - 1, j)};
            const Rates rb = rates(bot), rl = rates(lef);
            Node s;
            s.a = bot.a + dv * rb.av;
            s.mu = bot.mu + dv * rb.muv;
            s.ga = bot.ga + dv * rb.gav;
            s.b = lef.b + du * rl.bu;
            s.nu = lef.nu + du * rl.nuu;
            s.de = lef.de + du * rl.deu;
            s.t = 0.5 * (bot.t + dv * rb.tv + lef.t + du * rl.tu);
            s.r = 0.5 * (bot.r + dv * rb.rv + lef.r + du * rl.ru);
            for (int pass = 0; pass < 2; ++pass) {
                if (!(s.r > 0.0))
                    throw NonPositiveRadius(g.u[std::size_t(i)], g.v[std::size_t(j)],
                                            "marching oracle");
                const Rates rs = rates(s);
                s.a = bot.a + 0.5 * dv * (rb.av + rs.av);
                s.mu = bot.mu + 0.5 * dv * (rb.muv + rs.muv);
                s.ga = bot.ga + 0.5 * dv * (rb.gav + rs.gav);
                s.b = lef.b + 0.5 * du * (rl.bu + rs.bu);
                s.nu = lef.nu + 0.5 * du * (rl.nuu + rs.nuu);
                s.de = lef.de + 0.5 * du * (rl.deu + rs.deu);
                s.t = 0.5 * (bot.t + 0.5 * dv * (rb.tv + rs.tv) + lef.t + 0.5 * du * (rl.tu + rs.tu));
                s.r = 0.5 * (bot.r + 0.5 * dv * (rb.rv + rs.rv) + lef.r + 0.5 * du * (rl.ru + rs.ru));
            }
            if (!(s.r > 0.0))
                throw NonPositiveRadius(g.u[std::size_t(i)], g.v[std::size_t(j)], "marching oracle");
            g.alpha(i, j) = s.a;
            g.beta(i, j) = s.b;
            g.t(i, j) = s.t;
            g.r(i, j) = s.r;
            g.mu(i, j) = s.mu;
            g.nu(i, j) = s.nu;
            ga(i, j) = s.ga;
            de(i, j) = s.de;
            g.valid(i, j) = (s.mu > 0.0 && s.nu > 0.0) ? 1 : 0;
        }
    }
    return g;
}

}  // namespace charflow
