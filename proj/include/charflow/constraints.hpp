#pragma once

// Constraint ODEs along the two data characteristics.
//
// On C+ (parametrized by v, gauge t = v, so nu = 1) the free datum is beta(v);
// alpha and r satisfy
//     d alpha / dv = F(alpha, beta, r)          d r / dv = c+(alpha, beta)
// On C- (parametrized by u, gauge t = u, mu = 1) the free datum is alpha(u):
//     d beta  / du = F(alpha, beta, r)          d r / du = c-(alpha, beta)
//
// Both are integrated with RK4; the sampled free datum is evaluated at
// half-steps by local cubic interpolation. On C- the radius may shrink to 0
// in finite parameter; integration stops at the last node with r > eps_guard
// and reports the attained extent u_bar (a truncation, not a failure).
//
// derived_first_order transports the cross-derivatives along each line:
// (gamma, mu) = (d alpha/du, d t/du) along C+, and (delta, nu) =
// (d beta/dv, d t/dv) along C-. The linear systems are
//     d gamma/dv = A1 nu gamma + B1 mu delta + C1 mu nu
//     d mu   /dv = A2 nu gamma + B2 mu delta + C2 mu nu      (on C+, nu = 1)
// and the u<->v mirrored pair on C-. The coefficients are assembled from the
// source/speed gradients, so they specialize correctly to plane geometry.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/numerics.hpp"
#include "charflow/state.hpp"

namespace charflow {

enum class Side { cplus, cminus };

struct Corner {
    double alpha0 = 0.0;
    double beta0 = 0.0;
    double t0 = 0.0;  // both characteristics start at t = 0
    double r0 = 0.0;
};

// Sampled free datum on one characteristic: beta(v) on C+, alpha(u) on C-.
struct FreeData {
    Side side;
    std::vector<double> param;      // uniform grid starting at 0
    std::vector<double> invariant;  // the prescribed invariant samples
    Corner corner;
    double dx = 0.0;

    FreeData(Side s, std::vector<double> param_, std::vector<double> samples, Corner c)
        : side(s), param(std::move(param_)), invariant(std::move(samples)), corner(c) {
        if (param.size() != invariant.size())
            throw ConfigError("free data: parameter and sample counts differ");
        if (param.size() < 5) throw ConfigError("free data needs at least 5 samples");
        dx = num::uniform_spacing(param);
        if (std::abs(param.front()) > 1e-12 * param.back())
            throw ConfigError("free data parameter grid must start at 0");
        if (!(corner.r0 > 0.0)) throw ConfigError("free data needs corner r0 > 0");
        if (corner.t0 != 0.0) throw ConfigError("free data needs corner t0 = 0");
        const double want = side == Side::cplus ? corner.beta0 : corner.alpha0;
        if (std::abs(invariant.front() - want) > 1e-9 * (1.0 + std::abs(want)))
            throw ConfigError("free data sample at parameter 0 must equal its corner value");
    }
};

// Convenience: sample a closed-form free datum on n_nodes uniform nodes.
template <class Fn>
FreeData sample_free_data(Side side, double extent, int n_nodes, Fn&& fn,
                          double other_corner_value, double r0) {
    if (n_nodes < 5) throw ConfigError("free data needs at least 5 samples");
    const std::size_t nsz = std::size_t(n_nodes);
    std::vector<double> param(nsz), samples(nsz);
    const double dx = extent / (n_nodes - 1);
    for (int k = 0; k < n_nodes; ++k) {
        param[std::size_t(k)] = k * dx;
        samples[std::size_t(k)] = fn(k * dx);
    }
    Corner c;
    c.r0 = r0;
    if (side == Side::cplus) {
        c.beta0 = samples.front();
        c.alpha0 = other_corner_value;
    } else {
        c.alpha0 = samples.front();
        c.beta0 = other_corner_value;
    }
    return FreeData(side, std::move(param), std::move(samples), c);
}

// Full data set along one characteristic. gamma/delta/mu/nu are filled by
// derived_first_order; on C+ nu == 1 (gauge), on C- mu == 1.
struct CharacteristicData {
    Side side = Side::cplus;
    std::vector<double> param, alpha, beta, t, r, mu, nu, gamma, delta;
    Corner corner;
    double dx = 0.0;
    bool truncated = false;  // C- stopped early at the radius guard
    double u_bar = 0.0;      // last kept parameter value
    bool has_first_order = false;

    int n() const { return int(param.size()); }
};

namespace detail {

inline void check_radius(double r, double u, double v, const char* where) {
    if (!(r > 0.0)) throw NonPositiveRadius(u, v, where);
}

// Coefficients of the (gamma, mu) transport along C+ (v-direction).
struct TransportCoeffs {
    double a1, b1, c1, a2, b2, c2;
};

inline TransportCoeffs cplus_transport(const CharState& c, double r, Geometry geom,
                                       const EosModel& eos) {
    const auto [eta, etap] = eos.eta_and_slope(c.chi_dagger());
    const double F = source_term(c, r, geom, eos);
    const auto g = source_gradients(c, r, geom, eos);
    const double cm = 0.5 * c.chi() - eta;
    const double p = 0.5 + etap, q = 0.5 - etap;
    TransportCoeffs k;
    k.a1 = g.dF_dalpha - F / (2.0 * eta) * p;
    k.b1 = -F / (2.0 * eta) * p;
    k.c1 = g.dF_dbeta * F + g.dF_dr * cm + F * F / eta * q;
    k.a2 = -p / (2.0 * eta);
    k.b2 = k.a2;
    k.c2 = F / eta * q;
    return k;
}

// Mirrored coefficients of the (delta, nu) transport along C- (u-direction).
inline TransportCoeffs cminus_transport(const CharState& c, double r, Geometry geom,
                                        const EosModel& eos) {
    const auto [eta, etap] = eos.eta_and_slope(c.chi_dagger());
    const double F = source_term(c, r, geom, eos);
    const auto g = source_gradients(c, r, geom, eos);
    const double cp = 0.5 * c.chi() + eta;
    const double p = 0.5 + etap, q = 0.5 - etap;
    TransportCoeffs k;
    k.a1 = g.dF_dbeta - F / (2.0 * eta) * p;
    k.b1 = -F / (2.0 * eta) * p;
    k.c1 = g.dF_dalpha * F + g.dF_dr * cp + F * F / eta * q;
    k.a2 = -p / (2.0 * eta);
    k.b2 = k.a2;
    k.c2 = F / eta * q;
    return k;
}

}  // namespace detail

inline CharacteristicData solve_cplus(const FreeData& fd, const EosModel& eos, Geometry geom) {
    if (fd.side != Side::cplus) throw ConfigError("solve_cplus expects C+ free data");
    const int n = int(fd.param.size());
    CharacteristicData cd;
    cd.side = Side::cplus;
    cd.param = fd.param;
    cd.beta = fd.invariant;
    cd.t = fd.param;  // gauge t(v) = v
    cd.corner = fd.corner;
    cd.dx = fd.dx;
    cd.alpha.resize(std::size_t(n));
    cd.r.resize(std::size_t(n));
    cd.alpha[0] = fd.corner.alpha0;
    cd.r[0] = fd.corner.r0;

    auto rhs = [&](double v, double beta_v, const std::array<double, 2>& y) {
        detail::check_radius(y[1], 0.0, v, "C+ constraint solve");
        const CharState c{y[0], beta_v};
        const double eta = eos.eta_and_slope(c.chi_dagger()).eta;
        const double F = source_term(c, y[1], geom, eos);
        return std::array<double, 2>{F, 0.5 * c.chi() + eta};
    };

    std::array<double, 2> y{cd.alpha[0], cd.r[0]};
    for (int k = 0; k + 1 < n; ++k) {
        const double v = fd.param[std::size_t(k)], h = fd.dx;
        const double bm = num::lagrange_cubic(fd.invariant, 0.0, fd.dx, v + 0.5 * h);
        const double b0 = fd.invariant[std::size_t(k)], b1 = fd.invariant[std::size_t(k) + 1];
        const auto k1 = rhs(v, b0, y);
        const auto k2 = rhs(v + 0.5 * h, bm, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
        const auto k3 = rhs(v + 0.5 * h, bm, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
        const auto k4 = rhs(v + h, b1, {y[0] + h * k3[0], y[1] + h * k3[1]});
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        detail::check_radius(y[1], 0.0, v + h, "C+ constraint solve");
        cd.alpha[std::size_t(k) + 1] = y[0];
        cd.r[std::size_t(k) + 1] = y[1];
    }
    cd.u_bar = cd.param.back();
    return cd;
}

inline CharacteristicData solve_cminus(const FreeData& fd, const EosModel& eos, Geometry geom,
                                       double epsilon_guard) {
    if (fd.side != Side::cminus) throw ConfigError("solve_cminus expects C- free data");
    if (!(epsilon_guard > 0.0 && epsilon_guard < fd.corner.r0))
        throw ConfigError("epsilon_guard must satisfy 0 < eps < r0");
    const int n = int(fd.param.size());
    CharacteristicData cd;
    cd.side = Side::cminus;
    cd.param = fd.param;
    cd.alpha = fd.invariant;
    cd.t = fd.param;  // gauge t(u) = u
    cd.corner = fd.corner;
    cd.dx = fd.dx;
    cd.beta.resize(std::size_t(n));
    cd.r.resize(std::size_t(n));
    cd.beta[0] = fd.corner.beta0;
    cd.r[0] = fd.corner.r0;

    auto rhs = [&](double u, double alpha_u, const std::array<double, 2>& y) {
        detail::check_radius(y[1], u, 0.0, "C- constraint solve");
        const CharState c{alpha_u, y[0]};
        const double eta = eos.eta_and_slope(c.chi_dagger()).eta;
        const double F = source_term(c, y[1], geom, eos);
        return std::array<double, 2>{F, 0.5 * c.chi() - eta};
    };

    std::array<double, 2> y{cd.beta[0], cd.r[0]};
    int kept = 0;  // last node index kept
    for (int k = 0; k + 1 < n; ++k) {
        const double u = fd.param[std::size_t(k)], h = fd.dx;
        const double am = num::lagrange_cubic(fd.invariant, 0.0, fd.dx, u + 0.5 * h);
        const double a0 = fd.invariant[std::size_t(k)], a1 = fd.invariant[std::size_t(k) + 1];
        const auto k1 = rhs(u, a0, y);
        const auto k2 = rhs(u + 0.5 * h, am, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
        const auto k3 = rhs(u + 0.5 * h, am, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
        const auto k4 = rhs(u + h, a1, {y[0] + h * k3[0], y[1] + h * k3[1]});
        std::array<double, 2> ynext{y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                                    y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
        detail::check_radius(ynext[1], u + h, 0.0, "C- constraint solve");
        if (!(ynext[1] > epsilon_guard)) {
            cd.truncated = true;
            break;
        }
        y = ynext;
        kept = k + 1;
        cd.beta[std::size_t(kept)] = y[0];
        cd.r[std::size_t(kept)] = y[1];
    }
    if (cd.truncated) {
        const std::size_t m = std::size_t(kept) + 1;
        cd.param.resize(m);
        cd.alpha.resize(m);
        cd.beta.resize(m);
        cd.t.resize(m);
        cd.r.resize(m);
    }
    cd.u_bar = cd.param.back();
    return cd;
}

// Fills mu, nu, gamma, delta along the line. opposite_corner_slope is the
// corner derivative taken from the *other* characteristic's free datum:
// gamma(0) = d alpha^- / du (0) when cd is C+, delta(0) = d beta^+ / dv (0)
// when cd is C-.
inline CharacteristicData derived_first_order(const CharacteristicData& cd,
                                              double opposite_corner_slope,
                                              const EosModel& eos, Geometry geom) {
    if (cd.n() < 5) throw EmptyDomain("first-order transport needs >= 5 nodes");
    CharacteristicData out = cd;
    const int n = cd.n();
    const double h = cd.dx;
    const std::vector<double>& follow = cd.side == Side::cplus ? cd.beta : cd.alpha;
    const std::vector<double> slope = num::derivative4(follow, h);

    // Interpolators for the half-step coefficient evaluations.
    auto interp = [&](const std::vector<double>& ys, double x) {
        return num::lagrange_cubic(ys, 0.0, h, x);
    };

    auto rhs = [&](double x, bool at_node, int k, const std::array<double, 2>& y) {
        double a, b, r, s;
        if (at_node) {
            a = cd.alpha[std::size_t(k)];
            b = cd.beta[std::size_t(k)];
            r = cd.r[std::size_t(k)];
            s = slope[std::size_t(k)];
        } else {
            a = interp(cd.alpha, x);
            b = interp(cd.beta, x);
            r = interp(cd.r, x);
            s = interp(slope, x);
        }
        const CharState c{a, b};
        const auto tc = cd.side == Side::cplus ? detail::cplus_transport(c, r, geom, eos)
                                               : detail::cminus_transport(c, r, geom, eos);
        // y = (gamma, mu) on C+ with nu = 1; y = (delta, nu) on C- with mu = 1.
        // The prescribed-side slope s plays the role of the opposite derivative.
        return std::array<double, 2>{tc.a1 * y[0] + (tc.b1 * s + tc.c1) * y[1],
                                     tc.a2 * y[0] + (tc.b2 * s + tc.c2) * y[1]};
    };

    const std::size_t nsz = std::size_t(n);
    std::vector<double> first(nsz), second(nsz);
    std::array<double, 2> y{opposite_corner_slope, 1.0};
    first[0] = y[0];
    second[0] = y[1];
    for (int k = 0; k + 1 < n; ++k) {
        const double x = cd.param[std::size_t(k)];
        const auto k1 = rhs(x, true, k, y);
        const auto k2 = rhs(x + 0.5 * h, false, k,
                            {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
        const auto k3 = rhs(x + 0.5 * h, false, k,
                            {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
        const auto k4 = rhs(x + h, true, k + 1, {y[0] + h * k3[0], y[1] + h * k3[1]});
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        first[std::size_t(k) + 1] = y[0];
        second[std::size_t(k) + 1] = y[1];
    }

    std::vector<double> ones(std::size_t(n), 1.0);
    if (cd.side == Side::cplus) {
        out.gamma = std::move(first);   // d alpha / du
        out.mu = std::move(second);     // d t / du
        out.nu = std::move(ones);       // gauge
        out.delta = slope;              // d beta+ / dv from the free samples
    } else {
        out.delta = std::move(first);   // d beta / dv
        out.nu = std::move(second);     // d t / dv
        out.mu = std::move(ones);       // gauge
        out.gamma = slope;              // d alpha- / du from the free samples
    }
    out.has_first_order = true;
    return out;
}

// Zeroth- and first-order corner matching between the two data sets.
struct CornerReport {
    double d_alpha, d_beta, d_t, d_r, d_gamma, d_delta;
    double max_abs() const {
        double m = 0.0;
        for (double x : {d_alpha, d_beta, d_t, d_r, d_gamma, d_delta})
            m = std::max(m, std::abs(x));
        return m;
    }
};

inline CornerReport corner_compatibility(const CharacteristicData& cp,
                                         const CharacteristicData& cm) {
    if (cp.side != Side::cplus || cm.side != Side::cminus)
        throw ConfigError("corner_compatibility expects (C+, C-) data");
    if (!cp.has_first_order || !cm.has_first_order)
        throw ConfigError("corner_compatibility needs first-order data on both sides");
    CornerReport rep{};
    rep.d_alpha = cp.alpha.front() - cm.alpha.front();
    rep.d_beta = cp.beta.front() - cm.beta.front();
    rep.d_t = cp.t.front() - cm.t.front();
    rep.d_r = cp.r.front() - cm.r.front();
    rep.d_gamma = cp.gamma.front() - cm.gamma.front();
    rep.d_delta = cm.delta.front() - cp.delta.front();
    return rep;
}

}  // namespace charflow
