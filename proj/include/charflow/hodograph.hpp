#pragma once

// Hodograph layer: the solved fields live on the characteristic (u,v) grid;
// the map to the physical (t,r) half-plane is x(u,v) = (t(u,v), r(u,v)) with
// Jacobian determinant
//
//   J = t_u r_v - t_v r_u = mu nu (c+ - c-) = 2 mu nu eta.
//
// J vanishes exactly where mu or nu vanishes (eta > 0 away from vacuum), i.e.
// where neighbouring characteristics of one family focus. Nodes with
// mu <= 0 or nu <= 0 are degenerate; every node in their causal future
// (larger u AND larger v) is reached only through the degeneracy, so the
// validity mask removes the whole upper-right cone of each raw-invalid node.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/goursat.hpp"
#include "charflow/grid.hpp"
#include "charflow/state.hpp"

namespace charflow {

struct JacobianField {
    Grid2D<double> analytic;  // 2 mu nu eta
    Grid2D<double> discrete;  // centered t_u r_v - t_v r_u
    double sup_gap = 0.0;     // sup |analytic - discrete| over the grid
};

inline JacobianField jacobian_field(const GoursatGrid& g, const EosModel& eos) {
    JacobianField jf{Grid2D<double>(g.n_u + 1, g.n_v + 1), Grid2D<double>(g.n_u + 1, g.n_v + 1),
                     0.0};
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = 0; j <= g.n_v; ++j) {
            const double eta = eos.eta_and_slope(g.alpha(i, j) + g.beta(i, j)).eta;
            jf.analytic(i, j) = 2.0 * g.mu(i, j) * g.nu(i, j) * eta;
            const double tu = detail::d_du(g.t, i, j, g.n_u, g.du);
            const double tv = detail::d_dv(g.t, i, j, 0, g.n_v, g.dv);
            const double ru = detail::d_du(g.r, i, j, g.n_u, g.du);
            const double rv = detail::d_dv(g.r, i, j, 0, g.n_v, g.dv);
            jf.discrete(i, j) = tu * rv - tv * ru;
            jf.sup_gap = std::max(jf.sup_gap, std::abs(jf.analytic(i, j) - jf.discrete(i, j)));
        }
    return jf;
}

struct ValidityMask {
    Grid2D<uint8_t> raw;   // 1 where mu > 0 and nu > 0
    Grid2D<uint8_t> mask;  // raw, with the causal future of every raw-invalid node removed
    int n_raw_invalid = 0;
    int n_masked = 0;  // total invalid after propagation
};

inline ValidityMask validity_mask(const GoursatGrid& g) {
    ValidityMask m{Grid2D<uint8_t>(g.n_u + 1, g.n_v + 1, 1), Grid2D<uint8_t>(g.n_u + 1, g.n_v + 1, 1),
                   0, 0};
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = 0; j <= g.n_v; ++j) {
            const bool ok = g.mu(i, j) > 0.0 && g.nu(i, j) > 0.0;
            m.raw(i, j) = ok ? 1 : 0;
            if (!ok) ++m.n_raw_invalid;
            bool reach = !ok;
            if (i > 0 && !m.mask(i - 1, j)) reach = true;
            if (j > 0 && !m.mask(i, j - 1)) reach = true;
            m.mask(i, j) = reach ? 0 : 1;
            if (reach) ++m.n_masked;
        }
    return m;
}

struct PhysicalField {
    int n_u, n_v;
    std::vector<double> u, v;
    Grid2D<double> t, r, rho, w, p;
    Grid2D<uint8_t> valid;
};

// Physical-variable view of the solved grid. Thermodynamic values are filled
// wherever chi_dagger is representable (NaN otherwise); `valid` is the
// propagated hodograph mask.
inline PhysicalField to_physical(const GoursatGrid& g, const EosModel& eos) {
    PhysicalField f{g.n_u, g.n_v, g.u, g.v,
                    g.t, g.r,
                    Grid2D<double>(g.n_u + 1, g.n_v + 1),
                    Grid2D<double>(g.n_u + 1, g.n_v + 1),
                    Grid2D<double>(g.n_u + 1, g.n_v + 1),
                    validity_mask(g).mask};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = 0; j <= g.n_v; ++j) {
            const CharState c{g.alpha(i, j), g.beta(i, j)};
            try {
                const FluidState s = from_invariants(c, eos);
                f.rho(i, j) = s.rho;
                f.w(i, j) = s.w;
                f.p(i, j) = eos.pressure(s.rho);
            } catch (const SolverError&) {
                f.rho(i, j) = nan;
                f.w(i, j) = nan;
                f.p(i, j) = nan;
            }
        }
    return f;
}

// Residuals of the physical-space fluid equations, evaluated on the (u,v)
// grid by pushing derivatives through the inverse of the hodograph Jacobian:
//   f_t = (f_u r_v - f_v r_u) / J,   f_r = (f_v t_u - f_u t_v) / J.
// continuity: rho_t + (rho w)_r + 2 rho w / r   (last term only in spherical mode)
// momentum:   w_t + w w_r + p_r / rho
struct EulerResiduals {
    Grid2D<double> continuity, momentum;  // NaN where not evaluated
    double sup_continuity = 0.0, sup_momentum = 0.0;
    double rms_continuity = 0.0, rms_momentum = 0.0;
    int n_evaluated = 0;
};

inline EulerResiduals euler_residuals(const GoursatGrid& g, const EosModel& eos, Geometry geom) {
    const int nu = g.n_u, nv = g.n_v;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EulerResiduals res{Grid2D<double>(nu + 1, nv + 1, nan), Grid2D<double>(nu + 1, nv + 1, nan),
                       0, 0, 0, 0, 0};
    const PhysicalField f = to_physical(g, eos);

    // A node is evaluable when every point its difference stencils can touch
    // (within distance 2 along each axis, clipped to the grid) is valid.
    auto stencil_valid = [&](int i, int j) {
        for (int k = std::max(0, i - 2); k <= std::min(nu, i + 2); ++k)
            if (!f.valid(k, j)) return false;
        for (int k = std::max(0, j - 2); k <= std::min(nv, j + 2); ++k)
            if (!f.valid(i, k)) return false;
        return true;
    };

    double ss_c = 0.0, ss_m = 0.0;
    for (int i = 0; i <= nu; ++i)
        for (int j = 0; j <= nv; ++j) {
            if (!stencil_valid(i, j)) continue;
            const double tu = detail::d_du(g.t, i, j, nu, g.du);
            const double tv = detail::d_dv(g.t, i, j, 0, nv, g.dv);
            const double ru = detail::d_du(g.r, i, j, nu, g.du);
            const double rv = detail::d_dv(g.r, i, j, 0, nv, g.dv);
            const double J = tu * rv - tv * ru;
            if (!(std::abs(J) > 0.0)) continue;
            auto ddt = [&](const Grid2D<double>& q) {
                return (detail::d_du(q, i, j, nu, g.du) * rv -
                        detail::d_dv(q, i, j, 0, nv, g.dv) * ru) / J;
            };
            auto ddr = [&](const Grid2D<double>& q) {
                return (detail::d_dv(q, i, j, 0, nv, g.dv) * tu -
                        detail::d_du(q, i, j, nu, g.du) * tv) / J;
            };
            const double rho = f.rho(i, j), w = f.w(i, j), r = f.r(i, j);
            const double rho_t = ddt(f.rho), rho_r = ddr(f.rho);
            const double w_t = ddt(f.w), w_r = ddr(f.w);
            const double p_r = ddr(f.p);
            double cont = rho_t + rho_r * w + rho * w_r;
            if (geom == Geometry::spherical) cont += 2.0 * rho * w / r;
            const double mom = w_t + w * w_r + p_r / rho;
            res.continuity(i, j) = cont;
            res.momentum(i, j) = mom;
            res.sup_continuity = std::max(res.sup_continuity, std::abs(cont));
            res.sup_momentum = std::max(res.sup_momentum, std::abs(mom));
            ss_c += cont * cont;
            ss_m += mom * mom;
            ++res.n_evaluated;
        }
    if (res.n_evaluated > 0) {
        res.rms_continuity = std::sqrt(ss_c / res.n_evaluated);
        res.rms_momentum = std::sqrt(ss_m / res.n_evaluated);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Regular (t, r) raster of the physical fields
// ---------------------------------------------------------------------------

struct RasterField {
    int nt, nr;
    std::vector<double> t_axis, r_axis;
    Grid2D<double> rho, w, p;      // NaN where uncovered
    Grid2D<uint8_t> covered;
};

namespace detail {

// Invert the bilinear map of one quad by Newton iteration. Returns true and
// the local coordinates (s, q) in [0,1]^2 when the point lies inside.
inline bool invert_bilinear(const double tx[4], const double rx[4], double tp, double rp,
                            double& s, double& q) {
    s = 0.5;
    q = 0.5;
    for (int it = 0; it < 25; ++it) {
        const double ft = tx[0] + (tx[1] - tx[0]) * s + (tx[2] - tx[0]) * q +
                          (tx[3] - tx[1] - tx[2] + tx[0]) * s * q - tp;
        const double fr = rx[0] + (rx[1] - rx[0]) * s + (rx[2] - rx[0]) * q +
                          (rx[3] - rx[1] - rx[2] + rx[0]) * s * q - rp;
        const double jts = (tx[1] - tx[0]) + (tx[3] - tx[1] - tx[2] + tx[0]) * q;
        const double jtq = (tx[2] - tx[0]) + (tx[3] - tx[1] - tx[2] + tx[0]) * s;
        const double jrs = (rx[1] - rx[0]) + (rx[3] - rx[1] - rx[2] + rx[0]) * q;
        const double jrq = (rx[2] - rx[0]) + (rx[3] - rx[1] - rx[2] + rx[0]) * s;
        const double det = jts * jrq - jtq * jrs;
        if (!(std::abs(det) > 0.0)) return false;
        const double ds = (ft * jrq - fr * jtq) / det;
        const double dq = (fr * jts - ft * jrs) / det;
        s -= ds;
        q -= dq;
        if (std::abs(ds) + std::abs(dq) < 1e-14) break;
        if (s < -2.0 || s > 3.0 || q < -2.0 || q > 3.0) return false;  // diverging
    }
    const double slack = 1e-9;
    return s >= -slack && s <= 1.0 + slack && q >= -slack && q <= 1.0 + slack;
}

}  // namespace detail

inline RasterField raster_physical(const PhysicalField& f, int nt, int nr) {
    if (nt < 2 || nr < 2) throw ConfigError("raster needs at least 2 samples per axis");
    double t_lo = std::numeric_limits<double>::infinity(), t_hi = -t_lo;
    double r_lo = t_lo, r_hi = -t_lo;
    for (int i = 0; i <= f.n_u; ++i)
        for (int j = 0; j <= f.n_v; ++j) {
            if (!f.valid(i, j)) continue;
            t_lo = std::min(t_lo, f.t(i, j));
            t_hi = std::max(t_hi, f.t(i, j));
            r_lo = std::min(r_lo, f.r(i, j));
            r_hi = std::max(r_hi, f.r(i, j));
        }
    if (!(t_hi > t_lo) || !(r_hi > r_lo)) throw EmptyDomain("no valid nodes to raster");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    RasterField out{nt, nr, std::vector<double>(std::size_t(nt)), std::vector<double>(std::size_t(nr)),
                    Grid2D<double>(nt, nr, nan), Grid2D<double>(nt, nr, nan),
                    Grid2D<double>(nt, nr, nan), Grid2D<uint8_t>(nt, nr, 0)};
    for (int a = 0; a < nt; ++a) out.t_axis[std::size_t(a)] = t_lo + (t_hi - t_lo) * a / (nt - 1);
    for (int b = 0; b < nr; ++b) out.r_axis[std::size_t(b)] = r_lo + (r_hi - r_lo) * b / (nr - 1);
    const double dt = (t_hi - t_lo) / (nt - 1), dr = (r_hi - r_lo) / (nr - 1);

    for (int i = 0; i < f.n_u; ++i)
        for (int j = 0; j < f.n_v; ++j) {
            if (!(f.valid(i, j) && f.valid(i + 1, j) && f.valid(i, j + 1) && f.valid(i + 1, j + 1)))
                continue;
            // corner order: (i,j), (i+1,j), (i,j+1), (i+1,j+1)
            const double tx[4] = {f.t(i, j), f.t(i + 1, j), f.t(i, j + 1), f.t(i + 1, j + 1)};
            const double rx[4] = {f.r(i, j), f.r(i + 1, j), f.r(i, j + 1), f.r(i + 1, j + 1)};
            const double qt_lo = std::min(std::min(tx[0], tx[1]), std::min(tx[2], tx[3]));
            const double qt_hi = std::max(std::max(tx[0], tx[1]), std::max(tx[2], tx[3]));
            const double qr_lo = std::min(std::min(rx[0], rx[1]), std::min(rx[2], rx[3]));
            const double qr_hi = std::max(std::max(rx[0], rx[1]), std::max(rx[2], rx[3]));
            const int a_lo = std::max(0, int(std::ceil((qt_lo - t_lo) / dt - 1e-12)));
            const int a_hi = std::min(nt - 1, int(std::floor((qt_hi - t_lo) / dt + 1e-12)));
            const int b_lo = std::max(0, int(std::ceil((qr_lo - r_lo) / dr - 1e-12)));
            const int b_hi = std::min(nr - 1, int(std::floor((qr_hi - r_lo) / dr + 1e-12)));
            for (int a = a_lo; a <= a_hi; ++a)
                for (int b = b_lo; b <= b_hi; ++b) {
                    if (out.covered(a, b)) continue;
                    double s, q;
                    if (!detail::invert_bilinear(tx, rx, out.t_axis[std::size_t(a)],
                                                 out.r_axis[std::size_t(b)], s, q))
                        continue;
                    s = std::clamp(s, 0.0, 1.0);
                    q = std::clamp(q, 0.0, 1.0);
                    auto blend = [&](const Grid2D<double>& g2) {
                        const double f00 = g2(i, j), f10 = g2(i + 1, j);
                        const double f01 = g2(i, j + 1), f11 = g2(i + 1, j + 1);
                        return f00 * (1 - s) * (1 - q) + f10 * s * (1 - q) + f01 * (1 - s) * q +
                               f11 * s * q;
                    };
                    out.rho(a, b) = blend(f.rho);
                    out.w(a, b) = blend(f.w);
                    out.p(a, b) = blend(f.p);
                    out.covered(a, b) = 1;
                }
        }
    return out;
}

}  // namespace charflow
