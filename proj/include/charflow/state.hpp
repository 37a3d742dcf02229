#pragma once

// Pointwise fluid state <-> Riemann invariant conversions and the local
// characteristic quantities built on them:
//
//   alpha = chi_dagger(rho)/2 + w        beta = chi_dagger(rho)/2 - w
//   c+    = w + eta                      c-   = w - eta
//   F     = -(eta/r) (alpha - beta)      (spherical source; 0 in plane mode)

#include <utility>

#include "charflow/eos.hpp"
#include "charflow/errors.hpp"

namespace charflow {

struct FluidState {
    double rho;  // density
    double w;    // radial velocity
};

struct CharState {
    double alpha;
    double beta;
    double chi() const { return alpha - beta; }          // = 2w
    double chi_dagger() const { return alpha + beta; }   // density part
};

enum class Geometry { spherical, plane };

inline CharState to_invariants(const FluidState& f, const EosModel& eos) {
    const double half_chi = 0.5 * eos.chi_dagger(f.rho);
    return {half_chi + f.w, half_chi - f.w};
}

inline FluidState from_invariants(const CharState& c, const EosModel& eos) {
    return {eos.rho_of_chi_dagger(c.chi_dagger()), 0.5 * c.chi()};
}

// (c+, c-) at a characteristic state.
inline std::pair<double, double> char_speeds(const CharState& c, const EosModel& eos) {
    const double w = 0.5 * c.chi();
    const double eta = eos.eta_and_slope(c.chi_dagger()).eta;
    return {w + eta, w - eta};
}

inline double source_term(const CharState& c, double r, Geometry geom, const EosModel& eos) {
    if (geom == Geometry::plane) return 0.0;
    if (!(r > 0.0)) throw DomainError("source term needs r > 0");
    const double eta = eos.eta_and_slope(c.chi_dagger()).eta;
    return -eta / r * c.chi();
}

// Partial derivatives of the characteristic speeds with respect to the
// invariants; etap = d eta / d chi_dagger.
struct SpeedGradients {
    double dcp_dalpha, dcp_dbeta, dcm_dalpha, dcm_dbeta;
};

inline SpeedGradients speed_gradients(const CharState& c, const EosModel& eos) {
    const double etap = eos.eta_and_slope(c.chi_dagger()).deta_dchi;
    return {0.5 + etap, -0.5 + etap, 0.5 - etap, -0.5 - etap};
}

// Partial derivatives of the source F(alpha, beta, r); all zero in plane mode.
struct SourceGradients {
    double dF_dalpha, dF_dbeta, dF_dr;
};

inline SourceGradients source_gradients(const CharState& c, double r, Geometry geom,
                                        const EosModel& eos) {
    if (geom == Geometry::plane) return {0.0, 0.0, 0.0};
    if (!(r > 0.0)) throw DomainError("source gradients need r > 0");
    const auto [eta, etap] = eos.eta_and_slope(c.chi_dagger());
    const double chi = c.chi();
    return {-(etap * chi + eta) / r, -(etap * chi - eta) / r, eta * chi / (r * r)};
}

}  // namespace charflow
