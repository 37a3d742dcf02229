#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "charflow/eos.hpp"
#include "charflow/errors.hpp"

using charflow::DomainError;
using charflow::EosModel;
using charflow::RangeError;

namespace {

// gamma = 2, kappa = 1/2 has closed forms that stay rational at integer
// densities: p = rho^2 / 2, eta = sqrt(rho), chi_dagger = 4 sqrt(rho).
EosModel reference_eos() { return EosModel::polytropic(2.0, 0.5, 0.0); }

}  // namespace

TEST_CASE("polytropic closed forms at exactly representable points") {
    const EosModel eos = reference_eos();

    CHECK(eos.pressure(4.0) == 8.0);
    CHECK(eos.sound_speed(4.0) == 2.0);
    CHECK(eos.sound_speed(9.0) == 3.0);
    CHECK(eos.chi_dagger(9.0) == 12.0);
    CHECK(eos.chi_dagger(4.0) == 8.0);

    const auto es = eos.eta_and_slope(8.0);
    CHECK(es.eta == 2.0);
    CHECK(es.deta_dchi == 0.25);
    CHECK(eos.rho_of_chi_dagger(12.0) == 9.0);
}

TEST_CASE("density <-> chi_dagger round trip across the domain") {
    const EosModel eos = reference_eos();
    for (double rho : {1e-5, 1e-3, 0.1, 0.5, 1.0, 2.0, 37.0, 1e3, 1e5}) {
        const double chi = eos.chi_dagger(rho);
        const double back = eos.rho_of_chi_dagger(chi);
        CHECK(std::abs(back - rho) <= 1e-12 * rho);
        // chi_dagger must increase with density
        CHECK(eos.chi_dagger(rho * 1.01) > chi);
    }
}

TEST_CASE("eta slope and log-density slope agree with finite differences") {
    const EosModel eos = EosModel::polytropic(1.4, 1.0, 0.0);
    const double chi = eos.chi_dagger(2.0);
    const double h = 1e-5;

    const double eta_fd =
        (eos.eta_and_slope(chi + h).eta - eos.eta_and_slope(chi - h).eta) / (2.0 * h);
    CHECK(std::abs(eos.eta_and_slope(chi).deta_dchi - eta_fd) <= 1e-9);
    // for a polytrope the slope is the constant (gamma - 1)/4
    CHECK(eos.eta_and_slope(chi).deta_dchi == Catch::Approx(0.1).epsilon(1e-14));

    const double lr_fd = (std::log(eos.rho_of_chi_dagger(chi + h)) -
                          std::log(eos.rho_of_chi_dagger(chi - h))) /
                         (2.0 * h);
    CHECK(std::abs(eos.dlogrho_dchi(chi) - lr_fd) <= 1e-8);
}

TEST_CASE("reference density shifts chi_dagger without changing the flow map") {
    // chi_dagger is an antiderivative; moving its base point is a pure gauge
    // shift by a constant.
    const EosModel base = reference_eos();
    const EosModel shifted = EosModel::polytropic(2.0, 0.5, 1.0);

    CHECK(shifted.chi_dagger(9.0) == Catch::Approx(8.0).epsilon(1e-14));
    const double offset = base.chi_dagger(1.0);  // = 4
    for (double rho : {0.25, 1.0, 2.25, 9.0}) {
        CHECK(shifted.chi_dagger(rho) ==
              Catch::Approx(base.chi_dagger(rho) - offset).epsilon(1e-13));
        // eta and pressure are gauge independent
        CHECK(shifted.sound_speed(rho) == base.sound_speed(rho));
        CHECK(shifted.pressure(rho) == base.pressure(rho));
    }
}

TEST_CASE("constructor and domain validation") {
    CHECK_THROWS_AS(EosModel::polytropic(1.0, 0.5), DomainError);   // gamma <= 1
    CHECK_THROWS_AS(EosModel::polytropic(2.0, 0.0), DomainError);   // kappa <= 0
    CHECK_THROWS_AS(EosModel::polytropic(2.0, 0.5, -1.0), DomainError);
    CHECK_THROWS_AS(EosModel::polytropic(2.0, 0.5, 0.0, 1.0, 0.5), DomainError);

    const EosModel eos = EosModel::polytropic(2.0, 0.5, 0.0, 1e-3, 1e3);
    CHECK_THROWS_AS(eos.pressure(1e-6), DomainError);
    CHECK_THROWS_AS(eos.pressure(1e6), DomainError);
    CHECK_THROWS_AS(eos.rho_of_chi_dagger(eos.chi_domain().second + 1.0), RangeError);
    CHECK_THROWS_AS(eos.eta_and_slope(eos.chi_domain().first - 1.0), RangeError);
    // boundary values themselves are fine
    CHECK_NOTHROW(eos.pressure(1e-3));
    CHECK_NOTHROW(eos.rho_of_chi_dagger(eos.chi_domain().second));
}

TEST_CASE("tabulated backend reproduces a sampled polytrope") {
    // Sample p = rho^2/2 densely; both models use the same in-table reference
    // density so their chi_dagger gauges match.
    const int n = 161;
    std::vector<double> rho(n), p(n);
    for (int k = 0; k < n; ++k) {
        rho[std::size_t(k)] = 0.5 + 1.5 * k / (n - 1);
        p[std::size_t(k)] = 0.5 * rho[std::size_t(k)] * rho[std::size_t(k)];
    }
    const EosModel tab = EosModel::tabulated(rho, p, 1.0);
    const EosModel poly = EosModel::polytropic(2.0, 0.5, 1.0, 0.5, 2.0);

    CHECK(tab.kind() == EosModel::Kind::tabulated);
    for (double x : {0.6, 0.9, 1.3, 1.9}) {
        CHECK(tab.pressure(x) == Catch::Approx(poly.pressure(x)).margin(5e-7));
        CHECK(tab.sound_speed(x) == Catch::Approx(poly.sound_speed(x)).margin(5e-5));
        const double chi = poly.chi_dagger(x);
        CHECK(tab.chi_dagger(x) == Catch::Approx(chi).margin(2e-4));
        CHECK(tab.rho_of_chi_dagger(tab.chi_dagger(x)) == Catch::Approx(x).margin(1e-10));
        const auto es = tab.eta_and_slope(tab.chi_dagger(x));
        CHECK(es.eta == Catch::Approx(poly.sound_speed(x)).margin(5e-5));
        CHECK(es.deta_dchi == Catch::Approx(0.25).margin(5e-3));
    }
}

TEST_CASE("tabulated backend rejects malformed tables") {
    const std::vector<double> rho{1.0, 2.0, 3.0, 4.0};
    CHECK_THROWS_AS(EosModel::tabulated({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 1.5), DomainError);
    CHECK_THROWS_AS(EosModel::tabulated({1.0, 2.0, 2.0, 4.0}, {1.0, 2.0, 3.0, 4.0}, 1.5),
                    DomainError);  // rho not strictly increasing
    CHECK_THROWS_AS(EosModel::tabulated(rho, {1.0, 2.0, 2.0, 4.0}, 1.5),
                    DomainError);  // dp/drho <= 0 on a cell
    CHECK_THROWS_AS(EosModel::tabulated(rho, {1.0, 2.0, 3.0, 4.0}, 1.5),
                    DomainError);  // linear: not strictly convex
    CHECK_THROWS_AS(EosModel::tabulated(rho, {0.5, 2.0, 4.5, 8.0}, 0.5),
                    DomainError);  // rho_ref outside the table
    CHECK_NOTHROW(EosModel::tabulated(rho, {0.5, 2.0, 4.5, 8.0}, 1.5));
}
