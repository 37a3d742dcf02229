#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "charflow/constraints.hpp"
#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/numerics.hpp"

using namespace charflow;

namespace {

EosModel reference_eos() { return EosModel::polytropic(2.0, 0.5, 0.0); }

// Constant invariants alpha = beta = 2 give a fluid at rest with rho = 1,
// eta = 1, so c+/- = +/-1 and the radius moves linearly along each line.
FreeData static_plus(int n = 65, double r0 = 1.0) {
    return sample_free_data(Side::cplus, 1.0, n, [](double) { return 2.0; }, 2.0, r0);
}
FreeData static_minus(int n = 65, double r0 = 1.0, double extent = 0.5) {
    return sample_free_data(Side::cminus, extent, n, [](double) { return 2.0; }, 2.0, r0);
}

// Mildly varying data used for the pinned-value and convergence checks.
FreeData wave_plus(int n) {
    return sample_free_data(
        Side::cplus, 1.0, n, [](double v) { return 2.0 + 0.1 * std::sin(v); }, 2.0, 2.0);
}
FreeData ramp_minus(int n) {
    return sample_free_data(
        Side::cminus, 0.5, n, [](double u) { return 2.0 + 0.1 * u; }, 2.0, 2.0);
}

}  // namespace

TEST_CASE("a fluid at rest stays at rest along both characteristics") {
    const EosModel eos = reference_eos();

    const CharacteristicData cp = solve_cplus(static_plus(), eos, Geometry::spherical);
    REQUIRE(cp.n() == 65);
    for (int k = 0; k < cp.n(); ++k) {
        const auto ks = std::size_t(k);
        CHECK(cp.alpha[ks] == 2.0);  // source vanishes identically, bit for bit
        CHECK(cp.beta[ks] == 2.0);
        CHECK(cp.t[ks] == cp.param[ks]);
        CHECK(cp.r[ks] == Catch::Approx(1.0 + cp.param[ks]).margin(1e-13));
    }

    const CharacteristicData cm = solve_cminus(static_minus(), eos, Geometry::spherical, 1e-3);
    REQUIRE(cm.n() == 65);
    CHECK_FALSE(cm.truncated);
    for (int k = 0; k < cm.n(); ++k) {
        const auto ks = std::size_t(k);
        CHECK(cm.alpha[ks] == 2.0);
        CHECK(cm.beta[ks] == 2.0);
        CHECK(cm.r[ks] == Catch::Approx(1.0 - cm.param[ks]).margin(1e-13));
    }
}

TEST_CASE("radius guard truncates the inbound characteristic one node early") {
    const EosModel eos = reference_eos();
    // r(u) = 1 - u crosses eps = 0.1 at u = 0.9; the node there has r == eps,
    // which is not strictly above the guard, so the last kept node is u = 0.89.
    const CharacteristicData cm =
        solve_cminus(static_minus(101, 1.0, 1.0), eos, Geometry::spherical, 0.1);
    CHECK(cm.truncated);
    CHECK(cm.n() == 90);
    CHECK(cm.u_bar == Catch::Approx(0.89).margin(1e-12));
    CHECK(cm.r.back() == Catch::Approx(0.11).margin(1e-12));
    CHECK(cm.r.back() > 0.1);

    // guard configuration errors
    CHECK_THROWS_AS(solve_cminus(static_minus(), eos, Geometry::spherical, 0.0), ConfigError);
    CHECK_THROWS_AS(solve_cminus(static_minus(), eos, Geometry::spherical, 2.0), ConfigError);
}

TEST_CASE("first-order data on a fluid at rest is the pure gauge solution") {
    const EosModel eos = reference_eos();
    const CharacteristicData cp =
        derived_first_order(solve_cplus(static_plus(), eos, Geometry::spherical), 0.0, eos,
                            Geometry::spherical);
    REQUIRE(cp.has_first_order);
    for (int k = 0; k < cp.n(); ++k) {
        const auto ks = std::size_t(k);
        CHECK(cp.gamma[ks] == 0.0);
        CHECK(cp.mu[ks] == 1.0);
        CHECK(cp.delta[ks] == 0.0);
        CHECK(cp.nu[ks] == 1.0);
    }

    const CharacteristicData cm =
        derived_first_order(solve_cminus(static_minus(), eos, Geometry::spherical, 1e-3), 0.0,
                            eos, Geometry::spherical);
    REQUIRE(cm.has_first_order);
    for (int k = 0; k < cm.n(); ++k) {
        const auto ks = std::size_t(k);
        CHECK(cm.delta[ks] == 0.0);
        CHECK(cm.nu[ks] == 1.0);
        CHECK(cm.gamma[ks] == 0.0);
        CHECK(cm.mu[ks] == 1.0);
    }

    const CornerReport rep = corner_compatibility(cp, cm);
    CHECK(rep.max_abs() == 0.0);
}

TEST_CASE("plane geometry transports the invariants unchanged") {
    const EosModel eos = reference_eos();
    const CharacteristicData cp = derived_first_order(
        solve_cplus(wave_plus(65), eos, Geometry::plane), 0.1, eos, Geometry::plane);
    for (int k = 0; k < cp.n(); ++k) {
        const auto ks = std::size_t(k);
        // no source: alpha and the cross-derivative gamma are constant along
        // C+, bit for bit; mu still evolves through the speed gradients
        CHECK(cp.alpha[ks] == 2.0);
        CHECK(cp.gamma[ks] == 0.1);
        CHECK(cp.nu[ks] == 1.0);
        CHECK(cp.mu[ks] > 0.0);
    }
    CHECK(cp.mu[0] == 1.0);
}

TEST_CASE("solved characteristics match independently integrated reference values") {
    // Reference values were produced by a high-order adaptive integration of
    // the same first-order characteristic system in exact-symbolic form,
    // evaluated for gamma = 2, kappa = 1/2, r0 = 2, beta+ = 2 + sin(v)/10 on
    // [0, 1] and alpha- = 2 + u/10 on [0, 1/2].
    const EosModel eos = reference_eos();
    const int n = 129;

    const CharacteristicData cp = derived_first_order(
        solve_cplus(wave_plus(n), eos, Geometry::spherical), 0.1, eos, Geometry::spherical);
    REQUIRE(cp.n() == n);
    const double tol = 1e-10;
    // midpoint v = 1/2 (node 64) and endpoint v = 1 (node 128)
    CHECK(cp.alpha[64] == Catch::Approx(2.0049384609705565).margin(tol));
    CHECK(cp.r[64] == Catch::Approx(2.4975946822727839).margin(tol));
    CHECK(cp.gamma[64] == Catch::Approx(0.083625337209419379).margin(tol));
    CHECK(cp.mu[64] == Catch::Approx(0.96675234609253091).margin(tol));
    CHECK(cp.alpha[128] == Catch::Approx(2.015564742208273).margin(tol));
    CHECK(cp.r[128] == Catch::Approx(2.9929134375079185).margin(tol));
    CHECK(cp.gamma[128] == Catch::Approx(0.076162483326791083).margin(tol));
    CHECK(cp.mu[128] == Catch::Approx(0.9418907070838809).margin(tol));

    const CharacteristicData cm = derived_first_order(
        solve_cminus(ramp_minus(n), eos, Geometry::spherical, 1e-3), 0.1, eos,
        Geometry::spherical);
    REQUIRE(cm.n() == n);
    // midpoint u = 1/4 (node 64) and endpoint u = 1/2 (node 128)
    CHECK(cm.beta[64] == Catch::Approx(1.9982073235857485).margin(tol));
    CHECK(cm.r[64] == Catch::Approx(1.7508894065125453).margin(tol));
    CHECK(cm.delta[64] == Catch::Approx(0.11647227690492412).margin(tol));
    CHECK(cm.nu[64] == Catch::Approx(0.98025476922480548).margin(tol));
    CHECK(cm.beta[128] == Catch::Approx(1.9916098081502438).margin(tol));
    CHECK(cm.r[128] == Catch::Approx(1.5040951256076365).margin(tol));
    CHECK(cm.delta[128] == Catch::Approx(0.14516031731732362).margin(tol));
    CHECK(cm.nu[128] == Catch::Approx(0.95762408378074049).margin(tol));
}

TEST_CASE("characteristic solves self-converge at fourth order") {
    const EosModel eos = reference_eos();
    auto solve_at = [&](int n) {
        return derived_first_order(solve_cplus(wave_plus(n), eos, Geometry::spherical), 0.1,
                                   eos, Geometry::spherical);
    };
    const CharacteristicData a = solve_at(33), b = solve_at(65), c = solve_at(129);

    auto gap = [](const std::vector<double>& coarse, const std::vector<double>& fine) {
        double sup = 0.0;
        for (std::size_t m = 0; m < coarse.size(); ++m)
            sup = std::max(sup, std::abs(coarse[m] - fine[2 * m]));
        return sup;
    };
    auto order_of = [&](std::vector<double> CharacteristicData::* field) {
        const double d1 = gap(a.*field, b.*field);
        const double d2 = gap(b.*field, c.*field);
        REQUIRE(d2 > 0.0);
        return std::log2(d1 / d2);
    };
    for (auto field : {&CharacteristicData::alpha, &CharacteristicData::r}) {
        const double order = order_of(field);
        CHECK(order >= 3.7);
        CHECK(order <= 4.3);
    }
    // the first-order transport feeds on an interpolated data slope, which
    // costs a fraction of an order at coarse resolution
    for (auto field : {&CharacteristicData::gamma, &CharacteristicData::mu}) {
        const double order = order_of(field);
        CHECK(order >= 3.0);
        CHECK(order <= 4.5);
    }
}

TEST_CASE("corner compatibility flags mismatched corners") {
    const EosModel eos = reference_eos();
    // corner slopes follow the pipeline convention: each line's gamma(0) /
    // delta(0) seed is the discrete slope of the *other* line's free datum
    const CharacteristicData cp0 = solve_cplus(wave_plus(65), eos, Geometry::spherical);
    const CharacteristicData cm0 =
        solve_cminus(ramp_minus(65), eos, Geometry::spherical, 1e-3);
    const double gamma0 = num::derivative4(cm0.alpha, cm0.dx)[0];
    const double delta0 = num::derivative4(cp0.beta, cp0.dx)[0];
    const CharacteristicData cp =
        derived_first_order(cp0, gamma0, eos, Geometry::spherical);
    const CharacteristicData cm =
        derived_first_order(cm0, delta0, eos, Geometry::spherical);

    const CornerReport rep = corner_compatibility(cp, cm);
    CHECK(rep.max_abs() <= 1e-13);

    // shifted radius on one side must show up in the report
    const CharacteristicData cm_off = derived_first_order(
        solve_cminus(sample_free_data(
                         Side::cminus, 0.5, 65, [](double u) { return 2.0 + 0.1 * u; }, 2.0, 2.5),
                     eos, Geometry::spherical, 1e-3),
        delta0, eos, Geometry::spherical);
    CHECK(corner_compatibility(cp, cm_off).d_r == Catch::Approx(-0.5).margin(1e-14));

    CHECK_THROWS_AS(corner_compatibility(cm, cp), ConfigError);  // sides swapped
    const CharacteristicData bare = solve_cplus(wave_plus(65), eos, Geometry::spherical);
    CHECK_THROWS_AS(corner_compatibility(bare, cm), ConfigError);  // no first-order data
}

TEST_CASE("free data construction rejects malformed input") {
    const std::vector<double> p{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> y{2.0, 2.0, 2.0, 2.0, 2.0};
    const Corner c{2.0, 2.0, 0.0, 1.0};

    CHECK_NOTHROW(FreeData(Side::cplus, p, y, c));
    CHECK_THROWS_AS(FreeData(Side::cplus, p, {2.0, 2.0, 2.0}, c), ConfigError);  // size mismatch
    CHECK_THROWS_AS(FreeData(Side::cplus, {0.0, 0.5, 1.0}, {2.0, 2.0, 2.0}, c),
                    ConfigError);  // too few samples
    CHECK_THROWS_AS(FreeData(Side::cplus, {0.0, 0.25, 0.6, 0.75, 1.0}, y, c),
                    ConfigError);  // non-uniform grid
    CHECK_THROWS_AS(FreeData(Side::cplus, {0.1, 0.35, 0.6, 0.85, 1.1}, y, c),
                    ConfigError);  // grid must start at 0
    CHECK_THROWS_AS(FreeData(Side::cplus, p, y, Corner{2.0, 2.0, 0.0, 0.0}),
                    ConfigError);  // r0 > 0
    CHECK_THROWS_AS(FreeData(Side::cplus, p, y, Corner{2.0, 2.0, 1.0, 1.0}),
                    ConfigError);  // t0 = 0 required
    CHECK_THROWS_AS(FreeData(Side::cplus, p, y, Corner{2.0, 3.0, 0.0, 1.0}),
                    ConfigError);  // first sample must match the corner
    CHECK_THROWS_AS(sample_free_data(Side::cplus, 1.0, 4, [](double) { return 2.0; }, 2.0, 1.0),
                    ConfigError);
}
