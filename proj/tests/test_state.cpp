#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/state.hpp"

using namespace charflow;

namespace {

EosModel reference_eos() { return EosModel::polytropic(2.0, 0.5, 0.0); }

}  // namespace

TEST_CASE("fluid state and invariants convert exactly at a rational point") {
    const EosModel eos = reference_eos();
    const FluidState f{4.0, 1.0};  // chi_dagger(4) = 8

    const CharState c = to_invariants(f, eos);
    CHECK(c.alpha == 5.0);
    CHECK(c.beta == 3.0);
    CHECK(c.chi() == 2.0);
    CHECK(c.chi_dagger() == 8.0);

    const FluidState back = from_invariants(c, eos);
    CHECK(back.rho == 4.0);
    CHECK(back.w == 1.0);
}

TEST_CASE("invariant round trip over a range of states") {
    const EosModel eos = reference_eos();
    for (double rho : {0.3, 1.0, 2.5, 10.0})
        for (double w : {-1.5, 0.0, 0.7}) {
            const CharState c = to_invariants({rho, w}, eos);
            const FluidState f = from_invariants(c, eos);
            CHECK(std::abs(f.rho - rho) <= 1e-12 * rho);
            CHECK(std::abs(f.w - w) <= 1e-14);
        }
}

TEST_CASE("characteristic speeds are velocity plus/minus sound speed") {
    const EosModel eos = reference_eos();
    const CharState c{5.0, 3.0};  // w = 1, eta = 2
    const auto [cp, cm] = char_speeds(c, eos);
    CHECK(cp == 3.0);
    CHECK(cm == -1.0);
}

TEST_CASE("source term value, geometry, and positivity guard") {
    const EosModel eos = reference_eos();
    const CharState c{5.0, 3.0};  // chi = 2, eta = 2

    CHECK(source_term(c, 2.0, Geometry::spherical, eos) == -2.0);
    CHECK(source_term(c, 2.0, Geometry::plane, eos) == 0.0);
    CHECK_THROWS_AS(source_term(c, 0.0, Geometry::spherical, eos), DomainError);
    CHECK_THROWS_AS(source_term(c, -1.0, Geometry::spherical, eos), DomainError);
    // regardless of r in plane mode
    CHECK(source_term(c, -1.0, Geometry::plane, eos) == 0.0);
}

TEST_CASE("speed gradients match the constant-slope polytrope") {
    const EosModel eos = reference_eos();  // deta/dchi = 1/4 everywhere
    const SpeedGradients g = speed_gradients({5.0, 3.0}, eos);
    CHECK(g.dcp_dalpha == 0.75);
    CHECK(g.dcp_dbeta == -0.25);
    CHECK(g.dcm_dalpha == 0.25);
    CHECK(g.dcm_dbeta == -0.75);

    // consistency with finite differences of the speeds themselves
    const double h = 1e-6;
    auto cp_of = [&](double a, double b) { return char_speeds({a, b}, eos).first; };
    auto cm_of = [&](double a, double b) { return char_speeds({a, b}, eos).second; };
    CHECK(g.dcp_dalpha ==
          Catch::Approx((cp_of(5 + h, 3) - cp_of(5 - h, 3)) / (2 * h)).margin(1e-8));
    CHECK(g.dcp_dbeta ==
          Catch::Approx((cp_of(5, 3 + h) - cp_of(5, 3 - h)) / (2 * h)).margin(1e-8));
    CHECK(g.dcm_dalpha ==
          Catch::Approx((cm_of(5 + h, 3) - cm_of(5 - h, 3)) / (2 * h)).margin(1e-8));
    CHECK(g.dcm_dbeta ==
          Catch::Approx((cm_of(5, 3 + h) - cm_of(5, 3 - h)) / (2 * h)).margin(1e-8));
}

TEST_CASE("source gradients match finite differences of the source term") {
    const EosModel eos = reference_eos();
    const double a = 5.0, b = 3.0, r = 2.0, h = 1e-6;
    const SourceGradients g = source_gradients({a, b}, r, Geometry::spherical, eos);

    auto F = [&](double aa, double bb, double rr) {
        return source_term({aa, bb}, rr, Geometry::spherical, eos);
    };
    CHECK(g.dF_dalpha == Catch::Approx((F(a + h, b, r) - F(a - h, b, r)) / (2 * h)).margin(1e-7));
    CHECK(g.dF_dbeta == Catch::Approx((F(a, b + h, r) - F(a, b - h, r)) / (2 * h)).margin(1e-7));
    CHECK(g.dF_dr == Catch::Approx((F(a, b, r + h) - F(a, b, r - h)) / (2 * h)).margin(1e-7));

    // closed forms at this point: eta = 2, eta' = 1/4, chi = 2
    CHECK(g.dF_dalpha == Catch::Approx(-(0.25 * 2 + 2) / 2).epsilon(1e-14));
    CHECK(g.dF_dbeta == Catch::Approx(-(0.25 * 2 - 2) / 2).epsilon(1e-14));
    CHECK(g.dF_dr == Catch::Approx(2.0 * 2.0 / 4.0).epsilon(1e-14));

    const SourceGradients zero = source_gradients({a, b}, r, Geometry::plane, eos);
    CHECK(zero.dF_dalpha == 0.0);
    CHECK(zero.dF_dbeta == 0.0);
    CHECK(zero.dF_dr == 0.0);
    CHECK_THROWS_AS(source_gradients({a, b}, 0.0, Geometry::spherical, eos), DomainError);
}
