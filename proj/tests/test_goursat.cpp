#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>

#include "charflow/constraints.hpp"
#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/goursat.hpp"
#include "charflow/numerics.hpp"

using namespace charflow;

namespace {

EosModel reference_eos() { return EosModel::polytropic(2.0, 0.5, 0.0); }

struct DataPair {
    CharacteristicData cp, cm;
};

// Constant invariants: fluid at rest, rho = 1, sound speed 1.
DataPair static_pair(const EosModel& eos, int n_minus = 9, int n_plus = 17) {
    auto fp = sample_free_data(Side::cplus, 1.0, n_plus, [](double) { return 2.0; }, 2.0, 2.0);
    auto fm = sample_free_data(Side::cminus, 0.5, n_minus, [](double) { return 2.0; }, 2.0, 2.0);
    return {derived_first_order(solve_cplus(fp, eos, Geometry::spherical), 0.0, eos,
                                Geometry::spherical),
            derived_first_order(solve_cminus(fm, eos, Geometry::spherical, 1e-3), 0.0, eos,
                                Geometry::spherical)};
}

// Mild outgoing wave over a linear ramp; corner slopes follow the pipeline
// convention (discrete slope of the opposite line's free datum).
DataPair wave_pair(const EosModel& eos, int n_minus = 9, int n_plus = 17) {
    auto fp = sample_free_data(
        Side::cplus, 1.0, n_plus, [](double v) { return 2.0 + 0.1 * std::sin(v); }, 2.0, 2.0);
    auto fm = sample_free_data(
        Side::cminus, 0.5, n_minus, [](double u) { return 2.0 + 0.1 * u; }, 2.0, 2.0);
    auto cp0 = solve_cplus(fp, eos, Geometry::spherical);
    auto cm0 = solve_cminus(fm, eos, Geometry::spherical, 1e-3);
    const double g0 = num::derivative4(cm0.alpha, cm0.dx)[0];
    const double d0 = num::derivative4(cp0.beta, cp0.dx)[0];
    return {derived_first_order(cp0, g0, eos, Geometry::spherical),
            derived_first_order(cm0, d0, eos, Geometry::spherical)};
}

double grid_gap(const GoursatGrid& a, const GoursatGrid& b) {
    double gap = 0.0;
    for (int i = 0; i <= a.n_u; ++i)
        for (int j = 0; j <= a.n_v; ++j)
            for (auto f : {&GoursatGrid::alpha, &GoursatGrid::beta, &GoursatGrid::t,
                           &GoursatGrid::r, &GoursatGrid::mu, &GoursatGrid::nu})
                gap = std::max(gap, std::abs((a.*f)(i, j) - (b.*f)(i, j)));
    return gap;
}

}  // namespace

TEST_CASE("rectangle solve reproduces the rest state exactly in one sweep") {
    const EosModel eos = reference_eos();
    const DataPair d = static_pair(eos);
    const auto [g, trace] = picard_corner(d.cp, d.cm, eos, Geometry::spherical);

    // the extended boundary data already satisfy the equations, so the first
    // sweep changes nothing and the iteration stops immediately
    CHECK(trace.converged);
    CHECK(trace.iterations() == 1);
    CHECK(trace.records.back().scaled == 0.0);

    REQUIRE(g.n_u == 8);
    REQUIRE(g.n_v == 16);
    for (int i = 0; i <= g.n_u; ++i)
        for (int j = 0; j <= g.n_v; ++j) {
            CHECK(g.alpha(i, j) == 2.0);
            CHECK(g.beta(i, j) == 2.0);
            CHECK(g.mu(i, j) == 1.0);
            CHECK(g.nu(i, j) == 1.0);
            // t = u + v and r = r0 - u + v (speeds are exactly -1 and +1);
            // both grids use power-of-two spacings, so sums are exact
            CHECK(g.t(i, j) == Catch::Approx(g.u[std::size_t(i)] + g.v[std::size_t(j)])
                                   .margin(1e-14));
            CHECK(g.r(i, j) ==
                  Catch::Approx(2.0 - g.u[std::size_t(i)] + g.v[std::size_t(j)]).margin(1e-14));
            CHECK(g.valid(i, j) == 1);
        }
}

TEST_CASE("iteration trace contracts on smooth data") {
    const EosModel eos = reference_eos();
    const DataPair d = wave_pair(eos);
    PicardOptions opt;
    opt.tol = 1e-12;
    const auto [g, trace] = picard_corner(d.cp, d.cm, eos, Geometry::spherical, opt);

    CHECK(trace.converged);
    CHECK(trace.iterations() >= 3);
    CHECK(trace.records.back().scaled < 1e-12);
    // successive update norms shrink geometrically once the sweep couples
    for (std::size_t k = 2; k + 1 < trace.records.size(); ++k)
        CHECK(trace.records[k + 1].scaled < trace.records[k].scaled);
}

TEST_CASE("two independent solvers agree within discretization error") {
    const EosModel eos = reference_eos();
    const DataPair d = wave_pair(eos);
    const auto [g, trace] = picard_corner(d.cp, d.cm, eos, Geometry::spherical);
    const GoursatGrid oracle = marching_oracle(d.cp, d.cm, eos, Geometry::spherical);

    // measured ~1.6e-5 at this resolution; an order of magnitude of headroom
    CHECK(grid_gap(g, oracle) < 1e-4);

    // on constant data both schemes are exact, so they agree to rounding
    const DataPair s = static_pair(eos);
    const auto [gs, ts] = picard_corner(s.cp, s.cm, eos, Geometry::spherical);
    CHECK(grid_gap(gs, marching_oracle(s.cp, s.cm, eos, Geometry::spherical)) < 1e-13);
}

TEST_CASE("splitting the strip into segments leaves the answer unchanged") {
    const EosModel eos = reference_eos();

    // constant data: every quadrature sums representable increments, so the
    // segmented and unsegmented runs agree bit for bit
    const DataPair s = static_pair(eos);
    const StripResult one = extend_strip(s.cp, s.cm, eos, Geometry::spherical, 1);
    const StripResult four = extend_strip(s.cp, s.cm, eos, Geometry::spherical, 4);
    REQUIRE(four.breakpoints.size() == 5);
    CHECK(four.breakpoints.front() == 0);
    CHECK(four.breakpoints.back() == one.grid.n_v);
    CHECK(grid_gap(one.grid, four.grid) == 0.0);
    for (const auto& bc : four.bootstrap) CHECK(bc.ok());

    // smooth data: restarting from an interior row only re-anchors the
    // quadratures, so the segmented answer stays within discretization error
    const DataPair d = wave_pair(eos);
    const StripResult w1 = extend_strip(d.cp, d.cm, eos, Geometry::spherical, 1);
    const StripResult w3 = extend_strip(d.cp, d.cm, eos, Geometry::spherical, 3);
    CHECK(grid_gap(w1.grid, w3.grid) < 1e-4);  // measured ~1.9e-5

    // segment count is clamped to at most n_v / 2
    const StripResult many = extend_strip(d.cp, d.cm, eos, Geometry::spherical, 1000);
    CHECK(int(many.breakpoints.size()) - 1 <= d.cp.n() / 2);
}

TEST_CASE("iteration failure and solution breakdown raise specific errors") {
    const EosModel eos = reference_eos();
    const DataPair d = wave_pair(eos);

    PicardOptions strict;
    strict.tol = 1e-10;
    strict.max_iter = 1;
    CHECK_THROWS_AS(picard_corner(d.cp, d.cm, eos, Geometry::spherical, strict), NoConvergence);

    // strong inflow: the interior radius reaches zero inside the rectangle
    // even though both data lines stay clear of it
    {
        auto fp = sample_free_data(Side::cplus, 0.5, 17, [](double) { return 2.0; }, 2.0, 1.0);
        auto fm = sample_free_data(
            Side::cminus, 0.5, 9, [](double u) { return 2.0 - 6.0 * u; }, 2.0, 1.0);
        auto cp0 = solve_cplus(fp, eos, Geometry::spherical);
        auto cm0 = solve_cminus(fm, eos, Geometry::spherical, 1e-3);
        REQUIRE_FALSE(cm0.truncated);
        const double g0 = num::derivative4(cm0.alpha, cm0.dx)[0];
        const double d0 = num::derivative4(cp0.beta, cp0.dx)[0];
        auto cpd = derived_first_order(cp0, g0, eos, Geometry::spherical);
        auto cmd = derived_first_order(cm0, d0, eos, Geometry::spherical);
        CHECK_THROWS_AS(picard_corner(cpd, cmd, eos, Geometry::spherical), NonPositiveRadius);
    }

    // compression against a tight density ceiling: chi_dagger leaves the
    // tabulated range in the interior first
    {
        const EosModel tight = EosModel::polytropic(2.0, 0.5, 0.0, 1e-6, 1.15);
        auto fp = sample_free_data(
            Side::cplus, 1.0, 17, [](double v) { return 2.0 + 0.2 * v; }, 2.0, 2.0);
        auto fm = sample_free_data(
            Side::cminus, 0.5, 9, [](double u) { return 2.0 + 0.4 * u; }, 2.0, 2.0);
        auto cp0 = solve_cplus(fp, tight, Geometry::spherical);
        auto cm0 = solve_cminus(fm, tight, Geometry::spherical, 1e-3);
        const double g0 = num::derivative4(cm0.alpha, cm0.dx)[0];
        const double d0 = num::derivative4(cp0.beta, cp0.dx)[0];
        auto cpd = derived_first_order(cp0, g0, tight, Geometry::spherical);
        auto cmd = derived_first_order(cm0, d0, tight, Geometry::spherical);
        CHECK_THROWS_AS(picard_corner(cpd, cmd, tight, Geometry::spherical), RangeError);
    }
}

TEST_CASE("width estimate on a rest state recommends the whole rectangle") {
    const EosModel eos = reference_eos();
    const DataPair s = static_pair(eos);
    const StripWidthEstimate est = estimate_strip_width(s.cp, s.cm, eos, Geometry::spherical);

    // every restrictive denominator vanishes for constant data, so only the
    // extents themselves bound the strip
    CHECK(est.h_rec == 0.5);
    CHECK(est.eps_rec == 1.0);
    CHECK_FALSE(est.floored);
    CHECK(est.A == 4.0);  // l * sup|alpha| with the default l = 2
    CHECK(est.B == 4.0);
    CHECK(est.D == 0.0);
    CHECK(est.M == 1.0);
    CHECK(est.G == 0.0);

    CHECK_THROWS_AS(estimate_strip_width(s.cp, s.cm, eos, Geometry::spherical, 1.0), InvalidL);
    CHECK_THROWS_AS(estimate_strip_width(s.cp, s.cm, eos, Geometry::spherical, 0.5), InvalidL);
    CHECK_THROWS_AS(estimate_strip_width(s.cm, s.cp, eos, Geometry::spherical), ConfigError);
}

TEST_CASE("width estimate stays conservative on smooth data") {
    const EosModel eos = reference_eos();
    const DataPair d = wave_pair(eos);
    const StripWidthEstimate est = estimate_strip_width(d.cp, d.cm, eos, Geometry::spherical);

    CHECK(est.h_rec > 0.0);
    CHECK(est.h_rec <= 0.5);
    CHECK(est.eps_rec > 0.0);
    CHECK(est.eps_rec <= 1.0);
    // the recommendation must actually hold: solving on the recommended strip
    // keeps the iterates inside the assumed box
    const StripResult res = extend_strip(d.cp, d.cm, eos, Geometry::spherical, 1, {}, &est);
    for (const auto& bc : res.bootstrap) {
        CHECK(bc.ok());
        CHECK(bc.margin_nu > 0.0);
        CHECK(bc.margin_alpha > 0.0);
        CHECK(bc.margin_r_lo > 0.0);
        CHECK(bc.margin_r_hi > 0.0);
    }
}
