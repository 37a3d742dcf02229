#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "charflow/constraints.hpp"
#include "charflow/eos.hpp"
#include "charflow/errors.hpp"
#include "charflow/goursat.hpp"
#include "charflow/verify.hpp"

using namespace charflow;

namespace {

EosModel reference_eos() { return EosModel::polytropic(2.0, 0.5, 0.0); }

struct Solved {
    CharacteristicData cp, cm;
    GoursatGrid grid;
    IterationTrace trace;
};

Solved solve_static(const EosModel& eos) {
    auto fp = sample_free_data(Side::cplus, 1.0, 17, [](double) { return 2.0; }, 2.0, 2.0);
    auto fm = sample_free_data(Side::cminus, 0.5, 9, [](double) { return 2.0; }, 2.0, 2.0);
    Solved s{derived_first_order(solve_cplus(fp, eos, Geometry::spherical), 0.0, eos,
                                 Geometry::spherical),
             derived_first_order(solve_cminus(fm, eos, Geometry::spherical, 1e-3), 0.0, eos,
                                 Geometry::spherical),
             {},
             {}};
    auto [g, tr] = picard_corner(s.cp, s.cm, eos, Geometry::spherical);
    s.grid = std::move(g);
    s.trace = std::move(tr);
    return s;
}

Solved solve_wave(const EosModel& eos, int n_minus, int n_plus, double tol = 1e-10) {
    auto fp = sample_free_data(
        Side::cplus, 1.0, n_plus, [](double v) { return 2.0 + 0.1 * std::sin(v); }, 2.0, 2.0);
    auto fm = sample_free_data(
        Side::cminus, 0.5, n_minus, [](double u) { return 2.0 + 0.1 * u; }, 2.0, 2.0);
    auto cp0 = solve_cplus(fp, eos, Geometry::spherical);
    auto cm0 = solve_cminus(fm, eos, Geometry::spherical, 1e-3);
    const double g0 = num::derivative4(cm0.alpha, cm0.dx)[0];
    const double d0 = num::derivative4(cp0.beta, cp0.dx)[0];
    Solved s{derived_first_order(cp0, g0, eos, Geometry::spherical),
             derived_first_order(cm0, d0, eos, Geometry::spherical),
             {},
             {}};
    PicardOptions opt;
    opt.tol = tol;
    auto [g, tr] = picard_corner(s.cp, s.cm, eos, Geometry::spherical, opt);
    s.grid = std::move(g);
    s.trace = std::move(tr);
    return s;
}

}  // namespace

TEST_CASE("residual suite vanishes on the rest state and pins the boundary") {
    const EosModel eos = reference_eos();
    const Solved s = solve_static(eos);
    const ResidualReport rep = residual_suite(s.grid, eos, Geometry::spherical, &s.cp, &s.cm);

    REQUIRE(rep.entries.size() == 7);
    for (const char* name : {"char_alpha", "char_beta", "radius_v", "radius_u", "time_mixed",
                             "time_integral"}) {
        const ResidualEntry& e = rep[name];
        CHECK(e.sup <= 1e-12);
        CHECK(e.rms <= e.sup);
    }
    // the iteration writes the data lines verbatim
    CHECK(rep["boundary_pin"].sup == 0.0);
    CHECK(rep.max_sup() <= 1e-12);
    CHECK_THROWS_AS(rep["no_such_entry"], ConfigError);
}

TEST_CASE("residual suite shrinks at second order under refinement") {
    const EosModel eos = reference_eos();
    const ResidualReport coarse =
        residual_suite(solve_wave(eos, 9, 17).grid, eos, Geometry::spherical);
    const ResidualReport fine =
        residual_suite(solve_wave(eos, 17, 33).grid, eos, Geometry::spherical);

    for (const char* name : {"char_alpha", "char_beta", "radius_v", "radius_u"}) {
        const double ratio = coarse[name].sup / fine[name].sup;
        CHECK(ratio > 2.8);  // ~4 expected; generous at this coarseness
        CHECK(ratio < 6.0);
    }
}

TEST_CASE("chi-line identities hold with equality on constant data") {
    const EosModel eos = reference_eos();
    const Solved s = solve_static(eos);
    const ChiLineCheck chk = chi_line_checks(s.cp, eos);
    CHECK(chk.representation_sup == 0.0);
    CHECK(chk.growth_margin_min == 0.0);

    CHECK_THROWS_AS(chi_line_checks(s.cm, eos), ConfigError);
}

TEST_CASE("chi-line growth bound holds on smooth data") {
    const EosModel eos = reference_eos();
    const Solved s = solve_wave(eos, 9, 17);
    const ChiLineCheck chk = chi_line_checks(s.cp, eos);
    // margin at v = 0 is identically zero; beyond that the bound is slack
    CHECK(chk.growth_margin_min >= 0.0);
    CHECK(chk.representation_sup <= 1e-4);

    // the representation defect is a discretization artifact: refine and it drops
    const Solved f = solve_wave(eos, 17, 33);
    CHECK(chi_line_checks(f.cp, eos).representation_sup < chk.representation_sup);
}

TEST_CASE("attained magnitudes stay inside the estimated box") {
    const EosModel eos = reference_eos();
    const Solved s = solve_static(eos);
    const StripWidthEstimate est = estimate_strip_width(s.cp, s.cm, eos, Geometry::spherical);
    const BoundReport rep = bound_checks(s.grid, est);

    REQUIRE(rep.entries.size() == 8);
    CHECK(rep.all_ok());
    auto find = [&](const std::string& name) -> const BoundEntry& {
        for (const auto& e : rep.entries)
            if (e.name == name) return e;
        FAIL("missing bound entry " + name);
        return rep.entries.front();
    };
    CHECK(find("nu_sup").bound == 2.0);
    CHECK(find("nu_sup").attained == 1.0);
    CHECK(find("nu_sup").margin == 1.0);
    CHECK(find("alpha_sup").margin == 2.0);
    CHECK(find("dbeta_dv_sup").bound == 0.0);     // constant data: D = 0
    CHECK(find("dbeta_dv_sup").attained == 0.0);  // and the derivative is exactly 0
    CHECK(find("radius_lo").margin == Catch::Approx(0.5).margin(1e-12));
    CHECK(find("radius_hi").margin == Catch::Approx(1.5).margin(1e-12));
    CHECK(find("mu_sup").margin == 0.0);  // M = 1 is attained by the data line

    // a bound report against a shrunken box must fail
    StripWidthEstimate tight = est;
    tight.A = 1.0;
    CHECK_FALSE(bound_checks(s.grid, tight).all_ok());
}

TEST_CASE("contraction report summarizes a geometric trace") {
    IterationTrace tr;
    for (double n : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
        IterationRecord rec{};
        rec.scaled = n;
        tr.records.push_back(rec);
    }
    tr.converged = true;

    const ContractionReport rep = contraction_report(tr);
    REQUIRE(rep.norms.size() == 5);
    REQUIRE(rep.ratios.size() == 4);
    for (double r : rep.ratios) CHECK(r == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(rep.geometric_rate == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(rep.max_ratio == Catch::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(rep.immediate);
}

TEST_CASE("contraction report edge cases") {
    // immediate convergence: nothing to fit
    IterationTrace one;
    one.records.push_back(IterationRecord{});
    one.converged = true;
    const ContractionReport imm = contraction_report(one);
    CHECK(imm.immediate);
    CHECK(imm.ratios.empty());

    // too few iterations without convergence is an error
    IterationTrace stuck;
    stuck.records.push_back(IterationRecord{});
    stuck.records.push_back(IterationRecord{});
    stuck.converged = false;
    CHECK_THROWS_AS(contraction_report(stuck), InsufficientIterations);

    // norms at the round-off floor are excluded from the fitted rate
    IterationTrace noisy;
    for (double n : {0.1, 1e-14, 1e-15}) {
        IterationRecord rec{};
        rec.scaled = n;
        noisy.records.push_back(rec);
    }
    noisy.converged = true;
    const ContractionReport rep = contraction_report(noisy);
    CHECK(rep.ratios.size() == 2);
    CHECK(rep.geometric_rate == 0.0);
    CHECK(rep.max_ratio == 0.0);
}

TEST_CASE("contraction of the actual solver iteration") {
    const EosModel eos = reference_eos();
    const Solved s = solve_wave(eos, 9, 17, 1e-12);
    const ContractionReport rep = contraction_report(s.trace);
    CHECK_FALSE(rep.immediate);
    CHECK(rep.geometric_rate > 0.0);
    CHECK(rep.geometric_rate < 0.5);  // measured ~0.13 after the stencil fix
    CHECK(rep.max_ratio < 0.9);
}

TEST_CASE("order estimation from resolution ladders") {
    const std::vector<OrderSample> fourth{{16, 1.0}, {32, 1.0 / 16}, {64, 1.0 / 256}};
    CHECK(fitted_order(fourth) == Catch::Approx(4.0).epsilon(1e-12));

    const std::vector<OrderSample> two{{16, 1.0}, {32, 0.25}};
    CHECK(fitted_order(two) == Catch::Approx(2.0).epsilon(1e-12));

    // only the last two ratios enter: pre-asymptotic first level is ignored
    const std::vector<OrderSample> ramp{{8, 1.0}, {16, 0.9}, {32, 0.225}, {64, 0.05625}};
    CHECK(fitted_order(ramp) == Catch::Approx(2.0).epsilon(1e-12));

    CHECK(effectively_exact({{16, 1e-14}, {32, 2e-14}}, 1.0));
    CHECK_FALSE(effectively_exact({{16, 1e-14}, {32, 1e-9}}, 1.0));
    CHECK_FALSE(effectively_exact({}, 1.0));

    const OrderEstimate good = make_order_estimate("demo", fourth, 1.0, 3.7, 4.3);
    CHECK(good.ok());
    CHECK(good.order == Catch::Approx(4.0));

    const OrderEstimate off = make_order_estimate("demo", two, 1.0, 3.7, 4.3);
    CHECK_FALSE(off.ok());

    const OrderEstimate ex =
        make_order_estimate("demo", {{16, 1e-14}, {32, 1e-14}}, 1.0, 3.7, 4.3);
    CHECK(ex.exact);
    CHECK(std::isnan(ex.order));
    CHECK(ex.ok());
}
