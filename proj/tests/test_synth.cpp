#include <doctest.h>

#include <random>

#include "cdm/cdmcore.hpp"
#include "cdm/error.hpp"
#include "cdm/synth.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cdm;

namespace {

// Closed-loop polynomial of the hover design with the reference gains, from
// exact rational expansion.
const std::vector<double> kHoverP{315.3204254, 1118.2684736, 1026.5660898, 561.5340772, 75.8217, 22.4, 1.0};

} // namespace

TEST_CASE("hover controller structure") {
    const auto c = hover_pid_controller();
    CHECK(c.gain_names == std::vector<std::string>{"k0", "k1", "k2", "k3", "k4"});
    CHECK(c.denominator == Polynomial{0, 1});
    CHECK(c.actuated_input == "delta_lon");
    CHECK(c.is_proper());
    CHECK_NOTHROW(c.validate_against(fixture_r50_hover_lonvert(true)));
}

TEST_CASE("controller validation") {
    auto c = hover_pid_controller();
    c.actuated_input = "delta_ped";
    CHECK_THROWS_WITH_AS(c.validate_against(fixture_r50_hover_lonvert(true)), doctest::Contains("actuated_input"),
                         ValidationError);
    c = hover_pid_controller();
    c.feedback.emplace_back("r", SlotPolynomial{Slot{1.0}});
    c.finalize();
    CHECK_THROWS_WITH_AS(c.validate_against(fixture_r50_hover_lonvert(true)), doctest::Contains("feedback.r"),
                         ValidationError);
    c = hover_pid_controller();
    c.feedback.emplace_back("u", SlotPolynomial{Slot{1.0}});
    CHECK_THROWS_WITH_AS(c.finalize(), doctest::Contains("duplicate"), ValidationError);

    ControllerSpec improper;
    improper.denominator = Polynomial{1};
    improper.reference_numerator = {Slot{1.0}};
    improper.feedback = {{"u", {Slot{0.0}, Slot{1.0}}}};
    improper.actuated_input = "delta_lon";
    improper.finalize();
    CHECK_FALSE(improper.is_proper());
}

TEST_CASE("instantiate") {
    CHECK(instantiate({Slot{1.5}, Slot{std::string("k")}}, {{"k", 2.0}}) == Polynomial{1.5, 2.0});
    CHECK_THROWS_WITH_AS(instantiate({Slot{std::string("k")}}, {}), "gains.k: unbound gain", ValidationError);
}

TEST_CASE("closed-loop polynomial of the hover design") {
    const auto P = closed_loop_poly(fixture_r50_hover_lonvert(true), hover_pid_controller(), hover_design_gains());
    REQUIRE(P.degree() == 6);
    CHECK(P.leading() == 1.0);
    for (std::size_t i = 0; i < kHoverP.size(); ++i)
        CHECK(oracle::rel_err(P[i], kHoverP[i]) < 1e-12);
    CHECK(sign_uniform(P));
    CHECK(routh_stable(P).stable);
    for (auto z : roots(P))
        CHECK(z.real() < -1e-6);
}

TEST_CASE("closed-loop polynomial with the verbatim theta numerator") {
    const auto P = closed_loop_poly(fixture_r50_hover_lonvert(false), hover_pid_controller(), hover_design_gains());
    const std::vector<double> want{315.3204254, 1118.2684736, -3966.5593838, -360.3700572, 75.8217, 22.4, 1.0};
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(oracle::rel_err(P[i], want[i]) < 1e-12);
    CHECK_FALSE(routh_stable(P).stable);
}

TEST_CASE("closed-loop polynomial is affine in the gains") {
    std::mt19937_64 rng(59);
    for (int t = 0; t < 50; ++t) {
        const auto c = gen::random_diophantine_case(rng);
        const auto form = closed_loop_affine(c.plant, c.ctrl);
        REQUIRE(form.columns.size() == c.ctrl.gain_names.size());
        Polynomial rebuilt = form.base;
        for (std::size_t k = 0; k < form.columns.size(); ++k)
            rebuilt = rebuilt + scale(form.columns[k], c.gains.at(c.ctrl.gain_names[k]));
        const auto direct = closed_loop_poly(c.plant, c.ctrl, c.gains);
        for (std::size_t i = 0; i <= direct.degree(); ++i)
            CHECK(std::abs(rebuilt[i] - direct[i]) < 1e-12 * std::max(1.0, direct.max_abs()));

        // Midpoint check: P((g + h)/2) = (P(g) + P(h))/2.
        GainMap h = c.gains, mid = c.gains;
        for (auto& [k, v] : h)
            v = -2.0 * v + 1.0;
        for (auto& [k, v] : mid)
            v = 0.5 * (c.gains.at(k) + h.at(k));
        const auto pm = closed_loop_poly(c.plant, c.ctrl, mid);
        const auto avg = scale(closed_loop_poly(c.plant, c.ctrl, c.gains) + closed_loop_poly(c.plant, c.ctrl, h), 0.5);
        for (std::size_t i = 0; i <= pm.degree(); ++i)
            CHECK(std::abs(pm[i] - avg[i]) < 1e-12 * std::max(1.0, avg.max_abs()));
    }
}

TEST_CASE("solve_gains recovers the reference hover gains") {
    const auto plant = fixture_r50_hover_lonvert(true);
    const auto ctrl = hover_pid_controller();
    const auto sol = solve_gains(plant, ctrl, Polynomial(kHoverP));
    CHECK(sol.rank == 5);
    for (const auto& [k, v] : hover_design_gains())
        CHECK(oracle::rel_err(sol.values.at(k), v) < 1e-9);
    for (double r : sol.residuals)
        CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("solve_gains: design target is matched in least squares") {
    const auto plant = fixture_r50_hover_lonvert(true);
    const auto ctrl = hover_pid_controller();
    const auto target = target_polynomial(300.0, 3.5, standard_gammas(6));
    const auto sol = solve_gains(plant, ctrl, target);
    CHECK(sol.target.leading() == 1.0);
    CHECK(sol.achieved.degree() == 6);
    CHECK(sol.residuals.size() == 7);
    // The s^5 coefficient is gain-independent, so the residual concentrates there.
    CHECK(sol.achieved[5] == doctest::Approx(22.4));

    // Binding only the gain-dependent coefficients makes the solve exact.
    SolveOptions bind;
    bind.bind = {0, 1, 2, 3, 4};
    const auto exact = solve_gains(plant, ctrl, target, bind);
    for (std::size_t i = 0; i <= 4; ++i)
        CHECK(std::abs(exact.residuals[i]) < 1e-9 * std::max(1.0, std::abs(exact.target[i])));
}

TEST_CASE("solve_gains error paths") {
    const auto plant = fixture_r50_hover_lonvert(true);
    auto ctrl = hover_pid_controller();
    CHECK_THROWS_WITH_AS(solve_gains(plant, ctrl, Polynomial{1, 2, 1}), doctest::Contains("target degree"),
                         ValidationError);

    // A gain that only appears in the reference numerator is invisible in P.
    ctrl.reference_numerator = {Slot{std::string("kr")}};
    ctrl.finalize();
    CHECK_THROWS_WITH_AS(solve_gains(plant, ctrl, Polynomial(kHoverP)), doctest::Contains("null-space dimension 1"),
                         ComputationError);

    SolveOptions bad;
    bad.bind = {9};
    CHECK_THROWS_AS(solve_gains(plant, hover_pid_controller(), Polynomial(kHoverP), bad), ValidationError);
}

TEST_CASE("solve_gains round trips random structures") {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 100; ++t) {
        const auto c = gen::random_diophantine_case(rng);
        const auto target = closed_loop_poly(c.plant, c.ctrl, c.gains);
        const auto sol = solve_gains(c.plant, c.ctrl, target);
        for (const auto& [k, v] : c.gains)
            CHECK(oracle::rel_err(sol.values.at(k), v) < 1e-9);
        for (double r : sol.residuals)
            CHECK(std::abs(r) < 1e-9);
    }
}

TEST_CASE("closed-loop transfer functions of the hover design") {
    const auto cl = closed_loop_tf(fixture_r50_hover_lonvert(true), hover_pid_controller(), hover_design_gains());
    CHECK(cl.outputs.size() == 4);
    // Tracking DC gain k0 * N_u(0) / P(0), value taken from exact arithmetic.
    CHECK(dc_gain(cl.tracking.at("u")) == doctest::Approx(0.9470823579575192).epsilon(1e-12));
    // The controller integrator puts a zero at the origin of every disturbance path.
    for (const auto& [y, tf] : cl.disturbance)
        CHECK(dc_gain(tf) == 0.0);
    CHECK(dc_gain(cl.control_effort_disturbance) != 0.0);
    CHECK(cl.noise.count({"u", "u"}) == 1);
    CHECK(cl.noise.count({"theta", "w"}) == 1);

    CHECK_THROWS_WITH_AS(dc_gain(TransferFunction{Polynomial{1}, Polynomial{0, 1}}), "pole at origin",
                         ComputationError);
}
