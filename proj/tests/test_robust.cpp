#include <doctest.h>

#include <set>

#include "cdm/error.hpp"
#include "cdm/robust.hpp"
#include "generators.hpp"

using namespace cdm;

namespace {

Scenario testbed_scenario() {
    Scenario s;
    s.reference = SignalSpec::step();
    s.disturbance = SignalSpec::zero();
    s.horizon = 5.0;
    s.step = 1e-2;
    s.metric_channel = "y1";
    return s;
}

SweepPlan testbed_plan(std::uint64_t seed) {
    SweepPlan p;
    p.parameters = gen::testbed_parameters();
    p.fraction = 0.99;
    p.samples = 100;
    p.seed = seed;
    return p;
}

} // namespace

TEST_CASE("seeded uniform stream") {
    SeededUniform a(42), b(42), c(43);
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.next();
        CHECK(x == b.next());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        xs.push_back(x);
    }
    CHECK(c.next() != xs[0]);
    // Reference value of the first splitmix64 draw for seed 0.
    SeededUniform z(0);
    CHECK(z.next() == static_cast<double>(0xe220a8397b1dcdafULL >> 11) * 0x1.0p-53);
}

TEST_CASE("plan validation and run counts") {
    SweepPlan p;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.parameters = {"delta[0]", "delta[1]"};
    CHECK(p.total_runs() == 104);
    p.include_corners = false;
    CHECK(p.total_runs() == 100);
    p.fraction = 1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.fraction = -0.1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("sweep factors: corners first, then bounded random rows") {
    SweepPlan p = testbed_plan(7);
    p.fraction = 0.3;
    const auto rows = sweep_factors(p);
    REQUIRE(rows.size() == 116);
    std::set<std::vector<double>> corners(rows.begin(), rows.begin() + 16);
    CHECK(corners.size() == 16);
    for (std::size_t r = 0; r < 16; ++r)
        for (double f : rows[r])
            CHECK((f == 0.7 || f == 1.3));
    for (std::size_t r = 16; r < rows.size(); ++r)
        for (double f : rows[r]) {
            CHECK(f >= 0.7);
            CHECK(f <= 1.3);
        }
    CHECK(sweep_factors(p) == rows);
}

TEST_CASE("testbed classification matches the closed-form boundary") {
    const auto plant = gen::testbed_plant();
    const auto report = sweep(Model{plant}, gen::testbed_controller(), {}, testbed_plan(42), testbed_scenario(), 2);
    REQUIRE(report.runs.size() == 116);
    std::size_t stable = 0;
    for (const auto& run : report.runs) {
        CHECK(run.stable == gen::testbed_stable(run.factors));
        stable += run.stable;
        if (!run.stable)
            CHECK_FALSE(run.settling_time_s.has_value());
    }
    // Both classes are represented.
    CHECK(stable > 0);
    CHECK(stable < 116);
    CHECK(report.fraction_stable == doctest::Approx(static_cast<double>(stable) / 116.0));
}

TEST_CASE("identical seeds give byte-identical reports regardless of workers") {
    const auto plant = gen::testbed_plant();
    const auto a = sweep(Model{plant}, gen::testbed_controller(), {}, testbed_plan(9), testbed_scenario(), 1);
    const auto b = sweep(Model{plant}, gen::testbed_controller(), {}, testbed_plan(9), testbed_scenario(), 3);
    CHECK(to_csv(a) == to_csv(b));
    const auto c = sweep(Model{plant}, gen::testbed_controller(), {}, testbed_plan(10), testbed_scenario(), 1);
    CHECK(to_csv(a) != to_csv(c));
    CHECK(to_csv(a).rfind("# seed=9 ", 0) == 0);
}

TEST_CASE("sweep validates before running") {
    const auto plant = gen::testbed_plant();
    SweepPlan p = testbed_plan(1);
    p.parameters.push_back("delta[7]");
    CHECK_THROWS_AS(sweep(Model{plant}, gen::testbed_controller(), {}, p, testbed_scenario(), 1), ValidationError);
    auto s = testbed_scenario();
    s.metric_channel = "nope";
    CHECK_THROWS_AS(sweep(Model{plant}, gen::testbed_controller(), {}, testbed_plan(1), s, 1), ValidationError);
}

TEST_CASE("aggregate statistics") {
    SweepReport r;
    r.plan.parameters = {"x"};
    for (double t : {3.0, 1.0, 2.0}) {
        SweepRun run;
        run.stable = true;
        run.settling_time_s = t;
        r.runs.push_back(run);
    }
    r.runs.push_back(SweepRun{});
    aggregate(r);
    CHECK(r.fraction_stable == 0.75);
    CHECK(*r.settling_min == 1.0);
    CHECK(*r.settling_median == 2.0);
    CHECK(*r.settling_max == 3.0);
}

TEST_CASE("short sweep on the hover design") {
    SweepPlan p;
    p.parameters = {"delta[0]", "delta[1]"};
    p.samples = 4;
    Scenario s;
    s.step = 1e-2;
    const auto r =
        sweep(Model{fixture_r50_hover_lonvert(true)}, hover_pid_controller(), hover_design_gains(), p, s, 0);
    CHECK(r.runs.size() == 8);
    CHECK(r.fraction_stable >= 0.0);
    CHECK(r.fraction_stable <= 1.0);
}

TEST_CASE("worker count honours the environment") {
    CHECK(default_workers() >= 1);
}
