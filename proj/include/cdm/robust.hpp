#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdm/plant.hpp"
#include "cdm/sim.hpp"
#include "cdm/synth.hpp"

namespace cdm {

struct SweepPlan {
    std::vector<std::string> parameters;
    double fraction = 0.30;
    std::size_t samples = 100;
    std::uint64_t seed = 42;
    bool include_corners = true;

    void validate() const;
    [[nodiscard]] std::size_t total_runs() const;
};

struct Scenario {
    SignalSpec reference = SignalSpec::doublet(1.0, 1.0, 5.0);
    SignalSpec disturbance = SignalSpec::impulse(1.0, 35.0);
    double horizon = 50.0;
    double step = 1e-3;
    std::string metric_channel = "u";
};

struct SweepRun {
    std::vector<double> factors; // aligned with plan.parameters
    bool stable = false;
    bool degenerate = false;
    double max_root_real = 0.0;
    std::optional<double> settling_time_s;
    std::optional<double> steady_state_error;
    bool diverged = false;
};

struct SweepReport {
    SweepPlan plan;
    std::vector<SweepRun> runs;
    double fraction_stable = 0.0;
    std::optional<double> settling_min, settling_median, settling_max;
};

// Uniform draws on [0, 1) from splitmix64; the mapping is spelled out here so
// reports are reproducible across standard-library implementations.
class SeededUniform {
public:
    explicit SeededUniform(std::uint64_t seed) : state_(seed) {}
    double next();
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::uint64_t state_;
};

// Corner rows first (bit j of the corner index selects 1 +/- fraction for
// parameter j), then the random rows. Deterministic in the plan alone.
std::vector<std::vector<double>> sweep_factors(const SweepPlan& plan);

// Per run: perturb, reduce to a transfer matrix, close the loop, Routh test,
// simulate the scenario and take metrics on scenario.metric_channel.
// Runs fan out over `workers` threads (0: CDM_WORKERS or hardware concurrency);
// rows are stored in plan order regardless of completion order.
SweepReport sweep(const Model& model, const ControllerSpec& ctrl, const GainMap& gains, const SweepPlan& plan,
                  const Scenario& scenario, unsigned workers = 0);

// Recomputes the aggregate block from the rows.
void aggregate(SweepReport& report);

unsigned default_workers();

// One row per run: factor columns, stable, settling_time_s, steady_state_error, diverged.
// Header comments echo the seed and plan.
std::string to_csv(const SweepReport& report);

} // namespace cdm
