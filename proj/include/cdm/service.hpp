#pragma once

#include "cdm/io.hpp"

// Request/response core shared by the command-line tool and the HTTP service.
// Every function is a pure function of its request document. Malformed
// requests raise ValidationError, failed computations ComputationError.
namespace cdm::service {

// "r50-hover-lonvert" style fixture name, or an inline model document.
Model resolve_model(const Json& model_ref, const std::string& path = "model_ref");

// {"polynomial": [...]} or {"model_ref": ..., "curve": "delta" | "<out>/<in>"}
// -> profile, both condition reports, Routh verdict, roots, coefficient diagram.
Json analyze(const Json& request);

// {"model_ref", "controller", "gains"?} -> P, profile, Routh, roots, DC gains.
Json closed_loop(const Json& request);

// {"model_ref", "controller"?, "gains"?, "reference"?, "disturbance"?,
//  "horizon"?, "step"?, "metric_channel"?, "max_points"?}
// Without a controller the open-loop plant is simulated.
Json simulate(const Json& request);

// {"model_ref", "controller", "target" | ("tau", "gammas"?, "a0"?), "bind"?}
Json solve(const Json& request);

// {"model_ref", "controller", "gains"?, "plan", "scenario"?}
Json sweep(const Json& request, unsigned workers = 0);

// {"fixtures": [{"name", "form", "description"}]}
Json fixtures();

// Pieces reused by the CLI for file outputs.
Polynomial closed_loop_target(const Json& request, const TransferMatrix& plant, const ControllerDocument& ctrl);
Scenario scenario_from_json(const Json& j, const std::string& path);
SweepPlan plan_from_json(const Json& j, const std::string& path);
SimulationResult run_simulation(const Json& request, Json& metrics_out);
SweepReport run_sweep(const Json& request, unsigned workers);

inline constexpr std::size_t kMaxSeriesPoints = 2000;

} // namespace cdm::service
