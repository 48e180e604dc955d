#pragma once

#include <string>

#include <json.hpp>

#include "cdm/cdmcore.hpp"
#include "cdm/plant.hpp"
#include "cdm/robust.hpp"
#include "cdm/sim.hpp"
#include "cdm/synth.hpp"

namespace cdm {

using Json = nlohmann::ordered_json;

// All parse functions throw ValidationError with a field path
// ("numerators.u/delta_lon[2]: expected a number").

Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j, const std::string& path);

// Model documents: {"name", "form": "state-space" | "transfer-matrix", ...}.
// Coefficient arrays ascending, matrices row-major nested arrays.
Model load_model(const Json& doc);
Model load_model_text(const std::string& text);
Json to_json(const Model& m);
Json to_json(const TransferMatrix& m);
Json to_json(const StateSpaceModel& m);

struct ControllerDocument {
    ControllerSpec spec;
    GainMap gains;
};

// {"denominator": [0,1], "reference_numerator": ["k0"],
//  "feedback": {"u": ["k0","k1"], ...}, "actuated_input": "delta_lon",
//  "gains": {"k0": 0.08412, ...}}; numbers are fixed slots, strings unknowns.
ControllerDocument load_controller(const Json& doc);
Json to_json(const ControllerSpec& spec, const GainMap& gains);

Json to_json(const std::vector<std::complex<double>>& roots);
Json to_json(const StabilityProfile& p);
Json to_json(const ConditionReport& r);
Json to_json(const DiagramDataset& d);
Json to_json(const RouthVerdict& v);
Json to_json(const GainAssignment& g);
Json to_json(const TransferFunction& tf);
Json to_json(const Metrics& m);
Json to_json(const SimulationResult& r); // {"t": [...], "channels": {...}, "step", "diverged"}
Json to_json(const SweepReport& r, bool include_runs = true);

SignalSpec signal_from_json(const Json& j, const std::string& path, SignalSpec defaults);
Json to_json(const SignalSpec& s);

} // namespace cdm
