#include "cdm/service.hpp"

#include <algorithm>

#include "cdm/error.hpp"

namespace cdm::service {

namespace {

const Json& field(const Json& req, const char* key) {
    if (!req.is_object())
        throw ValidationError("(request): expected a JSON object");
    auto it = req.find(key);
    if (it == req.end())
        throw ValidationError(std::string(key) + ": missing");
    return *it;
}

double number_or(const Json& req, const char* key, double fallback) {
    if (!req.contains(key))
        return fallback;
    if (!req[key].is_number())
        throw ValidationError(std::string(key) + ": expected a number");
    return req[key].get<double>();
}

ControllerDocument controller_of(const Json& req) {
    try {
        return load_controller(field(req, "controller"));
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("controller.") + e.what());
    }
}

GainMap gains_of(const Json& req, const ControllerDocument& ctrl) {
    GainMap g = ctrl.gains;
    if (req.contains("gains")) {
        const auto& j = req["gains"];
        if (!j.is_object())
            throw ValidationError("gains: expected an object name -> number");
        for (const auto& [k, v] : j.items()) {
            if (!v.is_number())
                throw ValidationError("gains." + k + ": expected a number");
            g[k] = v.get<double>();
        }
    }
    return g;
}

Json analysis(const Polynomial& p, const std::vector<std::pair<std::string, Polynomial>>& curves) {
    Json out;
    out["polynomial"] = to_json(p);
    out["degree"] = p.degree();
    out["profile"] = to_json(profile(p));
    out["stability_condition"] = to_json(check_stability_condition(p));
    out["instability_condition"] = p.degree() >= 3 ? to_json(check_instability_condition(p)) : Json(nullptr);
    out["routh"] = to_json(routh_stable(p));
    out["roots"] = to_json(roots(p));
    out["diagram"] = to_json(coefficient_diagram(curves));
    return out;
}

std::optional<double> try_dc_gain(const TransferFunction& tf) {
    if (tf.den[0] == 0.0)
        return std::nullopt;
    return dc_gain(tf);
}

bool non_negative_integer(const Json& j) {
    return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

} // namespace

Model resolve_model(const Json& ref, const std::string& path) {
    if (ref.is_string()) {
        try {
            return load_fixture(ref.get<std::string>());
        } catch (const ValidationError& e) {
            throw ValidationError(path + ": " + e.what());
        }
    }
    if (ref.is_object()) {
        try {
            return load_model(ref);
        } catch (const ValidationError& e) {
            throw ValidationError(path + "." + e.what());
        }
    }
    throw ValidationError(path + ": expected a fixture name or a model document");
}

Json analyze(const Json& req) {
    if (req.is_object() && req.contains("polynomial")) {
        const Polynomial p = polynomial_from_json(req["polynomial"], "polynomial");
        return analysis(p, {{"polynomial", p}});
    }
    const TransferMatrix tm = to_transfer_matrix(resolve_model(field(req, "model_ref")));
    std::string curve = "delta";
    if (req.contains("curve")) {
        if (!req["curve"].is_string())
            throw ValidationError("curve: expected a string");
        curve = req["curve"].get<std::string>();
    }
    Polynomial p;
    if (curve == "delta") {
        p = tm.delta;
    } else {
        const auto key = parse_channel_name(curve);
        auto it = tm.numerators.find(key);
        if (it == tm.numerators.end())
            throw ValidationError("curve: model has no curve '" + curve + "'");
        p = it->second;
    }
    std::vector<std::pair<std::string, Polynomial>> curves{{"delta", tm.delta}};
    for (const auto& y : tm.output_names)
        for (const auto& u : tm.input_names)
            if (!tm.numerator(y, u).is_zero())
                curves.emplace_back(channel_name({y, u}), tm.numerator(y, u));
    Json out = analysis(p, curves);
    out["curve"] = curve;
    return out;
}

Json closed_loop(const Json& req) {
    const TransferMatrix plant = to_transfer_matrix(resolve_model(field(req, "model_ref")));
    const auto ctrl = controller_of(req);
    const GainMap gains = gains_of(req, ctrl);
    const ClosedLoopSystem cl = closed_loop_tf(plant, ctrl.spec, gains);

    Json out;
    out["P"] = to_json(cl.P);
    out["controller_proper"] = ctrl.spec.is_proper();
    out["routh"] = to_json(routh_stable(cl.P));
    out["roots"] = to_json(roots(cl.P));
    if (cl.P.degree() >= 2 && cl.P[0] != 0.0)
        out["profile"] = to_json(profile(cl.P));
    else
        out["profile"] = nullptr;
    out["stability_condition"] = to_json(check_stability_condition(cl.P));
    out["instability_condition"] = cl.P.degree() >= 3 ? to_json(check_instability_condition(cl.P)) : Json(nullptr);
    Json tracking = Json::object(), disturbance = Json::object();
    for (const auto& y : cl.outputs) {
        tracking[y] = optional_json(try_dc_gain(cl.tracking.at(y)));
        disturbance[y] = optional_json(try_dc_gain(cl.disturbance.at(y)));
    }
    Json dc;
    dc["tracking"] = tracking;
    dc["disturbance"] = disturbance;
    dc["control_effort"] = optional_json(try_dc_gain(cl.control_effort));
    out["dc_gains"] = dc;
    out["diagram"] = to_json(coefficient_diagram({{"P", cl.P}}));
    return out;
}

SimulationResult run_simulation(const Json& req, Json& metrics_out) {
    const Model model = resolve_model(field(req, "model_ref"));
    const SignalSpec reference =
        req.contains("reference") ? signal_from_json(req["reference"], "reference", SignalSpec::doublet())
                                  : SignalSpec::doublet();
    const SignalSpec disturbance =
        req.contains("disturbance") ? signal_from_json(req["disturbance"], "disturbance", SignalSpec::impulse())
                                    : SignalSpec::impulse();
    const double horizon = number_or(req, "horizon", 50.0);
    const double step = number_or(req, "step", 1e-3);

    LinearSystem sys;
    std::string default_channel;
    if (req.contains("controller")) {
        const TransferMatrix plant = to_transfer_matrix(model);
        const auto ctrl = controller_of(req);
        const ClosedLoopSystem cl = closed_loop_tf(plant, ctrl.spec, gains_of(req, ctrl));
        sys = to_linear_system(cl);
        default_channel = ctrl.spec.feedback.front().first;
    } else {
        std::string input;
        if (req.contains("input"))
            input = req["input"].get<std::string>();
        if (const auto* ss = std::get_if<StateSpaceModel>(&model))
            sys = to_linear_system(*ss, input);
        else
            sys = to_linear_system(std::get<TransferMatrix>(model), input);
        default_channel = sys.output_names.front();
    }

    std::string channel = default_channel;
    if (req.contains("metric_channel")) {
        if (!req["metric_channel"].is_string())
            throw ValidationError("metric_channel: expected a string");
        channel = req["metric_channel"].get<std::string>();
    }

    SimulationResult res = cdm::simulate(sys, reference, disturbance, horizon, step);
    if (!res.has_channel(channel))
        throw ValidationError("metric_channel: unknown channel '" + channel + "'");
    Json m = to_json(metrics(res, channel, reference.final_value()));
    metrics_out = Json::object();
    metrics_out["channel"] = channel;
    metrics_out["diverged"] = res.diverged;
    for (auto& [k, v] : m.items())
        metrics_out[k] = v;
    metrics_out["reference"] = to_json(reference);
    metrics_out["disturbance"] = to_json(disturbance);
    metrics_out["horizon"] = horizon;
    metrics_out["step"] = step;
    metrics_out["samples"] = res.t.size();
    return res;
}

Json simulate(const Json& req) {
    Json m;
    const SimulationResult res = run_simulation(req, m);
    std::size_t max_points = kMaxSeriesPoints;
    if (req.contains("max_points")) {
        if (!non_negative_integer(req["max_points"]) || req["max_points"].get<std::int64_t>() == 0)
            throw ValidationError("max_points: expected a positive integer");
        max_points = std::min<std::size_t>(kMaxSeriesPoints, req["max_points"].get<std::size_t>());
    }
    Json out;
    out["metrics"] = m;
    out["series"] = to_json(downsample(res, max_points));
    return out;
}

Polynomial closed_loop_target(const Json& req, const TransferMatrix& plant, const ControllerDocument& ctrl) {
    if (req.contains("target"))
        return polynomial_from_json(req["target"], "target");
    if (!req.contains("tau"))
        throw ValidationError("target: give either \"target\" or \"tau\" (with optional \"gammas\", \"a0\")");
    const auto form = closed_loop_affine(plant, ctrl.spec);
    std::size_t n = form.base.degree();
    for (const auto& c : form.columns)
        n = std::max(n, c.degree());
    std::vector<double> gammas;
    if (req.contains("gammas")) {
        const auto& g = req["gammas"];
        if (!g.is_array())
            throw ValidationError("gammas: expected an array of numbers");
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number())
                throw ValidationError("gammas[" + std::to_string(i) + "]: expected a number");
            gammas.push_back(g[i].get<double>());
        }
        if (gammas.size() + 1 != n)
            throw ValidationError("gammas: expected " + std::to_string(n - 1) + " entries for closed-loop degree " +
                                  std::to_string(n) + ", got " + std::to_string(gammas.size()));
    } else {
        gammas = standard_gammas(n);
    }
    return target_polynomial(number_or(req, "a0", 1.0), number_or(req, "tau", 0.0), gammas);
}

Json solve(const Json& req) {
    const TransferMatrix plant = to_transfer_matrix(resolve_model(field(req, "model_ref")));
    const auto ctrl = controller_of(req);
    const Polynomial target = closed_loop_target(req, plant, ctrl);
    SolveOptions opts;
    if (req.contains("bind")) {
        const auto& b = req["bind"];
        if (!b.is_array())
            throw ValidationError("bind: expected an array of coefficient indices");
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!non_negative_integer(b[i]))
                throw ValidationError("bind[" + std::to_string(i) + "]: expected a non-negative integer");
            opts.bind.push_back(b[i].get<std::size_t>());
        }
    }
    const GainAssignment ga = solve_gains(plant, ctrl.spec, target, opts);
    Json out = to_json(ga);
    out["controller"] = to_json(ctrl.spec, ga.values);
    out["routh"] = to_json(routh_stable(ga.achieved));
    return out;
}

Scenario scenario_from_json(const Json& j, const std::string& path) {
    Scenario s;
    if (j.is_null())
        return s;
    if (!j.is_object())
        throw ValidationError(path + ": expected an object");
    if (j.contains("reference"))
        s.reference = signal_from_json(j["reference"], path + ".reference", s.reference);
    if (j.contains("disturbance"))
        s.disturbance = signal_from_json(j["disturbance"], path + ".disturbance", s.disturbance);
    s.horizon = number_or(j, "horizon", s.horizon);
    s.step = number_or(j, "step", s.step);
    if (j.contains("metric_channel")) {
        if (!j["metric_channel"].is_string())
            throw ValidationError(path + ".metric_channel: expected a string");
        s.metric_channel = j["metric_channel"].get<std::string>();
    }
    return s;
}

SweepPlan plan_from_json(const Json& j, const std::string& path) {
    if (!j.is_object())
        throw ValidationError(path + ": expected an object");
    SweepPlan p;
    if (!j.contains("parameters") || !j["parameters"].is_array())
        throw ValidationError(path + ".parameters: expected an array of names");
    for (std::size_t i = 0; i < j["parameters"].size(); ++i) {
        const auto& x = j["parameters"][i];
        if (!x.is_string())
            throw ValidationError(path + ".parameters[" + std::to_string(i) + "]: expected a string");
        p.parameters.push_back(x.get<std::string>());
    }
    p.fraction = number_or(j, "fraction", p.fraction);
    if (j.contains("samples")) {
        if (!non_negative_integer(j["samples"]))
            throw ValidationError(path + ".samples: expected a non-negative integer");
        p.samples = j["samples"].get<std::size_t>();
    }
    if (j.contains("seed")) {
        if (!non_negative_integer(j["seed"]))
            throw ValidationError(path + ".seed: expected a non-negative integer");
        p.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("include_corners")) {
        if (!j["include_corners"].is_boolean())
            throw ValidationError(path + ".include_corners: expected a boolean");
        p.include_corners = j["include_corners"].get<bool>();
    }
    try {
        p.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + "." + e.what());
    }
    return p;
}

SweepReport run_sweep(const Json& req, unsigned workers) {
    const Model model = resolve_model(field(req, "model_ref"));
    const auto ctrl = controller_of(req);
    const GainMap gains = gains_of(req, ctrl);
    const SweepPlan plan = plan_from_json(field(req, "plan"), "plan");
    const Scenario scenario = scenario_from_json(req.contains("scenario") ? req["scenario"] : Json(nullptr), "scenario");
    return cdm::sweep(model, ctrl.spec, gains, plan, scenario, workers);
}

Json sweep(const Json& req, unsigned workers) { return to_json(run_sweep(req, workers)); }

Json fixtures() {
    Json list = Json::array();
    for (const auto& name : fixture_names()) {
        const TransferMatrix tm = load_fixture(name);
        Json f;
        f["name"] = name;
        f["form"] = "transfer-matrix";
        f["description"] = name == kHoverFixtureName
                               ? "R-50 hover, longitudinal-vertical mode; theta/delta_lon sign-corrected (theta = q/s)"
                               : "R-50 hover, longitudinal-vertical mode; theta/delta_lon with the +179.56 s^2 term kept as given (not q/s)";
        f["inputs"] = tm.input_names;
        f["outputs"] = tm.output_names;
        list.push_back(f);
    }
    Json out;
    out["fixtures"] = list;
    return out;
}

} // namespace cdm::service
