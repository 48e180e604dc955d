#include "cdm/io.hpp"

#include <cmath>

#include "cdm/error.hpp"

namespace cdm {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ValidationError(path + ": " + msg); }

const Json& require(const Json& obj, const char* key, const std::string& path) {
    if (!obj.is_object())
        fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        fail(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const Json& j, const std::string& path) {
    if (!j.is_number())
        fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        fail(path, "must be finite");
    return v;
}

std::string string_of(const Json& j, const std::string& path) {
    if (!j.is_string())
        fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<std::string> names(const Json& j, const std::string& path) {
    if (!j.is_array())
        fail(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(string_of(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Eigen::MatrixXd matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        fail(path, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array())
        fail(path + "[0]", "expected an array");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!row.is_array())
            fail(rp, "expected an array");
        if (static_cast<Eigen::Index>(row.size()) != cols)
            fail(rp, "ragged row: expected " + std::to_string(cols) + " entries, got " + std::to_string(row.size()));
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = number(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
    }
    return m;
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json optional_array(const std::vector<std::optional<double>>& v) {
    Json out = Json::array();
    for (const auto& x : v)
        out.push_back(optional_json(x));
    return out;
}

SlotPolynomial slots(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        fail(path, "expected a non-empty array of numbers or gain names");
    SlotPolynomial out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (j[i].is_string())
            out.emplace_back(j[i].get<std::string>());
        else
            out.emplace_back(number(j[i], p));
    }
    return out;
}

Json slots_json(const SlotPolynomial& s) {
    Json out = Json::array();
    for (const auto& x : s) {
        if (const auto* v = std::get_if<double>(&x))
            out.push_back(*v);
        else
            out.push_back(std::get<std::string>(x));
    }
    return out;
}

StateSpaceModel state_space_from_json(const Json& doc) {
    StateSpaceModel m;
    if (doc.contains("name"))
        m.name = string_of(doc["name"], "name");
    m.A = matrix(require(doc, "A", ""), "A");
    m.B = matrix(require(doc, "B", ""), "B");
    m.C = matrix(require(doc, "C", ""), "C");
    m.state_names = names(require(doc, "state_names", ""), "state_names");
    m.input_names = names(require(doc, "input_names", ""), "input_names");
    m.output_names = names(require(doc, "output_names", ""), "output_names");
    if (doc.contains("params")) {
        const auto& params = doc["params"];
        if (!params.is_object())
            fail("params", "expected an object");
        for (const auto& [name, ref] : params.items()) {
            const std::string p = "params." + name;
            if (!ref.is_array() || ref.size() != 3)
                fail(p, "expected [matrix, row, col]");
            const std::string id = string_of(ref[0], p + "[0]");
            if (id != "A" && id != "B" && id != "C")
                fail(p + "[0]", "matrix must be \"A\", \"B\" or \"C\"");
            if (!ref[1].is_number_integer() || !ref[2].is_number_integer())
                fail(p, "row and col must be integers");
            m.params[name] = {id[0], ref[1].get<Eigen::Index>(), ref[2].get<Eigen::Index>()};
        }
    }
    m.validate();
    return m;
}

TransferMatrix transfer_matrix_from_json(const Json& doc) {
    TransferMatrix m;
    if (doc.contains("name"))
        m.name = string_of(doc["name"], "name");
    m.delta = polynomial_from_json(require(doc, "delta", ""), "delta");
    m.input_names = names(require(doc, "input_names", ""), "input_names");
    m.output_names = names(require(doc, "output_names", ""), "output_names");
    const auto& nums = require(doc, "numerators", "");
    if (!nums.is_object())
        fail("numerators", "expected an object");
    for (const auto& [key, value] : nums.items()) {
        ChannelKey k;
        try {
            k = parse_channel_name(key);
        } catch (const ValidationError& e) {
            fail("numerators." + key, e.what());
        }
        m.numerators[k] = polynomial_from_json(value, "numerators." + key);
    }
    m.validate();
    return m;
}

} // namespace

Json to_json(const Polynomial& p) {
    Json out = Json::array();
    for (double c : p.coeffs())
        out.push_back(c);
    return out;
}

Polynomial polynomial_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        fail(path, "expected a non-empty array of numbers (ascending powers)");
    std::vector<double> c;
    for (std::size_t i = 0; i < j.size(); ++i)
        c.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return Polynomial(std::move(c));
}

Model load_model(const Json& doc) {
    if (!doc.is_object())
        fail("(document)", "expected a JSON object");
    const std::string form = string_of(require(doc, "form", ""), "form");
    if (form == "state-space")
        return state_space_from_json(doc);
    if (form == "transfer-matrix")
        return transfer_matrix_from_json(doc);
    fail("form", "unknown form tag '" + form + "' (state-space | transfer-matrix)");
}

Model load_model_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("(document): invalid JSON: ") + e.what());
    }
    return load_model(doc);
}

Json to_json(const TransferMatrix& m) {
    Json out;
    out["name"] = m.name;
    out["form"] = "transfer-matrix";
    out["delta"] = to_json(m.delta);
    Json nums = Json::object();
    for (const auto& y : m.output_names)
        for (const auto& u : m.input_names)
            nums[channel_name({y, u})] = to_json(m.numerator(y, u));
    out["numerators"] = nums;
    out["input_names"] = m.input_names;
    out["output_names"] = m.output_names;
    return out;
}

Json to_json(const StateSpaceModel& m) {
    Json out;
    out["name"] = m.name;
    out["form"] = "state-space";
    out["A"] = matrix_json(m.A);
    out["B"] = matrix_json(m.B);
    out["C"] = matrix_json(m.C);
    out["state_names"] = m.state_names;
    out["input_names"] = m.input_names;
    out["output_names"] = m.output_names;
    Json params = Json::object();
    for (const auto& [name, ref] : m.params)
        params[name] = Json::array({std::string(1, ref.matrix), ref.row, ref.col});
    out["params"] = params;
    return out;
}

Json to_json(const Model& m) {
    return std::visit([](const auto& x) { return to_json(x); }, m);
}

ControllerDocument load_controller(const Json& doc) {
    if (!doc.is_object())
        fail("(controller)", "expected a JSON object");
    ControllerDocument out;
    auto& c = out.spec;
    c.denominator = polynomial_from_json(require(doc, "denominator", ""), "denominator");
    c.reference_numerator = slots(require(doc, "reference_numerator", ""), "reference_numerator");
    const auto& fb = require(doc, "feedback", "");
    if (!fb.is_object() || fb.empty())
        fail("feedback", "expected a non-empty object output -> coefficient list");
    for (const auto& [name, value] : fb.items())
        c.feedback.emplace_back(name, slots(value, "feedback." + name));
    c.actuated_input = string_of(require(doc, "actuated_input", ""), "actuated_input");
    c.finalize();
    if (doc.contains("gains")) {
        const auto& g = doc["gains"];
        if (!g.is_object())
            fail("gains", "expected an object name -> number");
        for (const auto& [name, value] : g.items())
            out.gains[name] = number(value, "gains." + name);
    }
    return out;
}

Json to_json(const ControllerSpec& spec, const GainMap& gains) {
    Json out;
    out["denominator"] = to_json(spec.denominator);
    out["reference_numerator"] = slots_json(spec.reference_numerator);
    Json fb = Json::object();
    for (const auto& [name, s] : spec.feedback)
        fb[name] = slots_json(s);
    out["feedback"] = fb;
    out["actuated_input"] = spec.actuated_input;
    Json g = Json::object();
    for (const auto& name : spec.gain_names)
        if (auto it = gains.find(name); it != gains.end())
            g[name] = it->second;
    out["gains"] = g;
    return out;
}

Json to_json(const std::vector<std::complex<double>>& roots) {
    Json out = Json::array();
    for (auto r : roots)
        out.push_back(Json::array({r.real(), r.imag()}));
    return out;
}

Json to_json(const StabilityProfile& p) {
    Json out;
    out["coeffs"] = p.coeffs;
    out["gammas"] = optional_array(p.gammas);
    out["gamma_stars"] = optional_array(p.gamma_stars);
    out["tau"] = p.tau;
    out["taus"] = optional_array(p.taus);
    out["sign_uniform"] = p.sign_uniform;
    return out;
}

Json to_json(const ConditionReport& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries) {
        Json j;
        j["i"] = e.i;
        j["lhs"] = optional_json(e.lhs);
        j["rhs"] = optional_json(e.rhs);
        j["satisfied"] = e.satisfied;
        j["index_lhs"] = optional_json(e.index_lhs);
        j["index_rhs"] = optional_json(e.index_rhs);
        entries.push_back(j);
    }
    Json out;
    out["entries"] = entries;
    out["sufficiently_stable"] = r.sufficiently_stable;
    out["sufficiently_unstable"] = r.sufficiently_unstable;
    out["inconclusive"] = r.inconclusive;
    out["note"] = r.note;
    return out;
}

Json to_json(const DiagramDataset& d) {
    Json curves = Json::array();
    for (const auto& [name, pts] : d.curves) {
        Json points = Json::array();
        for (const auto& pt : pts) {
            Json p;
            p["i"] = pt.i;
            p["log10_magnitude"] = optional_json(pt.log10_magnitude);
            p["sign"] = std::string(1, sign_char(pt.sign));
            points.push_back(p);
        }
        Json c;
        c["name"] = name;
        c["points"] = points;
        curves.push_back(c);
    }
    Json out;
    out["curves"] = curves;
    return out;
}

Json to_json(const RouthVerdict& v) {
    Json out;
    out["stable"] = v.stable;
    out["first_column"] = v.first_column;
    out["degenerate"] = v.degenerate;
    return out;
}

Json to_json(const GainAssignment& g) {
    Json out;
    Json values = Json::object();
    for (const auto& [k, v] : g.values)
        values[k] = v;
    out["gains"] = values;
    out["achieved"] = to_json(g.achieved);
    out["target"] = to_json(g.target);
    out["residuals"] = g.residuals;
    out["bound"] = g.bound;
    out["rank"] = g.rank;
    return out;
}

Json to_json(const TransferFunction& tf) {
    Json out;
    out["num"] = to_json(tf.num);
    out["den"] = to_json(tf.den);
    return out;
}

Json to_json(const Metrics& m) {
    Json out;
    out["settling_time_s"] = optional_json(m.settling_time_s);
    out["overshoot_fraction"] = optional_json(m.overshoot_fraction);
    out["steady_state_error"] = optional_json(m.steady_state_error);
    return out;
}

Json to_json(const SimulationResult& r) {
    Json out;
    out["step"] = r.step;
    out["diverged"] = r.diverged;
    out["t"] = r.t;
    Json ch = Json::object();
    for (const auto& [name, v] : r.channels)
        ch[name] = v;
    out["channels"] = ch;
    return out;
}

Json to_json(const SweepReport& r, bool include_runs) {
    Json plan;
    plan["parameters"] = r.plan.parameters;
    plan["fraction"] = r.plan.fraction;
    plan["samples"] = r.plan.samples;
    plan["seed"] = r.plan.seed;
    plan["include_corners"] = r.plan.include_corners;

    Json agg;
    agg["runs"] = r.runs.size();
    agg["fraction_stable"] = r.fraction_stable;
    agg["settling_time_min_s"] = optional_json(r.settling_min);
    agg["settling_time_median_s"] = optional_json(r.settling_median);
    agg["settling_time_max_s"] = optional_json(r.settling_max);

    Json out;
    out["plan"] = plan;
    out["aggregate"] = agg;
    if (include_runs) {
        Json runs = Json::array();
        for (const auto& run : r.runs) {
            Json j;
            j["factors"] = run.factors;
            j["stable"] = run.stable;
            j["settling_time_s"] = optional_json(run.settling_time_s);
            j["steady_state_error"] = optional_json(run.steady_state_error);
            j["diverged"] = run.diverged;
            runs.push_back(j);
        }
        out["runs"] = runs;
    }
    return out;
}

SignalSpec signal_from_json(const Json& j, const std::string& path, SignalSpec s) {
    if (!j.is_object())
        fail(path, "expected an object");
    if (j.contains("kind")) {
        const std::string kind = string_of(j["kind"], join(path, "kind"));
        try {
            s.kind = parse_signal_kind(kind);
        } catch (const ValidationError& e) {
            fail(join(path, "kind"), e.what());
        }
    }
    if (j.contains("amplitude"))
        s.amplitude = number(j["amplitude"], join(path, "amplitude"));
    if (j.contains("t0"))
        s.t0 = number(j["t0"], join(path, "t0"));
    if (j.contains("half_width"))
        s.half_width = number(j["half_width"], join(path, "half_width"));
    if (j.contains("area"))
        s.area = number(j["area"], join(path, "area"));
    try {
        s.validate();
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    return s;
}

Json to_json(const SignalSpec& s) {
    Json out;
    out["kind"] = to_string(s.kind);
    out["amplitude"] = s.amplitude;
    out["t0"] = s.t0;
    out["half_width"] = s.half_width;
    out["area"] = s.area;
    return out;
}

} // namespace cdm
