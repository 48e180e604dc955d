// cdm: coefficient-diagram design toolkit front end.
//
// Exit status: 0 success, 1 computation error, 2 usage or validation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cdm/error.hpp"
#include "cdm/http.hpp"
#include "cdm/service.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen internals.
#include <httplib.h>

namespace {

using cdm::Json;
using cdm::ValidationError;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

Json parse_inline(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(what + ": invalid JSON: " + e.what());
    }
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError(path + ": cannot write file");
    out << content;
}

std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

struct ModelSource {
    std::string fixture;
    std::string path;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--fixture", fixture, "Built-in model (r50-hover-lonvert, r50-hover-lonvert-verbatim)");
        cmd->add_option("--model", path, "Model JSON file");
    }

    [[nodiscard]] bool given() const { return !fixture.empty() || !path.empty(); }

    [[nodiscard]] Json ref() const {
        if (!fixture.empty() && !path.empty())
            throw ValidationError("--fixture and --model are mutually exclusive");
        if (!fixture.empty())
            return fixture;
        if (!path.empty())
            return read_json_file(path);
        throw ValidationError("one of --fixture or --model is required");
    }
};

// "builtin:hover-pid" or a controller JSON file.
Json controller_doc(const std::string& arg) {
    if (arg == "builtin:hover-pid")
        return cdm::to_json(cdm::hover_pid_controller(), cdm::hover_design_gains());
    return read_json_file(arg);
}

Json gain_overrides(const std::vector<std::string>& items) {
    Json g = Json::object();
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--gain " + item + ": expected name=value");
        try {
            std::size_t used = 0;
            const double v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1)
                throw std::invalid_argument("trailing characters");
            g[item.substr(0, eq)] = v;
        } catch (const std::exception&) {
            throw ValidationError("--gain " + item + ": value is not a number");
        }
    }
    return g;
}

struct SignalFlags {
    std::string reference = "doublet";
    double ref_amplitude = 1.0, ref_t0 = 1.0, ref_half_width = 5.0;
    std::string disturbance = "impulse";
    double dist_t0 = 35.0, dist_area = 1.0;
    double horizon = 50.0, step = 1e-3;
    std::string metric_channel;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--reference", reference, "Reference signal: doublet|step|impulse|zero")->capture_default_str();
        cmd->add_option("--ref-amplitude", ref_amplitude, "Reference amplitude (impulse: area)")->capture_default_str();
        cmd->add_option("--ref-t0", ref_t0, "Reference start time [s]")->capture_default_str();
        cmd->add_option("--ref-half-width", ref_half_width, "Doublet half width [s]")->capture_default_str();
        cmd->add_option("--disturbance", disturbance, "Disturbance signal: impulse|step|doublet|zero")
            ->capture_default_str();
        cmd->add_option("--dist-t0", dist_t0, "Disturbance time [s]")->capture_default_str();
        cmd->add_option("--dist-area", dist_area, "Disturbance impulse area (or level)")->capture_default_str();
        cmd->add_option("--horizon", horizon, "Simulation horizon [s]")->capture_default_str();
        cmd->add_option("--step", step, "Integration step [s]")->capture_default_str();
        cmd->add_option("--metric-channel", metric_channel, "Channel for settling/overshoot metrics");
    }

    void into(Json& req) const {
        Json r;
        r["kind"] = reference;
        r["amplitude"] = ref_amplitude;
        r["area"] = ref_amplitude;
        r["t0"] = ref_t0;
        r["half_width"] = ref_half_width;
        Json d;
        d["kind"] = disturbance;
        d["t0"] = dist_t0;
        d["area"] = dist_area;
        d["amplitude"] = dist_area;
        req["reference"] = r;
        req["disturbance"] = d;
        req["horizon"] = horizon;
        req["step"] = step;
        if (!metric_channel.empty())
            req["metric_channel"] = metric_channel;
    }
};

void print_residuals(const Json& solved) {
    std::fprintf(stderr, "%4s %22s %22s %14s\n", "i", "achieved", "target", "residual");
    const auto& a = solved["achieved"];
    const auto& t = solved["target"];
    const auto& r = solved["residuals"];
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double av = i < a.size() ? a[i].get<double>() : 0.0;
        const double tv = i < t.size() ? t[i].get<double>() : 0.0;
        std::fprintf(stderr, "%4zu %22.12g %22.12g %14.6e\n", i, av, tv, r[i].get<double>());
    }
    std::fprintf(stderr, "rank %zu\n", solved["rank"].get<std::size_t>());
}

std::vector<std::size_t> parse_index_list(const std::vector<std::string>& items) {
    std::vector<std::size_t> out;
    for (const auto& s : items) {
        try {
            out.push_back(static_cast<std::size_t>(std::stoul(s)));
        } catch (const std::exception&) {
            throw ValidationError("--bind " + s + ": not a coefficient index");
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coefficient diagram method controller design toolkit"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Stability indices, conditions, roots and coefficient diagram");
    ModelSource analyze_model;
    analyze_model.add_to(analyze);
    std::string analyze_poly, analyze_out, analyze_csv;
    analyze->add_option("--poly", analyze_poly, "JSON coefficient array (ascending) or a curve name of the model");
    analyze->add_option("--out", analyze_out, "Report JSON path (default stdout)");
    analyze->add_option("--csv", analyze_csv, "Coefficient diagram CSV path");

    // tf
    auto* tf = app.add_subcommand("tf", "Transfer-matrix document from a model");
    ModelSource tf_model;
    tf_model.add_to(tf);
    std::string tf_out;
    tf->add_option("--out", tf_out, "Output path (default stdout)");

    // synth
    auto* synth = app.add_subcommand("synth", "Solve controller gains against a target polynomial");
    ModelSource synth_model;
    synth_model.add_to(synth);
    std::string synth_ctrl, synth_target, synth_out;
    std::optional<double> synth_tau, synth_a0;
    std::vector<double> synth_gammas;
    std::vector<std::string> synth_bind;
    synth->add_option("--controller", synth_ctrl, "Controller JSON file or builtin:hover-pid")->required();
    synth->add_option("--target", synth_target, "Target polynomial, JSON array ascending");
    synth->add_option("--tau", synth_tau, "Equivalent time constant of the target [s]");
    synth->add_option("--gammas", synth_gammas, "Stability indices of the target (default 2.5,2,2,...)")->delimiter(',');
    synth->add_option("--a0", synth_a0, "Target a0 (scale only)");
    synth->add_option("--bind", synth_bind, "Coefficient indices to match exactly")->delimiter(',');
    synth->add_option("--out", synth_out, "Gains document path (default stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Time response of the open or closed loop");
    ModelSource sim_model;
    sim_model.add_to(sim);
    std::string sim_ctrl, sim_csv, sim_metrics, sim_input;
    std::vector<std::string> sim_gains;
    SignalFlags sim_signals;
    sim->add_option("--controller", sim_ctrl, "Controller JSON file or builtin:hover-pid (omit for open loop)");
    sim->add_option("--gain", sim_gains, "Gain override name=value (repeatable)");
    sim->add_option("--input", sim_input, "Open loop: plant input driven by the signals");
    sim_signals.add_to(sim);
    sim->add_option("--csv", sim_csv, "Full-resolution CSV path (default stdout)");
    sim->add_option("--metrics", sim_metrics, "Metrics JSON path (default stderr)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Parametric robustness sweep");
    ModelSource sweep_model;
    sweep_model.add_to(sweep);
    std::string sweep_ctrl, sweep_csv, sweep_json;
    std::vector<std::string> sweep_params, sweep_gains;
    double sweep_fraction = 0.30;
    std::size_t sweep_samples = 100;
    std::uint64_t sweep_seed = 42;
    bool sweep_no_corners = false;
    unsigned sweep_workers = 0;
    SignalFlags sweep_signals;
    sweep->add_option("--controller", sweep_ctrl, "Controller JSON file or builtin:hover-pid")->required();
    sweep->add_option("--gain", sweep_gains, "Gain override name=value (repeatable)");
    sweep->add_option("--params", sweep_params, "Perturbed parameters, e.g. delta[0],delta[1]")
        ->delimiter(',')
        ->required();
    sweep->add_option("--fraction", sweep_fraction, "Perturbation half-range")->capture_default_str();
    sweep->add_option("--samples", sweep_samples, "Random samples")->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "Generator seed")->capture_default_str();
    sweep->add_flag("--no-corners", sweep_no_corners, "Skip the 2^k corner runs");
    sweep->add_option("--workers", sweep_workers, "Worker threads (default CDM_WORKERS or hardware)");
    sweep_signals.add_to(sweep);
    sweep->add_option("--csv", sweep_csv, "Per-run CSV path (default stdout)");
    sweep->add_option("--json", sweep_json, "Aggregate JSON path (default stderr)");

    // serve
    auto* serve = app.add_subcommand("serve", "Stateless JSON-over-HTTP service for the tuner UI");
    int serve_port = 8080;
    std::string serve_host = "127.0.0.1", serve_static;
    serve->add_option("--port", serve_port, "Listen port")->capture_default_str();
    serve->add_option("--host", serve_host, "Listen address")->capture_default_str();
    serve->add_option("--static", serve_static, "Directory of static UI assets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*analyze) {
            Json req;
            if (analyze_model.given()) {
                req["model_ref"] = analyze_model.ref();
                req["curve"] = analyze_poly.empty() ? "delta" : analyze_poly;
            } else if (!analyze_poly.empty()) {
                req["polynomial"] = parse_inline(analyze_poly, "--poly");
            } else {
                throw ValidationError("analyze: give --poly, or --fixture/--model");
            }
            const Json report = cdm::service::analyze(req);
            write_output(analyze_out, pretty(report));
            if (!analyze_csv.empty()) {
                // Rebuild the dataset from the report so CSV and JSON cannot disagree.
                cdm::DiagramDataset d;
                for (const auto& c : report["diagram"]["curves"]) {
                    std::vector<cdm::DiagramPoint> pts;
                    for (const auto& p : c["points"]) {
                        cdm::DiagramPoint pt;
                        pt.i = p["i"].get<std::size_t>();
                        if (!p["log10_magnitude"].is_null())
                            pt.log10_magnitude = p["log10_magnitude"].get<double>();
                        const auto s = p["sign"].get<std::string>();
                        pt.sign = s == "+" ? cdm::CoeffSign::Positive
                                  : s == "-" ? cdm::CoeffSign::Negative
                                             : cdm::CoeffSign::Zero;
                        pts.push_back(pt);
                    }
                    d.curves.emplace_back(c["name"].get<std::string>(), std::move(pts));
                }
                write_output(analyze_csv, cdm::to_csv(d));
            }
        } else if (*tf) {
            const cdm::Model m = cdm::service::resolve_model(tf_model.ref(), tf_model.fixture.empty() ? "--model" : "--fixture");
            write_output(tf_out, pretty(cdm::to_json(cdm::to_transfer_matrix(m))));
        } else if (*synth) {
            Json req;
            req["model_ref"] = synth_model.ref();
            req["controller"] = controller_doc(synth_ctrl);
            if (!synth_target.empty())
                req["target"] = parse_inline(synth_target, "--target");
            if (synth_tau)
                req["tau"] = *synth_tau;
            if (!synth_gammas.empty())
                req["gammas"] = synth_gammas;
            if (synth_a0)
                req["a0"] = *synth_a0;
            if (!synth_bind.empty())
                req["bind"] = parse_index_list(synth_bind);
            const Json solved = cdm::service::solve(req);
            print_residuals(solved);
            Json doc = solved["controller"];
            doc["residuals"] = solved["residuals"];
            doc["achieved"] = solved["achieved"];
            doc["target"] = solved["target"];
            doc["rank"] = solved["rank"];
            doc["stable"] = solved["routh"]["stable"];
            write_output(synth_out, pretty(doc));
        } else if (*sim) {
            Json req;
            req["model_ref"] = sim_model.ref();
            if (!sim_ctrl.empty())
                req["controller"] = controller_doc(sim_ctrl);
            if (!sim_gains.empty())
                req["gains"] = gain_overrides(sim_gains);
            if (!sim_input.empty())
                req["input"] = sim_input;
            sim_signals.into(req);
            Json metrics;
            const cdm::SimulationResult res = cdm::service::run_simulation(req, metrics);
            write_output(sim_csv, cdm::to_csv(res));
            if (sim_metrics.empty())
                std::cerr << pretty(metrics);
            else
                write_output(sim_metrics, pretty(metrics));
        } else if (*sweep) {
            Json req;
            req["model_ref"] = sweep_model.ref();
            req["controller"] = controller_doc(sweep_ctrl);
            if (!sweep_gains.empty())
                req["gains"] = gain_overrides(sweep_gains);
            Json plan;
            plan["parameters"] = sweep_params;
            plan["fraction"] = sweep_fraction;
            plan["samples"] = sweep_samples;
            plan["seed"] = sweep_seed;
            plan["include_corners"] = !sweep_no_corners;
            req["plan"] = plan;
            Json scenario;
            sweep_signals.into(scenario);
            req["scenario"] = scenario;
            const cdm::SweepReport report = cdm::service::run_sweep(req, sweep_workers);
            write_output(sweep_csv, cdm::to_csv(report));
            const std::string agg = pretty(cdm::to_json(report, false));
            if (sweep_json.empty())
                std::cerr << agg;
            else
                write_output(sweep_json, agg);
        } else if (*serve) {
            httplib::Server server;
            cdm::ServeOptions opts;
            opts.static_dir = serve_static;
            if (!serve_static.empty() && !std::filesystem::is_directory(serve_static))
                throw ValidationError(serve_static + ": not a directory");
            cdm::install_routes(server, opts);
            std::cerr << "listening on http://" << serve_host << ":" << serve_port << "\n";
            if (!server.listen(serve_host, serve_port)) {
                std::cerr << "error: cannot listen on " << serve_host << ":" << serve_port << "\n";
                return 1;
            }
        }
    } catch (const cdm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cdm::ComputationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
