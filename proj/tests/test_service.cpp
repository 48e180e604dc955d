#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cdm/error.hpp"
#include "cdm/io.hpp"
#include "cdm/service.hpp"

using namespace cdm;

namespace {

Json hover_controller_doc() { return to_json(hover_pid_controller(), hover_design_gains()); }

Json state_space_doc() {
    return Json::parse(R"({
        "name": "mass-damper",
        "form": "state-space",
        "A": [[0, 1], [-2, -3]],
        "B": [[0], [1]],
        "C": [[1, 0]],
        "state_names": ["x", "v"],
        "input_names": ["f"],
        "output_names": ["x"],
        "params": {"k": ["A", 1, 0]}
    })");
}

} // namespace

TEST_CASE("polynomial json") {
    CHECK(polynomial_from_json(Json::parse("[1, 2, 0]"), "p") == Polynomial{1, 2});
    CHECK_THROWS_WITH_AS(polynomial_from_json(Json::parse(R"([1, "x"])"), "numerators.u/delta_lon"),
                         doctest::Contains("numerators.u/delta_lon[1]"), ValidationError);
    CHECK_THROWS_AS(polynomial_from_json(Json::parse("[]"), "p"), ValidationError);
    CHECK(to_json(Polynomial{1.5, 2}) == Json::parse("[1.5, 2.0]"));
}

TEST_CASE("model documents round trip") {
    const auto tm = fixture_r50_hover_lonvert(true);
    const Json doc = to_json(tm);
    CHECK(doc["form"] == "transfer-matrix");
    const Model back = load_model(doc);
    REQUIRE(std::holds_alternative<TransferMatrix>(back));
    CHECK(std::get<TransferMatrix>(back) == tm);
    CHECK(load_model_text(doc.dump()).index() == 1);

    const Model ss = load_model(state_space_doc());
    REQUIRE(std::holds_alternative<StateSpaceModel>(ss));
    CHECK(std::get<StateSpaceModel>(load_model(to_json(ss))) == std::get<StateSpaceModel>(ss));
}

TEST_CASE("model document errors carry field paths") {
    Json doc = state_space_doc();
    doc["form"] = "zpk";
    CHECK_THROWS_WITH_AS(load_model(doc), doctest::Contains("form: unknown form tag"), ValidationError);

    doc = state_space_doc();
    doc["B"] = Json::parse("[[0], [1], [2]]");
    CHECK_THROWS_WITH_AS(load_model(doc), doctest::Contains("B: expected 2 rows"), ValidationError);

    doc = to_json(fixture_r50_hover_lonvert(true));
    doc["numerators"]["u/delta_lon"] = Json::parse("[1, 2, 3, 4, 5, 6]");
    CHECK_THROWS_WITH_AS(load_model(doc), doctest::Contains("numerators.u/delta_lon"), ValidationError);

    CHECK_THROWS_AS(load_model_text("{not json"), ValidationError);
}

TEST_CASE("controller documents") {
    const auto doc = load_controller(hover_controller_doc());
    CHECK(doc.spec.gain_names == hover_pid_controller().gain_names);
    CHECK(doc.gains == hover_design_gains());

    Json bad = hover_controller_doc();
    bad["feedback"]["u"] = Json::parse(R"([true])");
    CHECK_THROWS_WITH_AS(load_controller(bad), doctest::Contains("feedback.u[0]"), ValidationError);
    bad = hover_controller_doc();
    bad.erase("actuated_input");
    CHECK_THROWS_WITH_AS(load_controller(bad), doctest::Contains("actuated_input"), ValidationError);
}

TEST_CASE("signal documents") {
    const auto s = signal_from_json(Json::parse(R"({"kind": "doublet", "t0": 2})"), "reference",
                                    SignalSpec::doublet());
    CHECK(s.kind == SignalKind::Doublet);
    CHECK(s.t0 == 2.0);
    CHECK(s.half_width == 5.0);
    CHECK_THROWS_WITH_AS(signal_from_json(Json::parse(R"({"kind": "ramp"})"), "reference", {}),
                         doctest::Contains("reference.kind"), ValidationError);
}

TEST_CASE("analyze a polynomial") {
    const Json out = service::analyze(Json{{"polynomial", {1, 2.5, 2.5}}});
    CHECK(out["degree"] == 2);
    CHECK(out["profile"]["gammas"][0].get<double>() == doctest::Approx(2.5));
    CHECK(out["routh"]["stable"] == true);
    CHECK(out["roots"].size() == 2);
    CHECK(out["stability_condition"]["inconclusive"] == true);
    CHECK(out["instability_condition"].is_null());
}

TEST_CASE("analyze the hover fixture") {
    const Json out = service::analyze(Json{{"model_ref", "r50-hover-lonvert"}});
    CHECK(out["curve"] == "delta");
    CHECK(out["routh"]["stable"] == false);
    const auto& e = out["stability_condition"]["entries"][0];
    CHECK(e["i"] == 2);
    CHECK(e["rhs"].get<double>() == doctest::Approx(61.92344036822647).epsilon(1e-12));
    CHECK(e["satisfied"] == false);
    int rhp = 0;
    for (const auto& r : out["roots"])
        rhp += r[0].get<double>() > 0.0;
    CHECK(rhp == 1);
    // delta plus the five nonzero numerators.
    CHECK(out["diagram"]["curves"].size() == 6);

    const Json num = service::analyze(Json{{"model_ref", "r50-hover-lonvert"}, {"curve", "u/delta_lon"}});
    CHECK(num["degree"] == 3);
    CHECK_THROWS_WITH_AS(service::analyze(Json{{"model_ref", "r50-hover-lonvert"}, {"curve", "z/delta_lon"}}),
                         doctest::Contains("curve"), ValidationError);
    CHECK_THROWS_WITH_AS(service::analyze(Json{{"model_ref", "nope"}}), doctest::Contains("model_ref"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(service::analyze(Json::object()), doctest::Contains("model_ref: missing"), ValidationError);
}

TEST_CASE("closed-loop endpoint") {
    const Json out =
        service::closed_loop(Json{{"model_ref", "r50-hover-lonvert"}, {"controller", hover_controller_doc()}});
    CHECK(out["routh"]["stable"] == true);
    CHECK(out["controller_proper"] == true);
    CHECK(out["P"].size() == 7);
    CHECK(out["dc_gains"]["tracking"]["u"].get<double>() == doctest::Approx(0.9470823579575192));
    CHECK(out["dc_gains"]["disturbance"]["u"].get<double>() == 0.0);

    Json req{{"model_ref", "r50-hover-lonvert"}, {"controller", hover_controller_doc()}, {"gains", {{"k4", "x"}}}};
    CHECK_THROWS_WITH_AS(service::closed_loop(req), doctest::Contains("gains.k4"), ValidationError);
    Json ctrl = hover_controller_doc();
    ctrl.erase("gains");
    CHECK_THROWS_WITH_AS(service::closed_loop(Json{{"model_ref", "r50-hover-lonvert"}, {"controller", ctrl}}),
                         doctest::Contains("unbound gain"), ValidationError);
}

TEST_CASE("simulate endpoint") {
    const Json out = service::simulate(Json{{"model_ref", "r50-hover-lonvert"},
                                            {"controller", hover_controller_doc()},
                                            {"step", 1e-2},
                                            {"max_points", 300}});
    CHECK(out["metrics"]["diverged"] == false);
    CHECK(out["series"]["t"].size() <= 300);
    CHECK(out["series"]["channels"].contains("delta_lon"));

    // Open loop without a controller: diverges.
    const Json open = service::simulate(Json{{"model_ref", "r50-hover-lonvert"}, {"horizon", 100}, {"step", 1e-2}});
    CHECK(open["metrics"]["diverged"] == true);

    CHECK_THROWS_AS(service::simulate(Json{{"model_ref", "r50-hover-lonvert"}, {"step", -1}}), ValidationError);
}

TEST_CASE("solve endpoint") {
    Json ctrl = hover_controller_doc();
    ctrl.erase("gains");
    const Json out = service::solve(Json{{"model_ref", "r50-hover-lonvert"}, {"controller", ctrl}, {"tau", 3.0}});
    CHECK(out["rank"] == 5);
    CHECK(out["gains"].size() == 5);
    CHECK(out.contains("routh"));
    CHECK_THROWS_AS(service::solve(Json{{"model_ref", "r50-hover-lonvert"}, {"controller", ctrl}}), ValidationError);
}

TEST_CASE("sweep endpoint") {
    Json req{{"model_ref", "r50-hover-lonvert"},
             {"controller", hover_controller_doc()},
             {"plan", {{"parameters", {"delta[0]"}}, {"samples", 3}, {"seed", 5}}},
             {"scenario", {{"step", 1e-2}}}};
    const Json out = service::sweep(req, 1);
    CHECK(out["runs"].size() == 5);
    CHECK(out["aggregate"].contains("fraction_stable"));
    req["plan"]["parameters"] = {"X_u"};
    CHECK_THROWS_WITH_AS(service::sweep(req, 1), doctest::Contains("unknown parameter"), ValidationError);
}

TEST_CASE("fixture listing") {
    const Json f = service::fixtures();
    REQUIRE(f["fixtures"].size() == 2);
    CHECK(f["fixtures"][0]["name"] == "r50-hover-lonvert");
}

TEST_CASE("shipped data files match the built-in fixtures") {
    const auto read = [](const char* name) {
        std::ifstream in(std::string(CDM_DATA_DIR) + "/" + name);
        REQUIRE(in);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string corrected = read("r50_hover_lonvert.json");
    CHECK(corrected == to_json(fixture_r50_hover_lonvert(true)).dump(2) + "\n");
    CHECK(std::get<TransferMatrix>(load_model_text(corrected)) == fixture_r50_hover_lonvert(true));
    CHECK(std::get<TransferMatrix>(load_model_text(read("r50_hover_lonvert_verbatim.json"))) ==
          fixture_r50_hover_lonvert(false));

    const auto ctrl = load_controller(Json::parse(read("hover_pid_controller.json")));
    const auto builtin = hover_pid_controller();
    CHECK(ctrl.spec.gain_names == builtin.gain_names);
    CHECK(ctrl.spec.actuated_input == builtin.actuated_input);
    CHECK(ctrl.gains == hover_design_gains());
    CHECK(closed_loop_poly(fixture_r50_hover_lonvert(true), ctrl.spec, ctrl.gains) ==
          closed_loop_poly(fixture_r50_hover_lonvert(true), builtin, hover_design_gains()));
}
