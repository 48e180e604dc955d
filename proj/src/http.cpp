#include "cdm/http.hpp"

#include "cdm/error.hpp"
#include "cdm/service.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen internals.
#include <httplib.h>

namespace cdm {

namespace {

constexpr const char* kJson = "application/json";

void reply_error(httplib::Response& res, int status, const std::string& message) {
    Json body;
    body["error"] = message;
    // Validation messages lead with the field path: "controller.feedback.u[1]: ..."
    if (status == 400) {
        const auto colon = message.find(": ");
        body["path"] = colon == std::string::npos ? "" : message.substr(0, colon);
    }
    res.status = status;
    res.set_content(body.dump(), kJson);
}

template <typename Handler>
httplib::Server::Handler json_endpoint(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        Json body;
        try {
            body = Json::parse(req.body);
        } catch (const Json::parse_error& e) {
            reply_error(res, 400, std::string("(body): invalid JSON: ") + e.what());
            return;
        }
        try {
            res.set_content(handler(body).dump(), kJson);
        } catch (const ValidationError& e) {
            reply_error(res, 400, e.what());
        } catch (const ComputationError& e) {
            reply_error(res, 422, e.what());
        } catch (const std::exception& e) {
            reply_error(res, 422, e.what());
        }
    };
}

} // namespace

void install_routes(httplib::Server& server, const ServeOptions& opts) {
    server.Post("/api/analyze", json_endpoint([](const Json& b) { return service::analyze(b); }));
    server.Post("/api/closed-loop", json_endpoint([](const Json& b) { return service::closed_loop(b); }));
    server.Post("/api/simulate", json_endpoint([](const Json& b) { return service::simulate(b); }));
    server.Post("/api/solve", json_endpoint([](const Json& b) { return service::solve(b); }));
    const unsigned workers = opts.sweep_workers;
    server.Post("/api/sweep", json_endpoint([workers](const Json& b) { return service::sweep(b, workers); }));
    server.Get("/api/fixtures", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(service::fixtures().dump(), kJson);
    });
    if (!opts.static_dir.empty())
        server.set_mount_point("/", opts.static_dir);
}

} // namespace cdm
