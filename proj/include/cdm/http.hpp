#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace cdm {

struct ServeOptions {
    std::string static_dir; // served at / when non-empty
    unsigned sweep_workers = 0;
};

// POST /api/analyze, /api/closed-loop, /api/simulate, /api/solve, /api/sweep
// and GET /api/fixtures. Malformed bodies answer 400 {"error", "path"},
// computation failures 422 {"error"}.
void install_routes(httplib::Server& server, const ServeOptions& opts);

} // namespace cdm
