#pragma once

#include <cstddef>
#include <string>

#include "session_store.h"

namespace httplib {
class Server;
}

namespace sdfilter::service {

struct ServiceConfig {
  std::size_t max_upload_bytes = 256u << 20;
  /// Used when an upload names no schedule.
  std::string default_schedule =
      R"([{"lambda": 2, "eta": "2lc", "mu": 1.5, "nu": 0.45},)"
      R"( {"lambda": 2, "eta": "4lc", "mu": 1.5, "nu": 0.45}])";
};

/// Registers every endpoint on `server`. `store` must outlive the server.
void register_routes(httplib::Server& server, SessionStore& store, const ServiceConfig& config);

}  // namespace sdfilter::service
