#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "api.h"
#include "sdfilter/parallel.h"

#include <httplib.h>

namespace {

long env_number(const char* name, long fallback) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return fallback;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) {
    std::cerr << "ignoring invalid " << name << "='" << v << "'\n";
    return fallback;
  }
  return n;
}

}  // namespace

int main() {
  const long port = env_number("SDFILTER_PORT", 8080);
  const long cap = env_number("SDFILTER_SESSION_CAP", 8);
  const char* host = std::getenv("SDFILTER_HOST");
  const char* dir = std::getenv("SDFILTER_SESSION_DIR");
  sdfilter::set_thread_count(static_cast<int>(env_number("SDFILTER_THREADS", 0)));

  sdfilter::service::ServiceConfig config;
  config.max_upload_bytes = static_cast<std::size_t>(
      env_number("SDFILTER_MAX_UPLOAD_BYTES", static_cast<long>(config.max_upload_bytes)));
  std::optional<std::filesystem::path> persist;
  if (dir != nullptr && *dir != '\0') persist = dir;

  try {
    sdfilter::service::SessionStore store(static_cast<std::size_t>(cap), persist);
    httplib::Server server;
    sdfilter::service::register_routes(server, store, config);
    const std::string bind = host != nullptr && *host != '\0' ? host : "127.0.0.1";
    std::cout << "listening on " << bind << ':' << port << std::endl;
    if (!server.listen(bind, static_cast<int>(port))) {
      std::cerr << "cannot listen on " << bind << ':' << port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
