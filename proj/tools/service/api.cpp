#include "api.h"

#include <optional>

#include "../common/app.h"
#include "payload.h"
#include "sdfilter/errors.h"
#include "sdfilter/obj_io.h"
#include "sdfilter/param_select.h"
#include "sdfilter/vertex_update.h"

// Last: <resolv.h>, pulled in by httplib, defines a `_res` macro that
// clashes with Eigen parameter names.
#include <httplib.h>

namespace sdfilter::service {

namespace {

using nlohmann::json;

/// Maps to an HTTP status with a JSON error body.
struct HttpError {
  int status;
  std::string message;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError{400, std::string("malformed JSON body: ") + e.what()};
  }
}

std::shared_ptr<const Session> lookup(SessionStore& store, const httplib::Request& req) {
  auto session = store.find(req.matches[1]);
  if (!session) throw HttpError{404, "unknown session '" + std::string(req.matches[1]) + "'"};
  return session;
}

std::vector<int> face_list(const json& body, const char* key, int num_faces, bool required) {
  if (!body.contains(key)) {
    if (required) throw HttpError{422, std::string("missing '") + key + "'"};
    return {};
  }
  const json& list = body[key];
  if (!list.is_array()) throw HttpError{422, std::string("'") + key + "' must be an array of face indices"};
  std::vector<int> out;
  out.reserve(list.size());
  for (const auto& v : list) {
    if (!v.is_number_integer()) throw HttpError{422, std::string("'") + key + "' must hold integers"};
    const auto f = v.get<long long>();
    if (f < 0 || f >= num_faces) {
      throw HttpError{422, std::string("'") + key + "' references missing face " + std::to_string(f)};
    }
    out.push_back(static_cast<int>(f));
  }
  return out;
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const HttpError& e) {
      send_json(res, e.status, {{"error", e.message}});
    } catch (const ParseError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const InvalidArgument& e) {
      send_json(res, 422, {{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

void create_session(SessionStore& store, const ServiceConfig& config, const httplib::Request& req,
                    httplib::Response& res) {
  if (req.body.size() > config.max_upload_bytes) throw HttpError{413, "upload exceeds the size limit"};
  std::string obj_text;
  std::optional<json> schedule_doc;
  if (req.get_header_value("Content-Type").starts_with("application/json")) {
    const json body = parse_body(req);
    if (!body.is_object() || !body.contains("obj") || !body["obj"].is_string()) {
      throw HttpError{400, "JSON upload needs an 'obj' string"};
    }
    obj_text = body["obj"].get<std::string>();
    if (body.contains("schedule")) schedule_doc = body["schedule"];
  } else {
    obj_text = req.body;
  }
  std::string schedule_text;
  if (req.has_param("schedule")) {
    schedule_text = req.get_param_value("schedule");
  } else if (req.has_header("X-Schedule")) {
    schedule_text = req.get_header_value("X-Schedule");
  }
  if (!schedule_doc) {
    try {
      schedule_doc = json::parse(schedule_text.empty() ? config.default_schedule : schedule_text);
    } catch (const json::exception& e) {
      throw HttpError{400, std::string("malformed schedule: ") + e.what()};
    }
  }

  LoadedMesh loaded;
  try {
    loaded = parse_obj_string(obj_text);
  } catch (const Error& e) {
    throw HttpError{400, std::string("malformed mesh: ") + e.what()};
  }
  if (loaded.mesh.num_faces() == 0) throw HttpError{400, "mesh has no faces"};

  std::vector<FilterParams> schedule;
  double lc = 0.0;
  try {
    lc = average_centroid_spacing(loaded.mesh, compute_face_geometry(loaded.mesh));
    schedule = app::parse_schedule(*schedule_doc, lc);
  } catch (const InvalidArgument& e) {
    throw HttpError{400, e.what()};
  }
  VertexUpdateParams vparams;
  try {
    if (req.has_param("closeness_weight")) vparams.closeness_weight = std::stod(req.get_param_value("closeness_weight"));
    if (req.has_param("vertex_iters")) vparams.iterations = std::stoi(req.get_param_value("vertex_iters"));
    vparams.validate();
  } catch (const std::exception& e) {
    throw HttpError{400, std::string("bad vertex update parameters: ") + e.what()};
  }

  auto session = store.create(decompose(loaded.mesh, schedule, vparams));
  json body = session->summary;
  body["warnings"] = loaded.warnings;
  send_json(res, 201, body);
}

void combine_session(SessionStore& store, const httplib::Request& req, httplib::Response& res) {
  const auto session = lookup(store, req);
  const json body = parse_body(req);
  if (!body.is_object() || !body.contains("alpha") || !body["alpha"].is_array()) {
    throw HttpError{422, "body needs an 'alpha' array"};
  }
  std::vector<double> alpha;
  for (const auto& a : body["alpha"]) {
    if (!a.is_number()) throw HttpError{422, "'alpha' must hold numbers"};
    alpha.push_back(a.get<double>());
  }
  const Recombiner& rc = session->recombiner;
  if (static_cast<int>(alpha.size()) != rc.levels()) {
    throw HttpError{422, "expected " + std::to_string(rc.levels()) + " coefficients, got " +
                             std::to_string(alpha.size())};
  }
  const TriMesh& base = rc.decomposition().base;
  std::optional<RegionMask> mask;
  if (body.contains("region") && !body["region"].is_null()) {
    const auto faces = face_list(body, "region", base.num_faces(), true);
    if (!faces.empty()) mask = RegionMask::from_faces(base, faces);
  }
  auto combined = rc.combine(alpha, mask ? &*mask : nullptr);
  TriMesh mesh = std::move(combined.mesh);
  Points targets = std::move(combined.targets.normals);

  if (body.contains("refilter") && !body["refilter"].is_null()) {
    const json& o = body["refilter"];
    if (!o.is_object()) throw HttpError{422, "'refilter' must be an object"};
    if (rc.levels() == 0) throw HttpError{422, "a session without levels cannot be re-filtered"};
    FilterParams p = rc.decomposition().level_params.front();
    if (o.contains("nu")) p.nu = o["nu"].get<double>();
    if (o.contains("mu")) p.mu = o["mu"].get<double>();
    p.validate();
    const FaceGeometry geom = compute_face_geometry(mesh);
    const FilterDomain domain{geom.areas, build_neighborhoods(mesh, geom, p.eta)};
    FilterOptions options;
    options.record_energy = false;
    targets = filter_signal(domain, geom.normals, geom.normals, p, options).signal;
    mesh = update_vertices(mesh, targets, rc.decomposition().vertex_params);
  }

  const ConsistencyReport report = normal_consistency_report(mesh, targets);
  double max_dev = 0.0;
  for (double d : report.deviation_degrees) max_dev = std::max(max_dev, d);
  res.status = 200;
  res.set_header("X-Mean-Deviation", std::to_string(report.mean_deviation_degrees));
  res.set_header("X-Max-Deviation", std::to_string(max_dev));
  res.set_header("X-Flips", std::to_string(report.flips));
  res.set_header("X-Fallback-Faces", std::to_string(combined.targets.fallback_faces.size()));
  res.set_content(encode_mesh_payload(mesh, report.deviation_degrees), "application/octet-stream");
}

void nu_range_session(SessionStore& store, const httplib::Request& req, httplib::Response& res) {
  const auto session = lookup(store, req);
  const json body = parse_body(req);
  if (!body.is_object()) throw HttpError{422, "body must be an object"};
  const int nf = session->original.num_faces();
  const auto a = face_list(body, "region_a", nf, true);
  const auto b = face_list(body, "region_b", nf, true);
  const double factor = body.value("mu_factor", kDefaultMuFactor);
  const FaceGeometry& g = session->original_geometry;
  const NuRange r = nu_range(region_stats(g, g.normals, a), region_stats(g, g.normals, b), factor);
  json out = {{"nu_min", r.nu_min}, {"nu_max", r.nu_max}, {"accepted", r.accepted}};
  if (r.accepted) {
    out["nu"] = r.nu;
    out["mu"] = r.mu;
  } else {
    out["message"] = "nu_max < nu_min; select another pair of regions";
  }
  send_json(res, 200, out);
}

}  // namespace

void register_routes(httplib::Server& server, SessionStore& store, const ServiceConfig& config) {
  server.set_payload_max_length(config.max_upload_bytes);
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Expose-Headers",
                               "X-Mean-Deviation, X-Max-Deviation, X-Flips, X-Fallback-Faces"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Schedule");
  });

  server.Post("/sessions", guarded([&store, config](const httplib::Request& req, httplib::Response& res) {
                create_session(store, config, req, res);
              }));
  server.Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, lookup(store, req)->summary);
             }));
  server.Delete(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                  if (!store.erase(req.matches[1])) throw HttpError{404, "unknown session"};
                  res.status = 204;
                }));
  server.Get(R"(/sessions/([^/]+)/levels)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, lookup(store, req)->levels);
             }));
  server.Post(R"(/sessions/([^/]+)/combine)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                combine_session(store, req, res);
              }));
  server.Post(R"(/sessions/([^/]+)/nu-range)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                nu_range_session(store, req, res);
              }));
}

}  // namespace sdfilter::service
