#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <sstream>
#include <thread>

#include "api.h"
#include "payload.h"
#include "sdfilter/errors.h"
#include "sdfilter/obj_io.h"
#include "sdfilter/synthetic.h"
#include "session_store.h"
#include "test_support.h"

#include <httplib.h>

namespace sdfilter::service {
namespace {

using nlohmann::json;

TriMesh small_mesh() { return add_normal_noise(make_icosphere(1), 0.2, 4); }

std::string obj_text(const TriMesh& mesh) {
  std::ostringstream out;
  write_obj(out, mesh);
  return out.str();
}

ScaleDecomposition small_decomposition() {
  const TriMesh m = small_mesh();
  const double lc = average_centroid_spacing(m, compute_face_geometry(m));
  FilterParams p;
  p.lambda = 2;
  p.eta = 2 * lc;
  p.mu = 1.5;
  p.nu = 0.45;
  return decompose(m, std::vector<FilterParams>{p});
}

TEST(Payload, ByteLayout) {
  const TriMesh m = testing::two_triangles();
  const std::vector<double> values{0.5, -2.0};
  const std::string bytes = encode_mesh_payload(m, values);
  ASSERT_EQ(bytes.size(), 12u + 12u * 4 + 16u * 2);
  EXPECT_EQ(bytes.substr(0, 4), "SDM1");
  EXPECT_EQ(bytes.substr(4, 4), std::string("\x04\x00\x00\x00", 4));
  EXPECT_EQ(bytes.substr(8, 4), std::string("\x02\x00\x00\x00", 4));
  // First face index block starts after the positions.
  const std::size_t idx = 12 + 12 * 4;
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(static_cast<unsigned char>(bytes[idx + 4 * c]), m.face(0)[c]);
  }
  float last = 0;
  std::memcpy(&last, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(last, -2.0f);
}

TEST(Payload, RoundTrip) {
  const TriMesh m = small_mesh();
  std::vector<double> values(m.num_faces());
  for (int f = 0; f < m.num_faces(); ++f) values[f] = 0.25 * f;
  const DecodedPayload d = decode_mesh_payload(encode_mesh_payload(m, values));
  ASSERT_EQ(d.vertex_count, static_cast<std::uint32_t>(m.num_vertices()));
  ASSERT_EQ(d.face_count, static_cast<std::uint32_t>(m.num_faces()));
  for (int v = 0; v < m.num_vertices(); ++v) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(d.positions[3 * v + c], static_cast<float>(m.vertices()(v, c)));
  }
  for (int f = 0; f < m.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(d.indices[3 * f + c], static_cast<std::uint32_t>(m.face(f)[c]));
    EXPECT_EQ(d.face_values[f], static_cast<float>(values[f]));
  }
}

TEST(Payload, Errors) {
  const TriMesh m = testing::two_triangles();
  EXPECT_THROW(encode_mesh_payload(m, std::vector<double>{1.0}), InvalidArgument);
  const std::string good = encode_mesh_payload(m, std::vector<double>{1.0, 2.0});
  EXPECT_THROW(decode_mesh_payload(good.substr(0, good.size() - 1)), InvalidArgument);
  EXPECT_THROW(decode_mesh_payload("SDM2" + good.substr(4)), InvalidArgument);
  EXPECT_THROW(decode_mesh_payload("SD"), InvalidArgument);
}

TEST(SessionStore, HistogramCountsSumToRows) {
  testing::Gen gen(3);
  const Points p = gen.signal(57, 3, -1, 1);
  const json h = delta_histogram(p, 10);
  int total = 0;
  for (int c : h["counts"]) total += c;
  EXPECT_EQ(total, 57);
  EXPECT_NEAR(h["max"].get<double>(), p.rowwise().norm().maxCoeff(), 1e-12);
  const json zero = delta_histogram(Points::Zero(5, 3), 4);
  EXPECT_EQ(zero["counts"][0], 5);
}

TEST(SessionStore, EvictsLeastRecentlyUsed) {
  SessionStore store(2);
  const ScaleDecomposition d = small_decomposition();
  const auto a = store.create(d), b = store.create(d);
  EXPECT_NE(a->id, b->id);
  EXPECT_TRUE(store.find(a->id));
  const auto c = store.create(d);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_TRUE(store.find(a->id));
  EXPECT_FALSE(store.find(b->id));
  EXPECT_TRUE(store.erase(c->id));
  EXPECT_FALSE(store.erase(c->id));
  EXPECT_THROW(SessionStore(0), InvalidArgument);
}

TEST(SessionStore, PersistedSessionsReloadAfterEviction) {
  const std::string dir = testing::scratch_dir("sessions");
  SessionStore store(1, std::filesystem::path(dir));
  const ScaleDecomposition d = small_decomposition();
  const auto a = store.create(d);
  store.create(d);
  const auto again = store.find(a->id);
  ASSERT_TRUE(again);
  EXPECT_EQ(again->recombiner.levels(), 1);
  EXPECT_FALSE(store.find("../etc"));
  EXPECT_TRUE(store.erase(a->id));
  EXPECT_FALSE(std::filesystem::exists(std::filesystem::path(dir) / a->id));
  std::filesystem::remove_all(dir);
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig config;
    config.max_upload_bytes = 64 * 1024;
    register_routes(server_, store_, config);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(120, 0);
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string upload(const TriMesh& mesh) {
    auto res = client_->Post("/sessions", obj_text(mesh), "text/plain");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201) << res->body;
    return json::parse(res->body)["id"].get<std::string>();
  }

  httplib::Result combine(const std::string& id, const json& body) {
    return client_->Post("/sessions/" + id + "/combine", body.dump(), "application/json");
  }

  SessionStore store_{4};
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, UploadCreatesSessionWithDefaultSchedule) {
  const TriMesh m = small_mesh();
  auto res = client_->Post("/sessions", obj_text(m), "text/plain");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  const json body = json::parse(res->body);
  EXPECT_EQ(body["levels"], 2);
  EXPECT_EQ(body["face_count"], m.num_faces());
  EXPECT_EQ(body["vertex_count"], m.num_vertices());
  const std::string id = body["id"];
  auto summary = client_->Get("/sessions/" + id);
  ASSERT_TRUE(summary);
  EXPECT_EQ(summary->status, 200);
  EXPECT_EQ(json::parse(summary->body)["id"], id);
  EXPECT_NE(upload(m), id);
}

TEST_F(ServiceTest, JsonUploadWithSchedule) {
  const json body = {{"obj", obj_text(small_mesh())},
                     {"schedule", json::array({{{"lambda", 1}, {"eta", "2lc"}, {"mu", 1}, {"nu", 0.3}}})}};
  auto res = client_->Post("/sessions", body.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  EXPECT_EQ(json::parse(res->body)["levels"], 1);
}

TEST_F(ServiceTest, RejectsBadUploads) {
  auto bad_obj = client_->Post("/sessions", "v 0 0\n", "text/plain");
  ASSERT_TRUE(bad_obj);
  EXPECT_EQ(bad_obj->status, 400);
  EXPECT_TRUE(json::parse(bad_obj->body).contains("error"));
  auto empty = client_->Post("/sessions", "v 0 0 0\n", "text/plain");
  EXPECT_EQ(empty->status, 400);
  httplib::Headers h{{"X-Schedule", "[{\"lambda\": 1}]"}};
  auto bad_schedule = client_->Post("/sessions", h, obj_text(small_mesh()), "text/plain");
  EXPECT_EQ(bad_schedule->status, 400);
  auto bad_json = client_->Post("/sessions", "{", "application/json");
  EXPECT_EQ(bad_json->status, 400);
  auto big = client_->Post("/sessions", std::string(70 * 1024, '#'), "text/plain");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);
}

TEST_F(ServiceTest, LevelsHistogramsSumToCounts) {
  const TriMesh m = small_mesh();
  const std::string id = upload(m);
  auto res = client_->Get("/sessions/" + id + "/levels");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  ASSERT_EQ(body["levels"].size(), 2u);
  for (const auto& level : body["levels"]) {
    int v = 0, f = 0;
    for (int c : level["vertex_delta"]["counts"]) v += c;
    for (int c : level["normal_delta"]["counts"]) f += c;
    EXPECT_EQ(v, m.num_vertices());
    EXPECT_EQ(f, m.num_faces());
    EXPECT_TRUE(level["params"].contains("lambda"));
  }
}

TEST_F(ServiceTest, CombineOnesAndZeros) {
  const TriMesh m = small_mesh();
  const std::string id = upload(m);
  const TriMesh base = store_.find(id)->recombiner.decomposition().base;
  const double diag = m.bounding_box_diagonal();
  for (const auto& [alpha, expected] : {std::pair{json::array({1, 1}), &m}, std::pair{json::array({0, 0}), &base}}) {
    auto res = combine(id, {{"alpha", alpha}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/octet-stream");
    EXPECT_TRUE(res->has_header("X-Mean-Deviation"));
    const DecodedPayload d = decode_mesh_payload(res->body);
    ASSERT_EQ(d.vertex_count, static_cast<std::uint32_t>(m.num_vertices()));
    double worst = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(d.positions[3 * v + c] - expected->vertices()(v, c)));
    }
    EXPECT_LT(worst, 1e-6 * diag);
  }
}

TEST_F(ServiceTest, CombineIsDeterministic) {
  const std::string id = upload(small_mesh());
  const json body = {{"alpha", {1.5, 0.5}}, {"region", {0, 1, 2, 3, 4, 5}}};
  auto a = combine(id, body), b = combine(id, body);
  ASSERT_EQ(a->status, 200);
  EXPECT_EQ(a->body, b->body);
  auto r = combine(id, {{"alpha", {1, 1}}, {"refilter", {{"nu", 0.2}}}});
  EXPECT_EQ(r->status, 200) << r->body;
}

TEST_F(ServiceTest, CombineErrors) {
  const std::string id = upload(small_mesh());
  EXPECT_EQ(combine(id, {{"alpha", {1}}})->status, 422);
  EXPECT_EQ(combine(id, {{"beta", {1, 1}}})->status, 422);
  EXPECT_EQ(combine(id, {{"alpha", {1, "x"}}})->status, 422);
  EXPECT_EQ(combine(id, {{"alpha", {1, 1}}, {"region", {100000}}})->status, 422);
  EXPECT_EQ(combine("0123456789abcdef", {{"alpha", {1, 1}}})->status, 404);
  auto malformed = client_->Post("/sessions/" + id + "/combine", "{", "application/json");
  EXPECT_EQ(malformed->status, 400);
}

TEST_F(ServiceTest, NuRange) {
  const TriMesh m = small_mesh();
  const std::string id = upload(m);
  const FaceGeometry g = compute_face_geometry(m);
  json top = json::array(), side = json::array();
  for (int f = 0; f < m.num_faces(); ++f) {
    if (g.normals(f, 2) > 0.8) top.push_back(f);
    if (g.normals(f, 0) > 0.8) side.push_back(f);
  }
  auto res = client_->Post("/sessions/" + id + "/nu-range",
                           json{{"region_a", top}, {"region_b", side}}.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const json body = json::parse(res->body);
  EXPECT_TRUE(body.contains("nu_min"));
  EXPECT_TRUE(body.contains("nu_max"));
  if (body["accepted"]) {
    EXPECT_NEAR(body["nu"].get<double>(), 0.5 * (body["nu_min"].get<double>() + body["nu_max"].get<double>()), 1e-12);
  }
  auto missing = client_->Post("/sessions/" + id + "/nu-range", json{{"region_a", top}}.dump(), "application/json");
  EXPECT_EQ(missing->status, 422);
  auto bad_factor = client_->Post("/sessions/" + id + "/nu-range",
                                  json{{"region_a", top}, {"region_b", side}, {"mu_factor", 20}}.dump(),
                                  "application/json");
  EXPECT_EQ(bad_factor->status, 422);
}

TEST_F(ServiceTest, DeleteAndCors) {
  const std::string id = upload(small_mesh());
  auto del = client_->Delete("/sessions/" + id);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 204);
  EXPECT_EQ(client_->Get("/sessions/" + id)->status, 404);
  EXPECT_EQ(client_->Delete("/sessions/" + id)->status, 404);
  auto options = client_->Options("/sessions");
  ASSERT_TRUE(options);
  EXPECT_EQ(options->status, 204);
  EXPECT_EQ(options->get_header_value("Access-Control-Allow-Origin"), "*");
}

}  // namespace
}  // namespace sdfilter::service
