#include "session_store.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "../common/app.h"
#include "sdfilter/errors.h"

namespace sdfilter::service {

nlohmann::json delta_histogram(const Points& deltas, int bins) {
  std::vector<double> mags(static_cast<std::size_t>(deltas.rows()));
  for (Eigen::Index i = 0; i < deltas.rows(); ++i) mags[i] = deltas.row(i).norm();
  const double max = mags.empty() ? 0.0 : *std::max_element(mags.begin(), mags.end());
  std::vector<long> counts(bins, 0);
  for (double m : mags) {
    int b = max > 0.0 ? static_cast<int>(m / max * bins) : 0;
    counts[std::clamp(b, 0, bins - 1)] += 1;
  }
  double sum_sq = 0.0;
  for (double m : mags) sum_sq += m * m;
  return {{"max", max},
          {"rms", mags.empty() ? 0.0 : std::sqrt(sum_sq / mags.size())},
          {"bins", bins},
          {"counts", counts}};
}

Session::Session(std::string session_id, ScaleDecomposition decomposition)
    : id(std::move(session_id)),
      recombiner(std::move(decomposition)),
      original(recombiner.decomposition().original()),
      original_geometry(compute_face_geometry(original)),
      spacing(average_centroid_spacing(original, original_geometry)) {
  const ScaleDecomposition& d = recombiner.decomposition();
  nlohmann::json schedule = nlohmann::json::array();
  for (const auto& p : d.level_params) schedule.push_back(app::params_to_json(p));
  summary = {{"id", id},
             {"levels", d.levels()},
             {"vertex_count", original.num_vertices()},
             {"face_count", original.num_faces()},
             {"l_c", spacing},
             {"bounding_box_diagonal", original.bounding_box_diagonal()},
             {"schedule", schedule}};
  nlohmann::json list = nlohmann::json::array();
  constexpr int kBins = 16;
  for (int k = 1; k <= d.levels(); ++k) {
    list.push_back({{"level", k},
                    {"params", app::params_to_json(d.level_params[k - 1])},
                    {"vertex_delta", delta_histogram(d.vertex_deltas[k - 1], kBins)},
                    {"normal_delta", delta_histogram(d.normal_deltas[k - 1], kBins)}});
  }
  levels = {{"id", id},
            {"vertex_count", original.num_vertices()},
            {"face_count", original.num_faces()},
            {"levels", list}};
}

SessionStore::SessionStore(std::size_t capacity, std::optional<std::filesystem::path> persist_dir)
    : capacity_(capacity), persist_dir_(std::move(persist_dir)), rng_(std::random_device{}()) {
  if (capacity_ == 0) throw InvalidArgument("session capacity must be at least 1");
}

std::string SessionStore::next_id() {
  std::lock_guard lock(mutex_);
  const std::uint64_t bits = rng_() ^ (++counter_ << 48);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

void SessionStore::insert_locked(std::shared_ptr<const Session> session) {
  const std::string id = session->id;
  if (auto it = sessions_.find(id); it != sessions_.end()) {
    order_.erase(it->second.position);
    sessions_.erase(it);
  }
  order_.push_front(id);
  sessions_[id] = {std::move(session), order_.begin()};
  while (sessions_.size() > capacity_) {
    sessions_.erase(order_.back());
    order_.pop_back();
  }
}

std::shared_ptr<const Session> SessionStore::create(ScaleDecomposition decomposition) {
  const std::string id = next_id();
  if (persist_dir_) save_decomposition(decomposition, *persist_dir_ / id);
  auto session = std::make_shared<const Session>(id, std::move(decomposition));
  std::lock_guard lock(mutex_);
  insert_locked(session);
  return session;
}

std::shared_ptr<const Session> SessionStore::find(const std::string& id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) {
      order_.splice(order_.begin(), order_, it->second.position);
      return it->second.session;
    }
  }
  if (!persist_dir_ || id.empty() || id.find_first_not_of("0123456789abcdef") != std::string::npos) {
    return nullptr;
  }
  const auto dir = *persist_dir_ / id;
  if (!std::filesystem::exists(dir / "index.json")) return nullptr;
  auto session = std::make_shared<const Session>(id, load_decomposition(dir));
  std::lock_guard lock(mutex_);
  insert_locked(session);
  return session;
}

bool SessionStore::erase(const std::string& id) {
  bool removed = false;
  {
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) {
      order_.erase(it->second.position);
      sessions_.erase(it);
      removed = true;
    }
  }
  if (persist_dir_ && !id.empty() && id.find_first_not_of("0123456789abcdef") == std::string::npos) {
    removed = std::filesystem::remove_all(*persist_dir_ / id) > 0 || removed;
  }
  return removed;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace sdfilter::service
