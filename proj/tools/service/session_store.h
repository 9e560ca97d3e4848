#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sdfilter/multiscale.h"

namespace sdfilter::service {

/// Immutable after construction; shared by concurrent requests.
struct Session {
  Session(std::string id, ScaleDecomposition decomposition);

  std::string id;
  Recombiner recombiner;
  TriMesh original;
  FaceGeometry original_geometry;
  double spacing = 0.0;     ///< l_c of the uploaded mesh
  nlohmann::json summary;   ///< GET /sessions/{id}
  nlohmann::json levels;    ///< GET /sessions/{id}/levels
};

/// Per-level histogram of delta magnitudes, `bins` equal-width bins over
/// [0, max]. Counts sum to the number of rows.
nlohmann::json delta_histogram(const Points& deltas, int bins);

/// In-memory sessions with least-recently-used eviction. When a
/// persistence directory is set, new sessions are also written there and
/// evicted ones are reloaded on demand.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity, std::optional<std::filesystem::path> persist_dir = {});

  /// Runs outside the store lock; the session becomes visible only once
  /// inserted.
  std::shared_ptr<const Session> create(ScaleDecomposition decomposition);
  std::shared_ptr<const Session> find(const std::string& id);
  bool erase(const std::string& id);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::string next_id();
  void insert_locked(std::shared_ptr<const Session> session);

  std::size_t capacity_;
  std::optional<std::filesystem::path> persist_dir_;
  mutable std::mutex mutex_;
  std::list<std::string> order_;  // most recent first
  struct Entry {
    std::shared_ptr<const Session> session;
    std::list<std::string>::iterator position;
  };
  std::unordered_map<std::string, Entry> sessions_;
  std::mt19937_64 rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace sdfilter::service
