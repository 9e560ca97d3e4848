#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sdfilter/mesh.h"
#include "sdfilter/sd_solver.h"
#include "sdfilter/vertex_update.h"

namespace sdfilter {

/// Coarse-to-fine sequence M^0 ... M^m stored as a base mesh plus deltas.
/// Level k (1-based) holds d^k = v^(k) - v^(k-1) and f^k = n^(k) - n^(k-1);
/// M^m is the input and M^0 the base.
struct ScaleDecomposition {
  TriMesh base;
  Points base_normals;
  Points original_vertices;
  Points original_normals;
  std::vector<Points> vertex_deltas;  ///< [k-1] -> d^k
  std::vector<Points> normal_deltas;  ///< [k-1] -> f^k
  /// [k-1] -> parameters of the filter that produced M^(k-1) from M^k.
  std::vector<FilterParams> level_params;
  VertexUpdateParams vertex_params;

  int levels() const { return static_cast<int>(vertex_deltas.size()); }
  TriMesh original() const { return base.with_vertices(original_vertices); }
};

/// Applies the schedule in order: schedule[0] filters the input M^m into
/// M^(m-1), schedule[1] filters that into M^(m-2), and so on. Each filter
/// runs the unit-constrained normal solver followed by the vertex update.
ScaleDecomposition decompose(const TriMesh& mesh, std::span<const FilterParams> schedule,
                             const VertexUpdateParams& vertex_params = {});

/// Vertex and face membership for region-restricted editing. A face is in
/// the region iff all three of its vertices are.
struct RegionMask {
  std::vector<char> vertices;
  std::vector<char> faces;

  static RegionMask from_faces(const TriMesh& mesh, std::span<const int> faces);
  static RegionMask from_vertices(const TriMesh& mesh, std::vector<char> vertices);
};

struct CombineTargets {
  Points vertices;
  Points normals;
  /// Faces whose combined normal vanished; they use the base normal.
  std::vector<int> fallback_faces;
};

/// Reconstructs meshes from a decomposition for arbitrary coefficients. The
/// vertex-update system is factorized once at construction.
class Recombiner {
 public:
  explicit Recombiner(ScaleDecomposition decomposition);

  const ScaleDecomposition& decomposition() const { return decomp_; }
  int levels() const { return decomp_.levels(); }

  /// v = v^(0) + sum alpha_k d^k and n = normalize(n^(0) + sum alpha_k f^k);
  /// outside the mask both revert to the original mesh.
  /// Throws InvalidArgument if alpha.size() != levels().
  CombineTargets targets(std::span<const double> alpha, const RegionMask* mask = nullptr) const;

  struct Output {
    TriMesh mesh;
    CombineTargets targets;
  };
  /// With a mask, vertices outside the region are held at their original
  /// positions during the vertex update.
  Output combine(std::span<const double> alpha, const RegionMask* mask = nullptr) const;

 private:
  ScaleDecomposition decomp_;
  VertexUpdater updater_;
};

/// One-shot combine; prefer Recombiner for repeated calls.
TriMesh combine(const ScaleDecomposition& decomposition, std::span<const double> alpha,
                const RegionMask* mask = nullptr);

/// T^0 + sum alpha_k (T^k - T^(k-1)) clamped to [0,1]; levels = T^0 ... T^m.
Signal combine_texture(std::span<const Signal> levels, std::span<const double> alpha);

/// Writes level meshes, float32 delta arrays and index.json into `dir`.
void save_decomposition(const ScaleDecomposition& decomposition, const std::filesystem::path& dir);
ScaleDecomposition load_decomposition(const std::filesystem::path& dir);

}  // namespace sdfilter
