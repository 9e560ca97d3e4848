#pragma once

#include <array>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sdfilter {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// n x 3 array of points or vectors, one per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Compressed per-element index lists.
struct Adjacency {
  std::vector<int> offsets{0};
  std::vector<int> indices;

  int size() const { return static_cast<int>(offsets.size()) - 1; }
  std::span<const int> operator[](int i) const {
    return {indices.data() + offsets[i], indices.data() + offsets[i + 1]};
  }
};

/// Indexed triangle mesh. Connectivity (faces and adjacency) is immutable and
/// shared between copies, so meshes that differ only in vertex positions are
/// cheap to produce with with_vertices().
class TriMesh {
 public:
  TriMesh();
  /// Throws InvalidArgument if a face references a missing vertex or repeats
  /// a vertex.
  TriMesh(Points vertices, std::vector<Face> faces);

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_faces() const { return static_cast<int>(topology_->faces.size()); }

  const Points& vertices() const { return vertices_; }
  Vec3 vertex(int v) const { return vertices_.row(v).transpose(); }
  const std::vector<Face>& faces() const { return topology_->faces; }
  const Face& face(int f) const { return topology_->faces[f]; }

  /// Faces sharing at least one vertex with f, excluding f, ascending.
  std::span<const int> face_neighbors(int f) const { return topology_->face_adjacency[f]; }
  std::span<const int> vertex_faces(int v) const { return topology_->vertex_faces[v]; }

  /// Unordered pairs of faces sharing an edge, each listed once with first < second.
  const std::vector<std::pair<int, int>>& edge_adjacent_faces() const {
    return topology_->edge_pairs;
  }

  /// Number of directed edges used by more than one face. Zero for a
  /// consistently oriented manifold mesh.
  int orientation_conflicts() const { return topology_->orientation_conflicts; }
  /// Number of undirected edges shared by more than two faces.
  int nonmanifold_edges() const { return topology_->nonmanifold_edges; }

  bool shares_connectivity(const TriMesh& other) const { return topology_ == other.topology_; }

  /// Same connectivity, new positions. Throws if the row count differs.
  TriMesh with_vertices(Points vertices) const;

  /// Length of the bounding-box diagonal; zero for an empty mesh.
  double bounding_box_diagonal() const;

 private:
  struct Topology {
    std::vector<Face> faces;
    Adjacency vertex_faces;
    Adjacency face_adjacency;
    std::vector<std::pair<int, int>> edge_pairs;
    int orientation_conflicts = 0;
    int nonmanifold_edges = 0;
  };
  static std::shared_ptr<const Topology> build_topology(int num_vertices, std::vector<Face> faces);

  Points vertices_;
  std::shared_ptr<const Topology> topology_;
};

/// Per-face normals, areas and centroids.
struct FaceGeometry {
  Points normals;
  Eigen::VectorXd areas;
  Points centroids;
  /// Faces flagged as degenerate. They carry a zero normal and zero area.
  std::vector<int> degenerate;

  int size() const { return static_cast<int>(areas.size()); }
  bool is_degenerate(int f) const { return areas[f] == 0.0; }
};

enum class DegeneratePolicy { Skip, Abort };

/// Oriented unit normal (v1 - v2) x (v3 - v2), area and centroid per face.
/// A face is degenerate when its cross product falls below 1e-14 times the
/// squared mean edge length. With DegeneratePolicy::Abort the first such
/// face raises DegenerateFaceError.
FaceGeometry compute_face_geometry(const TriMesh& mesh,
                                   DegeneratePolicy policy = DegeneratePolicy::Skip);

/// Unit normals only (zero rows for degenerate faces).
Points face_normals(const TriMesh& mesh);

/// Mean centroid distance over edge-adjacent face pairs (l_c).
/// Throws InvalidArgument when the mesh has no edge-adjacent pair.
double average_centroid_spacing(const TriMesh& mesh, const FaceGeometry& geom);

/// Area-weighted vertex normals, normalized.
Points vertex_normals(const TriMesh& mesh, const FaceGeometry& geom);

}  // namespace sdfilter
