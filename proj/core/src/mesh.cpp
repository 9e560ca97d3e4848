#include "sdfilter/mesh.h"

#include <algorithm>
#include <map>
#include <string>

#include "sdfilter/errors.h"

namespace sdfilter {

namespace {

Adjacency to_adjacency(std::vector<std::vector<int>>& lists) {
  Adjacency adj;
  adj.offsets.assign(lists.size() + 1, 0);
  for (std::size_t i = 0; i < lists.size(); ++i) {
    adj.offsets[i + 1] = adj.offsets[i] + static_cast<int>(lists[i].size());
  }
  adj.indices.reserve(adj.offsets.back());
  for (auto& l : lists) {
    adj.indices.insert(adj.indices.end(), l.begin(), l.end());
  }
  return adj;
}

}  // namespace

TriMesh::TriMesh() : topology_(build_topology(0, {})) {}

TriMesh::TriMesh(Points vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  const int nv = static_cast<int>(vertices_.rows());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv) {
        throw InvalidArgument("face " + std::to_string(f) + " references missing vertex " +
                              std::to_string(t[k]));
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw InvalidArgument("face " + std::to_string(f) + " repeats a vertex");
    }
  }
  topology_ = build_topology(nv, std::move(faces));
}

std::shared_ptr<const TriMesh::Topology> TriMesh::build_topology(int num_vertices,
                                                                 std::vector<Face> faces) {
  auto topo = std::make_shared<Topology>();
  const int nf = static_cast<int>(faces.size());

  std::vector<std::vector<int>> vf(num_vertices);
  for (int f = 0; f < nf; ++f) {
    for (int v : faces[f]) vf[v].push_back(f);
  }

  std::vector<std::vector<int>> ff(nf);
  for (int f = 0; f < nf; ++f) {
    auto& list = ff[f];
    for (int v : faces[f]) {
      for (int g : vf[v]) {
        if (g != f) list.push_back(g);
      }
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // Undirected edge -> incident faces, plus directed-edge multiplicity.
  std::map<std::pair<int, int>, std::vector<int>> edges;
  std::map<std::pair<int, int>, int> directed;
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces[f][k];
      const int b = faces[f][(k + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back(f);
      ++directed[{a, b}];
    }
  }
  for (const auto& [edge, count] : directed) {
    if (count > 1) topo->orientation_conflicts += count - 1;
  }
  for (const auto& [edge, incident] : edges) {
    if (incident.size() > 2) ++topo->nonmanifold_edges;
    for (std::size_t i = 0; i < incident.size(); ++i) {
      for (std::size_t j = i + 1; j < incident.size(); ++j) {
        topo->edge_pairs.emplace_back(std::min(incident[i], incident[j]),
                                      std::max(incident[i], incident[j]));
      }
    }
  }
  std::sort(topo->edge_pairs.begin(), topo->edge_pairs.end());

  topo->vertex_faces = to_adjacency(vf);
  topo->face_adjacency = to_adjacency(ff);
  topo->faces = std::move(faces);
  return topo;
}

TriMesh TriMesh::with_vertices(Points vertices) const {
  if (vertices.rows() != vertices_.rows()) {
    throw InvalidArgument("vertex count mismatch: expected " + std::to_string(vertices_.rows()) +
                          ", got " + std::to_string(vertices.rows()));
  }
  TriMesh out;
  out.vertices_ = std::move(vertices);
  out.topology_ = topology_;
  return out;
}

double TriMesh::bounding_box_diagonal() const {
  if (vertices_.rows() == 0) return 0.0;
  const Eigen::RowVector3d lo = vertices_.colwise().minCoeff();
  const Eigen::RowVector3d hi = vertices_.colwise().maxCoeff();
  return (hi - lo).norm();
}

FaceGeometry compute_face_geometry(const TriMesh& mesh, DegeneratePolicy policy) {
  const int nf = mesh.num_faces();
  FaceGeometry g;
  g.normals.setZero(nf, 3);
  g.areas.setZero(nf);
  g.centroids.setZero(nf, 3);
  for (int f = 0; f < nf; ++f) {
    const Face& t = mesh.face(f);
    const Vec3 v1 = mesh.vertex(t[0]);
    const Vec3 v2 = mesh.vertex(t[1]);
    const Vec3 v3 = mesh.vertex(t[2]);
    g.centroids.row(f) = ((v1 + v2 + v3) / 3.0).transpose();

    const Vec3 cross = (v1 - v2).cross(v3 - v2);
    const double len = cross.norm();
    const double mean_edge = ((v1 - v2).norm() + (v3 - v2).norm() + (v1 - v3).norm()) / 3.0;
    if (!(len > 1e-14 * mean_edge * mean_edge)) {
      if (policy == DegeneratePolicy::Abort) throw DegenerateFaceError(f);
      g.degenerate.push_back(f);
      continue;
    }
    g.normals.row(f) = (cross / len).transpose();
    g.areas[f] = 0.5 * len;
  }
  return g;
}

Points face_normals(const TriMesh& mesh) { return compute_face_geometry(mesh).normals; }

double average_centroid_spacing(const TriMesh& mesh, const FaceGeometry& geom) {
  const auto& pairs = mesh.edge_adjacent_faces();
  if (pairs.empty()) throw InvalidArgument("mesh has no edge-adjacent face pair");
  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    sum += (geom.centroids.row(a) - geom.centroids.row(b)).norm();
  }
  return sum / static_cast<double>(pairs.size());
}

Points vertex_normals(const TriMesh& mesh, const FaceGeometry& geom) {
  Points n = Points::Zero(mesh.num_vertices(), 3);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int v : mesh.face(f)) n.row(v) += geom.areas[f] * geom.normals.row(f);
  }
  for (int v = 0; v < n.rows(); ++v) {
    const double len = n.row(v).norm();
    if (len > 0.0) n.row(v) /= len;
  }
  return n;
}

}  // namespace sdfilter
