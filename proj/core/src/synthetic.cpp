#include "sdfilter/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "sdfilter/errors.h"

namespace sdfilter {

namespace {

constexpr double kPi = std::numbers::pi;

double cosine_profile(double distance, double diameter) {
  const double radius = 0.5 * diameter;
  if (distance >= radius) return 0.0;
  return 0.5 * (1.0 + std::cos(2.0 * kPi * distance / diameter));
}

std::vector<Vec3> bump_directions(int count) {
  std::vector<Vec3> dirs;
  if (count <= 6) {
    const std::array<Vec3, 6> axes{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                                   -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
    dirs.assign(axes.begin(), axes.begin() + count);
    return dirs;
  }
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
  }
  return dirs;
}

SyntheticMesh sphere_bumps(const SyntheticParams& p) {
  SyntheticMesh out;
  const TriMesh plain = make_icosphere(p.resolution);
  out.base_spacing = average_centroid_spacing(plain, compute_face_geometry(plain));
  out.mesh = plain;
  if (p.amplitude == 0.0) return out;

  const double lc = out.base_spacing;
  const double large_d = p.large_wavelength * lc;
  const double small_d = p.small_wavelength * lc;
  const double small_a = p.small_amplitude > 0.0 ? p.small_amplitude : 0.25 * p.amplitude;

  for (const Vec3& d : bump_directions(p.large_count)) {
    out.bumps.push_back({d, d, large_d, p.amplitude});
  }

  // Small bumps sit on vertices away from the large supports and from each
  // other so that every bump has a clean measurement ring.
  std::vector<int> order(plain.num_vertices());
  for (int v = 0; v < plain.num_vertices(); ++v) order[v] = v;
  std::mt19937_64 rng(p.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const double clear_large = 0.5 * large_d + small_d + 2.0 * lc;
  const double clear_small = 2.0 * small_d + 4.0 * lc;
  for (int v : order) {
    if (static_cast<int>(out.small_bumps.size()) >= p.small_count) break;
    const Vec3 c = plain.vertex(v);
    bool ok = true;
    for (const Bump& b : out.bumps) ok = ok && (c - b.center).norm() >= clear_large;
    for (const Bump& b : out.small_bumps) ok = ok && (c - b.center).norm() >= clear_small;
    if (ok) out.small_bumps.push_back({c, c, small_d, small_a});
  }

  Points v = plain.vertices();
  for (int i = 0; i < plain.num_vertices(); ++i) {
    const Vec3 x = plain.vertex(i);
    double r = 1.0;
    for (const Bump& b : out.bumps) r += b.amplitude * cosine_profile((x - b.center).norm(), b.diameter);
    for (const Bump& b : out.small_bumps) {
      r += b.amplitude * cosine_profile((x - b.center).norm(), b.diameter);
    }
    v.row(i) = (r * x).transpose();
  }
  out.mesh = plain.with_vertices(std::move(v));
  return out;
}

// Welded n x n x n cube grid on [-0.5, 0.5]^3, outward oriented.
TriMesh cube_grid(int n) {
  std::map<std::array<int, 3>, int> index;
  std::vector<Vec3> positions;
  auto vertex_at = [&](std::array<int, 3> key) {
    auto [it, inserted] = index.emplace(key, static_cast<int>(positions.size()));
    if (inserted) {
      positions.emplace_back(key[0] / double(n) - 0.5, key[1] / double(n) - 0.5,
                             key[2] / double(n) - 0.5);
    }
    return it->second;
  };
  std::vector<Face> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int ua = (axis + 1) % 3;
    const int va = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          std::array<int, 4> q;
          const std::array<std::array<int, 2>, 4> uv{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
          for (int c = 0; c < 4; ++c) {
            std::array<int, 3> key{};
            key[axis] = side * n;
            key[ua] = uv[c][0];
            key[va] = uv[c][1];
            q[c] = vertex_at(key);
          }
          if (side == 0) {
            faces.push_back({q[0], q[1], q[2]});
            faces.push_back({q[0], q[2], q[3]});
          } else {
            faces.push_back({q[0], q[2], q[1]});
            faces.push_back({q[0], q[3], q[2]});
          }
        }
      }
    }
  }
  Points v(static_cast<Eigen::Index>(positions.size()), 3);
  for (std::size_t i = 0; i < positions.size(); ++i) v.row(i) = positions[i].transpose();
  return TriMesh(std::move(v), std::move(faces));
}

SyntheticMesh cube_bumps(const SyntheticParams& p) {
  SyntheticMesh out;
  const TriMesh plain = cube_grid(p.resolution);
  out.base_spacing = average_centroid_spacing(plain, compute_face_geometry(plain));
  out.mesh = plain;
  if (p.amplitude == 0.0) return out;

  constexpr double kDiameter = 0.3;
  constexpr int kPerSide = 3;
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> pos(-0.5 + 0.1 + 0.5 * kDiameter, 0.5 - 0.1 - 0.5 * kDiameter);
  std::bernoulli_distribution sign(0.5);
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Vec3 normal = Vec3::Zero();
      normal[axis] = side == 1 ? 1.0 : -1.0;
      for (int b = 0; b < kPerSide; ++b) {
        Vec3 c = 0.5 * normal;
        c[(axis + 1) % 3] = pos(rng);
        c[(axis + 2) % 3] = pos(rng);
        const double a = sign(rng) ? p.amplitude : -p.amplitude;
        out.bumps.push_back({c, normal, kDiameter, a});
      }
    }
  }

  Points v = plain.vertices();
  for (int i = 0; i < plain.num_vertices(); ++i) {
    const Vec3 x = plain.vertex(i);
    for (const Bump& b : out.bumps) {
      // Only vertices on the bump's own side plane move.
      if (std::abs(x.dot(b.direction) - 0.5) > 1e-12) continue;
      v.row(i) += (b.amplitude * cosine_profile((x - b.center).norm(), b.diameter)) * b.direction.transpose();
    }
  }
  out.mesh = plain.with_vertices(std::move(v));
  return out;
}

SyntheticMesh plane_checker(const SyntheticParams& p) {
  SyntheticMesh out;
  const TriMesh plain = make_grid_plane(p.resolution);
  out.base_spacing = average_centroid_spacing(plain, compute_face_geometry(plain));
  out.mesh = plain;
  if (p.amplitude == 0.0) return out;
  Points v = plain.vertices();
  for (int i = 0; i < plain.num_vertices(); ++i) {
    // Nudge inward so cell boundaries on grid lines fall on one side.
    const auto cx = static_cast<long>(std::floor((v(i, 0) + 1e-9) / p.checker_period));
    const auto cy = static_cast<long>(std::floor((v(i, 1) + 1e-9) / p.checker_period));
    if ((cx + cy) % 2 != 0) v(i, 2) = p.amplitude;
  }
  out.mesh = plain.with_vertices(std::move(v));
  return out;
}

Vec3 trefoil(double t) {
  return {std::sin(t) + 2.0 * std::sin(2.0 * t), std::cos(t) - 2.0 * std::cos(2.0 * t), -std::sin(3.0 * t)};
}

SyntheticMesh knot_torus(const SyntheticParams& p) {
  const int along = 48 * p.resolution;
  const int around = 8 * p.resolution;
  constexpr double kTube = 0.4;
  constexpr int kRidges = 6;
  auto build = [&](double amplitude) {
    Points v(static_cast<Eigen::Index>(along) * around, 3);
    for (int i = 0; i < along; ++i) {
      const double t = 2.0 * kPi * i / along;
      const double h = 1e-4;
      const Vec3 c = trefoil(t);
      const Vec3 d1 = (trefoil(t + h) - trefoil(t - h)) / (2.0 * h);
      const Vec3 d2 = (trefoil(t + h) - 2.0 * c + trefoil(t - h)) / (h * h);
      const Vec3 tangent = d1.normalized();
      const Vec3 normal = (d2 - d2.dot(tangent) * tangent).normalized();
      const Vec3 binormal = tangent.cross(normal);
      for (int j = 0; j < around; ++j) {
        const double phi = 2.0 * kPi * j / around;
        const double r = kTube + amplitude * std::cos(kRidges * phi);
        v.row(static_cast<Eigen::Index>(i) * around + j) =
            (c + r * (std::cos(phi) * normal + std::sin(phi) * binormal)).transpose();
      }
    }
    return v;
  };
  std::vector<Face> faces;
  for (int i = 0; i < along; ++i) {
    const int ni = (i + 1) % along;
    for (int j = 0; j < around; ++j) {
      const int nj = (j + 1) % around;
      const int a = i * around + j, b = ni * around + j, c = ni * around + nj, d = i * around + nj;
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  }
  SyntheticMesh out;
  const TriMesh plain(build(0.0), faces);
  out.base_spacing = average_centroid_spacing(plain, compute_face_geometry(plain));
  out.mesh = p.amplitude == 0.0 ? plain : plain.with_vertices(build(p.amplitude));
  // Orient outward: the tube's signed volume must be positive.
  const FaceGeometry g = compute_face_geometry(out.mesh);
  double volume = 0.0;
  for (int f = 0; f < out.mesh.num_faces(); ++f) volume += g.areas[f] * g.normals.row(f).dot(g.centroids.row(f));
  if (volume < 0.0) {
    for (Face& f : faces) std::swap(f[1], f[2]);
    out.mesh = TriMesh(out.mesh.vertices(), faces);
  }
  return out;
}

}  // namespace

namespace {

void icosahedron(std::vector<Vec3>& pts, std::vector<Face>& faces) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  pts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
         {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : pts) p.normalize();
  faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  // Face normals are (v1 - v2) x (v3 - v2), so outward faces wind clockwise
  // when seen from outside.
  for (Face& f : faces) std::swap(f[1], f[2]);
}

}  // namespace

TriMesh make_geodesic_sphere(int frequency, double radius) {
  if (frequency < 1 || frequency > 512) throw InvalidArgument("geodesic frequency must be in [1, 512]");
  if (!(radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
  std::vector<Vec3> corners;
  std::vector<Face> base;
  icosahedron(corners, base);
  const int f = frequency;
  // Lattice points are keyed by their integer barycentric weights on the
  // sorted corner ids, so shared edges and corners weld exactly.
  std::map<std::array<int, 6>, int> index;
  std::vector<Vec3> pts;
  auto point = [&](const Face& t, int a, int b) {
    std::array<std::pair<int, int>, 3> w{{{t[0], f - a - b}, {t[1], a}, {t[2], b}}};
    for (auto& entry : w) {
      if (entry.second == 0) entry.first = -1;
    }
    std::sort(w.begin(), w.end());
    std::array<int, 6> key{};
    for (int c = 0; c < 3; ++c) {
      key[2 * c] = w[c].first;
      key[2 * c + 1] = w[c].second;
    }
    auto [it, inserted] = index.emplace(key, static_cast<int>(pts.size()));
    if (inserted) {
      Vec3 p = Vec3::Zero();
      for (const auto& [corner, weight] : w) {
        if (weight > 0) p += weight * corners[corner];
      }
      pts.push_back((p / f).normalized());
    }
    return it->second;
  };
  std::vector<Face> faces;
  faces.reserve(base.size() * f * f);
  for (const Face& t : base) {
    for (int b = 0; b < f; ++b) {
      for (int a = 0; a + b < f; ++a) {
        faces.push_back({point(t, a, b), point(t, a + 1, b), point(t, a, b + 1)});
        if (a + b + 1 < f) faces.push_back({point(t, a + 1, b), point(t, a + 1, b + 1), point(t, a, b + 1)});
      }
    }
  }
  Points v(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) v.row(i) = (radius * pts[i]).transpose();
  return TriMesh(std::move(v), std::move(faces));
}

TriMesh make_icosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || subdivisions > 9) throw InvalidArgument("icosphere subdivisions must be in [0, 9]");
  if (!(radius > 0.0)) throw InvalidArgument("icosphere radius must be positive");
  std::vector<Vec3> pts;
  std::vector<Face> faces;
  icosahedron(pts, faces);
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto [it, inserted] = midpoints.emplace(key, static_cast<int>(pts.size()));
      if (inserted) pts.push_back((pts[a] + pts[b]).normalized());
      return it->second;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Points v(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) v.row(i) = (radius * pts[i]).transpose();
  return TriMesh(std::move(v), std::move(faces));
}

TriMesh make_grid_plane(int n, double size) {
  if (n < 1) throw InvalidArgument("grid plane needs at least one cell per side");
  if (!(size > 0.0)) throw InvalidArgument("grid plane size must be positive");
  Points v(static_cast<Eigen::Index>(n + 1) * (n + 1), 3);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) v.row(j * (n + 1) + i) << size * i / n, size * j / n, 0.0;
  }
  std::vector<Face> faces;
  faces.reserve(static_cast<std::size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * (n + 1) + i, b = a + 1, c = a + n + 2, d = a + n + 1;
      faces.push_back({a, c, b});
      faces.push_back({a, d, c});
    }
  }
  return TriMesh(std::move(v), std::move(faces));
}

void SyntheticParams::validate() const {
  if (!std::isfinite(amplitude) || amplitude < 0.0) throw InvalidArgument("amplitude must be finite and >= 0");
  switch (kind) {
    case SyntheticKind::SphereBumps:
      if (resolution < 1 || resolution > 7) throw InvalidArgument("sphere-bumps resolution must be in [1, 7]");
      if (!(small_wavelength > 0.0) || !(large_wavelength > 0.0)) {
        throw InvalidArgument("bump wavelengths must be positive");
      }
      if (!std::isfinite(small_amplitude) || small_amplitude < 0.0) {
        throw InvalidArgument("small amplitude must be finite and >= 0");
      }
      if (small_count < 0 || large_count < 0) throw InvalidArgument("bump counts must be >= 0");
      break;
    case SyntheticKind::CubeBumps:
      if (resolution < 2 || resolution > 512) throw InvalidArgument("cube-bumps resolution must be in [2, 512]");
      if (amplitude >= 0.15) throw InvalidArgument("cube-bumps amplitude must be below 0.15");
      break;
    case SyntheticKind::PlaneChecker:
      if (resolution < 2 || resolution > 2048) throw InvalidArgument("plane-checker resolution must be in [2, 2048]");
      if (!(checker_period > 0.0) || checker_period > 1.0) {
        throw InvalidArgument("checker period must be in (0, 1]");
      }
      break;
    case SyntheticKind::KnotTorus:
      if (resolution < 1 || resolution > 64) throw InvalidArgument("knot-torus resolution must be in [1, 64]");
      if (amplitude >= 0.2) throw InvalidArgument("knot-torus amplitude must be below 0.2");
      break;
  }
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "sphere-bumps") return SyntheticKind::SphereBumps;
  if (name == "cube-bumps") return SyntheticKind::CubeBumps;
  if (name == "plane-checker") return SyntheticKind::PlaneChecker;
  if (name == "knot-torus") return SyntheticKind::KnotTorus;
  throw InvalidArgument("unknown synthetic kind '" + name +
                        "' (expected sphere-bumps, cube-bumps, plane-checker or knot-torus)");
}

SyntheticMesh make_synthetic_detailed(const SyntheticParams& params) {
  params.validate();
  switch (params.kind) {
    case SyntheticKind::SphereBumps: return sphere_bumps(params);
    case SyntheticKind::CubeBumps: return cube_bumps(params);
    case SyntheticKind::PlaneChecker: return plane_checker(params);
    case SyntheticKind::KnotTorus: return knot_torus(params);
  }
  throw InvalidArgument("unknown synthetic kind");
}

TriMesh make_synthetic(const SyntheticParams& params) { return make_synthetic_detailed(params).mesh; }

TriMesh add_normal_noise(const TriMesh& mesh, double sigma, std::uint64_t seed) {
  if (!std::isfinite(sigma) || sigma < 0.0) throw InvalidArgument("noise sigma must be finite and >= 0");
  if (sigma == 0.0 || mesh.num_vertices() == 0) return mesh;
  const FaceGeometry geom = compute_face_geometry(mesh);
  const double lc = average_centroid_spacing(mesh, geom);
  const Points normals = vertex_normals(mesh, geom);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma * lc);
  Points v = mesh.vertices();
  for (int i = 0; i < mesh.num_vertices(); ++i) v.row(i) += gauss(rng) * normals.row(i);
  return mesh.with_vertices(std::move(v));
}

Image make_checker_texture(int size, int period, const Vec3& a, const Vec3& b) {
  if (size < 1 || period < 1) throw InvalidArgument("checker size and period must be positive");
  Image img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img.set_pixel(x, y, ((x / period + y / period) % 2 == 0) ? a : b);
  }
  return img;
}

Image make_spots_texture(int size, double radius, int count, std::uint64_t seed) {
  if (size < 1 || !(radius > 0.0) || count < 0) throw InvalidArgument("invalid spot texture parameters");
  const Vec3 background(0.93, 0.80, 0.45);
  const Vec3 spot(0.45, 0.25, 0.10);
  Image img(size, size, background);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, size);
  for (int k = 0; k < count; ++k) {
    const double cx = pos(rng);
    const double cy = pos(rng);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + radius)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= radius * radius) img.set_pixel(x, y, spot);
      }
    }
  }
  return img;
}

CornerUVs planar_uv(const TriMesh& mesh) {
  CornerUVs uv(mesh.num_faces());
  if (mesh.num_vertices() == 0) return uv;
  const Eigen::RowVector3d lo = mesh.vertices().colwise().minCoeff();
  const Eigen::RowVector3d hi = mesh.vertices().colwise().maxCoeff();
  const double sx = hi[0] - lo[0], sy = hi[1] - lo[1];
  if (!(sx > 0.0) || !(sy > 0.0)) throw InvalidArgument("planar uv needs extent in x and y");
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      const Vec3 p = mesh.vertex(mesh.face(f)[c]);
      uv[f][c] = Vec2((p.x() - lo[0]) / sx, (p.y() - lo[1]) / sy);
    }
  }
  return uv;
}

}  // namespace sdfilter
