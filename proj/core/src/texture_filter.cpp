#include "sdfilter/texture_filter.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "sdfilter/errors.h"

namespace sdfilter {

SurfaceSamples lift_texture(const TriMesh& mesh, const CornerUVs& uv, const Image& image) {
  if (image.empty()) throw InvalidArgument("texture image is empty");
  if (static_cast<int>(uv.size()) != mesh.num_faces()) {
    throw InvalidArgument("texture coordinates must cover every face");
  }
  const int W = image.width;
  const int H = image.height;
  std::vector<int> owner(static_cast<std::size_t>(W) * H, -1);
  std::vector<Vec3> bary(owner.size());
  SurfaceSamples samples;

  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec2& a = uv[f][0];
    const Vec2& b = uv[f][1];
    const Vec2& c = uv[f][2];
    const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    if (!(std::abs(det) > 1e-14)) {
      ++samples.skipped_faces;
      continue;
    }
    // Pixel (x, y) has uv center ((x + 0.5) / W, 1 - (y + 0.5) / H).
    const double umin = std::min({a.x(), b.x(), c.x()});
    const double umax = std::max({a.x(), b.x(), c.x()});
    const double vmin = std::min({a.y(), b.y(), c.y()});
    const double vmax = std::max({a.y(), b.y(), c.y()});
    const int x0 = std::max(0, static_cast<int>(std::floor(umin * W - 0.5)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(umax * W - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor((1.0 - vmax) * H - 0.5)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil((1.0 - vmin) * H - 0.5)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * W + x;
        if (owner[idx] >= 0) continue;
        const Vec2 p((x + 0.5) / W, 1.0 - (y + 0.5) / H);
        const double l1 = ((b - p).x() * (c - p).y() - (b - p).y() * (c - p).x()) / det;
        const double l2 = ((c - p).x() * (a - p).y() - (c - p).y() * (a - p).x()) / det;
        const double l3 = 1.0 - l1 - l2;
        constexpr double tol = -1e-12;
        if (l1 < tol || l2 < tol || l3 < tol) continue;
        owner[idx] = f;
        bary[idx] = Vec3(l1, l2, l3);
      }
    }
  }

  int count = 0;
  for (int o : owner) count += o >= 0 ? 1 : 0;
  samples.points.resize(count, 3);
  samples.colors.resize(count, 3);
  samples.pixels.reserve(count);
  int k = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * W + x;
      const int f = owner[idx];
      if (f < 0) continue;
      const Face& t = mesh.face(f);
      const Vec3& l = bary[idx];
      samples.points.row(k) =
          (l[0] * mesh.vertex(t[0]) + l[1] * mesh.vertex(t[1]) + l[2] * mesh.vertex(t[2])).transpose();
      samples.colors.row(k) = image.pixel(x, y).cwiseMax(0.0).cwiseMin(1.0).transpose();
      samples.pixels.push_back({x, y});
      ++k;
    }
  }
  return samples;
}

double sample_spacing(const SurfaceSamples& samples) {
  // Samples are stored in row-major pixel order, so pixel lookups can use
  // binary search on (y, x).
  auto find = [&](int x, int y) {
    const std::array<int, 2> key{x, y};
    const auto it = std::lower_bound(samples.pixels.begin(), samples.pixels.end(), key,
                                     [](const auto& a, const auto& b) {
                                       return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0];
                                     });
    return it != samples.pixels.end() && *it == key ? static_cast<int>(it - samples.pixels.begin())
                                                    : -1;
  };
  std::vector<double> distances;
  for (int k = 0; k < samples.size(); ++k) {
    const auto [x, y] = samples.pixels[k];
    for (const int other : {find(x + 1, y), find(x, y + 1)}) {
      if (other >= 0) distances.push_back((samples.points.row(k) - samples.points.row(other)).norm());
    }
  }
  if (distances.empty()) throw InvalidArgument("no adjacent texture samples");
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  return *mid;
}

FilterParams texture_filter_defaults() {
  FilterParams p;
  p.unit_constrained = false;
  p.max_iters = 50;
  p.stop_on_convergence = false;
  return p;
}

Signal filter_colors(const SurfaceSamples& samples, const FilterParams& params,
                     const Signal& guidance) {
  if (params.unit_constrained) {
    throw InvalidArgument("texture colors are filtered without unit-length constraints");
  }
  params.validate();
  if (samples.size() == 0) return samples.colors;
  FilterDomain domain;
  domain.areas = Eigen::VectorXd::Ones(samples.size());
  domain.neighborhoods = build_point_neighborhoods(samples.points, params.eta);
  const Signal initial = samples.colors;
  const Signal& guide = guidance.size() == 0 ? initial : guidance;
  FilterOptions options;
  options.record_energy = false;
  if (domain.neighborhoods.total_pairs() == 0) return initial;
  return filter_signal(domain, initial, guide, params, options).signal;
}

Image write_back(const SurfaceSamples& samples, const Signal& colors, const Image& image) {
  if (colors.rows() != samples.size()) throw InvalidArgument("one color per sample is required");
  Image out = image;
  for (int k = 0; k < samples.size(); ++k) {
    const auto [x, y] = samples.pixels[k];
    out.set_pixel(x, y, colors.row(k).transpose().cwiseMax(0.0).cwiseMin(1.0));
  }
  return out;
}

}  // namespace sdfilter
