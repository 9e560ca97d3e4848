#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "sdfilter/errors.h"
#include "sdfilter/image.h"
#include "sdfilter/synthetic.h"
#include "sdfilter/texture_filter.h"
#include "test_support.h"

namespace sdfilter {
namespace {

using testing::Gen;

/// Unit square split along its diagonal, uv = (x, y).
struct UnitSquare {
  TriMesh mesh;
  CornerUVs uv;
};

UnitSquare unit_square() {
  Points v(4, 3);
  v << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  UnitSquare s{TriMesh(std::move(v), {{0, 1, 2}, {0, 2, 3}}), {}};
  for (const Face& f : s.mesh.faces()) {
    std::array<Vec2, 3> c;
    for (int k = 0; k < 3; ++k) c[k] = s.mesh.vertex(f[k]).head<2>();
    s.uv.push_back(c);
  }
  return s;
}

Image random_image(Gen& gen, int w, int h) {
  Image img(w, h);
  for (double& c : img.data) c = gen.uniform(0, 1);
  return img;
}

double variance(const Signal& colors) {
  double v = 0.0;
  for (int k = 0; k < colors.cols(); ++k) {
    const double m = colors.col(k).mean();
    v += (colors.col(k).array() - m).square().mean();
  }
  return v;
}

TEST(Lift, SingleFaceCoveringSquare) {
  Points v(3, 3);
  v << 0, 0, 0, 4, 0, 2, 0, 6, 0;
  const TriMesh m(std::move(v), {{0, 1, 2}});
  const CornerUVs uv = {{Vec2(0, 0), Vec2(2, 0), Vec2(0, 2)}};
  Gen gen(1);
  const SurfaceSamples s = lift_texture(m, uv, random_image(gen, 2, 2));
  ASSERT_EQ(s.size(), 4);
  for (int k = 0; k < 4; ++k) {
    const auto [x, y] = s.pixels[k];
    const double u = (x + 0.5) / 2.0, w = 1.0 - (y + 0.5) / 2.0;
    // affine map: (u, v) -> v0 + u/2 (v1 - v0) + v/2 (v2 - v0)
    const Vec3 expected = Vec3(0, 0, 0) + u / 2.0 * Vec3(4, 0, 2) + w / 2.0 * Vec3(0, 6, 0);
    EXPECT_LT((Vec3(s.points.row(k)) - expected).norm(), 1e-14);
  }
}

TEST(Lift, TinyTriangleCoversNoPixel) {
  Points v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  const TriMesh m(std::move(v), {{0, 1, 2}});
  const CornerUVs uv = {{Vec2(0.01, 0.01), Vec2(0.05, 0.01), Vec2(0.01, 0.05)}};
  const SurfaceSamples s = lift_texture(m, uv, Image(4, 4));
  EXPECT_EQ(s.size(), 0);
  EXPECT_EQ(s.skipped_faces, 0);
}

TEST(Lift, TwoFaceSquareMatchesPixelScan) {
  const UnitSquare sq = unit_square();
  Gen gen(2);
  for (int size : {8, 13, 32}) {
    const Image img = random_image(gen, size, size);
    const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, img);
    // Exhaustive scan: a pixel center is covered if it lies in either uv
    // triangle; on the unit square that is every pixel.
    int covered = 0;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const Vec2 p((x + 0.5) / size, 1.0 - (y + 0.5) / size);
        bool inside = false;
        for (const auto& t : sq.uv) {
          auto side = [&](const Vec2& a, const Vec2& b) {
            return (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
          };
          const double s0 = side(t[0], t[1]), s1 = side(t[1], t[2]), s2 = side(t[2], t[0]);
          inside |= (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
        }
        covered += inside;
      }
    }
    EXPECT_EQ(s.size(), covered);
    for (int k = 0; k < s.size(); ++k) {
      const auto [x, y] = s.pixels[k];
      EXPECT_NEAR(s.points(k, 0), (x + 0.5) / size, 1e-14);
      EXPECT_NEAR(s.points(k, 1), 1.0 - (y + 0.5) / size, 1e-14);
      EXPECT_EQ(Vec3(s.colors.row(k)), img.pixel(x, y));
    }
  }
}

TEST(Lift, PartialCoverageMatchesPixelScan) {
  Points v(3, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  const TriMesh m(std::move(v), {{0, 1, 2}});
  const CornerUVs uv = {{Vec2(0.1, 0.2), Vec2(0.9, 0.35), Vec2(0.3, 0.85)}};
  const int size = 16;
  const SurfaceSamples s = lift_texture(m, uv, Image(size, size));
  int covered = 0;
  const auto& t = uv[0];
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const Vec2 p((x + 0.5) / size, 1.0 - (y + 0.5) / size);
      auto side = [&](const Vec2& a, const Vec2& b) {
        return (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
      };
      covered += side(t[0], t[1]) >= 0 && side(t[1], t[2]) >= 0 && side(t[2], t[0]) >= 0;
    }
  }
  EXPECT_GT(covered, 0);
  EXPECT_EQ(s.size(), covered);
}

TEST(Lift, DegenerateUvTrianglesSkipped) {
  const UnitSquare sq = unit_square();
  CornerUVs uv = sq.uv;
  uv[1] = {Vec2(0.2, 0.2), Vec2(0.4, 0.4), Vec2(0.6, 0.6)};
  const SurfaceSamples s = lift_texture(sq.mesh, uv, Image(8, 8));
  EXPECT_EQ(s.skipped_faces, 1);
  EXPECT_THROW(lift_texture(sq.mesh, uv, Image()), InvalidArgument);
  EXPECT_THROW(lift_texture(sq.mesh, CornerUVs(1), Image(2, 2)), InvalidArgument);
}

TEST(SampleSpacing, MatchesPixelPitch) {
  const UnitSquare sq = unit_square();
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, Image(20, 20));
  EXPECT_NEAR(sample_spacing(s), 1.0 / 20.0, 1e-12);
}

TEST(FilterColors, ConstantTextureUnchanged) {
  const UnitSquare sq = unit_square();
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, Image(16, 16, Vec3(0.2, 0.5, 0.9)));
  FilterParams p = texture_filter_defaults();
  p.lambda = 10.0;
  p.eta = 3.0 * sample_spacing(s);
  EXPECT_LT((filter_colors(s, p) - s.colors).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FilterColors, ZeroLambdaUnchanged) {
  Gen gen(3);
  const UnitSquare sq = unit_square();
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, random_image(gen, 16, 16));
  FilterParams p = texture_filter_defaults();
  p.lambda = 0.0;
  p.eta = 3.0 * sample_spacing(s);
  EXPECT_EQ(filter_colors(s, p), s.colors);
}

TEST(FilterColors, RejectsUnitConstraint) {
  const UnitSquare sq = unit_square();
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, Image(4, 4));
  FilterParams p;
  p.unit_constrained = true;
  EXPECT_THROW(filter_colors(s, p), InvalidArgument);
}

TEST(FilterColors, DefaultsRunFiftyUnconstrainedIterations) {
  const FilterParams p = texture_filter_defaults();
  EXPECT_EQ(p.max_iters, 50);
  EXPECT_FALSE(p.unit_constrained);
  EXPECT_FALSE(p.stop_on_convergence);
}

TEST(FilterColors, OutputWithinInitialChannelRange) {
  Gen gen(4);
  const UnitSquare sq = unit_square();
  for (int trial = 0; trial < 5; ++trial) {
    const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, random_image(gen, 24, 24));
    FilterParams p = texture_filter_defaults();
    p.lambda = gen.uniform(0.5, 20);
    p.eta = gen.uniform(1, 4) * sample_spacing(s);
    p.nu = gen.uniform(0.1, 1);
    p.mu = gen.uniform(0.1, 5);
    const Signal out = filter_colors(s, p);
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(out.col(k).minCoeff(), s.colors.col(k).minCoeff());
      EXPECT_LE(out.col(k).maxCoeff(), s.colors.col(k).maxCoeff());
    }
  }
}

TEST(FilterColors, SampleOrderDoesNotMatter) {
  Gen gen(6);
  const UnitSquare sq = unit_square();
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, random_image(gen, 12, 12));
  std::vector<int> perm(s.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen.engine());
  SurfaceSamples t = s;
  for (int k = 0; k < s.size(); ++k) {
    t.points.row(k) = s.points.row(perm[k]);
    t.colors.row(k) = s.colors.row(perm[k]);
    t.pixels[k] = s.pixels[perm[k]];
  }
  FilterParams p = texture_filter_defaults();
  p.lambda = 5.0;
  p.eta = 2.0 * sample_spacing(s);
  const Signal a = filter_colors(s, p), b = filter_colors(t, p);
  for (int k = 0; k < s.size(); ++k) {
    EXPECT_LT((b.row(k) - a.row(perm[k])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// Fine checkers (one-pixel cells) are removed, coarse ones (cells far
// larger than the spatial scale) survive, under the same parameters.
TEST(FilterColors, CheckerboardScaleSeparation) {
  const TriMesh plane = make_grid_plane(8);
  const CornerUVs uv = planar_uv(plane);
  const Vec3 a(0.9, 0.8, 0.2), b(0.2, 0.15, 0.1);
  const SurfaceSamples fine = lift_texture(plane, uv, make_checker_texture(64, 1, a, b));
  const SurfaceSamples coarse = lift_texture(plane, uv, make_checker_texture(64, 32, a, b));
  FilterParams p = texture_filter_defaults();
  p.lambda = 2.0;
  p.eta = 3.0 * sample_spacing(fine);
  p.mu = 1.0;
  p.nu = 0.3;
  const double fine_kept = variance(filter_colors(fine, p)) / variance(fine.colors);
  const double coarse_kept = variance(filter_colors(coarse, p)) / variance(coarse.colors);
  EXPECT_LT(fine_kept, 0.1);
  EXPECT_GT(coarse_kept, 0.8);
}

TEST(WriteBack, NoSamplesLeavesImage) {
  Gen gen(7);
  const Image img = random_image(gen, 5, 4);
  SurfaceSamples empty;
  const Image out = write_back(empty, Signal(0, 3), img);
  EXPECT_EQ(out.data, img.data);
}

TEST(WriteBack, IdentityRoundTrip) {
  Gen gen(8);
  const UnitSquare sq = unit_square();
  const Image img = random_image(gen, 9, 9);
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, img);
  ASSERT_EQ(s.size(), 81);
  EXPECT_EQ(write_back(s, s.colors, img).data, img.data);
}

TEST(WriteBack, ClampsToUnitRange) {
  const UnitSquare sq = unit_square();
  const Image img(2, 2, Vec3(0.5, 0.5, 0.5));
  const SurfaceSamples s = lift_texture(sq.mesh, sq.uv, img);
  Signal colors = s.colors;
  colors.row(0) << 1.2, -0.3, 0.7;
  const Image out = write_back(s, colors, img);
  const auto [x, y] = s.pixels[0];
  EXPECT_EQ(out.pixel(x, y), Vec3(1.0, 0.0, 0.7));
  EXPECT_THROW(write_back(s, Signal(1, 3), img), InvalidArgument);
}

TEST(ImageIo, PpmAndPngRoundTrip) {
  Gen gen(9);
  Image img(7, 5);
  for (double& c : img.data) c = gen.integer(0, 255) / 255.0;
  const std::string dir = testing::scratch_dir("image");
  for (const char* name : {"a.png", "a.ppm"}) {
    const auto path = std::filesystem::path(dir) / name;
    save_image(img, path);
    const Image back = load_image(path);
    ASSERT_EQ(back.width, 7);
    ASSERT_EQ(back.height, 5);
    for (std::size_t k = 0; k < img.data.size(); ++k) EXPECT_NEAR(back.data[k], img.data[k], 1e-12);
  }
  EXPECT_EQ(decode_ppm(encode_ppm(img)).data.size(), img.data.size());
  EXPECT_THROW(image_format_for("x.jpg"), InvalidArgument);
  EXPECT_THROW(decode_ppm("P3\n1 1\n255\n0 0 0\n"), Error);
  EXPECT_THROW(load_image(std::filesystem::path(dir) / "missing.png"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sdfilter
