#include <doctest.h>

#include <random>
#include <set>

#include "../support/oracles.hpp"
#include "helpers.hpp"
#include "s2d/metrics.hpp"
#include "s2d/sparse2dense.hpp"
#include "s2d/synthetic.hpp"

using namespace s2d;

namespace {

const CameraIntrinsics k500{500, 500, 160, 120, 320, 240};

// Depth and normals of the plane n . X = d seen from the origin.
struct PlaneImages {
  DepthImage depth;
  NormalImage normals;
};

PlaneImages plane_images(const CameraIntrinsics& k, const Eigen::Vector3d& n, double d) {
  PlaneImages p{DepthImage(k.width, k.height), NormalImage(k.width, k.height)};
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      const auto z = oracle::ray_plane_depth(k.fx, k.fy, k.cx, k.cy, u, v, n.x(), n.y(), n.z(), d);
      REQUIRE(z);
      p.depth.set(u, v, *z);
      p.normals.set(u, v, n);
    }
  return p;
}

DepthImage grid_seeds(const DepthImage& dense, int step) {
  DepthImage s(dense.width(), dense.height());
  for (int v = step / 2; v < dense.height(); v += step)
    for (int u = step / 2; u < dense.width(); u += step) s.set(u, v, dense(u, v));
  return s;
}

ColorImage solid(int w, int h, Rgb c) { return ColorImage(w, h, c); }

}  // namespace

TEST_SUITE("sparse2dense") {
  TEST_CASE("coplanar_reproject examples") {
    const Eigen::Vector3d fronto(0, 0, 1);
    for (double u : {0.0, 77.0, 319.0})
      CHECK(*coplanar_reproject(k500, u, 200, Vertex(0, 0, 2), fronto) == doctest::Approx(2.0).epsilon(1e-15));

    const Vertex self = unproject(k500, 210, 33, 3.25);
    const Eigen::Vector3d tilted = Eigen::Vector3d(0.3, 0.4, 0.8).normalized();
    CHECK(std::abs(*coplanar_reproject(k500, 210, 33, self, tilted) - 3.25) < 1e-12);

    // Plane x + z = 4 with normal (1, 0, 1)/sqrt 2.
    const Eigen::Vector3d n = Eigen::Vector3d(1, 0, 1).normalized();
    const Vertex source(1.0, 0.5, 3.0);
    const auto z = coplanar_reproject(k500, 260, 120, source, n);
    const auto expected = oracle::ray_plane_depth(500, 500, 160, 120, 260, 120, n.x(), n.y(), n.z(), n.dot(source));
    REQUIRE(z);
    CHECK(std::abs(*z - *expected) < 1e-12);
    CHECK(std::abs(*z - 4.0 / 1.2) < 1e-12);
  }

  TEST_CASE("coplanar_reproject reports rays parallel to the plane") {
    // Plane x = 1 is parallel to the principal ray.
    CHECK_FALSE(coplanar_reproject(k500, 160, 120, Vertex(1, 0, 3), Eigen::Vector3d(1, 0, 0)).has_value());
  }

  TEST_CASE("dense fronto-parallel input is a fixed point") {
    const PlaneImages p = plane_images(k500, {0, 0, 1}, 2.0);
    const DepthImage out = normal_guided_filter(p.depth, p.normals, k500, FilterParams{});
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - p.depth[i]) < 1e-9);
  }

  TEST_CASE("sparse seeds on a slanted plane are recovered exactly") {
    const Eigen::Vector3d n = Eigen::Vector3d(0.3, -0.2, 1.0).normalized();
    const PlaneImages p = plane_images(k500, n, 2.0);
    const DepthImage seeds = grid_seeds(p.depth, 8);
    const DepthImage out = normal_guided_filter(seeds, p.normals, k500, FilterParams{0.95, 5, 1});
    std::size_t filled = 0;
    for (int v = 0; v < out.height(); ++v)
      for (int u = 0; u < out.width(); ++u) {
        bool seed_in_window = false;
        for (int dv = -4; dv <= 4; ++dv)
          for (int du = -4; du <= 4; ++du)
            seed_in_window |= seeds.contains(u + du, v + dv) && seeds.valid(u + du, v + dv);
        CHECK(out.valid(u, v) == seed_in_window);
        if (out.valid(u, v)) {
          ++filled;
          CHECK(std::abs(out(u, v) - p.depth(u, v)) < 1e-6 * p.depth(u, v));
        }
      }
    CHECK(filled == out.size());
  }

  TEST_CASE("window extent follows the strict |du| < sigma bound") {
    const PlaneImages p = plane_images(k500, {0, 0, 1}, 1.5);
    DepthImage one(k500.width, k500.height);
    one.set(100, 100, 1.5);
    const DepthImage out = normal_guided_filter(one, p.normals, k500, FilterParams{0.95, 3, 1});
    CHECK(out.valid_count() == 25);
    CHECK(out.valid(102, 102));
    CHECK_FALSE(out.valid(103, 100));
  }

  TEST_CASE("no propagation across a crease") {
    const int w = 40, h = 20;
    const CameraIntrinsics k{100, 100, 19.5, 9.5, w, h};
    const Eigen::Vector3d left = Eigen::Vector3d(1, 0, 1).normalized();
    const Eigen::Vector3d right = Eigen::Vector3d(-1, 0, 1).normalized();
    DepthImage seeds(w, h);
    NormalImage normals(w, h);
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u) {
        const bool is_left = u < w / 2;
        const Eigen::Vector3d& n = is_left ? left : right;
        normals.set(u, v, n);
        if (is_left && u % 3 == 0)
          seeds.set(u, v, *oracle::ray_plane_depth(k.fx, k.fy, k.cx, k.cy, u, v, n.x(), n.y(), n.z(), 2.0));
      }
    const DepthImage out = normal_guided_filter(seeds, normals, k, FilterParams{0.95, 5, 3});
    for (int v = 0; v < h; ++v)
      for (int u = w / 2; u < w; ++u) CHECK_FALSE(out.valid(u, v));
  }

  TEST_CASE("pixels without normals keep their input") {
    DepthImage depth(6, 6);
    depth.set(2, 2, 1.0);
    depth.set(4, 4, 3.0);
    NormalImage normals(6, 6);
    normals.set(2, 2, Eigen::Vector3d(0, 0, 1));
    const CameraIntrinsics k{10, 10, 2.5, 2.5, 6, 6};
    const DepthImage out = normal_guided_filter(depth, normals, k, FilterParams{});
    CHECK(out(4, 4) == 3.0);
    CHECK(out(2, 2) == 1.0);
    CHECK(out.valid_count() == 2);
  }

  TEST_CASE("coplanarity gate leaves isolated pixels empty") {
    // Every neighbour's normal is at 60 degrees to the centre normal.
    DepthImage depth(5, 5);
    NormalImage normals(5, 5);
    const CameraIntrinsics k{10, 10, 2, 2, 5, 5};
    for (int v = 0; v < 5; ++v)
      for (int u = 0; u < 5; ++u) {
        if (u == 2 && v == 2) {
          normals.set(u, v, Eigen::Vector3d(0, 0, 1));
          continue;
        }
        depth.set(u, v, 2.0);
        normals.set(u, v, Eigen::Vector3d(std::sqrt(3.0) / 2, 0, 0.5));
      }
    const DepthImage out = normal_guided_filter(depth, normals, k, FilterParams{0.95, 5, 1});
    CHECK_FALSE(out.valid(2, 2));
  }

  TEST_CASE("filter input validation") {
    const DepthImage d(4, 4);
    const NormalImage n(5, 4);
    CHECK_THROWS_AS(normal_guided_filter(d, n, k500, FilterParams{}), InvalidInput);
    CHECK_THROWS_AS(normal_guided_filter(d, NormalImage(4, 4), k500, FilterParams{1.0, 5, 1}), InvalidInput);
    CHECK_THROWS_AS(normal_guided_filter(d, NormalImage(4, 4), k500, FilterParams{0.9, 0, 1}), InvalidInput);
    SuperpixelLabels labels{Image<std::int32_t>(3, 3, 0), 1};
    CHECK_THROWS_AS(normal_guided_filter(d, NormalImage(4, 4), k500, FilterParams{}, labels), InvalidInput);
  }

  TEST_CASE("superpixel criterion ignores seeds in other superpixels") {
    const CameraIntrinsics k = fixtures::default_camera();
    const RenderedView view = render(fixtures::box_room(), fixtures::default_view("box_room"), k);
    const SuperpixelLabels labels = superpixel_segment(view.color);
    const DepthImage seeds = sample_sparse(view.depth, labels, 2, 9);
    const DepthImage base = normal_guided_filter(seeds, view.normals, k, FilterParams{}, labels);

    // Perturb every seed outside one label and check that label's pixels are bit-identical.
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 5; ++trial) {
      const std::int32_t keep = static_cast<std::int32_t>(gen() % labels.count);
      DepthImage perturbed = seeds;
      for (std::size_t i = 0; i < seeds.size(); ++i)
        if (seeds.valid(i) && labels[i] != keep) perturbed.set(i, seeds[i] * 1.37);
      const DepthImage out = normal_guided_filter(perturbed, view.normals, k, FilterParams{}, labels);
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (labels[i] != keep) continue;
        CHECK(out.valid(i) == base.valid(i));
        CHECK(out[i] == base[i]);
      }
    }
  }

  TEST_CASE("superpixel criterion reaches across the whole superpixel") {
    // One seed in a 40-pixel-wide single-label strip fills the entire strip, beyond the window.
    const CameraIntrinsics k{100, 100, 19.5, 2.5, 40, 6};
    const PlaneImages p = plane_images(k, {0, 0, 1}, 2.0);
    DepthImage seed(40, 6);
    seed.set(0, 0, 2.0);
    SuperpixelLabels labels{Image<std::int32_t>(40, 6, 0), 1};
    const DepthImage out = normal_guided_filter(seed, p.normals, k, FilterParams{}, labels);
    CHECK(out.valid_count() == 240);
  }

  TEST_CASE("bilateral filter examples") {
    const DepthImage flat = testing::constant_depth(9, 9, 1.75);
    const ColorImage gray = solid(9, 9, {90, 90, 90});
    const DepthImage same = bilateral_depth_filter(flat, gray, BilateralParams{});
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(std::abs(same[i] - 1.75) < 1e-12);

    DepthImage hole = flat;
    hole.invalidate(4, 4);
    const DepthImage filled = bilateral_depth_filter(hole, gray, BilateralParams{});
    CHECK(filled.valid(4, 4));
    CHECK(std::abs(filled(4, 4) - 1.75) < 1e-12);

    CHECK_THROWS_AS(bilateral_depth_filter(flat, solid(8, 9, {}), BilateralParams{}), InvalidInput);
  }

  TEST_CASE("bilateral filter preserves aligned color and depth edges") {
    DepthImage depth(7, 7);
    ColorImage color(7, 7);
    for (int v = 0; v < 7; ++v)
      for (int u = 0; u < 7; ++u) {
        const bool left = u < 3;
        depth.set(u, v, left ? 1.0 : 2.0);
        color(u, v) = left ? Rgb{20, 20, 20} : Rgb{220, 220, 220};
      }
    const BilateralParams params{3, 3.0, 10.0};
    const DepthImage out = bilateral_depth_filter(depth, color, params);

    // Direct kernel sum at each pixel of the patch.
    for (int v = 0; v < 7; ++v)
      for (int u = 0; u < 7; ++u) {
        double num = 0, den = 0;
        for (int q = 0; q < 7; ++q)
          for (int p = 0; p < 7; ++p) {
            if (std::abs(p - u) > 3 || std::abs(q - v) > 3) continue;
            const double dr = double(color(p, q).r) - color(u, v).r;
            const double color2 = 3 * dr * dr;
            const double space2 = double((p - u) * (p - u) + (q - v) * (q - v));
            const double w = std::exp(-space2 / (2 * 9.0)) * std::exp(-color2 / (2 * 100.0));
            num += w * depth(p, q);
            den += w;
          }
        CHECK(std::abs(out(u, v) - num / den) < 1e-12);
        CHECK(std::abs(out(u, v) - depth(u, v)) < 0.01 * depth(u, v));
      }
  }

  TEST_CASE("sparse_to_dense on a dense exact plane") {
    const CameraIntrinsics k{200, 200, 31.5, 23.5, 64, 48};
    const PlaneImages p = plane_images(k, Eigen::Vector3d(0.1, 0.2, 1).normalized(), 1.2);
    const DepthImage out = sparse_to_dense(p.depth, p.normals, solid(64, 48, {128, 64, 32}), k);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - p.depth[i]) < 1e-9 * p.depth[i] + 1e-3);
    DensifyParams no_bilateral;
    no_bilateral.bilateral_step = false;
    const DepthImage exact = sparse_to_dense(p.depth, p.normals, solid(64, 48, {128, 64, 32}), k, no_bilateral);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(exact[i] - p.depth[i]) < 1e-9);
  }

  TEST_CASE("sparse_to_dense with uniform 2% seeds on the box room") {
    const CameraIntrinsics k = fixtures::default_camera();
    const RenderedView view = render(fixtures::box_room(), fixtures::default_view("box_room"), k);
    const DepthImage seeds = sample_uniform(view.depth, 0.02, 21);
    const DensifyStages stages = sparse_to_dense_stages(seeds, view.normals, view.color, k);
    CHECK(pcd(stages.dense, view.depth) > 95.0);
    CHECK(stages.dense.valid_count() > seeds.valid_count());

    // Monotone fill through the steps.
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (seeds.valid(i)) CHECK(stages.superpixel_filled.valid(i));
      if (stages.superpixel_filled.valid(i)) CHECK(stages.bilateral.valid(i));
      if (stages.bilateral.valid(i)) CHECK(stages.dense.valid(i));
    }
  }

  TEST_CASE("sparse_to_dense needs seeds") {
    const CameraIntrinsics k{10, 10, 2, 2, 5, 5};
    CHECK_THROWS_AS(sparse_to_dense(DepthImage(5, 5), NormalImage(5, 5), solid(5, 5, {}), k), NoSeeds);
    CHECK_THROWS_AS(sparse_to_dense(DepthImage(5, 5), NormalImage(5, 5), solid(5, 5, {}), k), NumericalFailure);
  }

  TEST_CASE("filters are bit-identical for any worker count") {
    const CameraIntrinsics k = fixtures::default_camera();
    const RenderedView view = render(fixtures::desk_on_floor(), fixtures::default_view("desk_on_floor"), k);
    const CorruptedView noisy = corrupt(view.depth, view.normals, NoiseSpec{1.1, 0.03, 0.5, 0.05, 4});
    const SuperpixelLabels labels = superpixel_segment(view.color);
    const auto run = [&](int workers) {
      const Parallelism par{workers};
      return std::make_tuple(normal_guided_filter(noisy.depth, noisy.normals, k, FilterParams{}, par),
                             normal_guided_filter(noisy.depth, noisy.normals, k, FilterParams{}, labels, par),
                             bilateral_depth_filter(noisy.depth, view.color, BilateralParams{}, par),
                             sparse_to_dense(noisy.depth, noisy.normals, view.color, k, DensifyParams{}, par));
    };
    const auto reference = run(1);
    CHECK(run(4) == reference);
    CHECK(run(8) == reference);
  }
}

TEST_SUITE("superpixel") {
  TEST_CASE("uniform image gives a near-regular grid") {
    const SuperpixelLabels labels = superpixel_segment(solid(320, 240, {100, 100, 100}), SuperpixelParams{16, 10, 10});
    CHECK(labels.count == 20 * 15);
    std::vector<int> sizes(labels.count, 0);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) ++sizes[labels[i]];
    for (int s : sizes) {
      CHECK(s >= 128);
      CHECK(s <= 512);
    }
  }

  TEST_CASE("two solid halves are never straddled") {
    ColorImage img(97, 61);
    for (int v = 0; v < 61; ++v)
      for (int u = 0; u < 97; ++u) img(u, v) = u < 41 ? Rgb{200, 30, 30} : Rgb{30, 30, 200};
    const SuperpixelLabels labels = superpixel_segment(img, SuperpixelParams{16, 1, 10});
    std::vector<int> side(labels.count, -1);
    for (int v = 0; v < 61; ++v)
      for (int u = 0; u < 97; ++u) {
        const int s = u < 41 ? 0 : 1;
        int& recorded = side[labels(u, v)];
        if (recorded < 0) recorded = s;
        CHECK(recorded == s);
      }
  }

  TEST_CASE("single pixel image") {
    const SuperpixelLabels labels = superpixel_segment(solid(1, 1, {1, 2, 3}));
    CHECK(labels.count == 1);
    CHECK(labels(0, 0) == 0);
  }

  TEST_CASE("labels are 4-connected, dense and numbered in raster order") {
    const RenderedView view =
        render(fixtures::box_room(), fixtures::default_view("box_room"), fixtures::default_camera());
    const SuperpixelLabels labels = superpixel_segment(view.color);
    const int w = labels.width(), h = labels.height();
    std::vector<int> first_seen;
    std::vector<char> seen(labels.count, 0);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
      REQUIRE(labels[i] >= 0);
      REQUIRE(labels[i] < labels.count);
      if (!seen[labels[i]]) {
        seen[labels[i]] = 1;
        first_seen.push_back(labels[i]);
      }
    }
    for (int i = 0; i < labels.count; ++i) CHECK(first_seen[i] == i);

    // Flood fill each label from its first pixel; it must reach every pixel with that label.
    std::vector<char> reached(labels.labels.size(), 0);
    std::vector<int> count(labels.count, 0), flood(labels.count, 0);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) ++count[labels[i]];
    for (std::size_t start = 0; start < labels.labels.size(); ++start) {
      if (reached[start]) continue;
      const std::int32_t label = labels[start];
      CHECK(flood[label] == 0);
      std::vector<std::size_t> stack{start};
      reached[start] = 1;
      while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        ++flood[label];
        const int u = int(i % w), v = int(i / w);
        const int du[] = {1, -1, 0, 0}, dv[] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int a = u + du[d], b = v + dv[d];
          if (a < 0 || b < 0 || a >= w || b >= h) continue;
          const std::size_t j = std::size_t(b) * w + a;
          if (!reached[j] && labels[j] == label) {
            reached[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
    CHECK(flood == count);
  }

  TEST_CASE("segmentation is deterministic and validates input") {
    const RenderedView view =
        render(fixtures::desk_on_floor(), fixtures::default_view("desk_on_floor"), fixtures::default_camera());
    CHECK(superpixel_segment(view.color).labels == superpixel_segment(view.color).labels);
    CHECK_THROWS_AS(superpixel_segment(ColorImage(0, 0)), InvalidInput);
    CHECK_THROWS_AS(superpixel_segment(view.color, SuperpixelParams{0, 10, 10}), InvalidInput);
  }

  TEST_CASE("rgb_to_lab reference values") {
    const Eigen::Vector3d white = rgb_to_lab({255, 255, 255});
    CHECK(white.x() == doctest::Approx(100.0).epsilon(1e-3));
    CHECK(std::abs(white.y()) < 1e-2);
    CHECK(std::abs(white.z()) < 1e-2);
    const Eigen::Vector3d black = rgb_to_lab({0, 0, 0});
    CHECK(std::abs(black.x()) < 1e-9);
    // sRGB red: L* 53.24, a* 80.09, b* 67.20.
    const Eigen::Vector3d red = rgb_to_lab({255, 0, 0});
    CHECK(red.x() == doctest::Approx(53.24).epsilon(2e-3));
    CHECK(red.y() == doctest::Approx(80.09).epsilon(2e-3));
    CHECK(red.z() == doctest::Approx(67.20).epsilon(2e-3));
  }
}
