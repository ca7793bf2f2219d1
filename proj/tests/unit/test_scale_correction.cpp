#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "s2d/scale_correction.hpp"

using namespace s2d;

namespace {

const CameraIntrinsics k500{500, 500, 160, 120, 320, 240};

ActiveWindow identity_window(std::vector<MaturePoint> points) {
  ActiveWindow w;
  w.keyframes.push_back({0, Pose::identity()});
  w.points = std::move(points);
  return w;
}

}  // namespace

TEST_SUITE("scale_correction") {
  TEST_CASE("identity warp keeps points at their rounded pixels") {
    const WarpResult r = warp_points(identity_window({{0, 10.4, 20.6, 1.5, 1}, {0, 300.5, 7.2, 2.5, 1}}), k500);
    CHECK(r.depth.valid_count() == 2);
    CHECK(r.depth(10, 21) == doctest::Approx(1.5).epsilon(1e-14));
    // Half-way pixels round away from zero.
    CHECK(r.depth(301, 7) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(r.dropped == 0);
    CHECK(r.occluded == 0);
  }

  TEST_CASE("forward motion along the optical axis") {
    ActiveWindow w = identity_window({{0, 160, 120, 2.0, 1}});
    w.keyframes[0].host_to_new.t = Eigen::Vector3d(0, 0, -0.5);
    const WarpResult r = warp_points(w, k500);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].u == 160);
    CHECK(r.points[0].v == 120);
    CHECK(r.points[0].z == doctest::Approx(1.5).epsilon(1e-15));
  }

  TEST_CASE("z-buffer keeps the nearest point") {
    const WarpResult r = warp_points(identity_window({{0, 50, 60, 1.2, 1}, {0, 50.2, 59.9, 0.8, 1}}), k500);
    CHECK(r.depth(50, 60) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(r.occluded == 1);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].source == 1);

    // Equal depths: the earlier point wins.
    const WarpResult tie = warp_points(identity_window({{0, 50, 60, 1.0, 2}, {0, 50.1, 60, 1.0, 3}}), k500);
    REQUIRE(tie.points.size() == 1);
    CHECK(tie.points[0].source == 0);
    CHECK(tie.points[0].baseline == 2);
  }

  TEST_CASE("points outside the image or behind the camera are dropped") {
    // After moving 0.5 m back: in view, off the left edge, off the right edge, behind the camera.
    ActiveWindow w = identity_window(
        {{0, 160, 120, 1.0, 1}, {0, 10, 10, 5.0, 1}, {0, 319.6, 10, 1.0, 1}, {0, 100, 100, 0.4, 1}});
    w.keyframes[0].host_to_new.t = Eigen::Vector3d(0, 0, -0.5);
    const WarpResult r = warp_points(w, k500);
    CHECK(r.dropped == 3);
    CHECK(r.depth.valid_count() == 1);
    CHECK(r.depth(160, 120) == 0.5);
  }

  TEST_CASE("window validation") {
    CHECK_THROWS_AS(warp_points(identity_window({{1, 1, 1, 1, 1}}), k500), InvalidInput);
    CHECK_THROWS_AS(warp_points(identity_window({{0, 1, 1, -1, 1}}), k500), InvalidInput);
    CHECK_THROWS_AS(warp_points(identity_window({{0, 1, 1, 1, -1}}), k500), InvalidInput);
    ActiveWindow bad = identity_window({});
    bad.keyframes[0].host_to_new.R(0, 1) = 0.5;
    CHECK_THROWS_AS(warp_points(bad, k500), InvalidInput);
  }

  TEST_CASE("scale_correct examples") {
    const DepthImage prior = testing::constant_depth(4, 3, 2.0);
    const std::vector<ScaleEvidence> one{{0, 0, 3.0, 0.5, 2.0}};
    const ScaleCorrection a = scale_correct(prior, one);
    CHECK(a.factor == 1.5);
    for (std::size_t i = 0; i < prior.size(); ++i) CHECK(a.corrected[i] == 3.0);

    const std::vector<ScaleEvidence> two{{0, 0, 1.0, 1.0, 1.0}, {1, 0, 4.0, 3.0, 2.0}};
    CHECK(scale_correct(prior, two).factor == 1.75);
  }

  TEST_CASE("scale_correct preserves the prior mask") {
    DepthImage prior(3, 3);
    prior.set(1, 1, 2.0);
    prior.set(2, 0, 4.0);
    const ScaleCorrection c = scale_correct(prior, std::vector<ScaleEvidence>{{1, 1, 1.0, 1.0, 2.0}});
    CHECK(c.corrected.mask() == prior.mask());
    CHECK(c.corrected(2, 0) == 2.0);
  }

  TEST_CASE("scale equivariance and baseline weighting") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> depth(0.5, 6.0), base(0.01, 2.0);
    std::vector<ScaleEvidence> ev;
    for (int i = 0; i < 200; ++i) ev.push_back({i, 0, depth(gen), base(gen), depth(gen)});
    const DepthImage prior = testing::constant_depth(2, 2, 1.0);
    const double f = scale_correct(prior, ev).factor;

    for (double s : {0.125, 0.5, 2.0, 64.0}) {
      auto stars = ev, priors = ev, both = ev;
      for (auto& e : stars) e.z_star *= s;
      for (auto& e : priors) e.z_prior *= s;
      for (auto& e : both) {
        e.z_star *= s;
        e.z_prior *= s;
      }
      CHECK(scale_correct(prior, stars).factor == f * s);
      CHECK(scale_correct(prior, priors).factor == f / s);
      CHECK(scale_correct(prior, both).factor == f);
    }
    // Non power-of-two factors agree to rounding.
    auto triple = ev;
    for (auto& e : triple) e.z_star *= 3.0;
    CHECK(scale_correct(prior, triple).factor == doctest::Approx(3.0 * f).epsilon(1e-14));

    auto with_zero = ev;
    with_zero.push_back({7, 7, 100.0, 0.0, 0.1});
    CHECK(scale_correct(prior, with_zero).factor == f);
  }

  TEST_CASE("correction cancels a global prior scale") {
    DepthImage truth(20, 10), prior(20, 10);
    std::vector<ScaleEvidence> ev;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const double z = 1.0 + 0.01 * double(i);
      truth.set(i, z);
      prior.set(i, 1.6 * z);
      if (i % 17 == 0) ev.push_back({int(i % 20), int(i / 20), z, 1.0, 1.6 * z});
    }
    const ScaleCorrection c = scale_correct(prior, ev);
    for (std::size_t i = 0; i < truth.size(); ++i) CHECK(c.corrected[i] == doctest::Approx(truth[i]).epsilon(1e-14));
  }

  TEST_CASE("missing evidence") {
    const DepthImage prior = testing::constant_depth(2, 2, 1.0);
    CHECK_THROWS_AS(scale_correct(prior, std::vector<ScaleEvidence>{}), NoCorrectionEvidence);
    CHECK_THROWS_AS(scale_correct(prior, std::vector<ScaleEvidence>{{0, 0, 1.0, 0.0, 1.0}}), NoCorrectionEvidence);
  }

  TEST_CASE("gather_scale_evidence skips invalid prior pixels") {
    DepthImage prior(320, 240);
    prior.set(10, 21, 3.0);
    const WarpResult r = warp_points(identity_window({{0, 10.4, 20.6, 1.5, 0.5}, {0, 100, 100, 2.0, 1}}), k500);
    const auto ev = gather_scale_evidence(r, prior);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].u == 10);
    CHECK(ev[0].v == 21);
    CHECK(ev[0].z_prior == 3.0);
    CHECK(ev[0].baseline == 0.5);
  }

  TEST_CASE("overlay_optimized") {
    const DepthImage cor = testing::constant_depth(5, 4, 2.0);
    CHECK(overlay_optimized(cor, DepthImage(5, 4)) == cor);
    const DepthImage dense = testing::constant_depth(5, 4, 3.0);
    CHECK(overlay_optimized(cor, dense) == dense);
    DepthImage one(5, 4);
    one.set(2, 1, 9.0);
    const DepthImage out = overlay_optimized(cor, one);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < out.size(); ++i) differ += out[i] != cor[i];
    CHECK(differ == 1);
    CHECK(out(2, 1) == 9.0);
    CHECK_THROWS_AS(overlay_optimized(cor, DepthImage(4, 4)), InvalidInput);
  }
}
