#include "s2d/refinement.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

namespace s2d {

BeliefMap init_beliefs(const DepthImage& dense, const DepthImage& corrected, double sigma_floor) {
  if (!dense.same_shape(corrected)) throw InvalidInput("dense and corrected depth differ in size");
  if (!(sigma_floor > 0.0)) throw InvalidInput("sigma floor must be positive");
  BeliefMap beliefs(dense.width(), dense.height());

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (!dense.valid(i)) continue;
    lo = std::min(lo, dense[i]);
    hi = std::max(hi, dense[i]);
  }
  if (!(hi > 0.0)) return beliefs;
  const double z_min = 0.9 * lo;
  const double z_max = 1.1 * hi;
  const double fallback_sigma = (1.0 / z_min - 1.0 / z_max) / 6.0;

  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (!dense.valid(i)) continue;
    const double mu = 1.0 / dense[i];
    const double spread = corrected.valid(i) ? std::abs(mu - 1.0 / corrected[i]) : fallback_sigma;
    const double sigma = std::max(spread, sigma_floor);
    beliefs[i] = {mu, sigma * sigma, kInitialBetaCount, kInitialBetaCount, z_min, z_max, true};
  }
  return beliefs;
}

PixelDepthBelief fuse_observation(const PixelDepthBelief& belief, double obs_mu, double obs_sigma2,
                                  MixtureModel model) {
  if (!belief.valid) throw InvalidInput("cannot fuse into an invalid belief");
  PixelDepthBelief out = belief;
  if (!std::isfinite(obs_mu) || !std::isfinite(obs_sigma2) || !(obs_sigma2 > 0.0)) {
    out.b += 1.0;
    return out;
  }

  const double mu = belief.mu;
  const double s2 = belief.sigma2;
  const double a = belief.a;
  const double b = belief.b;

  // Gaussian product: the inlier branch of the posterior.
  const double fused_s2 = 1.0 / (1.0 / s2 + 1.0 / obs_sigma2);
  const double fused_mu = fused_s2 * (mu / s2 + obs_mu / obs_sigma2);

  if (model == MixtureModel::gaussian_only) {
    out.mu = fused_mu;
    out.sigma2 = fused_s2;
    out.a = a + 1.0;
    return out;
  }

  // Responsibilities of the inlier (Gaussian) and outlier (uniform) branches.
  const double predictive = s2 + obs_sigma2;
  const double diff = obs_mu - mu;
  double inlier = a / (a + b) * std::exp(-0.5 * diff * diff / predictive) /
                  std::sqrt(2.0 * std::numbers::pi * predictive);
  double outlier = b / (a + b) * belief.outlier_density();
  const double norm = inlier + outlier;
  inlier /= norm;
  outlier /= norm;

  // Moment matching: first two moments of the inlier ratio and of the depth.
  const double ab1 = a + b + 1.0;
  const double ab2 = a + b + 2.0;
  const double f = inlier * (a + 1.0) / ab1 + outlier * a / ab1;
  const double e = inlier * (a + 1.0) * (a + 2.0) / (ab1 * ab2) + outlier * a * (a + 1.0) / (ab1 * ab2);

  out.mu = inlier * fused_mu + outlier * mu;
  const double branch_gap = fused_mu - mu;
  out.sigma2 = inlier * fused_s2 + outlier * s2 + inlier * outlier * branch_gap * branch_gap;

  const double new_a = (e - f) / (f - e / f);
  const double new_b = new_a * (1.0 - f) / f;
  if (std::isfinite(new_a) && std::isfinite(new_b) && new_a > 0.0 && new_b > 0.0) {
    out.a = new_a;
    out.b = new_b;
  }
  return out;
}

BeliefMap observe_from_keyframe(const BeliefMap& beliefs, const DepthImage& other, const Pose& other_to_this,
                                const CameraIntrinsics& k, double obs_sigma2, MixtureModel model) {
  if (!beliefs.same_shape(other)) throw InvalidInput("belief map and observed depth differ in size");
  if (!(obs_sigma2 > 0.0)) throw InvalidInput("observation variance must be positive");
  other_to_this.validate(1e-6);

  const int w = beliefs.width();
  const int h = beliefs.height();
  std::vector<double> landing(beliefs.size(), std::numeric_limits<double>::infinity());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!other.valid(u, v)) continue;
      const Vertex p = other_to_this * unproject(k, u, v, other(u, v));
      if (!(p.z() > 0.0)) continue;
      const PixelDepth q = project(k, p);
      const double ru = std::round(q.u);
      const double rv = std::round(q.v);
      if (!(ru >= 0.0 && rv >= 0.0 && ru < w && rv < h)) continue;
      const std::size_t i = beliefs.index(static_cast<int>(ru), static_cast<int>(rv));
      if (q.z < landing[i]) landing[i] = q.z;
    }
  }

  BeliefMap out = beliefs;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i].valid || !std::isfinite(landing[i])) continue;
    out[i] = fuse_observation(out[i], 1.0 / landing[i], obs_sigma2, model);
  }
  return out;
}

RefinedDepth extract_refined(const BeliefMap& beliefs, double min_inlier_ratio, double max_sigma) {
  RefinedDepth out{DepthImage(beliefs.width(), beliefs.height()),
                   Image<std::uint8_t>(beliefs.width(), beliefs.height(), 0)};
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    const PixelDepthBelief& b = beliefs[i];
    if (!b.valid) continue;
    const bool keep = b.inlier_ratio() >= min_inlier_ratio && std::sqrt(b.sigma2) <= max_sigma && b.mu > 0.0;
    if (keep)
      assign_positive(out.depth, i, 1.0 / b.mu);
    else
      out.outliers[i] = 1;
  }
  return out;
}

namespace {

void put_f32(std::ostream& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  const std::array<char, 4> bytes{char(bits & 0xff), char((bits >> 8) & 0xff), char((bits >> 16) & 0xff),
                                  char((bits >> 24) & 0xff)};
  out.write(bytes.data(), 4);
}

double get_f32(std::istream& in) {
  std::array<unsigned char, 4> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), 4)) throw ParseError("belief map", 0, "truncated data");
  const std::uint32_t bits = std::uint32_t(bytes[0]) | (std::uint32_t(bytes[1]) << 8) |
                             (std::uint32_t(bytes[2]) << 16) | (std::uint32_t(bytes[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_beliefs(std::ostream& out, const BeliefMap& beliefs) {
  for (const auto& b : beliefs.pixels()) {
    if (!b.valid) {
      for (int n = 0; n < 6; ++n) put_f32(out, 0.0);
      continue;
    }
    for (double x : {b.mu, b.sigma2, b.a, b.b, b.z_min, b.z_max}) put_f32(out, x);
  }
  if (!out) throw Error("failed to write belief map");
}

BeliefMap read_beliefs(std::istream& in, int width, int height) {
  BeliefMap beliefs(width, height);
  for (auto& b : beliefs.pixels()) {
    std::array<double, 6> x{};
    for (auto& value : x) value = get_f32(in);
    b = {x[0], x[1], x[2], x[3], x[4], x[5], x[1] > 0.0};
    if (!b.valid) b = {};
  }
  return beliefs;
}

}  // namespace s2d
