#pragma once

#include <iosfwd>

#include "s2d/geometry.hpp"

namespace s2d {

/// Per-pixel inverse-depth belief: Gaussian N(mu, sigma2) for the depth of an inlier times a
/// Beta(a, b) over the inlier ratio. Outliers are uniform over inverse depth in [1/z_max, 1/z_min].
struct PixelDepthBelief {
  double mu = 0.0;      ///< inverse depth (1/m)
  double sigma2 = 0.0;  ///< (1/m)^2
  double a = 0.0;
  double b = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
  bool valid = false;

  double inlier_ratio() const { return a / (a + b); }
  /// Density of the uniform outlier component over inverse depth.
  double outlier_density() const { return 1.0 / (1.0 / z_min - 1.0 / z_max); }

  bool operator==(const PixelDepthBelief&) const = default;
};

using BeliefMap = Image<PixelDepthBelief>;

/// Beta pseudo-counts every fresh belief starts with.
inline constexpr double kInitialBetaCount = 10.0;

enum class MixtureModel {
  full,          ///< Gaussian inlier + uniform outlier, moment-matched back to Gaussian x Beta
  gaussian_only  ///< outlier weight forced to zero: plain precision-weighted fusion
};

/// mu = 1/z_dense, sigma = max(|1/z_dense - 1/z_cor|, sigma_floor), a = b = 10, and a depth
/// support spanning the valid z_dense range widened by 10% on both ends. Where z_cor has no value
/// the standard deviation falls back to a sixth of the inverse-depth support.
BeliefMap init_beliefs(const DepthImage& dense, const DepthImage& corrected, double sigma_floor);

/// Bayesian update with an inverse-depth observation, moment-matched back to Gaussian x Beta.
/// Non-finite observations leave the Gaussian untouched and count one outlier.
PixelDepthBelief fuse_observation(const PixelDepthBelief& belief, double obs_mu, double obs_sigma2,
                                  MixtureModel model = MixtureModel::full);

/// Warps every valid pixel of another keyframe's depth into this keyframe and fuses it at the
/// landing pixel. When several pixels land together the nearest one wins, earlier raster order on ties.
BeliefMap observe_from_keyframe(const BeliefMap& beliefs, const DepthImage& other, const Pose& other_to_this,
                                const CameraIntrinsics& k, double obs_sigma2,
                                MixtureModel model = MixtureModel::full);

struct RefinedDepth {
  DepthImage depth;
  Image<std::uint8_t> outliers;  ///< 1 where a valid belief failed a gate
};

/// Emits 1/mu where a/(a+b) >= min_inlier_ratio and sqrt(sigma2) <= max_sigma.
RefinedDepth extract_refined(const BeliefMap& beliefs, double min_inlier_ratio, double max_sigma);

/// Flat checkpoint: per pixel (mu, sigma2, a, b, z_min, z_max) as little-endian float32, row-major.
/// Invalid beliefs are stored as six zeros.
void write_beliefs(std::ostream& out, const BeliefMap& beliefs);
BeliefMap read_beliefs(std::istream& in, int width, int height);

}  // namespace s2d
