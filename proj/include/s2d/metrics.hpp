#pragma once

#include <string>
#include <vector>

#include "s2d/geometry.hpp"

namespace s2d {

struct TimedPose {
  double timestamp = 0.0;
  Pose pose;  ///< camera-to-world
};

/// Time-ordered camera poses; timestamps must be strictly increasing.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TimedPose> poses);

  const std::vector<TimedPose>& poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }

  /// Index of the pose nearest to t within max_dt, or -1.
  std::ptrdiff_t nearest(double t, double max_dt) const;

 private:
  std::vector<TimedPose> poses_;
};

enum class Alignment { none, rigid, similarity };

Alignment parse_alignment(const std::string& name);
std::string to_string(Alignment alignment);

/// Timestamp association window (seconds).
inline constexpr double kAssociationWindow = 0.02;

struct AteResult {
  double rmse = 0.0;
  std::size_t pairs = 0;
  Eigen::Matrix4d alignment = Eigen::Matrix4d::Identity();  ///< maps estimate into ground truth
};

/// Absolute trajectory error: nearest-timestamp association, optional closed-form alignment of
/// the estimated positions onto the ground truth, RMSE of the remaining position differences.
/// Throws InvalidInput with fewer than two associated pairs.
AteResult ate(const Trajectory& estimate, const Trajectory& truth, Alignment alignment = Alignment::rigid,
              double max_dt = kAssociationWindow);

inline double ate_rmse(const Trajectory& estimate, const Trajectory& truth, Alignment alignment = Alignment::rigid) {
  return ate(estimate, truth, alignment).rmse;
}

/// Percentage of valid ground-truth pixels whose estimate is within 10% of the truth.
/// Pixels missing from the estimate count as wrong. Throws InvalidInput without valid truth.
double pcd(const DepthImage& estimate, const DepthImage& truth);

double huber(double residual, double delta);
double huber_derivative(double residual, double delta);
inline double l1(double residual) { return residual < 0.0 ? -residual : residual; }

struct LossParams {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.05;
  double huber_delta_rel = 0.1;  ///< Huber threshold as a fraction of the term's largest |residual|
  double baseline = kVirtualBaseline;
  double f_train = 0.0;  ///< focal length turning z_re into D_re; 0 means k.fx

  void validate() const;
};

struct LossBreakdown {
  double disparity_supervised = 0.0;  ///< Huber(D_hat - D_gt)
  double normal_supervised = 0.0;     ///< Huber(N_hat - N_gt)
  double disparity_coupled = 0.0;     ///< Huber(D_re - D_gt), D_re from z_re
  double normal_coupled = 0.0;        ///< L1(N_re - N_hat)
  double total = 0.0;
};

/// Training objective used here as a quality measure. Each term is the mean over the pixels where
/// both of its operands are valid (normal residuals summed over components); the Huber threshold is
/// chosen per term.
LossBreakdown coupled_loss(const DisparityImage& d_hat, const NormalImage& n_hat, const DisparityImage& d_gt,
                           const NormalImage& n_gt, const DepthImage& z_re, const NormalImage& n_re,
                           const CameraIntrinsics& k, const LossParams& params = {});

}  // namespace s2d
