#include "s2d/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

namespace s2d {

Trajectory::Trajectory(std::vector<TimedPose> poses) : poses_(std::move(poses)) {
  for (std::size_t i = 1; i < poses_.size(); ++i)
    if (!(poses_[i].timestamp > poses_[i - 1].timestamp))
      throw InvalidInput("trajectory timestamps must be strictly increasing");
}

std::ptrdiff_t Trajectory::nearest(double t, double max_dt) const {
  auto it = std::lower_bound(poses_.begin(), poses_.end(), t,
                             [](const TimedPose& p, double value) { return p.timestamp < value; });
  std::ptrdiff_t best = -1;
  double best_dt = max_dt;
  for (auto cand : {it, it == poses_.begin() ? it : std::prev(it)}) {
    if (cand == poses_.end()) continue;
    const double dt = std::abs(cand->timestamp - t);
    if (dt <= best_dt && (best < 0 || dt < best_dt)) {
      best_dt = dt;
      best = cand - poses_.begin();
    }
  }
  return best;
}

Alignment parse_alignment(const std::string& name) {
  if (name == "none") return Alignment::none;
  if (name == "rigid" || name == "se3") return Alignment::rigid;
  if (name == "similarity" || name == "sim3" || name == "rigid+scale") return Alignment::similarity;
  throw InvalidInput("unknown alignment mode '" + name + "'");
}

std::string to_string(Alignment alignment) {
  switch (alignment) {
    case Alignment::none: return "none";
    case Alignment::rigid: return "rigid";
    case Alignment::similarity: return "similarity";
  }
  return "?";
}

AteResult ate(const Trajectory& estimate, const Trajectory& truth, Alignment alignment, double max_dt) {
  std::vector<Eigen::Vector3d> est, gt;
  for (const auto& p : estimate.poses()) {
    const auto j = truth.nearest(p.timestamp, max_dt);
    if (j < 0) continue;
    est.push_back(p.pose.t);
    gt.push_back(truth.poses()[static_cast<std::size_t>(j)].pose.t);
  }
  if (est.size() < 2) throw InvalidInput("ATE needs at least two associated poses");

  const auto n = static_cast<Eigen::Index>(est.size());
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = est[static_cast<std::size_t>(i)];
    dst.col(i) = gt[static_cast<std::size_t>(i)];
  }

  AteResult result;
  result.pairs = est.size();
  if (alignment != Alignment::none)
    result.alignment = Eigen::umeyama(src, dst, alignment == Alignment::similarity);
  const Eigen::Matrix3d A = result.alignment.topLeftCorner<3, 3>();
  const Eigen::Vector3d b = result.alignment.topRightCorner<3, 1>();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum += (A * src.col(i) + b - dst.col(i)).squaredNorm();
  result.rmse = std::sqrt(sum / double(n));
  return result;
}

double pcd(const DepthImage& estimate, const DepthImage& truth) {
  if (!estimate.same_shape(truth)) throw InvalidInput("estimate and ground truth differ in size");
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth.valid(i)) continue;
    ++total;
    if (estimate.valid(i) && std::abs(estimate[i] - truth[i]) < 0.1 * truth[i]) ++correct;
  }
  if (total == 0) throw InvalidInput("ground truth has no valid pixel");
  return 100.0 * double(correct) / double(total);
}

double huber(double residual, double delta) {
  const double r = std::abs(residual);
  return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
}

double huber_derivative(double residual, double delta) {
  if (std::abs(residual) <= delta) return residual;
  return residual > 0.0 ? delta : -delta;
}

void LossParams::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) throw InvalidInput("loss weights must be non-negative");
  if (!(huber_delta_rel > 0.0)) throw InvalidInput("relative Huber threshold must be positive");
  if (!(baseline > 0.0)) throw InvalidInput("virtual baseline must be positive");
  if (!(f_train >= 0.0)) throw InvalidInput("training focal length must be non-negative");
}

namespace {

// Mean Huber loss over per-pixel residual vectors, threshold relative to the largest |component|.
double mean_huber(const std::vector<double>& residuals, std::size_t pixels, double rel) {
  if (pixels == 0) return 0.0;
  double largest = 0.0;
  for (double r : residuals) largest = std::max(largest, std::abs(r));
  if (largest == 0.0) return 0.0;
  const double delta = rel * largest;
  double sum = 0.0;
  for (double r : residuals) sum += huber(r, delta);
  return sum / double(pixels);
}

}  // namespace

LossBreakdown coupled_loss(const DisparityImage& d_hat, const NormalImage& n_hat, const DisparityImage& d_gt,
                           const NormalImage& n_gt, const DepthImage& z_re, const NormalImage& n_re,
                           const CameraIntrinsics& k, const LossParams& params) {
  params.validate();
  if (!d_hat.same_shape(n_hat) || !d_hat.same_shape(d_gt) || !d_hat.same_shape(n_gt) || !d_hat.same_shape(z_re) ||
      !d_hat.same_shape(n_re))
    throw InvalidInput("loss inputs differ in size");

  const DisparityImage d_re = depth_to_disparity(z_re, params.f_train > 0.0 ? params.f_train : k.fx, params.baseline);

  std::vector<double> disp_sup, norm_sup, disp_cpl;
  std::size_t n_disp_sup = 0, n_norm_sup = 0, n_disp_cpl = 0, n_norm_cpl = 0;
  double norm_cpl_sum = 0.0;
  for (std::size_t i = 0; i < d_hat.size(); ++i) {
    if (d_hat.valid(i) && d_gt.valid(i)) {
      disp_sup.push_back(d_hat[i] - d_gt[i]);
      ++n_disp_sup;
    }
    if (n_hat.valid(i) && n_gt.valid(i)) {
      const Eigen::Vector3d r = n_hat[i] - n_gt[i];
      norm_sup.insert(norm_sup.end(), {r.x(), r.y(), r.z()});
      ++n_norm_sup;
    }
    if (d_re.valid(i) && d_gt.valid(i)) {
      disp_cpl.push_back(d_re[i] - d_gt[i]);
      ++n_disp_cpl;
    }
    if (n_re.valid(i) && n_hat.valid(i)) {
      const Eigen::Vector3d r = n_re[i] - n_hat[i];
      norm_cpl_sum += l1(r.x()) + l1(r.y()) + l1(r.z());
      ++n_norm_cpl;
    }
  }

  LossBreakdown out;
  out.disparity_supervised = mean_huber(disp_sup, n_disp_sup, params.huber_delta_rel);
  out.normal_supervised = mean_huber(norm_sup, n_norm_sup, params.huber_delta_rel);
  out.disparity_coupled = mean_huber(disp_cpl, n_disp_cpl, params.huber_delta_rel);
  out.normal_coupled = n_norm_cpl ? norm_cpl_sum / double(n_norm_cpl) : 0.0;
  out.total = params.alpha * (out.disparity_supervised + out.normal_supervised) +
              params.beta * out.disparity_coupled + params.gamma * out.normal_coupled;
  return out;
}

}  // namespace s2d
