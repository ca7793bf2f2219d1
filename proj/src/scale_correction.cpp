#include "s2d/scale_correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace s2d {

void ActiveWindow::validate() const {
  std::unordered_set<int> ids;
  for (const auto& kf : keyframes) {
    kf.host_to_new.validate(1e-6);
    ids.insert(kf.id);
  }
  for (const auto& p : points) {
    if (!ids.count(p.host)) throw InvalidInput("point refers to unknown host keyframe " + std::to_string(p.host));
    if (!(p.z > 0.0) || !std::isfinite(p.z)) throw InvalidInput("mature point depth must be positive");
    if (!(p.baseline >= 0.0)) throw InvalidInput("relative baseline must be non-negative");
  }
}

WarpResult warp_points(const ActiveWindow& window, const CameraIntrinsics& k) {
  window.validate();
  k.validate();
  WarpResult result;
  result.depth = DepthImage(k.width, k.height);
  std::vector<std::ptrdiff_t> owner(result.depth.size(), -1);

  for (std::size_t idx = 0; idx < window.points.size(); ++idx) {
    const MaturePoint& p = window.points[idx];
    const Pose* pose = nullptr;
    for (const auto& kf : window.keyframes)
      if (kf.id == p.host) pose = &kf.host_to_new;
    const Vertex moved = (*pose) * unproject(k, p.u, p.v, p.z);
    if (!(moved.z() > 0.0)) {
      ++result.dropped;
      continue;
    }
    const PixelDepth proj = project(k, moved);
    const double ru = std::round(proj.u);
    const double rv = std::round(proj.v);
    if (!(ru >= 0.0 && rv >= 0.0 && ru < k.width && rv < k.height)) {
      ++result.dropped;
      continue;
    }
    const int u = static_cast<int>(ru);
    const int v = static_cast<int>(rv);
    const std::size_t i = result.depth.index(u, v);
    if (owner[i] >= 0) {
      ++result.occluded;
      auto& held = result.points[static_cast<std::size_t>(owner[i])];
      if (!(proj.z < held.z)) continue;
      held = {u, v, proj.z, p.baseline, idx};
      result.depth.set(i, proj.z);
      continue;
    }
    owner[i] = static_cast<std::ptrdiff_t>(result.points.size());
    result.points.push_back({u, v, proj.z, p.baseline, idx});
    result.depth.set(i, proj.z);
  }
  std::sort(result.points.begin(), result.points.end(),
            [](const WarpedPoint& a, const WarpedPoint& b) { return a.source < b.source; });
  return result;
}

std::vector<ScaleEvidence> gather_scale_evidence(const WarpResult& warp, const DepthImage& prior) {
  std::vector<ScaleEvidence> evidence;
  for (const auto& p : warp.points) {
    if (!prior.contains(p.u, p.v) || !prior.valid(p.u, p.v)) continue;
    evidence.push_back({p.u, p.v, p.z, p.baseline, prior(p.u, p.v)});
  }
  return evidence;
}

ScaleCorrection scale_correct(const DepthImage& prior, std::span<const ScaleEvidence> evidence) {
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& e : evidence) {
    if (!(e.z_prior > 0.0) || !(e.z_star > 0.0) || !(e.baseline >= 0.0))
      throw InvalidInput("scale evidence needs positive depths and a non-negative baseline");
    weighted += e.baseline * (e.z_star / e.z_prior);
    total += e.baseline;
  }
  if (evidence.empty() || !(total > 0.0)) throw NoCorrectionEvidence();
  const double factor = weighted / total;
  if (!std::isfinite(factor) || !(factor > 0.0)) throw NumericalFailure("scale correction factor is not finite");

  ScaleCorrection out{DepthImage(prior.width(), prior.height()), factor};
  for (std::size_t i = 0; i < prior.size(); ++i)
    if (prior.valid(i)) assign_positive(out.corrected, i, prior[i] * factor);
  return out;
}

DepthImage overlay_optimized(const DepthImage& corrected, const DepthImage& optimized) {
  if (!corrected.same_shape(optimized)) throw InvalidInput("overlay images differ in size");
  DepthImage out = corrected;
  for (std::size_t i = 0; i < optimized.size(); ++i)
    if (optimized.valid(i)) out.set(i, optimized[i]);
  return out;
}

}  // namespace s2d
