#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s2d/geometry.hpp"

namespace s2d {

/// Sparse point whose depth was optimized by the tracker, expressed in its host keyframe.
struct MaturePoint {
  int host = 0;
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;         ///< optimized depth in the host frame (meters)
  double baseline = 0.0;  ///< maximum relative baseline it was observed from (meters)
};

struct WindowKeyframe {
  int id = 0;
  Pose host_to_new;  ///< maps host-frame points into the new keyframe
};

/// Active keyframes of the optimization window and their mature points.
struct ActiveWindow {
  std::vector<WindowKeyframe> keyframes;
  std::vector<MaturePoint> points;

  /// Throws InvalidInput on invalid poses, unknown hosts, z <= 0 or negative baselines.
  void validate() const;
};

struct WarpedPoint {
  int u = 0;
  int v = 0;
  double z = 0.0;          ///< depth in the new keyframe
  double baseline = 0.0;
  std::size_t source = 0;  ///< index into ActiveWindow::points
};

struct WarpResult {
  DepthImage depth;                 ///< sparse optimized depth of the new keyframe
  std::vector<WarpedPoint> points;  ///< z-buffer survivors, in source order
  std::size_t dropped = 0;          ///< behind the camera or outside the image
  std::size_t occluded = 0;         ///< lost a z-buffer conflict
};

/// Moves every point into the new keyframe: project(R unproject(u, v, z) + t). Pixels are rounded
/// to nearest (half away from zero); a pixel hit twice keeps the smaller depth, earlier point on ties.
WarpResult warp_points(const ActiveWindow& window, const CameraIntrinsics& k);

/// One term of the scale-correction average.
struct ScaleEvidence {
  int u = 0;
  int v = 0;
  double z_star = 0.0;    ///< optimized depth at the pixel
  double baseline = 0.0;
  double z_prior = 0.0;   ///< prior depth at the same pixel
};

/// Pairs warped points with the prior depth at their landing pixel; points over invalid prior
/// pixels are skipped.
std::vector<ScaleEvidence> gather_scale_evidence(const WarpResult& warp, const DepthImage& prior);

struct ScaleCorrection {
  DepthImage corrected;
  double factor = 1.0;
};

/// factor = sum(B_j z*_j / z_j) / sum(B_j), applied to every valid prior pixel.
/// Throws NoCorrectionEvidence for an empty set or a zero total baseline.
ScaleCorrection scale_correct(const DepthImage& prior, std::span<const ScaleEvidence> evidence);

/// Prior with the optimized sparse depths written over it.
DepthImage overlay_optimized(const DepthImage& corrected, const DepthImage& optimized);

}  // namespace s2d
