#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "s2d/image.hpp"
#include "s2d/parallel.hpp"

namespace s2d {

/// Default virtual stereo baseline (meters) used to turn regressed disparity into depth.
inline constexpr double kVirtualBaseline = 0.1;

/// Pinhole intrinsics plus the image size they apply to.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InvalidInput unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;

  /// Intrinsics for an image scaled by `factor` in both dimensions.
  CameraIntrinsics scaled(double factor) const;

  bool operator==(const CameraIntrinsics&) const = default;
};

using Vertex = Eigen::Vector3d;

/// Rigid transform x' = R x + t.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }
  /// From a translation and a (not necessarily normalized) quaternion.
  static Pose from_quaternion(const Eigen::Vector3d& translation, const Eigen::Quaterniond& q);

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return R * p + t; }
  Pose operator*(const Pose& other) const { return {R * other.R, R * other.t + t}; }
  Pose inverse() const { return {R.transpose(), -(R.transpose() * t)}; }

  /// Throws InvalidInput unless R is orthonormal with det +1 (within tol).
  void validate(double tol = 1e-9) const;
};

struct PixelDepth {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

/// V(u, v) = [z (u - cx) / fx, z (v - cy) / fy, z]. Throws InvalidInput for z <= 0 or non-finite z.
Vertex unproject(const CameraIntrinsics& k, double u, double v, double z);

/// Inverse of unproject; returns continuous pixel coordinates. Throws BehindCamera for p.z <= 0.
PixelDepth project(const CameraIntrinsics& k, const Vertex& p);

/// Rescales a depth predicted for a camera with focal length f_train to one with f_test.
DepthImage focal_adapt(const DepthImage& depth, double f_train, double f_test);

/// z = B f_train / d. Non-positive disparities become invalid pixels.
DepthImage disparity_to_depth(const DisparityImage& disparity, double f_train,
                              double baseline = kVirtualBaseline);

/// d = B f_train / z.
DisparityImage depth_to_disparity(const DepthImage& depth, double f_train,
                                  double baseline = kVirtualBaseline);

/// Normal from the cross product of forward differences of back-projected vertices:
///   N(u, v) = normalize((V(u+1, v) - V(u, v)) x (V(u, v+1) - V(u, v)))
/// Normals point away from the camera ((0, 0, 1) for a fronto-parallel plane). The last row and
/// column, pixels whose stencil touches an invalid depth, and degenerate cross products are invalid.
NormalImage depth_to_normal(const DepthImage& depth, const CameraIntrinsics& k, Parallelism par = {});

}  // namespace s2d
