#include "s2d/geometry.hpp"

#include <cmath>
#include <string>

namespace s2d {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw InvalidInput("focal lengths must be positive and finite");
  if (width <= 0 || height <= 0) throw InvalidInput("image size must be positive");
  if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height))
    throw InvalidInput("principal point must lie inside the image");
}

CameraIntrinsics CameraIntrinsics::scaled(double factor) const {
  CameraIntrinsics k = *this;
  k.fx *= factor;
  k.fy *= factor;
  k.cx *= factor;
  k.cy *= factor;
  k.width = static_cast<int>(std::lround(width * factor));
  k.height = static_cast<int>(std::lround(height * factor));
  return k;
}

Pose Pose::from_quaternion(const Eigen::Vector3d& translation, const Eigen::Quaterniond& q) {
  return {q.normalized().toRotationMatrix(), translation};
}

void Pose::validate(double tol) const {
  if (!R.allFinite() || !t.allFinite()) throw InvalidInput("pose contains non-finite values");
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tol) throw InvalidInput("rotation is not orthonormal (|R^T R - I| = " + std::to_string(ortho) + ")");
  if (std::abs(R.determinant() - 1.0) > tol) throw InvalidInput("rotation determinant is not +1");
}

Vertex unproject(const CameraIntrinsics& k, double u, double v, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw InvalidInput("unproject requires a positive finite depth");
  return {z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z};
}

PixelDepth project(const CameraIntrinsics& k, const Vertex& p) {
  if (!(p.z() > 0.0)) throw BehindCamera("point is behind the camera");
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

DepthImage focal_adapt(const DepthImage& depth, double f_train, double f_test) {
  if (!(f_train > 0.0) || !(f_test > 0.0)) throw InvalidInput("focal lengths must be positive");
  DepthImage out(depth.width(), depth.height());
  const double ratio = f_test / f_train;
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (depth.valid(i)) assign_positive(out, i, depth[i] * ratio);
  return out;
}

namespace {

template <typename Out, typename In>
Out reciprocal_scaled(const In& in, double f_train, double baseline) {
  if (!(f_train > 0.0)) throw InvalidInput("f_train must be positive");
  if (!(baseline > 0.0)) throw InvalidInput("baseline must be positive");
  Out out(in.width(), in.height());
  const double bf = baseline * f_train;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in.valid(i) && in[i] > 0.0) assign_positive(out, i, bf / in[i]);
  return out;
}

}  // namespace

DepthImage disparity_to_depth(const DisparityImage& disparity, double f_train, double baseline) {
  return reciprocal_scaled<DepthImage>(disparity, f_train, baseline);
}

DisparityImage depth_to_disparity(const DepthImage& depth, double f_train, double baseline) {
  return reciprocal_scaled<DisparityImage>(depth, f_train, baseline);
}

NormalImage depth_to_normal(const DepthImage& depth, const CameraIntrinsics& k, Parallelism par) {
  const int w = depth.width();
  const int h = depth.height();
  if (w < 2 || h < 2) throw InvalidInput("depth_to_normal needs at least a 2x2 image");
  NormalImage normals(w, h);
  parallel_rows(h - 1, par, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v) {
      for (int u = 0; u + 1 < w; ++u) {
        if (!depth.valid(u, v) || !depth.valid(u + 1, v) || !depth.valid(u, v + 1)) continue;
        const Vertex p = unproject(k, u, v, depth(u, v));
        const Vertex right = unproject(k, u + 1, v, depth(u + 1, v));
        const Vertex down = unproject(k, u, v + 1, depth(u, v + 1));
        const Eigen::Vector3d n = (right - p).cross(down - p);
        const double norm = n.norm();
        if (norm < 1e-12 || !std::isfinite(norm)) continue;
        normals.set(u, v, n / norm);
      }
    }
  });
  return normals;
}

}  // namespace s2d
