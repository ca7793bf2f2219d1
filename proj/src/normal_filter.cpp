#include <cmath>
#include <vector>

#include "s2d/sparse2dense.hpp"

namespace s2d {

void FilterParams::validate() const {
  if (!(coplanarity >= -1.0 && coplanarity < 1.0)) throw InvalidInput("coplanarity threshold must lie in [-1, 1)");
  if (window < 1) throw InvalidInput("filter window must be >= 1");
  if (iterations < 1) throw InvalidInput("filter iterations must be >= 1");
}

namespace {

constexpr double kParallelRayEps = 1e-9;

// Plane through a source point, intersected with the ray of pixel (u, v). `support` is n . x_j.
std::optional<double> intersect_ray(const CameraIntrinsics& k, double u, double v, double support,
                                    const Eigen::Vector3d& n) {
  const double denom = (u - k.cx) * n.x() / k.fx + (v - k.cy) * n.y() / k.fy + n.z();
  if (std::abs(denom) < kParallelRayEps) return std::nullopt;
  return support / denom;
}

// Sources are pixels with both a valid depth and a valid normal.
struct SourceField {
  std::vector<double> support;
  std::vector<std::uint8_t> usable;
};

SourceField collect_sources(const DepthImage& depth, const NormalImage& normals, const CameraIntrinsics& k) {
  SourceField f;
  f.support.assign(depth.size(), 0.0);
  f.usable.assign(depth.size(), 0);
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const std::size_t i = depth.index(u, v);
      if (!depth.valid(i) || !normals.valid(i)) continue;
      const Vertex x = unproject(k, u, v, depth[i]);
      const Eigen::Vector3d& n = normals[i];
      f.support[i] = n.x() * x.x() + n.y() * x.y() + n.z() * x.z();
      f.usable[i] = 1;
    }
  }
  return f;
}

void check_inputs(const DepthImage& depth, const NormalImage& normals, const CameraIntrinsics& k,
                  const FilterParams& params) {
  params.validate();
  if (!depth.same_shape(normals)) throw InvalidInput("depth and normal images differ in size");
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) throw InvalidInput("focal lengths must be positive");
}

struct Accumulator {
  double weighted = 0.0;
  double weights = 0.0;

  void add(const CameraIntrinsics& k, int u, int v, const Eigen::Vector3d& ni, const Eigen::Vector3d& nj,
           double support, double psi) {
    const double w = nj.dot(ni);
    if (!(w > psi)) return;
    const auto z = intersect_ray(k, u, v, support, nj);
    if (!z || !(*z > 0.0) || !std::isfinite(*z)) return;
    weighted += w * *z;
    weights += w;
  }

  // Pixels that already had depth never lose it, even when every source is rejected.
  void write(DepthImage& out, const DepthImage& in, std::size_t i) const {
    const double z = weights > 0.0 ? weighted / weights : 0.0;
    if (z > 0.0 && std::isfinite(z))
      out.set(i, z);
    else if (in.valid(i))
      out.set(i, in[i]);
  }
};

DepthImage window_pass(const DepthImage& in, const NormalImage& normals, const CameraIntrinsics& k,
                       const FilterParams& params, Parallelism par) {
  const int w = in.width();
  const int h = in.height();
  const SourceField src = collect_sources(in, normals, k);
  const int reach = params.window - 1;
  DepthImage out(w, h);
  parallel_rows(h, par, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = in.index(u, v);
        if (!normals.valid(i)) {
          if (in.valid(i)) out.set(i, in[i]);
          continue;
        }
        Accumulator acc;
        const Eigen::Vector3d& ni = normals[i];
        for (int sv = std::max(0, v - reach); sv <= std::min(h - 1, v + reach); ++sv) {
          for (int su = std::max(0, u - reach); su <= std::min(w - 1, u + reach); ++su) {
            const std::size_t j = in.index(su, sv);
            if (src.usable[j]) acc.add(k, u, v, ni, normals[j], src.support[j], params.coplanarity);
          }
        }
        acc.write(out, in, i);
      }
    }
  });
  return out;
}

DepthImage superpixel_pass(const DepthImage& in, const NormalImage& normals, const CameraIntrinsics& k,
                           const FilterParams& params, const SuperpixelLabels& labels, Parallelism par) {
  const int w = in.width();
  const int h = in.height();
  const SourceField src = collect_sources(in, normals, k);
  // Raster-ordered sources per superpixel, equivalent to scanning the superpixel's bounding box.
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(labels.count));
  for (std::size_t j = 0; j < in.size(); ++j)
    if (src.usable[j]) members[static_cast<std::size_t>(labels[j])].push_back(j);

  DepthImage out(w, h);
  parallel_rows(h, par, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = in.index(u, v);
        if (!normals.valid(i)) {
          if (in.valid(i)) out.set(i, in[i]);
          continue;
        }
        Accumulator acc;
        const Eigen::Vector3d& ni = normals[i];
        for (std::size_t j : members[static_cast<std::size_t>(labels[i])])
          acc.add(k, u, v, ni, normals[j], src.support[j], params.coplanarity);
        acc.write(out, in, i);
      }
    }
  });
  return out;
}

}  // namespace

std::optional<double> coplanar_reproject(const CameraIntrinsics& k, double u, double v,
                                         const Vertex& source, const Eigen::Vector3d& normal) {
  const double support = normal.x() * source.x() + normal.y() * source.y() + normal.z() * source.z();
  return intersect_ray(k, u, v, support, normal);
}

DepthImage normal_guided_filter(const DepthImage& depth, const NormalImage& normals, const CameraIntrinsics& k,
                                const FilterParams& params, Parallelism par) {
  check_inputs(depth, normals, k, params);
  DepthImage current = window_pass(depth, normals, k, params, par);
  for (int it = 1; it < params.iterations; ++it) current = window_pass(current, normals, k, params, par);
  return current;
}

DepthImage normal_guided_filter(const DepthImage& depth, const NormalImage& normals, const CameraIntrinsics& k,
                                const FilterParams& params, const SuperpixelLabels& labels, Parallelism par) {
  check_inputs(depth, normals, k, params);
  if (!depth.same_shape(labels)) throw InvalidInput("superpixel labels differ in size from depth");
  for (auto label : labels.labels.pixels())
    if (label < 0 || label >= labels.count) throw InvalidInput("superpixel label out of range");
  DepthImage current = superpixel_pass(depth, normals, k, params, labels, par);
  for (int it = 1; it < params.iterations; ++it)
    current = superpixel_pass(current, normals, k, params, labels, par);
  return current;
}

}  // namespace s2d
