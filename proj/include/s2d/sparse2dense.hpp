#pragma once

#include <optional>

#include "s2d/geometry.hpp"
#include "s2d/superpixel.hpp"

namespace s2d {

/// Parameters of the normal-guided depth filter.
struct FilterParams {
  double coplanarity = 0.95;  ///< psi: minimum normal inner product for a source to count
  int window = 5;             ///< sigma: sources satisfy |u_i - u_j| < sigma and |v_i - v_j| < sigma
  int iterations = 1;         ///< repeated applications per call

  void validate() const;
};

struct BilateralParams {
  int radius = 3;               ///< half-extent of the square window (7x7 by default)
  double spatial_sigma = 3.0;   ///< pixels
  double range_sigma = 10.0;    ///< Euclidean RGB distance, 0-255 units

  void validate() const;
};

/// Depth at pixel (u, v) of the plane through `source` with unit normal `normal`:
///   z = n . x_j / ((u - cx) n_x / fx + (v - cy) n_y / fy + n_z)
/// Returns nullopt when the viewing ray is (nearly) parallel to the plane.
std::optional<double> coplanar_reproject(const CameraIntrinsics& k, double u, double v,
                                         const Vertex& source, const Eigen::Vector3d& normal);

/// Normal-guided filter over a square window (criterion C). Each pixel i with a valid normal
/// becomes the weighted mean sum(n_j.n_i z_ij) / sum(n_j.n_i) over sources j that have valid
/// depth and normal, lie in the window and satisfy n_j.n_i > psi. The pixel itself is one of the
/// sources when its depth is valid. Pixels without a valid normal keep their input depth; pixels
/// without an admissible source stay invalid. Sources are accumulated in raster order.
DepthImage normal_guided_filter(const DepthImage& depth, const NormalImage& normals,
                                const CameraIntrinsics& k, const FilterParams& params,
                                Parallelism par = {});

/// Superpixel variant (criterion C~): the window is replaced by membership in the same superpixel.
DepthImage normal_guided_filter(const DepthImage& depth, const NormalImage& normals,
                                const CameraIntrinsics& k, const FilterParams& params,
                                const SuperpixelLabels& labels, Parallelism par = {});

/// Joint bilateral filter on depth guided by color. Valid pixels are smoothed and invalid pixels
/// are filled from valid neighbours; a pixel stays invalid only if no neighbour has weight > 0.
DepthImage bilateral_depth_filter(const DepthImage& depth, const ColorImage& image,
                                  const BilateralParams& params, Parallelism par = {});

struct DensifyParams {
  FilterParams filter;
  SuperpixelParams superpixel;
  BilateralParams bilateral;
  bool bilateral_step = true;  ///< step 2 can be disabled to isolate the normal-guided steps
};

/// All intermediate products of the three-step densification.
struct DensifyStages {
  SuperpixelLabels labels;
  DepthImage superpixel_filled;  ///< step 1: normal-guided, same-superpixel sources
  DepthImage bilateral;          ///< step 2: color bilateral (copy of step 1 when disabled)
  DepthImage dense;              ///< step 3: normal-guided, square window
};

/// Sparse-to-dense reconstruction. Throws NoSeeds when `sparse` has no valid pixel.
DensifyStages sparse_to_dense_stages(const DepthImage& sparse, const NormalImage& normals,
                                     const ColorImage& image, const CameraIntrinsics& k,
                                     const DensifyParams& params = {}, Parallelism par = {});

/// Same as above with precomputed superpixels.
DensifyStages sparse_to_dense_stages(const DepthImage& sparse, const NormalImage& normals,
                                     const ColorImage& image, const CameraIntrinsics& k,
                                     const SuperpixelLabels& labels, const DensifyParams& params = {},
                                     Parallelism par = {});

inline DepthImage sparse_to_dense(const DepthImage& sparse, const NormalImage& normals,
                                  const ColorImage& image, const CameraIntrinsics& k,
                                  const DensifyParams& params = {}, Parallelism par = {}) {
  return sparse_to_dense_stages(sparse, normals, image, k, params, par).dense;
}

}  // namespace s2d
