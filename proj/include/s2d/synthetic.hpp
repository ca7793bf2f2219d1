#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "s2d/geometry.hpp"
#include "s2d/superpixel.hpp"

namespace s2d {

/// Planar polygon n . x = offset (world frame). Polygon vertices lie in the plane, in order.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  std::vector<Eigen::Vector3d> polygon;
  Rgb color;
};

/// Piecewise-planar scene with analytic depth and normals.
struct PlanarScene {
  std::string name;
  std::vector<Plane> planes;
  Eigen::Vector3d extent_min = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d extent_max = Eigen::Vector3d::Constant(1.0);

  /// Throws InvalidInput on non-unit normals, degenerate or off-plane polygons.
  void validate() const;
  bool inside(const Eigen::Vector3d& p) const;
};

struct RenderedView {
  DepthImage depth;
  NormalImage normals;        ///< camera frame, oriented away from the camera (n . V > 0)
  ColorImage color;
  Image<std::int32_t> plane;  ///< index of the plane hit, -1 for misses
};

/// Ray casts the scene from camera_to_world. Misses are invalid. Throws InvalidInput when the
/// camera center lies outside the scene extent.
RenderedView render(const PlanarScene& scene, const Pose& camera_to_world, const CameraIntrinsics& k,
                    Parallelism par = {});

/// Synthetic prediction error. Neutral values (scale 1, everything else 0) change nothing.
struct NoiseSpec {
  double global_scale = 1.0;        ///< multiplicative depth bias
  double gaussian_rel = 0.0;        ///< per-pixel relative depth std
  double dropout = 0.0;             ///< probability of invalidating a pixel
  double normal_angle_noise = 0.0;  ///< std of the random normal rotation (radians)
  std::uint64_t seed = 0;

  void validate() const;
};

struct CorruptedView {
  DepthImage depth;
  NormalImage normals;
};

/// Scale bias, then relative Gaussian noise, then dropout on depth (one raster pass, one stream);
/// normals rotated about a random axis by a Gaussian angle (separate stream). Deterministic in seed.
CorruptedView corrupt(const DepthImage& depth, const NormalImage& normals, const NoiseSpec& spec);

/// Up to per_superpixel uniformly chosen valid pixels per superpixel.
DepthImage sample_sparse(const DepthImage& depth, const SuperpixelLabels& labels, int per_superpixel,
                         std::uint64_t seed);

/// Keeps round(fraction * valid) valid pixels chosen uniformly without replacement.
DepthImage sample_uniform(const DepthImage& depth, double fraction, std::uint64_t seed);

/// Text form: comment lines start with '#'.
///   name <identifier>
///   extent xmin ymin zmin xmax ymax zmax
///   plane nx ny nz d <count> x1 y1 z1 ... xN yN zN r g b
std::string format_scene(const PlanarScene& scene);
PlanarScene parse_scene(std::string_view text, const std::string& source = "scene");

namespace fixtures {

/// Camera frame convention: x right, y down, z forward.
PlanarScene box_room();       ///< floor, ceiling, back and side walls
PlanarScene desk_on_floor();  ///< floor, desk top (parallel to floor) and the desk's front face
PlanarScene two_wall_crease();///< two perpendicular walls meeting in a vertical crease

std::vector<std::string> names();
PlanarScene by_name(const std::string& name);

/// Default camera_to_world for viewing a fixture.
Pose default_view(const std::string& name);
/// Smooth camera path around the default view: frame i of n.
Pose trajectory_pose(const std::string& name, int frame, int frames);
/// Same path around an arbitrary base view.
Pose trajectory_pose(const Pose& base, int frame, int frames);

CameraIntrinsics default_camera();  ///< 320x240, f = 250

}  // namespace fixtures

}  // namespace s2d
