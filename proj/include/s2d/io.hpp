#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "s2d/metrics.hpp"
#include "s2d/refinement.hpp"
#include "s2d/scale_correction.hpp"

namespace s2d {

namespace fs = std::filesystem;

/// TUM RGB-D depth convention: 16-bit value / 5000 = meters, 0 = missing.
inline constexpr double kTumDepthScale = 5000.0;

Image<std::uint16_t> read_png16(const fs::path& path);
void write_png16(const fs::path& path, const Image<std::uint16_t>& image);
/// Any PNG flavour converted to 8-bit RGB (alpha dropped, gray replicated).
ColorImage read_color_png(const fs::path& path);
void write_color_png(const fs::path& path, const ColorImage& image);

/// Quantizes to round(z * scale); depths that do not fit in 16 bits become 0 (missing).
Image<std::uint16_t> quantize_depth(const DepthImage& depth, double scale = kTumDepthScale);
DepthImage dequantize_depth(const Image<std::uint16_t>& raw, double scale = kTumDepthScale);

inline DepthImage read_depth_png(const fs::path& path, double scale = kTumDepthScale) {
  return dequantize_depth(read_png16(path), scale);
}
inline void write_depth_png(const fs::path& path, const DepthImage& depth, double scale = kTumDepthScale) {
  write_png16(path, quantize_depth(depth, scale));
}

/// ASCII PLY 1.0 with x y z (float, world frame) and red green blue (uchar), one vertex per valid pixel.
void write_ply(std::ostream& out, const DepthImage& depth, const ColorImage& color, const CameraIntrinsics& k,
               const Pose& camera_to_world);
void export_ply(const fs::path& path, const DepthImage& depth, const ColorImage& color, const CameraIntrinsics& k,
                const Pose& camera_to_world);

/// TUM trajectory format: "timestamp tx ty tz qx qy qz qw" per line, '#' comments.
Trajectory read_trajectory(std::istream& in, const std::string& source = "trajectory");
Trajectory read_trajectory(const fs::path& path);
void write_trajectory(std::ostream& out, const Trajectory& trajectory);

/// Mature points, one per line: "host_id u v z B_rel".
std::vector<MaturePoint> read_points(std::istream& in, const std::string& source = "points");
void write_points(std::ostream& out, const std::vector<MaturePoint>& points);
/// Host poses, one per line: "host_id" followed by the 3x4 row-major [R|t] mapping host into the new keyframe.
std::vector<WindowKeyframe> read_window_poses(std::istream& in, const std::string& source = "poses");
void write_window_poses(std::ostream& out, const std::vector<WindowKeyframe>& keyframes);
ActiveWindow read_active_window(const fs::path& points, const fs::path& poses);

struct TumFrame {
  double timestamp = 0.0;  ///< rgb timestamp
  double depth_timestamp = 0.0;
  fs::path rgb;
  fs::path depth;
};

struct TumSequence {
  fs::path root;
  std::vector<TumFrame> frames;  ///< rgb/depth pairs within the association window
  Trajectory groundtruth;
};

struct TumImages {
  ColorImage color;
  DepthImage depth;
};

/// Reads rgb.txt / depth.txt when present (otherwise lists rgb/ and depth/ and takes timestamps
/// from file names) plus groundtruth.txt. Throws ParseError on malformed input.
TumSequence load_tum_sequence(const fs::path& dir, double max_dt = kAssociationWindow);
TumImages load_tum_frame(const TumFrame& frame);

/// Writes a sequence in TUM layout: rgb/, depth/, rgb.txt, depth.txt, groundtruth.txt.
void write_tum_sequence(const fs::path& dir, const std::vector<double>& timestamps,
                        const std::vector<TumImages>& frames, const Trajectory& groundtruth);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace s2d
