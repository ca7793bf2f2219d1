#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "s2d/metrics.hpp"
#include "s2d/sparse2dense.hpp"
#include "s2d/synthetic.hpp"

namespace s2d {

enum class InputMode { synthetic, tum };

/// Everything a densify run needs. Text form is a flat "key = value" file; unknown keys are errors.
struct PipelineConfig {
  InputMode mode = InputMode::synthetic;
  std::string scene = "box_room";  ///< fixture name or path to a scene file
  std::string dataset;             ///< TUM sequence directory
  std::string output;              ///< output directory; empty writes nothing

  CameraIntrinsics camera = fixtures::default_camera();
  int frames = 31;             ///< synthetic sequence length
  int keyframe_interval = 10;  ///< every Nth frame becomes a keyframe
  int max_keyframes = 0;       ///< 0 = no limit
  int window_keyframes = 3;    ///< previous keyframes hosting mature points
  int points_per_superpixel = 2;
  std::uint64_t point_seed = 7;

  DensifyParams densify;
  NoiseSpec noise{1.2, 0.05, 0.1, 0.0, 1};
  LossParams loss;

  bool refine = true;
  double sigma_floor = 0.01;     ///< 1/m
  double obs_sigma2 = 0.01;      ///< (1/m)^2
  double min_inlier_ratio = 0.5;
  double max_sigma = 0.1;        ///< 1/m

  int workers = 1;
  bool write_ply = true;

  void validate() const;
};

std::string to_string(InputMode mode);

/// Keys accepted in config files, in canonical order.
const std::vector<std::string>& config_keys();

/// Throws InvalidInput for unknown keys or unparsable values.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const PipelineConfig& config, const std::string& key);

PipelineConfig parse_config(std::string_view text, const std::string& source = "config");
/// Canonical text: every key, one per line, in config_keys() order.
std::string format_config(const PipelineConfig& config);

}  // namespace s2d
