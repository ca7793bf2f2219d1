#pragma once

#include <string>
#include <vector>

#include "s2d/config.hpp"
#include "s2d/metrics.hpp"

namespace s2d {

struct KeyframeReport {
  int keyframe = 0;
  int frame = 0;
  double timestamp = 0.0;
  std::size_t sparse_points = 0;  ///< valid pixels of the warped optimized depth
  std::size_t dropped_points = 0;
  std::size_t scale_points = 0;   ///< warped points that landed on a valid prior pixel
  double scale_factor = 1.0;
  double pcd_prior = 0.0;
  double pcd_corrected = 0.0;      ///< scale-corrected prior with optimized points overlaid
  double pcd_dense = 0.0;
  double pcd_corrected_refined = 0.0;
  double pcd_dense_refined = 0.0;
  double density_corrected_refined = 0.0;  ///< fraction of ground-truth pixels with a value
  double density_dense_refined = 0.0;
  LossBreakdown loss;
};

struct PipelineReport {
  std::vector<KeyframeReport> keyframes;
  double ate_rmse = 0.0;  ///< keyframe poses vs ground truth (tracking is replaced by ground truth)
  std::size_t ate_pairs = 0;
};

/// Runs scale correction, sparse-to-dense and keyframe refinement over the configured sequence and,
/// when config.output is set, writes depth PNGs, PLY clouds, metrics.txt and report.txt there.
PipelineReport run_pipeline(const PipelineConfig& config);

/// Machine-readable "name=value" lines.
std::string format_metrics(const PipelineReport& report);
/// Human-readable table.
std::string format_report(const PipelineConfig& config, const PipelineReport& report);

}  // namespace s2d
