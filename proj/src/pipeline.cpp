#include "s2d/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <optional>

#include "s2d/io.hpp"
#include "s2d/refinement.hpp"
#include "s2d/scale_correction.hpp"

namespace s2d {

namespace {

struct Keyframe {
  int frame = 0;
  double timestamp = 0.0;
  Pose camera_to_world;
  ColorImage color;
  DepthImage truth;
  NormalImage truth_normals;
};

// Loads keyframes lazily so only every Nth frame is rendered or decoded.
class FrameSource {
 public:
  explicit FrameSource(const PipelineConfig& config) : config_(config) {
    if (config.mode == InputMode::synthetic) {
      const auto names = fixtures::names();
      if (std::find(names.begin(), names.end(), config.scene) != names.end()) {
        scene_ = fixtures::by_name(config.scene);
        base_view_ = fixtures::default_view(config.scene);
      } else {
        scene_ = parse_scene(read_text_file(config.scene), config.scene);
      }
      frame_count_ = config.frames;
    } else {
      tum_ = load_tum_sequence(config.dataset);
      for (std::size_t i = 0; i < tum_->frames.size(); ++i)
        if (tum_->groundtruth.nearest(tum_->frames[i].timestamp, kAssociationWindow) >= 0) usable_.push_back(i);
      frame_count_ = static_cast<int>(usable_.size());
      if (frame_count_ == 0) throw InvalidInput("no frame of " + config.dataset + " has a ground-truth pose");
    }
  }

  int frame_count() const { return frame_count_; }

  Keyframe load(int frame) const {
    const Parallelism par{config_.workers};
    Keyframe kf;
    kf.frame = frame;
    if (scene_) {
      kf.timestamp = frame / 30.0;
      kf.camera_to_world = fixtures::trajectory_pose(base_view_, frame, frame_count_);
      RenderedView view = render(*scene_, kf.camera_to_world, config_.camera, par);
      kf.color = std::move(view.color);
      kf.truth = std::move(view.depth);
      kf.truth_normals = std::move(view.normals);
      return kf;
    }
    const TumFrame& f = tum_->frames[usable_[frame]];
    kf.timestamp = f.timestamp;
    kf.camera_to_world = tum_->groundtruth.poses()[tum_->groundtruth.nearest(f.timestamp, kAssociationWindow)].pose;
    TumImages images = load_tum_frame(f);
    if (images.depth.width() != config_.camera.width || images.depth.height() != config_.camera.height ||
        !images.depth.same_shape(images.color))
      throw InvalidInput("image size of frame " + f.rgb.string() + " does not match the camera");
    kf.color = std::move(images.color);
    kf.truth = std::move(images.depth);
    kf.truth_normals = depth_to_normal(kf.truth, config_.camera, par);
    return kf;
  }

  Trajectory groundtruth() const {
    if (tum_) return tum_->groundtruth;
    std::vector<TimedPose> poses;
    for (int i = 0; i < frame_count_; ++i)
      poses.push_back({i / 30.0, fixtures::trajectory_pose(base_view_, i, frame_count_)});
    return Trajectory(std::move(poses));
  }

 private:
  const PipelineConfig& config_;
  std::optional<PlanarScene> scene_;
  Pose base_view_;
  std::optional<TumSequence> tum_;
  std::vector<std::size_t> usable_;
  int frame_count_ = 0;
};

struct ProcessedKeyframe {
  Keyframe view;
  SuperpixelLabels labels;
  DepthImage corrected;  // scale-corrected prior with optimized points
  DepthImage dense;
};

double valid_fraction(const DepthImage& estimate, const DepthImage& truth) {
  std::size_t total = 0;
  std::size_t filled = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth.valid(i)) continue;
    ++total;
    if (estimate.valid(i)) ++filled;
  }
  return total ? double(filled) / double(total) : 0.0;
}

// Mature points sampled from the ground truth of each host keyframe.
ActiveWindow build_window(const std::vector<const ProcessedKeyframe*>& hosts, const Keyframe& current,
                          const PipelineConfig& config) {
  ActiveWindow window;
  const Pose world_to_new = current.camera_to_world.inverse();
  for (const ProcessedKeyframe* host : hosts) {
    const Eigen::Vector3d center = host->view.camera_to_world.t;
    double baseline = (current.camera_to_world.t - center).norm();
    for (const ProcessedKeyframe* other : hosts) baseline = std::max(baseline, (other->view.camera_to_world.t - center).norm());
    if (!(baseline > 0.0)) baseline = 1.0;

    const int id = host->view.frame;
    window.keyframes.push_back({id, world_to_new * host->view.camera_to_world});
    const DepthImage sparse = sample_sparse(host->view.truth, host->labels, config.points_per_superpixel,
                                            config.point_seed + 131 * static_cast<std::uint64_t>(id));
    for (int v = 0; v < sparse.height(); ++v)
      for (int u = 0; u < sparse.width(); ++u)
        if (sparse.valid(u, v)) window.points.push_back({id, double(u), double(v), sparse(u, v), baseline});
  }
  return window;
}

DepthImage refine_against(const DepthImage& depth, const DepthImage& spread, const DepthImage& previous,
                          const Pose& previous_to_this, const PipelineConfig& config) {
  BeliefMap beliefs = init_beliefs(depth, spread, config.sigma_floor);
  beliefs = observe_from_keyframe(beliefs, previous, previous_to_this, config.camera, config.obs_sigma2);
  return extract_refined(beliefs, config.min_inlier_ratio, config.max_sigma).depth;
}

std::string kf_name(int index, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "kf_%04d_%s", index, suffix);
  return buf;
}

template <typename F>
auto with_context(const std::string& context, F&& body) {
  try {
    return body();
  } catch (const NoSeeds& e) {
    throw NoSeeds(context + e.what());
  } catch (const NoCorrectionEvidence& e) {
    throw NoCorrectionEvidence(context + e.what());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(context + e.what());
  } catch (const BehindCamera& e) {
    throw BehindCamera(context + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(context + e.what());
  } catch (const Error& e) {
    throw Error(context + e.what());
  }
}

std::string number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  const Parallelism par{config.workers};
  const CameraIntrinsics& k = config.camera;
  const double f_disparity = config.loss.f_train > 0.0 ? config.loss.f_train : k.fx;
  const FrameSource source(config);

  fs::path out_dir;
  if (!config.output.empty()) {
    out_dir = config.output;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InvalidInput("cannot create output directory " + out_dir.string() + ": " + ec.message());
  }

  PipelineReport report;
  std::vector<ProcessedKeyframe> done;
  std::vector<TimedPose> estimate;
  for (int frame = 0; frame < source.frame_count(); frame += config.keyframe_interval) {
    const int j = static_cast<int>(done.size());
    if (config.max_keyframes > 0 && j >= config.max_keyframes) break;

    with_context("keyframe " + std::to_string(j) + " (frame " + std::to_string(frame) + "): ", [&] {
      ProcessedKeyframe current;
      current.view = source.load(frame);
      current.labels = superpixel_segment(current.view.color, config.densify.superpixel);
      const Keyframe& view = current.view;

      NoiseSpec noise = config.noise;
      noise.seed = config.noise.seed + 7919 * static_cast<std::uint64_t>(j);
      const CorruptedView prior = corrupt(view.truth, view.truth_normals, noise);

      // The first keyframe hosts its own points; later ones receive points from the previous window.
      std::vector<const ProcessedKeyframe*> hosts;
      for (int h = std::max(0, j - config.window_keyframes); h < j; ++h) hosts.push_back(&done[h]);
      if (hosts.empty()) hosts.push_back(&current);
      const ActiveWindow window = build_window(hosts, view, config);
      const WarpResult warp = warp_points(window, k);
      const std::vector<ScaleEvidence> evidence = gather_scale_evidence(warp, prior.depth);
      const ScaleCorrection correction = scale_correct(prior.depth, evidence);
      current.corrected = overlay_optimized(correction.corrected, warp.depth);
      current.dense = sparse_to_dense_stages(warp.depth, prior.normals, view.color, k, current.labels,
                                             config.densify, par)
                          .dense;

      DepthImage corrected_refined = current.corrected;
      DepthImage dense_refined = current.dense;
      if (config.refine && j > 0) {
        const ProcessedKeyframe& previous = done.back();
        const Pose previous_to_this = view.camera_to_world.inverse() * previous.view.camera_to_world;
        corrected_refined = refine_against(current.corrected, current.corrected, previous.corrected, previous_to_this, config);
        dense_refined = refine_against(current.dense, current.corrected, previous.dense, previous_to_this, config);
      }

      const DepthImage reprojected = normal_guided_filter(prior.depth, prior.normals, k, config.densify.filter, par);
      LossBreakdown loss = coupled_loss(depth_to_disparity(prior.depth, f_disparity), prior.normals,
                                        depth_to_disparity(view.truth, f_disparity), view.truth_normals, reprojected,
                                        depth_to_normal(reprojected, k, par), k, config.loss);

      KeyframeReport row;
      row.keyframe = j;
      row.frame = frame;
      row.timestamp = view.timestamp;
      row.sparse_points = warp.depth.valid_count();
      row.dropped_points = warp.dropped + warp.occluded;
      row.scale_points = evidence.size();
      row.scale_factor = correction.factor;
      row.pcd_prior = pcd(prior.depth, view.truth);
      row.pcd_corrected = pcd(current.corrected, view.truth);
      row.pcd_dense = pcd(current.dense, view.truth);
      row.pcd_corrected_refined = pcd(corrected_refined, view.truth);
      row.pcd_dense_refined = pcd(dense_refined, view.truth);
      row.density_corrected_refined = valid_fraction(corrected_refined, view.truth);
      row.density_dense_refined = valid_fraction(dense_refined, view.truth);
      row.loss = loss;
      report.keyframes.push_back(row);

      if (!out_dir.empty()) {
        write_depth_png(out_dir / (kf_name(j, "zopt") + ".png"), warp.depth);
        write_depth_png(out_dir / (kf_name(j, "zcor") + ".png"), current.corrected);
        write_depth_png(out_dir / (kf_name(j, "zdense") + ".png"), current.dense);
        if (config.refine) {
          write_depth_png(out_dir / (kf_name(j, "zcor_refined") + ".png"), corrected_refined);
          write_depth_png(out_dir / (kf_name(j, "zdense_refined") + ".png"), dense_refined);
        }
        if (config.write_ply) {
          export_ply(out_dir / (kf_name(j, "zcor") + ".ply"), corrected_refined, view.color, k, view.camera_to_world);
          export_ply(out_dir / (kf_name(j, "zdense") + ".ply"), dense_refined, view.color, k, view.camera_to_world);
        }
      }
      estimate.push_back({view.timestamp, view.camera_to_world});
      done.push_back(std::move(current));
      return 0;
    });
  }

  if (estimate.size() >= 2) {
    const AteResult result = ate(Trajectory(estimate), source.groundtruth(), Alignment::rigid);
    report.ate_rmse = result.rmse;
    report.ate_pairs = result.pairs;
  }

  if (!out_dir.empty()) {
    write_text_file(out_dir / "metrics.txt", format_metrics(report));
    write_text_file(out_dir / "report.txt", format_report(config, report));
  }
  return report;
}

std::string format_metrics(const PipelineReport& report) {
  std::string out;
  const auto line = [&out](const std::string& key, const std::string& value) { out += key + "=" + value + "\n"; };
  line("pose_source", "ground_truth");
  line("keyframes", std::to_string(report.keyframes.size()));
  line("ate_rmse", number(report.ate_rmse));
  line("ate_pairs", std::to_string(report.ate_pairs));
  for (const KeyframeReport& r : report.keyframes) {
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "kf%04d.", r.keyframe);
    const std::string p = prefix;
    line(p + "frame", std::to_string(r.frame));
    line(p + "timestamp", number(r.timestamp));
    line(p + "sparse_points", std::to_string(r.sparse_points));
    line(p + "dropped_points", std::to_string(r.dropped_points));
    line(p + "scale_points", std::to_string(r.scale_points));
    line(p + "scale_factor", number(r.scale_factor));
    line(p + "pcd_prior", number(r.pcd_prior));
    line(p + "pcd_corrected", number(r.pcd_corrected));
    line(p + "pcd_dense", number(r.pcd_dense));
    line(p + "pcd_corrected_refined", number(r.pcd_corrected_refined));
    line(p + "pcd_dense_refined", number(r.pcd_dense_refined));
    line(p + "density_corrected_refined", number(r.density_corrected_refined));
    line(p + "density_dense_refined", number(r.density_dense_refined));
    line(p + "loss_disparity_supervised", number(r.loss.disparity_supervised));
    line(p + "loss_normal_supervised", number(r.loss.normal_supervised));
    line(p + "loss_disparity_coupled", number(r.loss.disparity_coupled));
    line(p + "loss_normal_coupled", number(r.loss.normal_coupled));
    line(p + "loss_total", number(r.loss.total));
  }
  return out;
}

std::string format_report(const PipelineConfig& config, const PipelineReport& report) {
  std::string out;
  char buf[256];
  out += "input: " + (config.mode == InputMode::synthetic ? "synthetic scene " + config.scene : "TUM sequence " + config.dataset) + "\n";
  out += "poses: ground truth (camera tracking is replaced, not estimated)\n";
  std::snprintf(buf, sizeof buf, "ATE rmse: %.6f m over %zu keyframes (rigid alignment)\n", report.ate_rmse,
                report.ate_pairs);
  out += buf;
  out += "\n kf frame points  scale   PCD prior  Z_cor  Z_dense  Z_cor*  Z_dense*  fill Z_cor*  fill Z_dense*  loss\n";
  for (const KeyframeReport& r : report.keyframes) {
    std::snprintf(buf, sizeof buf, "%3d %5d %6zu %6.4f %10.2f %6.2f %8.2f %7.2f %9.2f %12.3f %14.3f  %.4f\n",
                  r.keyframe, r.frame, r.sparse_points, r.scale_factor, r.pcd_prior, r.pcd_corrected, r.pcd_dense,
                  r.pcd_corrected_refined, r.pcd_dense_refined, r.density_corrected_refined, r.density_dense_refined,
                  r.loss.total);
    out += buf;
  }
  out += "\n* after refinement against the previous keyframe; PCD counts missing pixels as wrong.\n";
  return out;
}

}  // namespace s2d
