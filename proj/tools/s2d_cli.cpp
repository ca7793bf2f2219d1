#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "s2d/config.hpp"
#include "s2d/io.hpp"
#include "s2d/pipeline.hpp"
#include "s2d/scale_correction.hpp"
#include "s2d/synthetic.hpp"

namespace {

using namespace s2d;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct IntrinsicsFlags {
  double fx = 0.0, fy = 0.0, cx = -1.0, cy = -1.0;

  void add(CLI::App& app) {
    app.add_option("--fx", fx, "focal length x (default: synthetic camera scaled to the image)");
    app.add_option("--fy", fy, "focal length y");
    app.add_option("--cx", cx, "principal point x (default: image center)");
    app.add_option("--cy", cy, "principal point y (default: image center)");
  }

  CameraIntrinsics resolve(int width, int height) const {
    const CameraIntrinsics base = fixtures::default_camera();
    CameraIntrinsics k{fx > 0.0 ? fx : base.fx * width / base.width, 0.0, cx >= 0.0 ? cx : 0.5 * width,
                       cy >= 0.0 ? cy : 0.5 * height, width, height};
    k.fy = fy > 0.0 ? fy : k.fx;
    k.validate();
    return k;
  }
};

std::string flag_name(const std::string& key) {
  std::string name = key;
  for (char& c : name)
    if (c == '_') c = '-';
  return "--" + name;
}

int cmd_synth(const std::string& fixture, const std::string& out, const std::string& render_dir, int frames,
              bool list) {
  if (list) {
    for (const auto& name : fixtures::names()) std::cout << name << "\n";
    return 0;
  }
  if (fixture.empty()) throw InvalidInput("synth needs --fixture (see --list)");
  const PlanarScene scene = fixtures::by_name(fixture);
  const std::string text = format_scene(scene);
  if (out.empty() && render_dir.empty()) std::cout << text;
  if (!out.empty()) write_text_file(out, text);
  if (!render_dir.empty()) {
    if (frames < 1) throw InvalidInput("--frames must be >= 1");
    const CameraIntrinsics k = fixtures::default_camera();
    std::vector<double> stamps;
    std::vector<TumImages> images;
    std::vector<TimedPose> poses;
    for (int i = 0; i < frames; ++i) {
      const double t = 1.0 + i / 30.0;
      const Pose pose = fixtures::trajectory_pose(fixture, i, frames);
      RenderedView view = render(scene, pose, k);
      stamps.push_back(t);
      images.push_back({std::move(view.color), std::move(view.depth)});
      poses.push_back({t, pose});
    }
    write_tum_sequence(render_dir, stamps, images, Trajectory(std::move(poses)));
    std::cout << "wrote " << frames << " frames to " << render_dir << " (fx=fy=" << k.fx << ", cx=" << k.cx
              << ", cy=" << k.cy << ")\n";
  }
  return 0;
}

int cmd_densify(const std::string& config_path, const std::vector<std::string>& sets,
                const std::map<std::string, std::string>& flags, bool print_config, bool quiet) {
  PipelineConfig config;
  if (!config_path.empty()) config = parse_config(read_text_file(config_path), config_path);
  for (const auto& [key, value] : flags) set_config_value(config, key, value);
  for (const std::string& assignment : sets) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + assignment + "'");
    set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  if (print_config) {
    std::cout << format_config(config);
    return 0;
  }
  const PipelineReport report = run_pipeline(config);
  if (!quiet) std::cout << format_report(config, report);
  return 0;
}

int cmd_eval_ate(const std::string& estimate, const std::string& truth, const std::string& align) {
  const AteResult result = ate(read_trajectory(fs::path(estimate)), read_trajectory(fs::path(truth)),
                               parse_alignment(align));
  std::printf("ate_rmse=%.9f\npairs=%zu\nalignment=%s\n", result.rmse, result.pairs, align.c_str());
  return 0;
}

int cmd_eval_pcd(const std::string& estimate, const std::string& truth) {
  std::printf("pcd=%.6f\n", pcd(read_depth_png(estimate), read_depth_png(truth)));
  return 0;
}

Pose parse_pose(const std::vector<double>& values) {
  if (values.empty()) return Pose::identity();
  if (values.size() != 7) throw InvalidInput("--pose expects tx ty tz qx qy qz qw");
  const Eigen::Quaterniond q(values[6], values[3], values[4], values[5]);
  if (std::abs(q.norm() - 1.0) > 1e-3) throw InvalidInput("--pose quaternion is not normalized");
  return Pose::from_quaternion({values[0], values[1], values[2]}, q);
}

int cmd_export_ply(const std::string& depth_path, const std::string& rgb_path, const std::string& out,
                   const IntrinsicsFlags& flags, const std::vector<double>& pose) {
  const DepthImage depth = read_depth_png(depth_path);
  const ColorImage color = rgb_path.empty() ? ColorImage(depth.width(), depth.height(), Rgb{255, 255, 255})
                                            : read_color_png(rgb_path);
  const CameraIntrinsics k = flags.resolve(depth.width(), depth.height());
  export_ply(out, depth, color, k, parse_pose(pose));
  std::cout << "wrote " << depth.valid_count() << " vertices to " << out << "\n";
  return 0;
}

int cmd_scale_correct(const std::string& prior_path, const std::string& points, const std::string& poses,
                      const std::string& out, const IntrinsicsFlags& flags) {
  const DepthImage prior = read_depth_png(prior_path);
  const CameraIntrinsics k = flags.resolve(prior.width(), prior.height());
  const WarpResult warp = warp_points(read_active_window(points, poses), k);
  const auto evidence = gather_scale_evidence(warp, prior);
  const ScaleCorrection correction = scale_correct(prior, evidence);
  write_depth_png(out, overlay_optimized(correction.corrected, warp.depth));
  std::printf("scale_factor=%.9f\nevidence=%zu\ndropped=%zu\noccluded=%zu\n", correction.factor, evidence.size(),
              warp.dropped, warp.occluded);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-to-dense depth completion with normal-guided filtering"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "emit a planar scene fixture, optionally rendered as a TUM sequence");
  std::string fixture, scene_out, render_dir;
  int frames = 31;
  bool list = false;
  synth->add_option("--fixture", fixture, "fixture name");
  synth->add_option("--out", scene_out, "scene file to write (default: stdout)");
  synth->add_option("--render", render_dir, "render a TUM-layout sequence into this directory");
  synth->add_option("--frames", frames, "frames to render")->capture_default_str();
  synth->add_flag("--list", list, "list fixture names");

  auto* densify = app.add_subcommand("densify", "run scale correction, sparse-to-dense and refinement");
  std::string config_path;
  std::vector<std::string> sets;
  bool print_config = false, quiet = false;
  densify->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  densify->add_option("--set", sets, "override one key: --set key=value");
  densify->add_flag("--print-config", print_config, "print the effective configuration and exit");
  densify->add_flag("--quiet", quiet, "do not print the report");
  std::map<std::string, std::string> key_values;
  std::vector<std::pair<std::string, CLI::Option*>> key_options;
  std::vector<std::string> key_storage(config_keys().size());
  for (std::size_t i = 0; i < config_keys().size(); ++i) {
    const std::string& key = config_keys()[i];
    key_options.emplace_back(key, densify->add_option(flag_name(key), key_storage[i], "config key " + key));
  }

  auto* eval_ate = app.add_subcommand("eval-ate", "absolute trajectory error between two TUM trajectories");
  std::string estimate, truth, align = "rigid";
  eval_ate->add_option("--estimate", estimate)->required()->check(CLI::ExistingFile);
  eval_ate->add_option("--groundtruth", truth)->required()->check(CLI::ExistingFile);
  eval_ate->add_option("--align", align, "none, rigid or similarity")->capture_default_str();

  auto* eval_pcd = app.add_subcommand("eval-pcd", "percentage of correct depths between two depth PNGs");
  std::string pcd_estimate, pcd_truth;
  eval_pcd->add_option("--estimate", pcd_estimate)->required()->check(CLI::ExistingFile);
  eval_pcd->add_option("--truth", pcd_truth)->required()->check(CLI::ExistingFile);

  auto* export_cmd = app.add_subcommand("export-ply", "back-project a depth PNG into a colored PLY cloud");
  std::string depth_path, rgb_path, ply_out;
  std::vector<double> pose;
  IntrinsicsFlags export_k;
  export_cmd->add_option("--depth", depth_path)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--rgb", rgb_path)->check(CLI::ExistingFile);
  export_cmd->add_option("--out", ply_out)->required();
  export_cmd->add_option("--pose", pose, "camera-to-world: tx ty tz qx qy qz qw")->expected(7);
  export_k.add(*export_cmd);

  auto* scale_cmd = app.add_subcommand("scale-correct", "rescale a depth prior with warped mature points");
  std::string prior_path, points_path, poses_path, corrected_out;
  IntrinsicsFlags scale_k;
  scale_cmd->add_option("--prior", prior_path)->required()->check(CLI::ExistingFile);
  scale_cmd->add_option("--points", points_path, "lines: host_id u v z B_rel")->required()->check(CLI::ExistingFile);
  scale_cmd->add_option("--poses", poses_path, "lines: host_id and 3x4 row-major [R|t] into the new keyframe")
      ->required()
      ->check(CLI::ExistingFile);
  scale_cmd->add_option("--out", corrected_out)->required();
  scale_k.add(*scale_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*synth) return cmd_synth(fixture, scene_out, render_dir, frames, list);
    if (*densify) {
      for (const auto& [key, option] : key_options)
        if (option->count() > 0) key_values[key] = option->as<std::string>();
      return cmd_densify(config_path, sets, key_values, print_config, quiet);
    }
    if (*eval_ate) return cmd_eval_ate(estimate, truth, align);
    if (*eval_pcd) return cmd_eval_pcd(pcd_estimate, pcd_truth);
    if (*export_cmd) return cmd_export_ply(depth_path, rgb_path, ply_out, export_k, pose);
    if (*scale_cmd) return cmd_scale_correct(prior_path, points_path, poses_path, corrected_out, scale_k);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
