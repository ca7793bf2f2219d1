#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "s2d/config.hpp"
#include "s2d/io.hpp"
#include "s2d/pipeline.hpp"
#include "s2d/refinement.hpp"
#include "s2d/scale_correction.hpp"
#include "s2d/sparse2dense.hpp"
#include "s2d/synthetic.hpp"

namespace py = pybind11;
using namespace s2d;

namespace {

// Arrays cross the boundary as float64 (H, W) depth, (H, W, 3) normals, uint8 (H, W, 3) color and
// int32 (H, W) labels. Depth 0 and all-zero normals mean "no value"; NaN is accepted as invalid on input.

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

void require_ndim(const py::array& a, py::ssize_t ndim, py::ssize_t channels, const char* what) {
  if (a.ndim() != ndim || (ndim == 3 && a.shape(2) != channels))
    throw InvalidInput(std::string(what) + (ndim == 2 ? " must have shape (H, W)" : " must have shape (H, W, 3)"));
}

DepthImage to_depth(const DoubleArray& a) {
  require_ndim(a, 2, 0, "depth");
  DepthImage out(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const double* p = a.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (std::isfinite(p[i]) && p[i] > 0.0) out.set(i, p[i]);
  return out;
}

py::array_t<double> from_depth(const DepthImage& d) {
  py::array_t<double> out({d.height(), d.width()});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < d.size(); ++i) p[i] = d.valid(i) ? d[i] : 0.0;
  return out;
}

NormalImage to_normals(const DoubleArray& a) {
  require_ndim(a, 3, 3, "normals");
  NormalImage out(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const double* p = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Eigen::Vector3d n(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
    if (n.allFinite() && n.squaredNorm() > 0.0) out.set(i, n.normalized());
  }
  return out;
}

py::array_t<double> from_normals(const NormalImage& n) {
  py::array_t<double> out({n.height(), n.width(), 3});
  double* p = out.mutable_data();
  for (std::size_t i = 0; i < n.size(); ++i)
    for (int c = 0; c < 3; ++c) p[3 * i + c] = n.valid(i) ? n[i][c] : 0.0;
  return out;
}

ColorImage to_color(const ByteArray& a) {
  require_ndim(a, 3, 3, "color");
  ColorImage out(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const std::uint8_t* p = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Rgb{p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return out;
}

py::array_t<std::uint8_t> from_color(const ColorImage& c) {
  py::array_t<std::uint8_t> out({c.height(), c.width(), 3});
  std::uint8_t* p = out.mutable_data();
  for (std::size_t i = 0; i < c.size(); ++i) {
    p[3 * i] = c[i].r;
    p[3 * i + 1] = c[i].g;
    p[3 * i + 2] = c[i].b;
  }
  return out;
}

template <typename T>
py::array_t<T> from_image(const Image<T>& img) {
  py::array_t<T> out({img.height(), img.width()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

SuperpixelLabels to_labels(const LabelArray& a) {
  require_ndim(a, 2, 0, "labels");
  SuperpixelLabels out{Image<std::int32_t>(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0))), 0};
  const std::int32_t* p = a.data();
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    if (p[i] < 0) throw InvalidInput("labels must be non-negative");
    out.labels[i] = p[i];
    out.count = std::max(out.count, p[i] + 1);
  }
  return out;
}

Trajectory to_trajectory(const DoubleArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 8) throw InvalidInput("trajectory must have shape (N, 8): t tx ty tz qx qy qz qw");
  std::vector<TimedPose> poses;
  const double* p = a.data();
  for (py::ssize_t r = 0; r < a.shape(0); ++r) {
    const double* x = p + 8 * r;
    poses.push_back({x[0], Pose::from_quaternion({x[1], x[2], x[3]}, Eigen::Quaterniond(x[7], x[4], x[5], x[6]))});
  }
  return Trajectory(std::move(poses));
}

Pose to_pose(const Eigen::Matrix4d& m) {
  Pose p{m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  p.validate(1e-6);
  return p;
}

Eigen::Matrix4d from_pose(const Pose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.R;
  m.topRightCorner<3, 1>() = p.t;
  return m;
}

py::dict view_dict(const RenderedView& view, const Pose& pose) {
  py::dict d;
  d["depth"] = from_depth(view.depth);
  d["normals"] = from_normals(view.normals);
  d["color"] = from_color(view.color);
  d["plane"] = from_image(view.plane);
  d["pose"] = from_pose(pose);
  return d;
}

PipelineConfig to_config(const py::dict& settings) {
  PipelineConfig config;
  for (const auto& [key, value] : settings) {
    const std::string k = py::str(key);
    std::string v;
    if (py::isinstance<py::bool_>(value))
      v = value.cast<bool>() ? "true" : "false";
    else
      v = py::str(value);
    set_config_value(config, k, v);
  }
  return config;
}

py::dict keyframe_dict(const KeyframeReport& kf) {
  py::dict d;
  d["keyframe"] = kf.keyframe;
  d["frame"] = kf.frame;
  d["timestamp"] = kf.timestamp;
  d["sparse_points"] = kf.sparse_points;
  d["dropped_points"] = kf.dropped_points;
  d["scale_points"] = kf.scale_points;
  d["scale_factor"] = kf.scale_factor;
  d["pcd_prior"] = kf.pcd_prior;
  d["pcd_corrected"] = kf.pcd_corrected;
  d["pcd_dense"] = kf.pcd_dense;
  d["pcd_corrected_refined"] = kf.pcd_corrected_refined;
  d["pcd_dense_refined"] = kf.pcd_dense_refined;
  d["density_corrected_refined"] = kf.density_corrected_refined;
  d["density_dense_refined"] = kf.density_dense_refined;
  d["loss_total"] = kf.loss.total;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse-to-dense depth completion with normal-guided filtering";

  // Translators are tried most-recent first, so derived errors are registered after their bases.
  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidInput> invalid(m, "InvalidInput", PyExc_ValueError);
  static py::exception<NumericalFailure> numerical(m, "NumericalFailure", PyExc_ArithmeticError);
  static py::exception<ParseError> parse(m, "ParseError", invalid.ptr());
  static py::exception<NoSeeds> no_seeds(m, "NoSeeds", numerical.ptr());
  static py::exception<NoCorrectionEvidence> no_evidence(m, "NoCorrectionEvidence", numerical.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NoCorrectionEvidence& e) {
      py::set_error(no_evidence, e.what());
    } catch (const NoSeeds& e) {
      py::set_error(no_seeds, e.what());
    } catch (const ParseError& e) {
      py::set_error(parse, e.what());
    } catch (const NumericalFailure& e) {
      py::set_error(numerical, e.what());
    } catch (const InvalidInput& e) {
      py::set_error(invalid, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"), py::arg("height"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height)
      .def("__repr__", [](const CameraIntrinsics& k) {
        return "CameraIntrinsics(fx=" + std::to_string(k.fx) + ", fy=" + std::to_string(k.fy) +
               ", cx=" + std::to_string(k.cx) + ", cy=" + std::to_string(k.cy) +
               ", width=" + std::to_string(k.width) + ", height=" + std::to_string(k.height) + ")";
      });

  m.def("default_camera", &fixtures::default_camera);
  m.def("fixture_names", &fixtures::names);

  m.def("unproject", &unproject, py::arg("k"), py::arg("u"), py::arg("v"), py::arg("z"));
  m.def(
      "project",
      [](const CameraIntrinsics& k, const Eigen::Vector3d& p) {
        const PixelDepth px = project(k, p);
        return py::make_tuple(px.u, px.v, px.z);
      },
      py::arg("k"), py::arg("point"));

  m.def(
      "depth_to_normal",
      [](const DoubleArray& depth, const CameraIntrinsics& k, int workers) {
        return from_normals(depth_to_normal(to_depth(depth), k, {workers}));
      },
      py::arg("depth"), py::arg("k"), py::arg("workers") = 1);

  m.def(
      "superpixel_segment",
      [](const ByteArray& color, int region_size, double compactness, int iterations) {
        return from_image(superpixel_segment(to_color(color), {region_size, compactness, iterations}).labels);
      },
      py::arg("color"), py::arg("region_size") = 16, py::arg("compactness") = 10.0, py::arg("iterations") = 10);

  m.def(
      "normal_guided_filter",
      [](const DoubleArray& depth, const DoubleArray& normals, const CameraIntrinsics& k, double coplanarity,
         int window, int iterations, std::optional<LabelArray> labels, int workers) {
        const FilterParams params{coplanarity, window, iterations};
        const DepthImage d = to_depth(depth);
        const NormalImage n = to_normals(normals);
        if (labels) return from_depth(normal_guided_filter(d, n, k, params, to_labels(*labels), {workers}));
        return from_depth(normal_guided_filter(d, n, k, params, {workers}));
      },
      py::arg("depth"), py::arg("normals"), py::arg("k"), py::arg("coplanarity") = 0.95, py::arg("window") = 5,
      py::arg("iterations") = 1, py::arg("labels") = py::none(), py::arg("workers") = 1);

  m.def(
      "sparse_to_dense",
      [](const DoubleArray& sparse, const DoubleArray& normals, const ByteArray& color, const CameraIntrinsics& k,
         bool bilateral, double coplanarity, int window, int iterations, int region_size, int workers) {
        DensifyParams params;
        params.bilateral_step = bilateral;
        params.filter = {coplanarity, window, iterations};
        params.superpixel.region_size = region_size;
        const DensifyStages s =
            sparse_to_dense_stages(to_depth(sparse), to_normals(normals), to_color(color), k, params, {workers});
        py::dict d;
        d["labels"] = from_image(s.labels.labels);
        d["superpixel_filled"] = from_depth(s.superpixel_filled);
        d["bilateral"] = from_depth(s.bilateral);
        d["dense"] = from_depth(s.dense);
        return d;
      },
      py::arg("sparse"), py::arg("normals"), py::arg("color"), py::arg("k"), py::arg("bilateral") = true,
      py::arg("coplanarity") = 0.95, py::arg("window") = 5, py::arg("iterations") = 1, py::arg("region_size") = 16,
      py::arg("workers") = 1);

  m.def(
      "scale_correct",
      [](const DoubleArray& prior, const DoubleArray& points, const std::vector<std::pair<int, Eigen::Matrix4d>>& poses,
         const CameraIntrinsics& k) {
        if (points.ndim() != 2 || points.shape(1) != 5)
          throw InvalidInput("points must have shape (N, 5): host u v z baseline");
        ActiveWindow window;
        for (const auto& [id, matrix] : poses) window.keyframes.push_back({id, to_pose(matrix)});
        const double* p = points.data();
        for (py::ssize_t r = 0; r < points.shape(0); ++r) {
          const double* x = p + 5 * r;
          window.points.push_back({static_cast<int>(x[0]), x[1], x[2], x[3], x[4]});
        }
        const DepthImage z_prior = to_depth(prior);
        const WarpResult warp = warp_points(window, k);
        const auto evidence = gather_scale_evidence(warp, z_prior);
        const ScaleCorrection c = scale_correct(z_prior, evidence);
        py::dict d;
        d["factor"] = c.factor;
        d["corrected"] = from_depth(overlay_optimized(c.corrected, warp.depth));
        d["sparse"] = from_depth(warp.depth);
        d["evidence"] = evidence.size();
        d["dropped"] = warp.dropped;
        d["occluded"] = warp.occluded;
        return d;
      },
      py::arg("prior"), py::arg("points"), py::arg("poses"), py::arg("k"),
      "Warp mature points (rows: host u v z baseline) with host-to-new 4x4 poses, then rescale the prior.");

  m.def(
      "fuse_observation",
      [](double mu, double sigma2, double a, double b, double z_min, double z_max, double obs, double obs_sigma2,
         bool gaussian_only) {
        const PixelDepthBelief post =
            fuse_observation({mu, sigma2, a, b, z_min, z_max, true}, obs, obs_sigma2,
                             gaussian_only ? MixtureModel::gaussian_only : MixtureModel::full);
        return py::make_tuple(post.mu, post.sigma2, post.a, post.b);
      },
      py::arg("mu"), py::arg("sigma2"), py::arg("a"), py::arg("b"), py::arg("z_min"), py::arg("z_max"),
      py::arg("obs"), py::arg("obs_sigma2"), py::arg("gaussian_only") = false,
      "Fuse one inverse-depth observation; returns (mu, sigma2, a, b).");

  m.def(
      "pcd", [](const DoubleArray& estimate, const DoubleArray& truth) { return pcd(to_depth(estimate), to_depth(truth)); },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "ate_rmse",
      [](const DoubleArray& estimate, const DoubleArray& truth, const std::string& alignment) {
        return ate_rmse(to_trajectory(estimate), to_trajectory(truth), parse_alignment(alignment));
      },
      py::arg("estimate"), py::arg("truth"), py::arg("alignment") = "rigid");

  m.def(
      "render_fixture",
      [](const std::string& name, std::optional<int> frame, int frames) {
        const Pose pose = frame ? fixtures::trajectory_pose(name, *frame, frames) : fixtures::default_view(name);
        return view_dict(render(fixtures::by_name(name), pose, fixtures::default_camera()), pose);
      },
      py::arg("name"), py::arg("frame") = py::none(), py::arg("frames") = 31);

  m.def(
      "corrupt",
      [](const DoubleArray& depth, const DoubleArray& normals, double scale, double gaussian_rel, double dropout,
         double normal_angle, std::uint64_t seed) {
        const CorruptedView c =
            corrupt(to_depth(depth), to_normals(normals), {scale, gaussian_rel, dropout, normal_angle, seed});
        return py::make_tuple(from_depth(c.depth), from_normals(c.normals));
      },
      py::arg("depth"), py::arg("normals"), py::arg("scale") = 1.0, py::arg("gaussian_rel") = 0.0,
      py::arg("dropout") = 0.0, py::arg("normal_angle") = 0.0, py::arg("seed") = 0);

  m.def("config_keys", &config_keys);
  m.def(
      "format_config", [](const py::dict& settings) { return format_config(to_config(settings)); },
      py::arg("settings") = py::dict());

  m.def(
      "run_pipeline",
      [](const py::dict& settings) {
        const PipelineConfig config = to_config(settings);
        PipelineReport report;
        {
          py::gil_scoped_release release;
          report = run_pipeline(config);
        }
        py::list keyframes;
        for (const auto& kf : report.keyframes) keyframes.append(keyframe_dict(kf));
        py::dict d;
        d["keyframes"] = keyframes;
        d["ate_rmse"] = report.ate_rmse;
        d["ate_pairs"] = report.ate_pairs;
        return d;
      },
      py::arg("settings") = py::dict(), "Run the densify pipeline; settings use the config-file keys.");
}
