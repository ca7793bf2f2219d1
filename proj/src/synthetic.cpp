#include "s2d/synthetic.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "s2d/rng.hpp"

namespace s2d {

void PlanarScene::validate() const {
  if (!(extent_min.array() < extent_max.array()).all()) throw InvalidInput("scene extent is empty");
  for (std::size_t p = 0; p < planes.size(); ++p) {
    const Plane& plane = planes[p];
    const std::string where = "plane " + std::to_string(p) + ": ";
    if (std::abs(plane.normal.norm() - 1.0) > 1e-9) throw InvalidInput(where + "normal is not unit length");
    if (plane.polygon.size() < 3) throw InvalidInput(where + "polygon needs at least 3 vertices");
    for (const auto& x : plane.polygon)
      if (std::abs(plane.normal.dot(x) - plane.offset) > 1e-9) throw InvalidInput(where + "vertex off the plane");
    Eigen::Vector3d area = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < plane.polygon.size(); ++i)
      area += plane.polygon[i].cross(plane.polygon[(i + 1) % plane.polygon.size()]);
    if (std::abs(area.dot(plane.normal)) < 1e-12) throw InvalidInput(where + "degenerate polygon");
  }
}

bool PlanarScene::inside(const Eigen::Vector3d& p) const {
  return (p.array() >= extent_min.array()).all() && (p.array() <= extent_max.array()).all();
}

namespace {

// Plane polygon flattened onto an in-plane basis for crossing-number tests.
struct FlatPolygon {
  Eigen::Vector3d e1, e2;
  std::vector<Eigen::Vector2d> vertices;

  explicit FlatPolygon(const Plane& plane) {
    const Eigen::Vector3d& n = plane.normal;
    const Eigen::Vector3d helper = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    e1 = n.cross(helper).normalized();
    e2 = n.cross(e1);
    for (const auto& x : plane.polygon) vertices.emplace_back(e1.dot(x), e2.dot(x));
  }

  bool contains(const Eigen::Vector3d& x) const {
    const Eigen::Vector2d p(e1.dot(x), e2.dot(x));
    bool in = false;
    for (std::size_t i = 0, j = vertices.size() - 1; i < vertices.size(); j = i++) {
      const auto& a = vertices[i];
      const auto& b = vertices[j];
      if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
        in = !in;
    }
    return in;
  }
};

}  // namespace

RenderedView render(const PlanarScene& scene, const Pose& camera_to_world, const CameraIntrinsics& k,
                    Parallelism par) {
  scene.validate();
  k.validate();
  camera_to_world.validate(1e-6);
  if (!scene.inside(camera_to_world.t)) throw InvalidInput("camera lies outside the scene extent");

  std::vector<FlatPolygon> flat;
  for (const auto& plane : scene.planes) flat.emplace_back(plane);

  RenderedView view{DepthImage(k.width, k.height), NormalImage(k.width, k.height), ColorImage(k.width, k.height),
                    Image<std::int32_t>(k.width, k.height, -1)};
  const Eigen::Matrix3d& R = camera_to_world.R;
  const Eigen::Vector3d& c = camera_to_world.t;
  parallel_rows(k.height, par, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v) {
      for (int u = 0; u < k.width; ++u) {
        const Eigen::Vector3d ray_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
        const Eigen::Vector3d ray = R * ray_cam;
        double best = std::numeric_limits<double>::infinity();
        int hit = -1;
        for (std::size_t p = 0; p < scene.planes.size(); ++p) {
          const Plane& plane = scene.planes[p];
          const double denom = plane.normal.dot(ray);
          if (std::abs(denom) < 1e-12) continue;
          const double s = (plane.offset - plane.normal.dot(c)) / denom;
          if (!(s > 0.0) || !(s < best)) continue;
          if (!flat[p].contains(c + s * ray)) continue;
          best = s;
          hit = static_cast<int>(p);
        }
        if (hit < 0) continue;
        // Depth along the optical axis equals the ray parameter because ray_cam.z == 1.
        view.depth.set(u, v, best);
        Eigen::Vector3d n = R.transpose() * scene.planes[hit].normal;
        if (n.dot(ray_cam) < 0.0) n = -n;
        view.normals.set(u, v, n);
        view.color(u, v) = scene.planes[hit].color;
        view.plane(u, v) = hit;
      }
    }
  });
  return view;
}

void NoiseSpec::validate() const {
  if (!(global_scale > 0.0)) throw InvalidInput("noise global_scale must be positive");
  if (!(gaussian_rel >= 0.0) || !(normal_angle_noise >= 0.0)) throw InvalidInput("noise stds must be >= 0");
  if (!(dropout >= 0.0 && dropout <= 1.0)) throw InvalidInput("dropout must lie in [0, 1]");
}

CorruptedView corrupt(const DepthImage& depth, const NormalImage& normals, const NoiseSpec& spec) {
  spec.validate();
  CorruptedView out{depth, normals};

  Rng depth_rng(spec.seed);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!depth.valid(i)) continue;
    double z = depth[i];
    if (spec.global_scale != 1.0) z *= spec.global_scale;
    if (spec.gaussian_rel > 0.0) z *= 1.0 + spec.gaussian_rel * depth_rng.normal();
    if (spec.dropout > 0.0 && depth_rng.uniform() < spec.dropout) {
      out.depth.invalidate(i);
      continue;
    }
    assign_positive(out.depth, i, z);
  }

  if (spec.normal_angle_noise > 0.0) {
    Rng normal_rng(spec.seed ^ 0x6e6f726d616c73ULL);
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (!normals.valid(i)) continue;
      const Eigen::Vector3d& n = normals[i];
      Eigen::Vector3d axis(normal_rng.normal(), normal_rng.normal(), normal_rng.normal());
      const double angle = spec.normal_angle_noise * normal_rng.normal();
      axis -= axis.dot(n) * n;
      if (axis.norm() < 1e-12) continue;
      out.normals.set(i, (Eigen::AngleAxisd(angle, axis.normalized()) * n).normalized());
    }
  }
  return out;
}

namespace {

// Partial Fisher-Yates: the first `take` entries become a uniform sample.
void choose(std::vector<std::size_t>& pool, std::size_t take, Rng& rng) {
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
}

}  // namespace

DepthImage sample_sparse(const DepthImage& depth, const SuperpixelLabels& labels, int per_superpixel,
                         std::uint64_t seed) {
  if (per_superpixel < 0) throw InvalidInput("per_superpixel must be >= 0");
  if (!depth.same_shape(labels)) throw InvalidInput("depth and labels differ in size");
  std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(labels.count));
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!depth.valid(i)) continue;
    const auto label = labels[i];
    if (label < 0 || label >= labels.count) throw InvalidInput("superpixel label out of range");
    pools[static_cast<std::size_t>(label)].push_back(i);
  }
  Rng rng(seed);
  DepthImage out(depth.width(), depth.height());
  for (auto& pool : pools) {
    const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(per_superpixel));
    choose(pool, take, rng);
    for (std::size_t n = 0; n < take; ++n) out.set(pool[n], depth[pool[n]]);
  }
  return out;
}

DepthImage sample_uniform(const DepthImage& depth, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidInput("sample fraction must lie in [0, 1]");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < depth.size(); ++i)
    if (depth.valid(i)) pool.push_back(i);
  const auto take = static_cast<std::size_t>(std::llround(fraction * double(pool.size())));
  Rng rng(seed);
  choose(pool, take, rng);
  DepthImage out(depth.width(), depth.height());
  for (std::size_t n = 0; n < take; ++n) out.set(pool[n], depth[pool[n]]);
  return out;
}

namespace {

std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_scene(const PlanarScene& scene) {
  std::ostringstream out;
  out << "# planar scene: plane nx ny nz d <count> vertices... r g b\n";
  if (!scene.name.empty()) out << "name " << scene.name << '\n';
  out << "extent";
  for (double x : {scene.extent_min.x(), scene.extent_min.y(), scene.extent_min.z(), scene.extent_max.x(),
                   scene.extent_max.y(), scene.extent_max.z()})
    out << ' ' << num(x);
  out << '\n';
  for (const auto& p : scene.planes) {
    out << "plane " << num(p.normal.x()) << ' ' << num(p.normal.y()) << ' ' << num(p.normal.z()) << ' '
        << num(p.offset) << ' ' << p.polygon.size();
    for (const auto& x : p.polygon) out << ' ' << num(x.x()) << ' ' << num(x.y()) << ' ' << num(x.z());
    out << ' ' << int(p.color.r) << ' ' << int(p.color.g) << ' ' << int(p.color.b) << '\n';
  }
  return out.str();
}

PlanarScene parse_scene(std::string_view text, const std::string& source) {
  PlanarScene scene;
  bool have_extent = false;
  std::istringstream lines{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::istringstream in(line);
    std::string key;
    if (!(in >> key) || key[0] == '#') continue;
    auto fail = [&](const std::string& what) { throw ParseError(source, line_no, what); };
    if (key == "name") {
      if (!(in >> scene.name)) fail("missing scene name");
    } else if (key == "extent") {
      for (int i = 0; i < 3; ++i)
        if (!(in >> scene.extent_min[i])) fail("extent needs 6 numbers");
      for (int i = 0; i < 3; ++i)
        if (!(in >> scene.extent_max[i])) fail("extent needs 6 numbers");
      have_extent = true;
    } else if (key == "plane") {
      Plane p;
      std::size_t count = 0;
      if (!(in >> p.normal.x() >> p.normal.y() >> p.normal.z() >> p.offset >> count)) fail("malformed plane header");
      if (count < 3 || count > 1024) fail("plane needs between 3 and 1024 vertices");
      p.polygon.resize(count);
      for (auto& x : p.polygon)
        if (!(in >> x.x() >> x.y() >> x.z())) fail("plane vertex list is truncated");
      int r = 0, g = 0, b = 0;
      if (!(in >> r >> g >> b)) fail("plane color is missing");
      if (r < 0 || g < 0 || b < 0 || r > 255 || g > 255 || b > 255) fail("plane color outside 0-255");
      p.color = {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
      scene.planes.push_back(std::move(p));
    } else {
      fail("unknown record '" + key + "'");
    }
    std::string extra;
    if (in >> extra) fail("trailing data '" + extra + "'");
  }
  if (!have_extent) throw ParseError(source, 0, "missing extent record");
  try {
    scene.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(source, 0, e.what());
  }
  return scene;
}

namespace fixtures {

namespace {

Plane rect(const Eigen::Vector3d& normal, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
           const Eigen::Vector3d& c, const Eigen::Vector3d& d, Rgb color) {
  const Eigen::Vector3d n = normal.normalized();
  return {n, n.dot(a), {a, b, c, d}, color};
}

Pose look(const Eigen::Vector3d& position, double yaw_deg, double pitch_deg) {
  const double yaw = yaw_deg * std::numbers::pi / 180.0;
  const double pitch = pitch_deg * std::numbers::pi / 180.0;
  // Positive pitch tilts the optical axis down (+y in this frame).
  const Eigen::Matrix3d R = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(-pitch, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  return {R, position};
}

}  // namespace

PlanarScene box_room() {
  using V = Eigen::Vector3d;
  PlanarScene s;
  s.name = "box_room";
  s.extent_min = V(-2.0, -1.5, -1.0);
  s.extent_max = V(2.0, 1.5, 4.0);
  s.planes = {
      rect(V(0, 1, 0), V(-2, 1.5, -1), V(2, 1.5, -1), V(2, 1.5, 4), V(-2, 1.5, 4), {150, 150, 160}),
      rect(V(0, 1, 0), V(-2, -1.5, -1), V(2, -1.5, -1), V(2, -1.5, 4), V(-2, -1.5, 4), {235, 230, 205}),
      rect(V(0, 0, 1), V(-2, -1.5, 4), V(2, -1.5, 4), V(2, 1.5, 4), V(-2, 1.5, 4), {200, 120, 80}),
      rect(V(1, 0, 0), V(-2, -1.5, -1), V(-2, -1.5, 4), V(-2, 1.5, 4), V(-2, 1.5, -1), {80, 160, 90}),
      rect(V(1, 0, 0), V(2, -1.5, -1), V(2, -1.5, 4), V(2, 1.5, 4), V(2, 1.5, -1), {90, 110, 190}),
  };
  return s;
}

PlanarScene desk_on_floor() {
  using V = Eigen::Vector3d;
  PlanarScene s;
  s.name = "desk_on_floor";
  s.extent_min = V(-3.0, -2.0, -1.0);
  s.extent_max = V(3.0, 1.0, 9.0);
  s.planes = {
      rect(V(0, 1, 0), V(-3, 1, -1), V(3, 1, -1), V(3, 1, 9), V(-3, 1, 9), {110, 112, 125}),
      rect(V(0, 1, 0), V(-0.6, 0.3, 1.6), V(0.6, 0.3, 1.6), V(0.6, 0.3, 2.4), V(-0.6, 0.3, 2.4), {175, 110, 55}),
      rect(V(0, 0, 1), V(-0.6, 0.3, 1.6), V(0.6, 0.3, 1.6), V(0.6, 1, 1.6), V(-0.6, 1, 1.6), {95, 55, 30}),
  };
  return s;
}

PlanarScene two_wall_crease() {
  using V = Eigen::Vector3d;
  PlanarScene s;
  s.name = "two_wall_crease";
  s.extent_min = V(-10.0, -7.0, -1.0);
  s.extent_max = V(10.0, 7.0, 13.0);
  s.planes = {
      rect(V(1, 0, 1), V(-9, -6, 12), V(0, -6, 3), V(0, 6, 3), V(-9, 6, 12), {200, 90, 90}),
      rect(V(-1, 0, 1), V(0, -6, 3), V(9, -6, 12), V(9, 6, 12), V(0, 6, 3), {90, 90, 200}),
  };
  return s;
}

std::vector<std::string> names() { return {"box_room", "desk_on_floor", "two_wall_crease"}; }

PlanarScene by_name(const std::string& name) {
  if (name == "box_room") return box_room();
  if (name == "desk_on_floor") return desk_on_floor();
  if (name == "two_wall_crease") return two_wall_crease();
  throw InvalidInput("unknown fixture '" + name + "'");
}

Pose default_view(const std::string& name) {
  if (name == "box_room") return look({0.3, 0.2, 0.0}, 12.0, 5.0);
  if (name == "desk_on_floor") return look({0.0, 0.0, 0.0}, 0.0, 35.0);
  if (name == "two_wall_crease") return look({0.0, 0.0, 0.0}, 0.0, 0.0);
  throw InvalidInput("unknown fixture '" + name + "'");
}

Pose trajectory_pose(const std::string& name, int frame, int frames) {
  return trajectory_pose(default_view(name), frame, frames);
}

Pose trajectory_pose(const Pose& base, int frame, int frames) {
  const double phase = frames > 1 ? double(frame) / double(frames - 1) : 0.0;
  const double angle = 2.0 * std::numbers::pi * phase;
  const Eigen::Vector3d offset(0.15 * std::sin(angle), 0.05 * std::sin(2.0 * angle), 0.2 * phase);
  const Eigen::Matrix3d turn = Eigen::AngleAxisd(0.05 * std::sin(angle), Eigen::Vector3d::UnitY()).toRotationMatrix();
  return {base.R * turn, base.t + offset};
}

CameraIntrinsics default_camera() { return {250.0, 250.0, 160.0, 120.0, 320, 240}; }

}  // namespace fixtures

}  // namespace s2d
