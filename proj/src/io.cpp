#include "s2d/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace s2d {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed to write " + path.string());
}

namespace {

std::string fixed(double x, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Splits a text stream into non-empty, non-comment lines tagged with their 1-based number.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    fn(line, line_no);
  }
}

template <std::size_t N>
std::array<double, N> parse_numbers(const std::string& line, std::size_t line_no, const std::string& source) {
  std::istringstream ss(line);
  std::array<double, N> values{};
  for (auto& v : values)
    if (!(ss >> v)) throw ParseError(source, line_no, "expected " + std::to_string(N) + " numbers");
  std::string extra;
  if (ss >> extra) throw ParseError(source, line_no, "unexpected trailing field '" + extra + "'");
  for (double v : values)
    if (!std::isfinite(v)) throw ParseError(source, line_no, "non-finite value");
  return values;
}

}  // namespace

void write_ply(std::ostream& out, const DepthImage& depth, const ColorImage& color, const CameraIntrinsics& k,
               const Pose& camera_to_world) {
  if (!depth.same_shape(color)) throw InvalidInput("depth and color differ in size");
  out << "ply\nformat ascii 1.0\nelement vertex " << depth.valid_count()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (!depth.valid(u, v)) continue;
      const Eigen::Vector3d p = camera_to_world * unproject(k, u, v, depth(u, v));
      const Rgb c = color(u, v);
      out << fixed(p.x(), 6) << ' ' << fixed(p.y(), 6) << ' ' << fixed(p.z(), 6) << ' ' << int(c.r) << ' '
          << int(c.g) << ' ' << int(c.b) << '\n';
    }
  }
}

void export_ply(const fs::path& path, const DepthImage& depth, const ColorImage& color, const CameraIntrinsics& k,
                const Pose& camera_to_world) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_ply(out, depth, color, k, camera_to_world);
  if (!out) throw Error("failed to write " + path.string());
}

Trajectory read_trajectory(std::istream& in, const std::string& source) {
  std::vector<TimedPose> poses;
  for_each_record(in, [&](const std::string& line, std::size_t line_no) {
    const auto x = parse_numbers<8>(line, line_no, source);
    const Eigen::Quaterniond q(x[7], x[4], x[5], x[6]);
    if (std::abs(q.norm() - 1.0) > 1e-3) throw ParseError(source, line_no, "quaternion is not normalized");
    if (!poses.empty() && !(x[0] > poses.back().timestamp))
      throw ParseError(source, line_no, "timestamps must be strictly increasing");
    poses.push_back({x[0], Pose::from_quaternion({x[1], x[2], x[3]}, q)});
  });
  return Trajectory(std::move(poses));
}

Trajectory read_trajectory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_trajectory(in, path.string());
}

void write_trajectory(std::ostream& out, const Trajectory& trajectory) {
  out << "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& p : trajectory.poses()) {
    const Eigen::Quaterniond q(p.pose.R);
    out << fixed(p.timestamp, 6);
    for (double x : {p.pose.t.x(), p.pose.t.y(), p.pose.t.z(), q.x(), q.y(), q.z(), q.w()}) out << ' ' << shortest(x);
    out << '\n';
  }
}

std::vector<MaturePoint> read_points(std::istream& in, const std::string& source) {
  std::vector<MaturePoint> points;
  for_each_record(in, [&](const std::string& line, std::size_t line_no) {
    const auto x = parse_numbers<5>(line, line_no, source);
    if (x[0] != std::floor(x[0])) throw ParseError(source, line_no, "host id must be an integer");
    if (!(x[3] > 0.0)) throw ParseError(source, line_no, "depth must be positive");
    if (!(x[4] >= 0.0)) throw ParseError(source, line_no, "relative baseline must be non-negative");
    points.push_back({static_cast<int>(x[0]), x[1], x[2], x[3], x[4]});
  });
  return points;
}

void write_points(std::ostream& out, const std::vector<MaturePoint>& points) {
  out << "# host_id u v z B_rel\n";
  for (const auto& p : points)
    out << p.host << ' ' << shortest(p.u) << ' ' << shortest(p.v) << ' ' << shortest(p.z) << ' '
        << shortest(p.baseline) << '\n';
}

std::vector<WindowKeyframe> read_window_poses(std::istream& in, const std::string& source) {
  std::vector<WindowKeyframe> keyframes;
  for_each_record(in, [&](const std::string& line, std::size_t line_no) {
    const auto x = parse_numbers<13>(line, line_no, source);
    if (x[0] != std::floor(x[0])) throw ParseError(source, line_no, "host id must be an integer");
    WindowKeyframe kf;
    kf.id = static_cast<int>(x[0]);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) kf.host_to_new.R(r, c) = x[1 + 4 * r + c];
      kf.host_to_new.t[r] = x[1 + 4 * r + 3];
    }
    try {
      kf.host_to_new.validate(1e-6);
    } catch (const InvalidInput& e) {
      throw ParseError(source, line_no, e.what());
    }
    keyframes.push_back(kf);
  });
  return keyframes;
}

void write_window_poses(std::ostream& out, const std::vector<WindowKeyframe>& keyframes) {
  out << "# host_id r11 r12 r13 t1 r21 r22 r23 t2 r31 r32 r33 t3\n";
  for (const auto& kf : keyframes) {
    out << kf.id;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << ' ' << shortest(kf.host_to_new.R(r, c));
      out << ' ' << shortest(kf.host_to_new.t[r]);
    }
    out << '\n';
  }
}

ActiveWindow read_active_window(const fs::path& points, const fs::path& poses) {
  std::ifstream pin(points), kin(poses);
  if (!pin) throw InvalidInput("cannot open " + points.string());
  if (!kin) throw InvalidInput("cannot open " + poses.string());
  ActiveWindow window{read_window_poses(kin, poses.string()), read_points(pin, points.string())};
  window.validate();
  return window;
}

namespace {

struct Stamped {
  double timestamp;
  fs::path path;
};

std::vector<Stamped> read_list(const fs::path& dir, const std::string& name) {
  std::vector<Stamped> entries;
  const fs::path list = dir / (name + ".txt");
  if (fs::exists(list)) {
    std::ifstream in(list);
    for_each_record(in, [&](const std::string& line, std::size_t line_no) {
      std::istringstream ss(line);
      double t = 0.0;
      std::string file;
      if (!(ss >> t >> file)) throw ParseError(list.string(), line_no, "expected 'timestamp filename'");
      if (!fs::exists(dir / file)) throw ParseError(list.string(), line_no, "missing file " + file);
      entries.push_back({t, dir / file});
    });
  } else {
    const fs::path sub = dir / name;
    if (!fs::is_directory(sub)) throw InvalidInput("missing " + sub.string());
    for (const auto& entry : fs::directory_iterator(sub)) {
      if (entry.path().extension() != ".png") continue;
      const std::string stem = entry.path().stem().string();
      double t = 0.0;
      const auto res = std::from_chars(stem.data(), stem.data() + stem.size(), t);
      if (res.ec != std::errc() || res.ptr != stem.data() + stem.size())
        throw ParseError(entry.path().string(), 0, "file name is not a timestamp");
      entries.push_back({t, entry.path()});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Stamped& a, const Stamped& b) { return a.timestamp < b.timestamp; });
  return entries;
}

}  // namespace

TumSequence load_tum_sequence(const fs::path& dir, double max_dt) {
  if (!fs::is_directory(dir)) throw InvalidInput("dataset directory not found: " + dir.string());
  const fs::path gt = dir / "groundtruth.txt";
  if (!fs::exists(gt)) throw InvalidInput("missing " + gt.string());

  TumSequence seq;
  seq.root = dir;
  seq.groundtruth = read_trajectory(gt);
  const auto rgb = read_list(dir, "rgb");
  const auto depth = read_list(dir, "depth");
  for (const auto& c : rgb) {
    auto it = std::lower_bound(depth.begin(), depth.end(), c.timestamp,
                               [](const Stamped& s, double t) { return s.timestamp < t; });
    const Stamped* best = nullptr;
    if (it != depth.end()) best = &*it;
    if (it != depth.begin() && (!best || c.timestamp - std::prev(it)->timestamp < best->timestamp - c.timestamp))
      best = &*std::prev(it);
    if (!best || std::abs(best->timestamp - c.timestamp) > max_dt) continue;
    seq.frames.push_back({c.timestamp, best->timestamp, c.path, best->path});
  }
  return seq;
}

TumImages load_tum_frame(const TumFrame& frame) {
  TumImages images{read_color_png(frame.rgb), read_depth_png(frame.depth)};
  if (!images.color.same_shape(images.depth))
    throw InvalidInput("rgb and depth sizes differ for frame at " + fixed(frame.timestamp, 6));
  return images;
}

void write_tum_sequence(const fs::path& dir, const std::vector<double>& timestamps,
                        const std::vector<TumImages>& frames, const Trajectory& groundtruth) {
  if (timestamps.size() != frames.size()) throw InvalidInput("timestamps and frames differ in count");
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "depth");
  std::ostringstream rgb_list, depth_list, gt;
  rgb_list << "# timestamp filename\n";
  depth_list << "# timestamp filename\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string name = fixed(timestamps[i], 6) + ".png";
    write_color_png(dir / "rgb" / name, frames[i].color);
    write_depth_png(dir / "depth" / name, frames[i].depth);
    rgb_list << fixed(timestamps[i], 6) << " rgb/" << name << '\n';
    depth_list << fixed(timestamps[i], 6) << " depth/" << name << '\n';
  }
  write_trajectory(gt, groundtruth);
  write_text_file(dir / "rgb.txt", rgb_list.str());
  write_text_file(dir / "depth.txt", depth_list.str());
  write_text_file(dir / "groundtruth.txt", gt.str());
}

}  // namespace s2d
