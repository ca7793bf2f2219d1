#include "s2d/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

namespace s2d {

std::string to_string(InputMode mode) { return mode == InputMode::synthetic ? "synthetic" : "tum"; }

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidInput("invalid value '" + text + "' for key '" + key + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidInput("invalid boolean '" + text + "' for key '" + key + "'");
}

std::string show(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
std::string show(int x) { return std::to_string(x); }
std::string show(std::uint64_t x) { return std::to_string(x); }
std::string show(bool x) { return x ? "true" : "false"; }
std::string show(const std::string& x) { return x; }

struct Field {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

template <typename T>
Field field(std::string key, T PipelineConfig::*member) {
  return {key, [member](const PipelineConfig& c) { return show(c.*member); },
          [member, key](PipelineConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, bool>)
              c.*member = parse_bool(key, v);
            else if constexpr (std::is_same_v<T, std::string>)
              c.*member = v;
            else
              c.*member = parse_number<T>(key, v);
          }};
}

// Nested members: `Access` returns a reference to the field inside the config.
template <typename Access>
Field nested(std::string key, Access access) {
  using T = std::remove_reference_t<decltype(access(std::declval<PipelineConfig&>()))>;
  return {key, [access](const PipelineConfig& c) { return show(access(const_cast<PipelineConfig&>(c))); },
          [access, key](PipelineConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, bool>)
              access(c) = parse_bool(key, v);
            else
              access(c) = parse_number<T>(key, v);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"mode", [](const PipelineConfig& c) { return to_string(c.mode); },
       [](PipelineConfig& c, const std::string& v) {
         if (v == "synthetic")
           c.mode = InputMode::synthetic;
         else if (v == "tum")
           c.mode = InputMode::tum;
         else
           throw InvalidInput("mode must be 'synthetic' or 'tum', got '" + v + "'");
       }},
      field("scene", &PipelineConfig::scene),
      field("dataset", &PipelineConfig::dataset),
      field("output", &PipelineConfig::output),
      nested("fx", [](PipelineConfig& c) -> double& { return c.camera.fx; }),
      nested("fy", [](PipelineConfig& c) -> double& { return c.camera.fy; }),
      nested("cx", [](PipelineConfig& c) -> double& { return c.camera.cx; }),
      nested("cy", [](PipelineConfig& c) -> double& { return c.camera.cy; }),
      nested("width", [](PipelineConfig& c) -> int& { return c.camera.width; }),
      nested("height", [](PipelineConfig& c) -> int& { return c.camera.height; }),
      field("frames", &PipelineConfig::frames),
      field("keyframe_interval", &PipelineConfig::keyframe_interval),
      field("max_keyframes", &PipelineConfig::max_keyframes),
      field("window_keyframes", &PipelineConfig::window_keyframes),
      field("points_per_superpixel", &PipelineConfig::points_per_superpixel),
      field("point_seed", &PipelineConfig::point_seed),
      nested("coplanarity", [](PipelineConfig& c) -> double& { return c.densify.filter.coplanarity; }),
      nested("window", [](PipelineConfig& c) -> int& { return c.densify.filter.window; }),
      nested("filter_iterations", [](PipelineConfig& c) -> int& { return c.densify.filter.iterations; }),
      nested("superpixel_size", [](PipelineConfig& c) -> int& { return c.densify.superpixel.region_size; }),
      nested("compactness", [](PipelineConfig& c) -> double& { return c.densify.superpixel.compactness; }),
      nested("superpixel_iterations", [](PipelineConfig& c) -> int& { return c.densify.superpixel.iterations; }),
      nested("bilateral", [](PipelineConfig& c) -> bool& { return c.densify.bilateral_step; }),
      nested("bilateral_radius", [](PipelineConfig& c) -> int& { return c.densify.bilateral.radius; }),
      nested("bilateral_spatial_sigma", [](PipelineConfig& c) -> double& { return c.densify.bilateral.spatial_sigma; }),
      nested("bilateral_range_sigma", [](PipelineConfig& c) -> double& { return c.densify.bilateral.range_sigma; }),
      nested("noise_scale", [](PipelineConfig& c) -> double& { return c.noise.global_scale; }),
      nested("noise_gaussian_rel", [](PipelineConfig& c) -> double& { return c.noise.gaussian_rel; }),
      nested("noise_dropout", [](PipelineConfig& c) -> double& { return c.noise.dropout; }),
      nested("noise_normal_angle", [](PipelineConfig& c) -> double& { return c.noise.normal_angle_noise; }),
      nested("noise_seed", [](PipelineConfig& c) -> std::uint64_t& { return c.noise.seed; }),
      nested("loss_alpha", [](PipelineConfig& c) -> double& { return c.loss.alpha; }),
      nested("loss_beta", [](PipelineConfig& c) -> double& { return c.loss.beta; }),
      nested("loss_gamma", [](PipelineConfig& c) -> double& { return c.loss.gamma; }),
      nested("huber_delta_rel", [](PipelineConfig& c) -> double& { return c.loss.huber_delta_rel; }),
      nested("baseline", [](PipelineConfig& c) -> double& { return c.loss.baseline; }),
      nested("f_train", [](PipelineConfig& c) -> double& { return c.loss.f_train; }),
      field("refine", &PipelineConfig::refine),
      field("sigma_floor", &PipelineConfig::sigma_floor),
      field("obs_sigma2", &PipelineConfig::obs_sigma2),
      field("min_inlier_ratio", &PipelineConfig::min_inlier_ratio),
      field("max_sigma", &PipelineConfig::max_sigma),
      field("workers", &PipelineConfig::workers),
      field("write_ply", &PipelineConfig::write_ply),
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  throw InvalidInput("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, trim(value));
}

std::string get_config_value(const PipelineConfig& config, const std::string& key) {
  return find_field(key).get(config);
}

void PipelineConfig::validate() const {
  camera.validate();
  if (mode == InputMode::tum && dataset.empty()) throw InvalidInput("tum mode needs a dataset directory");
  if (mode == InputMode::synthetic && scene.empty()) throw InvalidInput("synthetic mode needs a scene");
  if (frames < 1) throw InvalidInput("frames must be >= 1");
  if (keyframe_interval < 1) throw InvalidInput("keyframe_interval must be >= 1");
  if (max_keyframes < 0) throw InvalidInput("max_keyframes must be >= 0");
  if (window_keyframes < 1) throw InvalidInput("window_keyframes must be >= 1");
  if (points_per_superpixel < 1) throw InvalidInput("points_per_superpixel must be >= 1");
  densify.filter.validate();
  densify.superpixel.validate();
  densify.bilateral.validate();
  noise.validate();
  loss.validate();
  if (!(sigma_floor > 0.0) || !(obs_sigma2 > 0.0) || !(max_sigma > 0.0))
    throw InvalidInput("refinement variances must be positive");
  if (!(min_inlier_ratio >= 0.0 && min_inlier_ratio <= 1.0)) throw InvalidInput("min_inlier_ratio must lie in [0, 1]");
  if (workers < 1) throw InvalidInput("workers must be >= 1");
}

PipelineConfig parse_config(std::string_view text, const std::string& source) {
  PipelineConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    try {
      set_config_value(config, trim(std::string_view(body).substr(0, eq)), body.substr(eq + 1));
    } catch (const ParseError&) {
      throw;
    } catch (const InvalidInput& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return config;
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace s2d
