#include "s2d/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

namespace s2d {

void SuperpixelParams::validate() const {
  if (region_size < 1) throw InvalidInput("superpixel region size must be >= 1");
  if (!(compactness >= 0.0)) throw InvalidInput("superpixel compactness must be non-negative");
  if (iterations < 1) throw InvalidInput("superpixel iterations must be >= 1");
}

Eigen::Vector3d rgb_to_lab(Rgb c) {
  auto linear = [](std::uint8_t channel) {
    const double s = channel / 255.0;
    return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
  };
  const double r = linear(c.r), g = linear(c.g), b = linear(c.b);
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0; };
  const double fx = f(x), fy = f(y), fz = f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

namespace {

struct Center {
  Eigen::Vector3d lab;
  double u = 0.0;
  double v = 0.0;
};

double gradient_at(const std::vector<Eigen::Vector3d>& lab, int w, int h, int u, int v) {
  const auto at = [&](int uu, int vv) -> const Eigen::Vector3d& {
    uu = std::clamp(uu, 0, w - 1);
    vv = std::clamp(vv, 0, h - 1);
    return lab[static_cast<std::size_t>(vv) * w + uu];
  };
  return (at(u + 1, v) - at(u - 1, v)).squaredNorm() + (at(u, v + 1) - at(u, v - 1)).squaredNorm();
}

std::vector<Center> grid_centers(const std::vector<Eigen::Vector3d>& lab, int w, int h, int nx, int ny) {
  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int u = static_cast<int>((i + 0.5) * w / nx);
      int v = static_cast<int>((j + 0.5) * h / ny);
      // Move off edges: pick the lowest-gradient pixel in the 3x3 neighbourhood.
      int best_u = u, best_v = v;
      double best = gradient_at(lab, w, h, u, v);
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const int uu = u + du, vv = v + dv;
          if (uu < 0 || vv < 0 || uu >= w || vv >= h) continue;
          const double g = gradient_at(lab, w, h, uu, vv);
          if (g < best) {
            best = g;
            best_u = uu;
            best_v = vv;
          }
        }
      }
      centers.push_back({lab[static_cast<std::size_t>(best_v) * w + best_u], double(best_u), double(best_v)});
    }
  }
  return centers;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

// Splits k-means clusters into 4-connected components and absorbs small fragments.
Image<std::int32_t> enforce_connectivity(const Image<std::int32_t>& assignment,
                                         const std::vector<Eigen::Vector3d>& lab, std::size_t min_size,
                                         int& count) {
  const int w = assignment.width();
  const int h = assignment.height();
  Image<std::int32_t> component(w, h, -1);
  std::vector<std::size_t> sizes;
  std::vector<Eigen::Vector3d> color_sums;
  std::deque<std::pair<int, int>> queue;
  constexpr int du[4] = {-1, 1, 0, 0};
  constexpr int dv[4] = {0, 0, -1, 1};

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (component(u, v) >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      color_sums.emplace_back(Eigen::Vector3d::Zero());
      component(u, v) = id;
      queue.emplace_back(u, v);
      while (!queue.empty()) {
        const auto [cu, cv] = queue.front();
        queue.pop_front();
        ++sizes[id];
        color_sums[id] += lab[component.index(cu, cv)];
        for (int d = 0; d < 4; ++d) {
          const int nu = cu + du[d], nv = cv + dv[d];
          if (!component.contains(nu, nv) || component(nu, nv) >= 0) continue;
          if (assignment(nu, nv) != assignment(cu, cv)) continue;
          component(nu, nv) = id;
          queue.emplace_back(nu, nv);
        }
      }
    }
  }

  const int n = static_cast<int>(sizes.size());
  std::vector<std::vector<int>> adjacent(static_cast<std::size_t>(n));
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int a = component(u, v);
      if (u + 1 < w && component(u + 1, v) != a) {
        adjacent[a].push_back(component(u + 1, v));
        adjacent[component(u + 1, v)].push_back(a);
      }
      if (v + 1 < h && component(u, v + 1) != a) {
        adjacent[a].push_back(component(u, v + 1));
        adjacent[component(u, v + 1)].push_back(a);
      }
    }
  }

  UnionFind sets(n);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) members[c] = {c};
  for (int c = 0; c < n; ++c) {
    int root = sets.find(c);
    while (sizes[root] < min_size) {
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      const Eigen::Vector3d mean = color_sums[root] / double(sizes[root]);
      for (int member : members[root]) {
        for (int other : adjacent[member]) {
          const int other_root = sets.find(other);
          if (other_root == root) continue;
          const double dist = (color_sums[other_root] / double(sizes[other_root]) - mean).squaredNorm();
          if (dist < best_dist || (dist == best_dist && other_root < best)) {
            best_dist = dist;
            best = other_root;
          }
        }
      }
      if (best < 0) break;
      const int merged = std::min(root, best);
      const int absorbed = std::max(root, best);
      sets.parent[absorbed] = merged;
      sizes[merged] += sizes[absorbed];
      color_sums[merged] += color_sums[absorbed];
      members[merged].insert(members[merged].end(), members[absorbed].begin(), members[absorbed].end());
      members[absorbed].clear();
      root = merged;
    }
  }

  Image<std::int32_t> labels(w, h, -1);
  std::vector<int> renumber(static_cast<std::size_t>(n), -1);
  count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int root = sets.find(component[i]);
    if (renumber[root] < 0) renumber[root] = count++;
    labels[i] = renumber[root];
  }
  return labels;
}

}  // namespace

SuperpixelLabels superpixel_segment(const ColorImage& image, const SuperpixelParams& params) {
  params.validate();
  if (image.empty()) throw InvalidInput("superpixel segmentation needs a non-empty image");
  const int w = image.width();
  const int h = image.height();

  std::vector<Eigen::Vector3d> lab(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) lab[i] = rgb_to_lab(image[i]);

  const int nx = std::max(1, static_cast<int>(std::lround(double(w) / params.region_size)));
  const int ny = std::max(1, static_cast<int>(std::lround(double(h) / params.region_size)));
  std::vector<Center> centers = grid_centers(lab, w, h, nx, ny);
  const double step = std::sqrt(double(w) * h / (double(nx) * ny));
  const int reach = static_cast<int>(std::ceil(step));
  const double spatial_weight = (params.compactness / step) * (params.compactness / step);

  Image<std::int32_t> assignment(w, h, -1);
  std::vector<double> distance(image.size());
  for (int it = 0; it < params.iterations; ++it) {
    std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const Center& center = centers[c];
      const int cu = static_cast<int>(std::lround(center.u));
      const int cv = static_cast<int>(std::lround(center.v));
      for (int v = std::max(0, cv - reach); v <= std::min(h - 1, cv + reach); ++v) {
        for (int u = std::max(0, cu - reach); u <= std::min(w - 1, cu + reach); ++u) {
          const std::size_t i = assignment.index(u, v);
          const double ds = (u - center.u) * (u - center.u) + (v - center.v) * (v - center.v);
          const double d = (lab[i] - center.lab).squaredNorm() + ds * spatial_weight;
          if (d < distance[i]) {
            distance[i] = d;
            assignment[i] = static_cast<std::int32_t>(c);
          }
        }
      }
    }
    // Pixels out of every search window fall back to the spatially nearest center.
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = assignment.index(u, v);
        if (assignment[i] >= 0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
          const double ds = (u - centers[c].u) * (u - centers[c].u) + (v - centers[c].v) * (v - centers[c].v);
          if (ds < best) {
            best = ds;
            assignment[i] = static_cast<std::int32_t>(c);
          }
        }
      }
    }

    std::vector<Center> sums(centers.size(), Center{Eigen::Vector3d::Zero(), 0.0, 0.0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const std::size_t i = assignment.index(u, v);
        Center& s = sums[static_cast<std::size_t>(assignment[i])];
        s.lab += lab[i];
        s.u += u;
        s.v += v;
        ++counts[static_cast<std::size_t>(assignment[i])];
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      const double n = double(counts[c]);
      centers[c] = {sums[c].lab / n, sums[c].u / n, sums[c].v / n};
    }
  }

  const auto min_size = static_cast<std::size_t>(std::max(1.0, step * step / 4.0));
  SuperpixelLabels out;
  out.labels = enforce_connectivity(assignment, lab, min_size, out.count);
  return out;
}

}  // namespace s2d
