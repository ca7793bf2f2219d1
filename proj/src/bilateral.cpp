#include <cmath>
#include <vector>

#include "s2d/sparse2dense.hpp"

namespace s2d {

void BilateralParams::validate() const {
  if (radius < 1) throw InvalidInput("bilateral radius must be >= 1");
  if (!(spatial_sigma > 0.0) || !(range_sigma > 0.0)) throw InvalidInput("bilateral sigmas must be positive");
}

DepthImage bilateral_depth_filter(const DepthImage& depth, const ColorImage& image, const BilateralParams& params,
                                  Parallelism par) {
  params.validate();
  if (!depth.same_shape(image)) throw InvalidInput("depth and color images differ in size");
  const int w = depth.width();
  const int h = depth.height();
  const int r = params.radius;
  const int side = 2 * r + 1;

  std::vector<double> spatial(static_cast<std::size_t>(side * side));
  for (int dv = -r; dv <= r; ++dv)
    for (int du = -r; du <= r; ++du)
      spatial[static_cast<std::size_t>((dv + r) * side + du + r)] =
          std::exp(-(du * du + dv * dv) / (2.0 * params.spatial_sigma * params.spatial_sigma));
  const double range_scale = -1.0 / (2.0 * params.range_sigma * params.range_sigma);

  DepthImage out(w, h);
  parallel_rows(h, par, [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v) {
      for (int u = 0; u < w; ++u) {
        const Rgb ci = image(u, v);
        double weighted = 0.0;
        double weights = 0.0;
        for (int sv = std::max(0, v - r); sv <= std::min(h - 1, v + r); ++sv) {
          for (int su = std::max(0, u - r); su <= std::min(w - 1, u + r); ++su) {
            if (!depth.valid(su, sv)) continue;
            const Rgb cj = image(su, sv);
            const double dr = double(ci.r) - cj.r;
            const double dg = double(ci.g) - cj.g;
            const double db = double(ci.b) - cj.b;
            const double wgt = spatial[static_cast<std::size_t>((sv - v + r) * side + su - u + r)] *
                               std::exp((dr * dr + dg * dg + db * db) * range_scale);
            weighted += wgt * depth(su, sv);
            weights += wgt;
          }
        }
        const std::size_t i = depth.index(u, v);
        const double z = weights > 0.0 ? weighted / weights : 0.0;
        if (z > 0.0 && std::isfinite(z))
          out.set(i, z);
        else if (depth.valid(i))
          out.set(i, depth[i]);
      }
    }
  });
  return out;
}

}  // namespace s2d
