#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "s2d/errors.hpp"

namespace s2d {

/// Zero of T. Eigen types are not zeroed by value initialization.
template <typename T>
T zero_value() {
  if constexpr (std::is_base_of_v<Eigen::DenseBase<T>, T>)
    return T::Zero();
  else
    return T{};
}

/// Dense row-major raster. Pixel (u, v) is column u, row v.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const T& fill = zero_value<T>())
      : width_(width), height_(height), data_(checked_area(width, height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  T& operator()(int u, int v) { return data_[index(u, v)]; }
  const T& operator()(int u, int v) const { return data_[index(u, v)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  template <typename U>
  bool same_shape(const U& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  static std::size_t checked_area(int width, int height) {
    if (width < 0 || height < 0) throw InvalidInput("image dimensions must be non-negative");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Image with an explicit validity mask. Invalid pixels always store zero;
/// the mask is authoritative.
template <typename T, typename Tag>
class MaskedImage {
 public:
  using value_type = T;

  MaskedImage() = default;
  MaskedImage(int width, int height) : values_(width, height, zero_value<T>()), mask_(width, height, 0) {}

  int width() const { return values_.width(); }
  int height() const { return values_.height(); }
  std::size_t size() const { return values_.size(); }
  std::size_t index(int u, int v) const { return values_.index(u, v); }
  bool contains(int u, int v) const { return values_.contains(u, v); }

  bool valid(int u, int v) const { return mask_(u, v) != 0; }
  bool valid(std::size_t i) const { return mask_[i] != 0; }
  const T& operator()(int u, int v) const { return values_(u, v); }
  const T& operator[](std::size_t i) const { return values_[i]; }

  void set(int u, int v, const T& value) { set(index(u, v), value); }
  void set(std::size_t i, const T& value) {
    values_[i] = value;
    mask_[i] = 1;
  }
  void invalidate(int u, int v) { invalidate(index(u, v)); }
  void invalidate(std::size_t i) {
    values_[i] = zero_value<T>();
    mask_[i] = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto m : mask_.pixels()) n += m;
    return n;
  }

  const Image<T>& values() const { return values_; }
  const Image<std::uint8_t>& mask() const { return mask_; }

  template <typename U>
  bool same_shape(const U& other) const {
    return width() == other.width() && height() == other.height();
  }

  bool operator==(const MaskedImage&) const = default;

 private:
  Image<T> values_;
  Image<std::uint8_t> mask_;
};

struct DepthTag;
struct DisparityTag;
struct NormalTag;

/// Metric depth z along the optical axis (meters).
using DepthImage = MaskedImage<double, DepthTag>;
/// Disparity for a (virtual) stereo baseline (pixels).
using DisparityImage = MaskedImage<double, DisparityTag>;
/// Unit surface normals in the camera frame.
using NormalImage = MaskedImage<Eigen::Vector3d, NormalTag>;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

using ColorImage = Image<Rgb>;

/// Stores value if it is a usable depth (finite and > 0), otherwise marks the pixel invalid.
template <typename Tag>
inline void assign_positive(MaskedImage<double, Tag>& img, std::size_t i, double value) {
  if (value > 0.0 && value < std::numeric_limits<double>::infinity())
    img.set(i, value);
  else
    img.invalidate(i);
}

}  // namespace s2d
