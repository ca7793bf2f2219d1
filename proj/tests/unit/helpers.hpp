#pragma once

#include <doctest.h>

#include <filesystem>
#include <string>

#include "s2d/image.hpp"

namespace testing {

inline s2d::DepthImage constant_depth(int w, int h, double z) {
  s2d::DepthImage d(w, h);
  for (std::size_t i = 0; i < d.size(); ++i) d.set(i, z);
  return d;
}

/// Fresh scratch directory, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("s2d_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
