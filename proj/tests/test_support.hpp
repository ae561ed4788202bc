#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clpu/series.hpp"

namespace testsup {

/// splitmix64 of i mapped to [-0.5, 0.5); matches the Python oracle scripts
/// that produced the frozen reference values.
inline double hash_uniform(std::uint64_t i) {
  std::uint64_t z = i * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z) / 18446744073709551616.0 - 0.5;
}

/// Canonical frozen AR(1) path: x[0]=0.7, x[t] = 0.6 x[t-1] + u(t), n=200.
inline std::vector<double> frozen_ar_series() {
  std::vector<double> x(200);
  x[0] = 0.7;
  for (std::size_t t = 1; t < x.size(); ++t) x[t] = 0.6 * x[t - 1] + hash_uniform(t);
  return x;
}

inline clpu::EnergySeries as_series(std::vector<double> values, clpu::Timestamp start = 0,
                                    int resolution_minutes = 15) {
  clpu::EnergySeries s;
  s.start_time = start;
  s.resolution_minutes = resolution_minutes;
  s.values = std::move(values);
  return s;
}

/// Fresh scratch directory under the system temp root, wiped on construction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("clpu_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testsup
