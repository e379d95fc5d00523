// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "acad/core/error.hpp"
#include "acad/core/rng.hpp"

namespace acad::testing {

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

inline std::vector<double> sine(double freq, double amp, int rate, double seconds) {
  std::vector<double> x(static_cast<std::size_t>(seconds * rate));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  return x;
}

/// Fresh per-test directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("acad_unit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an acad::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace acad::testing
