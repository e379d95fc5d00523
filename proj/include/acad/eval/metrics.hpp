// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace acad::eval {

inline constexpr double kMetricCapDb = 100.0;

/// Scale-invariant SDR in dB with zero-mean inputs, clamped to +-100 dB.
double si_sdr(std::span<const double> reference, std::span<const double> estimate);
/// Plain energy-ratio SDR in dB, clamped to +-100 dB.
double sdr(std::span<const double> reference, std::span<const double> estimate);

/// Mean silhouette coefficient of `labels` over points (Euclidean distance).
double silhouette_score(const std::vector<std::vector<double>>& points, const std::vector<int>& labels);

}  // namespace acad::eval
