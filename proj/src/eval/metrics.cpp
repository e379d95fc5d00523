// SPDX-License-Identifier: Apache-2.0
#include "acad/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "acad/core/error.hpp"

namespace acad::eval {

namespace {

void check_pair(std::span<const double> reference, std::span<const double> estimate) {
  require(reference.size() == estimate.size() && !reference.empty(), ErrorCode::DimensionMismatch,
          "reference and estimate lengths differ");
}

// Zero energies are floored at the smallest normal double, so an exact
// estimate lands on the +100 dB cap and an orthogonal one on the floor.
double capped_db(double num, double den) {
  constexpr double tiny = std::numeric_limits<double>::min();
  return std::clamp(10.0 * std::log10(std::max(num, tiny) / std::max(den, tiny)), -kMetricCapDb, kMetricCapDb);
}

}  // namespace

double si_sdr(std::span<const double> reference, std::span<const double> estimate) {
  check_pair(reference, estimate);
  const auto n = static_cast<double>(reference.size());
  double mr = 0.0, me = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    mr += reference[i];
    me += estimate[i];
  }
  mr /= n;
  me /= n;
  double rr = 0.0, re = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rr += (reference[i] - mr) * (reference[i] - mr);
    re += (reference[i] - mr) * (estimate[i] - me);
  }
  require(rr > 0.0, ErrorCode::SilentReference, "si_sdr: reference is silent");
  const double alpha = re / rr;
  double ss = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * (reference[i] - mr);
    const double e = (estimate[i] - me) - s;
    ss += s * s;
    ee += e * e;
  }
  // Nothing of the reference survives in the estimate.
  if (ss == 0.0) return -kMetricCapDb;
  return capped_db(ss, ee);
}

double sdr(std::span<const double> reference, std::span<const double> estimate) {
  check_pair(reference, estimate);
  double rr = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rr += reference[i] * reference[i];
    const double d = reference[i] - estimate[i];
    ee += d * d;
  }
  require(rr > 0.0, ErrorCode::SilentReference, "sdr: reference is silent");
  return capped_db(rr, ee);
}

double silhouette_score(const std::vector<std::vector<double>>& points, const std::vector<int>& labels) {
  require(points.size() == labels.size() && points.size() >= 2, ErrorCode::InvalidArgument,
          "silhouette needs at least two labelled points");
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  require(sizes.size() >= 2, ErrorCode::InvalidArgument, "silhouette needs at least two clusters");
  const std::size_t n = points.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const double d = points[i][k] - points[j][k];
        acc += d * d;
      }
      dist[i * n + j] = dist[j * n + i] = std::sqrt(acc);
    }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[labels[i]] < 2) continue;  // singleton clusters score 0
    std::map<int, double> sum;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[labels[j]] += dist[i * n + j];
    const double a = sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [l, s] : sum)
      if (l != labels[i]) b = std::min(b, s / static_cast<double>(sizes[l]));
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace acad::eval
