// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "acad/eval/evaluate.hpp"
#include "acad/eval/metrics.hpp"
#include "test_support.hpp"

using namespace acad;
using namespace acad::eval;
using acad::testing::code_of;

TEST_CASE("metric oracles") {
  const auto x = testing::random_signal(1000, 1);
  std::vector<double> half(x), zero(x.size(), 0.0), twice(x);
  for (double& v : half) v *= 0.5;
  for (double& v : twice) v *= 2.0;
  CHECK(sdr(x, half) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
  CHECK(std::abs(sdr(x, zero)) < 1e-9);
  CHECK(sdr(x, x) == kMetricCapDb);
  CHECK(si_sdr(x, x) == kMetricCapDb);
  CHECK(si_sdr(x, twice) == kMetricCapDb);
  CHECK(sdr(x, twice) < kMetricCapDb);
  CHECK(sdr(x, twice) == doctest::Approx(0.0).epsilon(1e-9));

  // Zero-mean orthogonal pair: nothing of the reference survives.
  std::vector<double> a{1.0, -1.0, 0.0, 0.0}, b{0.0, 0.0, 1.0, -1.0};
  CHECK(si_sdr(a, b) == -kMetricCapDb);

  // A known noise level, and invariance to an offset.
  auto noisy = testing::random_signal(1000, 2, 0.03);
  for (std::size_t i = 0; i < x.size(); ++i) noisy[i] += x[i];
  const double base = si_sdr(x, noisy);
  CHECK(base > 15.0);
  CHECK(base < 25.0);
  auto shifted = noisy;
  for (double& v : shifted) v = 3.0 * v + 0.25;
  CHECK(si_sdr(x, shifted) == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("summaries and run aggregation") {
  std::vector<PairMetrics> pairs{{"a", "park", 10.0, 8.0}, {"b", "park", 12.0, 8.0}, {"c", "street", 5.0, 4.0}};
  const auto rows = summarize("oracle", "1", pairs);
  REQUIRE(rows.size() == 3);
  const auto park = std::find_if(rows.begin(), rows.end(), [](const EvalRow& r) { return r.scene == "park"; });
  CHECK(park->si_sdr_mean == 11.0);
  CHECK(park->si_sdr_std == 1.0);
  CHECK(rows.back().scene == kAllScenes);
  CHECK(rows.back().si_sdr_mean == doctest::Approx(9.0));
  CHECK(code_of([] { summarize("x", "1", {}); }) == ErrorCode::EmptyDataset);

  const auto r1 = summarize("oracle", "1", {{"a", "park", 10.0, 9.0}});
  const auto r2 = summarize("oracle", "2", {{"a", "park", 12.0, 9.0}});
  const auto agg = aggregate_runs({r1, r2});
  const auto all = std::find_if(agg.begin(), agg.end(), [](const EvalRow& r) { return r.scene == kAllScenes; });
  REQUIRE(all != agg.end());
  CHECK(all->run == kAllRuns);
  CHECK(all->si_sdr_mean == 11.0);
  CHECK(all->si_sdr_std == 1.0);
  CHECK(all->sdr_std == 0.0);
  CHECK(report_to_csv(aggregate_runs({r2, r1})) == report_to_csv(agg));
  CHECK(code_of([&] { aggregate_runs({r1}); }) == ErrorCode::InsufficientRuns);
  CHECK(code_of([&] { aggregate_runs({r1, r1}); }) == ErrorCode::InsufficientRuns);

  const auto text = report_to_csv(agg);
  CHECK(report_to_csv(report_from_csv(text)) == text);
  CHECK(report_to_csv(report_from_csv("# provenance line\n" + text)) == text);
}

TEST_CASE("silhouette") {
  const std::vector<std::vector<double>> pts{{0.0, 0.0}, {0.0, 1.0}, {10.0, 0.0}, {10.0, 1.0}};
  const double s = silhouette_score(pts, {0, 0, 1, 1});
  CHECK(s > 0.9);
  CHECK(s <= 1.0);
  CHECK(silhouette_score(pts, {0, 1, 0, 1}) < 0.0);

  std::vector<BottleneckRow> rows{{"a", "park", {0.0, 0.0}}, {"b", "park", {0.0, 1.0}},
                                  {"c", "street", {10.0, 0.0}}, {"d", "street", {10.0, 1.0}}};
  CHECK(bottleneck_silhouette(rows) == doctest::Approx(s));
  const auto back = bottleneck_from_csv(bottleneck_to_csv(rows));
  REQUIRE(back.size() == 4);
  CHECK(back[2].scene == "street");
  CHECK(back[3].features == rows[3].features);
}
