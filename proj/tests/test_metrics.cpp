// Copyright 2026 The WattLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "properties.hpp"
#include "test_support.hpp"
#include "wattlens/metrics.hpp"

using namespace wattlens;
using wattlens::testing::error_code_of;

namespace {

TraceResult result(std::string id, double total, std::size_t tokens = 10) {
  TraceResult r;
  r.trace_id = std::move(id);
  r.model_name = "m";
  r.breakdown.prefill_j = total / 2;
  r.breakdown.decode_j = total / 2;
  r.breakdown.total_j = total;
  r.breakdown.prefill_fraction = 0.5;
  r.breakdown.decode_token_count = tokens - 1;
  r.output_tokens = tokens;
  return r;
}

std::vector<TokenEnergy> series(std::size_t n, double prefill, double a, double b) {
  std::vector<TokenEnergy> out;
  for (std::size_t i = 1; i <= n; ++i) {
    TokenEnergy e;
    e.index = static_cast<std::int64_t>(i);
    e.energy_j = i == 1 ? prefill : a + b * static_cast<double>(i - 2);
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("energy_per_token") {
  CHECK(energy_per_token(300.0, 100) == 3.0);
  CHECK(energy_per_token(0.0, 5) == 0.0);
  CHECK(error_code_of([] { energy_per_token(1.0, 0); }) == ErrorCode::kZeroTokens);
}

TEST_CASE("percent_increase") {
  const double pct = percent_increase(5.22, 8.59);
  CHECK(pct == doctest::Approx((8.59 / 5.22 - 1.0) * 100.0));
  CHECK(std::abs(pct - 64.5) <= 0.1);
  CHECK(percent_increase(2.0, 2.0) == 0.0);
  CHECK(percent_increase(4.0, 3.0) == doctest::Approx(-25.0));
  CHECK(error_code_of([] { percent_increase(0.0, 1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("energy_per_decode_token") {
  PhaseBreakdown b;
  b.prefill_j = 10.0;
  b.decode_j = 6.0;
  b.total_j = 16.0;
  b.decode_token_count = 3;
  CHECK(energy_per_decode_token(b) == 2.0);
  b.decode_j = 0.0;
  CHECK(energy_per_decode_token(b) == 0.0);
  b.decode_token_count = 0;
  CHECK(error_code_of([&] { energy_per_decode_token(b); }) == ErrorCode::kNoDecodeTokens);
}

TEST_CASE("noiseless decoding series is fitted exactly") {
  const auto trend = fit_decoding_trend(series(50, 9.0, 2.0, 0.01));
  CHECK(trend.points == 49);
  CHECK(trend.slope_j_per_token == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(trend.intercept_j == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(trend.first_fit_j == trend.intercept_j);
  CHECK(trend.last_fit_j == doctest::Approx(2.0 + 0.01 * 48).epsilon(1e-12));
  CHECK(trend.r2 == 1.0);
  CHECK(trend.growth_pct == doctest::Approx(100.0 * 0.48 / 2.0));
}

TEST_CASE("trend excludes estimated tokens unless asked") {
  auto e = series(6, 5.0, 1.0, 1.0);
  e[3].estimated = true;
  e[3].energy_j = 100.0;
  CHECK(decode_points(e).size() == 4);
  CHECK(fit_decoding_trend(e).slope_j_per_token == doctest::Approx(1.0));
  CHECK(decode_points(e, {.include_estimated = true}).size() == 5);
  // The fitted endpoint stays at the last decode ordinal even when that token is dropped.
  e[5].estimated = true;
  CHECK(fit_decoding_trend(e).last_fit_j == doctest::Approx(5.0));
}

TEST_CASE("trend needs two distinct ordinals") {
  CHECK(error_code_of([] { fit_decoding_trend(series(2, 1, 1, 0)); }) == ErrorCode::kInsufficientPoints);
  const std::vector<DecodePoint> same{{3.0, 1.0}, {3.0, 2.0}};
  CHECK(error_code_of([&] { fit_trend(same); }) == ErrorCode::kInsufficientPoints);
}

TEST_CASE("amplification") {
  DecodingTrend base, longer;
  base.intercept_j = 4.54;
  longer.intercept_j = 4.60;
  auto r = amplification(base, longer, "0-shot", "CU-long");
  CHECK(std::abs(r.amplification_pct - 1.3) <= 0.1);
  CHECK(r.amplification_pct == doctest::Approx((4.60 - 4.54) / 4.54 * 100.0));
  CHECK(r.baseline_workload == "0-shot");

  base.intercept_j = 5.10;
  longer.intercept_j = 7.74;
  r = amplification(base, longer);
  CHECK(std::abs(r.amplification_pct - 51.8) <= 0.2);
  CHECK(r.amplification_pct == doctest::Approx((7.74 - 5.10) / 5.10 * 100.0));

  longer.intercept_j = 5.10;
  CHECK(amplification(base, longer).amplification_pct == 0.0);

  base.intercept_j = 0.0;
  CHECK(error_code_of([&] { amplification(base, longer); }) == ErrorCode::kNonPositiveIntercept);
}

TEST_CASE("detect_babbling") {
  auto r = detect_babbling(300.0, 300);
  CHECK(r.mean_budget_utilization == 1.0);
  CHECK(r.is_babbler);
  r = detect_babbling(1989.0, 2000);
  CHECK(r.mean_budget_utilization == doctest::Approx(0.9945));
  CHECK(r.is_babbler);
  r = detect_babbling(120.0, 300);
  CHECK(r.mean_budget_utilization == doctest::Approx(0.40));
  CHECK_FALSE(r.is_babbler);
  const std::vector<std::size_t> lengths{300, 290, 300};
  CHECK(detect_babbling(lengths, 300).is_babbler);
  CHECK(detect_babbling(400.0, 300).mean_budget_utilization == 1.0);
  CHECK(error_code_of([] { detect_babbling(1.0, 300, 0.0); }) == ErrorCode::kInvalidArgument);
  CHECK(error_code_of([] { detect_babbling(1.0, 0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("quantile agrees with the order-statistics oracle") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_real_distribution<double> value(-100.0, 100.0);
  std::uniform_real_distribution<double> q(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = value(rng);
    const double qq = i % 5 == 0 ? 0.25 : q(rng);
    CHECK(quantile(v, qq) == doctest::Approx(oracle::quantile(v, qq)).epsilon(1e-12));
  }
  const std::vector<double> totals{10, 11, 12, 100};
  CHECK(quantile(totals, 0.25) == doctest::Approx(10.75));
  CHECK(quantile(totals, 0.75) == doctest::Approx(34.0));
}

TEST_CASE("iqr_outliers") {
  const std::vector<double> totals{10, 11, 12, 100};
  // Q1 10.75, Q3 34, IQR 23.25, fences -24.125 and 68.875.
  const double q1 = oracle::quantile(totals, 0.25);
  const double q3 = oracle::quantile(totals, 0.75);
  CHECK(q3 + 1.5 * (q3 - q1) == doctest::Approx(68.875));
  CHECK(iqr_outliers(totals) == std::vector<std::size_t>{3});
  const std::vector<double> flat{5, 5, 5};
  CHECK(iqr_outliers(flat).empty());
}

TEST_CASE("mean_std uses the sample standard deviation") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto ms = mean_std(v);
  CHECK(ms.mean == 5.0);
  CHECK(ms.std == doctest::Approx(std::sqrt(32.0 / 7.0)));
  const std::vector<double> one{3.5};
  CHECK(mean_std(one).std == 0.0);
}

TEST_CASE("aggregate_workload") {
  std::vector<TraceResult> four{result("a", 10), result("b", 11), result("c", 12), result("d", 100)};

  SUBCASE("IQR removes the extreme trace") {
    const auto s = aggregate_workload(four, OutlierRule::kIqr15);
    CHECK(s.n_outliers_removed == 1);
    CHECK(s.removed_trace_ids == std::vector<std::string>{"d"});
    CHECK(s.n_traces == 3);
    CHECK(s.total_j.mean == doctest::Approx(11.0));
    CHECK(s.total_j.std == doctest::Approx(1.0));
  }
  SUBCASE("no outlier rule") {
    const auto s = aggregate_workload(four, OutlierRule::kNone);
    CHECK(s.n_outliers_removed == 0);
    CHECK(s.total_j.mean == doctest::Approx(33.25));
  }
  SUBCASE("single trace") {
    const auto s = aggregate_workload({result("only", 42, 7)}, OutlierRule::kIqr15);
    CHECK(s.n_traces == 1);
    CHECK(s.n_outliers_removed == 0);
    CHECK(s.total_j.mean == 42.0);
    CHECK(s.total_j.std == 0.0);
    CHECK(s.energy_per_token_j.mean == 6.0);
    CHECK(s.energy_per_token_j.std == 0.0);
  }
  SUBCASE("order of input does not matter") {
    std::vector<TraceResult> shuffled{four[2], four[3], four[0], four[1]};
    const auto a = aggregate_workload(four, OutlierRule::kIqr15);
    const auto b = aggregate_workload(shuffled, OutlierRule::kIqr15);
    CHECK(a.total_j.mean == b.total_j.mean);
    CHECK(a.total_j.std == b.total_j.std);
  }
  SUBCASE("pooled and mean per-trace trends") {
    std::vector<TraceResult> rs{result("a", 10), result("b", 10)};
    for (int t = 0; t < 2; ++t) {
      for (int x = 1; x <= 9; ++x) rs[t].decode_points.push_back({double(x), 2.0 + t + 0.5 * x});
      rs[t].trend = fit_trend(rs[t].decode_points);
    }
    const auto s = aggregate_workload(rs, OutlierRule::kNone);
    REQUIRE(s.pooled_trend.has_value());
    CHECK(s.pooled_trend->slope_j_per_token == doctest::Approx(0.5));
    CHECK(s.pooled_trend->intercept_j == doctest::Approx(3.0));
    CHECK(*s.mean_trace_intercept_j == doctest::Approx(3.0));
    CHECK(*s.mean_trace_slope_j_per_token == doctest::Approx(0.5));
  }
  CHECK(error_code_of([] { aggregate_workload({}, OutlierRule::kNone); }) == ErrorCode::kEmptyInput);
}

TEST_CASE("outlier rule names") {
  CHECK(to_string(OutlierRule::kIqr15) == "iqr1.5");
  CHECK(outlier_rule_from_string("none") == OutlierRule::kNone);
  CHECK(error_code_of([] { outlier_rule_from_string("zscore"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("OLS residual orthogonality") {
  const auto r = testing::ols_residual_orthogonality(201, 200);
  INFO(r.first_failure);
  CHECK(r.instances == 200);
  CHECK(r.failures == 0);
}
