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

#include "wattlens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace wattlens {

Joules energy_per_token(Joules total_j, std::size_t n_tokens) {
  if (n_tokens == 0) {
    throw Error(ErrorCode::kZeroTokens, "energy per token needs at least one token");
  }
  return total_j / static_cast<double>(n_tokens);
}

Joules energy_per_decode_token(const PhaseBreakdown& breakdown) {
  if (breakdown.decode_token_count == 0) {
    throw Error(ErrorCode::kNoDecodeTokens, "single-token output has no decoding phase");
  }
  return breakdown.decode_j / static_cast<double>(breakdown.decode_token_count);
}

double percent_increase(double from, double to) {
  if (from == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "percent increase from zero is undefined");
  }
  return 100.0 * (to - from) / from;
}

std::vector<DecodePoint> decode_points(std::span<const TokenEnergy> energies,
                                       const TrendOptions& options) {
  std::vector<DecodePoint> points;
  if (energies.size() < 2) return points;
  points.reserve(energies.size() - 1);
  for (std::size_t i = 1; i < energies.size(); ++i) {
    if (energies[i].estimated && !options.include_estimated) continue;
    points.push_back({static_cast<double>(i), energies[i].energy_j});
  }
  return points;
}

DecodingTrend fit_trend(std::span<const DecodePoint> points, double last_ordinal) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kInsufficientPoints,
                fmt::format("trend fit needs at least 2 decode points, got {}", points.size()));
  }
  const double n = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  double max_x = points.front().ordinal;
  for (const auto& pt : points) {
    mean_x += pt.ordinal;
    mean_y += pt.energy_j;
    max_x = std::max(max_x, pt.ordinal);
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& pt : points) {
    const double dx = pt.ordinal - mean_x;
    const double dy = pt.energy_j - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) {
    throw Error(ErrorCode::kInsufficientPoints, "trend fit needs at least 2 distinct ordinals");
  }

  DecodingTrend trend;
  trend.points = points.size();
  trend.slope_j_per_token = sxy / sxx;
  auto fitted = [&](double x) { return mean_y + trend.slope_j_per_token * (x - mean_x); };

  double ss_res = 0.0;
  for (const auto& pt : points) {
    const double r = pt.energy_j - fitted(pt.ordinal);
    ss_res += r * r;
  }
  trend.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;

  trend.intercept_j = fitted(1.0);
  trend.first_fit_j = trend.intercept_j;
  trend.last_fit_j = fitted(last_ordinal > 0.0 ? last_ordinal : max_x);
  trend.growth_pct = trend.first_fit_j > 0.0
                         ? 100.0 * (trend.last_fit_j - trend.first_fit_j) / trend.first_fit_j
                         : 0.0;
  return trend;
}

DecodingTrend fit_decoding_trend(std::span<const TokenEnergy> energies, const TrendOptions& options) {
  const auto points = decode_points(energies, options);
  const double last = energies.size() >= 2 ? static_cast<double>(energies.size() - 1) : 0.0;
  return fit_trend(points, last);
}

AmplificationReport amplification(const DecodingTrend& baseline, const DecodingTrend& long_input,
                                  std::string baseline_workload, std::string long_input_workload) {
  if (!(baseline.intercept_j > 0.0) || !(long_input.intercept_j > 0.0)) {
    throw Error(ErrorCode::kNonPositiveIntercept,
                fmt::format("amplification needs positive intercepts, got {} and {}",
                            baseline.intercept_j, long_input.intercept_j));
  }
  AmplificationReport report;
  report.baseline_workload = std::move(baseline_workload);
  report.long_input_workload = std::move(long_input_workload);
  report.intercept_baseline_j = baseline.intercept_j;
  report.intercept_long_j = long_input.intercept_j;
  report.amplification_pct = percent_increase(baseline.intercept_j, long_input.intercept_j);
  return report;
}

BabblingReport detect_babbling(double mean_output_tokens, std::size_t max_new_tokens, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("babbling threshold {} outside (0, 1]", threshold));
  }
  if (max_new_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
  }
  BabblingReport report;
  report.threshold = threshold;
  report.mean_budget_utilization =
      std::min(1.0, mean_output_tokens / static_cast<double>(max_new_tokens));
  report.is_babbler = report.mean_budget_utilization >= threshold;
  return report;
}

BabblingReport detect_babbling(std::span<const std::size_t> output_lengths, std::size_t max_new_tokens,
                               double threshold) {
  if (output_lengths.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no output lengths given");
  }
  const double sum = std::accumulate(output_lengths.begin(), output_lengths.end(), 0.0,
                                     [](double acc, std::size_t v) { return acc + static_cast<double>(v); });
  return detect_babbling(sum / static_cast<double>(output_lengths.size()), max_new_tokens, threshold);
}

std::string_view to_string(OutlierRule rule) { return rule == OutlierRule::kNone ? "none" : "iqr1.5"; }

OutlierRule outlier_rule_from_string(std::string_view name) {
  if (name == "none") return OutlierRule::kNone;
  if (name == "iqr1.5") return OutlierRule::kIqr15;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown outlier rule '{}'", name));
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "quantile of an empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> iqr_outliers(std::span<const double> values) {
  std::vector<std::size_t> out;
  if (values.empty()) return out;
  const double q1 = quantile(values, 0.25);
  const double q3 = quantile(values, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - 1.5 * iqr;
  const double hi = q3 + 1.5 * iqr;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < lo || values[i] > hi) out.push_back(i);
  }
  return out;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

WorkloadSummary aggregate_workload(std::vector<TraceResult> per_trace, OutlierRule rule) {
  if (per_trace.empty()) {
    throw Error(ErrorCode::kEmptyInput, "aggregate_workload needs at least one trace");
  }
  std::stable_sort(per_trace.begin(), per_trace.end(),
                   [](const TraceResult& a, const TraceResult& b) { return a.trace_id < b.trace_id; });

  WorkloadSummary summary;
  summary.model_name = per_trace.front().model_name;
  summary.workload = per_trace.front().workload;

  std::vector<bool> keep(per_trace.size(), true);
  if (rule == OutlierRule::kIqr15) {
    std::vector<double> totals;
    totals.reserve(per_trace.size());
    for (const auto& r : per_trace) totals.push_back(r.breakdown.total_j);
    for (std::size_t idx : iqr_outliers(totals)) {
      keep[idx] = false;
      summary.removed_trace_ids.push_back(per_trace[idx].trace_id);
    }
  }
  summary.n_outliers_removed = summary.removed_trace_ids.size();

  std::vector<double> totals, per_token, per_decode_token, outputs, fractions, intercepts, slopes;
  std::vector<DecodePoint> pooled;
  double pooled_last = 0.0;
  for (std::size_t i = 0; i < per_trace.size(); ++i) {
    if (!keep[i]) continue;
    const auto& r = per_trace[i];
    totals.push_back(r.breakdown.total_j);
    per_token.push_back(energy_per_token(r.breakdown.total_j, r.output_tokens));
    if (r.breakdown.decode_token_count > 0) {
      per_decode_token.push_back(energy_per_decode_token(r.breakdown));
    }
    outputs.push_back(static_cast<double>(r.output_tokens));
    fractions.push_back(r.breakdown.prefill_fraction);
    if (r.trend) {
      intercepts.push_back(r.trend->intercept_j);
      slopes.push_back(r.trend->slope_j_per_token);
    }
    pooled.insert(pooled.end(), r.decode_points.begin(), r.decode_points.end());
    pooled_last = std::max(pooled_last, static_cast<double>(r.breakdown.decode_token_count));
  }
  if (totals.empty()) {
    throw Error(ErrorCode::kAllTracesRemoved,
                fmt::format("every trace of {} / {} was removed as an outlier", summary.model_name,
                            summary.workload.name()));
  }

  summary.n_traces = totals.size();
  summary.total_j = mean_std(totals);
  summary.energy_per_token_j = mean_std(per_token);
  if (!per_decode_token.empty()) summary.energy_per_decode_token_j = mean_std(per_decode_token);
  summary.output_tokens = mean_std(outputs);
  summary.mean_prefill_fraction = mean_std(fractions).mean;
  if (!intercepts.empty()) {
    summary.mean_trace_intercept_j = mean_std(intercepts).mean;
    summary.mean_trace_slope_j_per_token = mean_std(slopes).mean;
  }
  try {
    summary.pooled_trend = fit_trend(pooled, pooled_last);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientPoints) throw;
  }
  return summary;
}

}  // namespace wattlens
