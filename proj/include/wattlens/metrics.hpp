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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wattlens/trace.hpp"

namespace wattlens {

Joules energy_per_token(Joules total_j, std::size_t n_tokens);
Joules energy_per_decode_token(const PhaseBreakdown& breakdown);

/// 100 * (to - from) / from. `from` must be nonzero.
double percent_increase(double from, double to);

/// One (decode ordinal, energy) observation; ordinals start at 1 with the
/// first decoding token.
struct DecodePoint {
  double ordinal = 0.0;
  Joules energy_j = 0.0;
};

struct TrendOptions {
  bool include_estimated = false;
};

/// Decode points of a per-token series (token n becomes ordinal n-1).
/// Estimated tokens are dropped unless options say otherwise.
std::vector<DecodePoint> decode_points(std::span<const TokenEnergy> energies,
                                       const TrendOptions& options = {});

/// Ordinary least squares of energy on ordinal. The fitted line is evaluated
/// at ordinal 1 (intercept_j, first_fit_j) and at `last_ordinal`
/// (last_fit_j); when `last_ordinal` is 0 the largest observed ordinal is used.
DecodingTrend fit_trend(std::span<const DecodePoint> points, double last_ordinal = 0.0);

/// Trend over the decode tokens of one trace.
DecodingTrend fit_decoding_trend(std::span<const TokenEnergy> energies,
                                 const TrendOptions& options = {});

struct AmplificationReport {
  std::string baseline_workload;
  std::string long_input_workload;
  Joules intercept_baseline_j = 0.0;
  Joules intercept_long_j = 0.0;
  double amplification_pct = 0.0;
};

AmplificationReport amplification(const DecodingTrend& baseline, const DecodingTrend& long_input,
                                  std::string baseline_workload = {},
                                  std::string long_input_workload = {});

inline constexpr double kDefaultBabblingThreshold = 0.95;

struct BabblingReport {
  double mean_budget_utilization = 0.0;
  bool is_babbler = false;
  double threshold = kDefaultBabblingThreshold;
};

BabblingReport detect_babbling(double mean_output_tokens, std::size_t max_new_tokens,
                               double threshold = kDefaultBabblingThreshold);
BabblingReport detect_babbling(std::span<const std::size_t> output_lengths,
                               std::size_t max_new_tokens,
                               double threshold = kDefaultBabblingThreshold);

enum class OutlierRule { kNone, kIqr15 };

std::string_view to_string(OutlierRule rule);
OutlierRule outlier_rule_from_string(std::string_view name);

/// Quantile by linear interpolation between order statistics
/// (position (n-1)*q in the sorted sample). `values` need not be sorted.
double quantile(std::span<const double> values, double q);

/// Indices of values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR], ascending.
std::vector<std::size_t> iqr_outliers(std::span<const double> values);

/// Everything aggregate_workload needs from one profiled trace.
struct TraceResult {
  std::string trace_id;
  std::string model_name;
  Workload workload;
  PhaseBreakdown breakdown;
  std::optional<DecodingTrend> trend;
  std::size_t output_tokens = 0;
  std::vector<DecodePoint> decode_points;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct WorkloadSummary {
  std::string model_name;
  Workload workload;
  std::size_t n_traces = 0;
  std::size_t n_outliers_removed = 0;
  std::vector<std::string> removed_trace_ids;
  MeanStd total_j;
  MeanStd energy_per_token_j;
  std::optional<MeanStd> energy_per_decode_token_j;
  MeanStd output_tokens;
  double mean_prefill_fraction = 0.0;
  // Fit over every retained decode point of the group.
  std::optional<DecodingTrend> pooled_trend;
  // Averages of the per-trace fits, for comparison with the pooled fit.
  std::optional<double> mean_trace_intercept_j;
  std::optional<double> mean_trace_slope_j_per_token;
};

/// Folds a group of traces (same model and workload) into one summary. Inputs
/// are ordered by trace_id first, so the result does not depend on the order
/// the traces were passed in.
WorkloadSummary aggregate_workload(std::vector<TraceResult> per_trace, OutlierRule rule);

}  // namespace wattlens
