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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wattlens/error.hpp"

namespace wattlens {

/// Seconds on the trace's monotonic clock.
using Seconds = double;
using Watts = double;
using Joules = double;

/// One instantaneous GPU power reading.
struct PowerSample {
  Seconds t = 0.0;
  Watts p = 0.0;

  bool operator==(const PowerSample&) const = default;
};

/// One generated token, stamped at the end of its generation.
struct TokenEvent {
  std::int64_t index = 0;  // 1-based
  Seconds t = 0.0;
  std::optional<std::string> text;
  bool eos = false;

  bool operator==(const TokenEvent&) const = default;
};

/// Inference setting. The five named kinds have fixed wire names; anything
/// else round-trips as Custom with its original label.
class Workload {
 public:
  enum class Kind { kZeroShot, kTwoShot, kZeroShotCoT, kCU, kCULong, kCustom };

  Workload() = default;
  static Workload custom(std::string label);
  static Workload from_string(std::string_view name);

  explicit Workload(Kind kind) : kind_(kind) {}

  Kind kind() const { return kind_; }
  std::string name() const;

  bool operator==(const Workload&) const = default;
  auto operator<=>(const Workload& other) const { return name() <=> other.name(); }

 private:
  Kind kind_ = Kind::kZeroShot;
  std::string label_;
};

struct TraceManifest {
  std::string trace_id;
  std::string model_name;
  Workload workload;
  std::int64_t input_token_count = 1;
  Seconds gen_start_t = 0.0;
  std::int64_t max_new_tokens = 1;
  std::string clock = "monotonic";
  std::string samples_path;
  std::string tokens_path;

  bool operator==(const TraceManifest&) const = default;
};

struct InferenceTrace {
  TraceManifest manifest;
  std::vector<PowerSample> samples;
  std::vector<TokenEvent> tokens;

  bool operator==(const InferenceTrace&) const = default;
};

/// Energy attributed to one token over the half-open interval (start_t, end_t].
struct TokenEnergy {
  std::int64_t index = 0;
  Seconds start_t = 0.0;
  Seconds end_t = 0.0;
  Seconds duration = 0.0;
  Joules energy_j = 0.0;
  std::size_t sample_count = 0;
  bool estimated = false;

  bool operator==(const TokenEnergy&) const = default;
};

struct PhaseBreakdown {
  Joules prefill_j = 0.0;
  Joules decode_j = 0.0;
  Joules total_j = 0.0;
  double prefill_fraction = 0.0;
  std::size_t decode_token_count = 0;
};

/// Linear fit of per-token decode energy against decode ordinal (1..M).
struct DecodingTrend {
  Joules intercept_j = 0.0;  // fitted value at ordinal 1
  double slope_j_per_token = 0.0;
  Joules first_fit_j = 0.0;
  Joules last_fit_j = 0.0;
  double growth_pct = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

struct TraceIssue {
  ErrorCode code;
  std::string message;
};

/// Collects every invariant violation in `trace` without throwing.
std::vector<TraceIssue> check_trace(const InferenceTrace& trace);

/// Throws the first violation found by check_trace.
void validate_trace(const InferenceTrace& trace);

struct TraceValidity {
  std::string trace_id;
  bool valid = true;
  std::vector<TraceIssue> issues;
};

struct WorkloadValidationReport {
  std::vector<TraceValidity> entries;

  std::size_t passed() const;
  std::size_t failed() const;
};

WorkloadValidationReport validate_workload_set(std::span<const InferenceTrace> traces);

}  // namespace wattlens
