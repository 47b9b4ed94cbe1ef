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

#include "wattlens/trace.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace wattlens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kNonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::kDuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::kCoverageError: return "CoverageError";
    case ErrorCode::kEmptyTokenStream: return "EmptyTokenStream";
    case ErrorCode::kInvalidTrace: return "InvalidTrace";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kZeroTokens: return "ZeroTokens";
    case ErrorCode::kNoDecodeTokens: return "NoDecodeTokens";
    case ErrorCode::kInsufficientPoints: return "InsufficientPoints";
    case ErrorCode::kNonPositiveIntercept: return "NonPositiveIntercept";
    case ErrorCode::kAllTracesRemoved: return "AllTracesRemoved";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kSessionAlreadyHalted: return "SessionAlreadyHalted";
    case ErrorCode::kSourceError: return "SourceError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Workload Workload::custom(std::string label) {
  Workload w(Kind::kCustom);
  w.label_ = std::move(label);
  return w;
}

Workload Workload::from_string(std::string_view name) {
  if (name == "0-shot") return Workload(Kind::kZeroShot);
  if (name == "2-shot") return Workload(Kind::kTwoShot);
  if (name == "0-shot-CoT") return Workload(Kind::kZeroShotCoT);
  if (name == "CU") return Workload(Kind::kCU);
  if (name == "CU-long") return Workload(Kind::kCULong);
  return custom(std::string(name));
}

std::string Workload::name() const {
  switch (kind_) {
    case Kind::kZeroShot: return "0-shot";
    case Kind::kTwoShot: return "2-shot";
    case Kind::kZeroShotCoT: return "0-shot-CoT";
    case Kind::kCU: return "CU";
    case Kind::kCULong: return "CU-long";
    case Kind::kCustom: return label_;
  }
  return label_;
}

namespace {

// Strictly increasing timestamps; equal neighbours are reported separately
// because a zero-length interval has no defined energy.
template <typename Event>
void check_ordering(std::span<const Event> events, std::string_view stream,
                    std::vector<TraceIssue>& issues) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    const double prev = events[i - 1].t;
    const double cur = events[i].t;
    if (cur == prev) {
      issues.push_back({ErrorCode::kDuplicateTimestamp,
                        fmt::format("{} record {} repeats timestamp {}", stream, i + 1, cur)});
      return;
    }
    if (cur < prev) {
      issues.push_back({ErrorCode::kNonMonotonicTimestamp,
                        fmt::format("{} record {} at t={} precedes t={}", stream, i + 1, cur, prev)});
      return;
    }
  }
}

}  // namespace

std::vector<TraceIssue> check_trace(const InferenceTrace& trace) {
  std::vector<TraceIssue> issues;
  const auto& m = trace.manifest;

  if (m.input_token_count < 1) {
    issues.push_back({ErrorCode::kInvalidTrace, "input_token_count must be >= 1"});
  }
  if (m.max_new_tokens < 1) {
    issues.push_back({ErrorCode::kInvalidTrace, "max_new_tokens must be >= 1"});
  }
  if (!std::isfinite(m.gen_start_t)) {
    issues.push_back({ErrorCode::kInvalidTrace, "gen_start_t is not finite"});
  }

  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.p) || s.p < 0.0) {
      issues.push_back({ErrorCode::kMalformedRecord,
                        fmt::format("power sample {} has invalid values (t={}, p={})", i + 1, s.t, s.p)});
      break;
    }
  }
  check_ordering<PowerSample>(trace.samples, "power stream", issues);

  if (trace.tokens.empty()) {
    issues.push_back({ErrorCode::kEmptyTokenStream, "token stream has no events"});
    return issues;
  }

  for (std::size_t i = 0; i < trace.tokens.size(); ++i) {
    const auto& tok = trace.tokens[i];
    if (tok.index != static_cast<std::int64_t>(i + 1)) {
      issues.push_back({ErrorCode::kMalformedRecord,
                        fmt::format("token record {} has index {}, expected {}", i + 1, tok.index, i + 1)});
      break;
    }
    if (!std::isfinite(tok.t)) {
      issues.push_back({ErrorCode::kMalformedRecord, fmt::format("token {} has non-finite t", tok.index)});
      break;
    }
    if (tok.eos && i + 1 != trace.tokens.size()) {
      issues.push_back({ErrorCode::kMalformedRecord,
                        fmt::format("token {} carries eos but is not the last event", tok.index)});
      break;
    }
  }
  check_ordering<TokenEvent>(trace.tokens, "token stream", issues);

  const double first_token_t = trace.tokens.front().t;
  const double last_token_t = trace.tokens.back().t;
  if (!(m.gen_start_t < first_token_t)) {
    issues.push_back({ErrorCode::kNonMonotonicTimestamp,
                      fmt::format("gen_start_t={} is not before the first token at t={}",
                                  m.gen_start_t, first_token_t)});
  }

  if (trace.samples.empty()) {
    issues.push_back({ErrorCode::kCoverageError, "power stream has no samples"});
  } else {
    if (trace.samples.front().t > m.gen_start_t) {
      issues.push_back({ErrorCode::kCoverageError,
                        fmt::format("first power sample at t={} starts after gen_start_t={}",
                                    trace.samples.front().t, m.gen_start_t)});
    }
    if (trace.samples.back().t < last_token_t) {
      issues.push_back({ErrorCode::kCoverageError,
                        fmt::format("power samples end at t={} before the last token at t={}",
                                    trace.samples.back().t, last_token_t)});
    }
  }
  return issues;
}

void validate_trace(const InferenceTrace& trace) {
  auto issues = check_trace(trace);
  if (!issues.empty()) {
    throw Error(issues.front().code, issues.front().message);
  }
}

std::size_t WorkloadValidationReport::passed() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.valid; }));
}

std::size_t WorkloadValidationReport::failed() const { return entries.size() - passed(); }

WorkloadValidationReport validate_workload_set(std::span<const InferenceTrace> traces) {
  WorkloadValidationReport report;
  report.entries.reserve(traces.size());
  for (const auto& trace : traces) {
    TraceValidity entry;
    entry.trace_id = trace.manifest.trace_id;
    entry.issues = check_trace(trace);
    entry.valid = entry.issues.empty();
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace wattlens
