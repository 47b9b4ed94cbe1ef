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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wattlens/alignment.hpp"
#include "wattlens/metrics.hpp"
#include "wattlens/simulator.hpp"
#include "wattlens/suppression.hpp"

namespace wattlens {

inline constexpr int kReportFormatVersion = 1;

/// Everything derived from one trace.
struct TraceProfile {
  TraceManifest manifest;
  EnergyMode mode = EnergyMode::kSampleMean;
  TrendOptions trend_options;
  std::vector<TokenEnergy> energies;
  TraceResult result;
};

TraceProfile profile_trace(const InferenceTrace& trace, EnergyMode mode = EnergyMode::kSampleMean,
                           const TrendOptions& trend_options = {});

std::string report_file_name(const TraceProfile& profile);
std::string token_csv_file_name(const TraceProfile& profile);

std::string trace_report_json(const TraceProfile& profile);
/// Columns: index,start_t,end_t,duration_s,energy_j,estimated.
std::string token_energy_csv(std::span<const TokenEnergy> energies);
std::vector<TokenEnergy> parse_token_energy_csv(std::string_view csv);

/// Rebuilds the aggregation input from a report and its companion CSV.
TraceResult load_trace_result(const std::filesystem::path& report_json);

std::string summaries_json(std::span<const WorkloadSummary> summaries, OutlierRule rule);
/// One row per (model, workload); metric cells read "mean ± std".
std::string summaries_csv(std::span<const WorkloadSummary> summaries);

/// Deterministic part of a corpus evaluation (no wall-clock values).
std::string corpus_outcomes_json(const CorpusReport& report, const SuppressionConfig& config);
std::string corpus_outcomes_csv(const CorpusReport& report);
/// Validator wall-clock overhead, kept apart because it changes run to run.
std::string corpus_timing_json(const CorpusReport& report);

std::string ground_truth_json(std::span<const std::pair<std::string, GroundTruth>> truths,
                              const SimulationPreset& preset);

/// Shortest representation that round-trips.
std::string format_double(double v);

}  // namespace wattlens
