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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wattlens/token_source.hpp"
#include "wattlens/trace.hpp"

namespace wattlens {

/// Phenomenological energy model: prefill grows linearly with input length,
/// decode tokens start at an input-dependent level and rise linearly with
/// their ordinal.
struct SyntheticModelConfig {
  double prefill_j_per_input_token = 0.0;
  Joules decode_base_j = 0.0;
  double input_amplification_j_per_input_token = 0.0;
  double decode_slope_j_per_token = 0.0;
  Joules noise_sigma_j = 0.0;
  Seconds token_duration_s = 0.025;
  double sample_rate_hz = 200.0;
  std::size_t babble_tail_tokens = 0;
  std::uint64_t rng_seed = 0;
};

/// Throws InvalidConfig when a field is negative, non-finite or zero where a
/// positive value is required.
void validate_config(const SyntheticModelConfig& config);

struct GroundTruth {
  Joules prefill_j = 0.0;
  Joules intercept_j = 0.0;  // decode energy at ordinal 1 before noise
  double slope_j_per_token = 0.0;
  std::vector<Joules> token_energies_j;  // targets after noise, token 1 first
  bool infeasible_sampling = false;
  std::size_t empty_intervals = 0;
};

struct SyntheticTrace {
  InferenceTrace trace;
  GroundTruth truth;
};

struct TraceLabels {
  std::string trace_id = "sim-0000";
  std::string model_name = "synthetic";
  Workload workload;
  std::int64_t max_new_tokens = 0;  // 0: use output_tokens
};

/// Synthesises a trace whose SampleMean alignment reproduces the target token
/// energies. Samples sit on a uniform grid offset by half a period from
/// gen_start_t; every sample takes the constant power level of the token
/// interval that owns it. When some interval receives no sample the result
/// is flagged infeasible and those tokens come back estimated from alignment.
SyntheticTrace generate_trace(const SyntheticModelConfig& config, std::size_t input_tokens,
                              std::size_t output_tokens, const TraceLabels& labels = {});

/// A named scenario shipped as JSON under presets/.
struct SimulationPreset {
  std::string name;
  std::string model_name;
  Workload workload;
  SyntheticModelConfig config;
  std::size_t input_tokens = 1;
  std::size_t output_tokens = 1;
  std::size_t max_new_tokens = 1;
};

SimulationPreset load_preset(const std::filesystem::path& path);
SimulationPreset parse_preset(std::string_view json_text);

/// Resolves `name` to `<presets_dir>/<name>.json`.
SimulationPreset find_preset(const std::filesystem::path& presets_dir, std::string_view name);

/// Directory holding the bundled presets (compiled in, overridable via the
/// WATTLENS_PRESETS environment variable).
std::filesystem::path default_presets_dir();

/// Splits source text into token-like pieces: identifier/number runs, runs of
/// spaces, single newlines and single punctuation characters. Concatenating
/// the pieces gives back the input.
std::vector<std::string> split_code_tokens(std::string_view text);

/// Filler that stays inert when appended to Python source: comment lines and
/// blank lines, each ending in a newline.
std::vector<std::string> babble_filler(std::size_t count);

struct BabblerOptions {
  bool append_eos = false;  // only honoured when the stream ends before the budget
  Seconds token_period_s = 0.025;
};

/// Emits the solution tokens followed by `babble_tokens` filler tokens,
/// truncated to `budget`. The solution must end with a newline token.
ScriptedTokenSource generate_babbler_stream(std::span<const std::string> solution_tokens,
                                            std::size_t babble_tokens, std::size_t budget,
                                            const BabblerOptions& options = {});

}  // namespace wattlens
