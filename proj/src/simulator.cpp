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

#include "wattlens/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "wattlens/trace_io.hpp"

#ifndef WATTLENS_PRESETS_DIR
#define WATTLENS_PRESETS_DIR "presets"
#endif

namespace wattlens {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr Seconds kGenStart = 10.0;

void require(bool ok, std::string_view what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, std::string(what));
}

}  // namespace

void validate_config(const SyntheticModelConfig& c) {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(nonneg(c.prefill_j_per_input_token), "prefill_j_per_input_token must be >= 0");
  require(nonneg(c.decode_base_j), "decode_base_j must be >= 0");
  require(nonneg(c.input_amplification_j_per_input_token),
          "input_amplification_j_per_input_token must be >= 0");
  require(nonneg(c.decode_slope_j_per_token), "decode_slope_j_per_token must be >= 0");
  require(nonneg(c.noise_sigma_j), "noise_sigma_j must be >= 0");
  require(std::isfinite(c.token_duration_s) && c.token_duration_s > 0.0, "token_duration_s must be > 0");
  require(std::isfinite(c.sample_rate_hz) && c.sample_rate_hz > 0.0, "sample_rate_hz must be > 0");
}

SyntheticTrace generate_trace(const SyntheticModelConfig& config, std::size_t input_tokens,
                              std::size_t output_tokens, const TraceLabels& labels) {
  validate_config(config);
  if (output_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "output_tokens must be >= 1");
  }
  if (input_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "input_tokens must be >= 1");
  }

  const std::size_t n_tokens = output_tokens + config.babble_tail_tokens;
  const std::size_t budget = labels.max_new_tokens > 0 ? static_cast<std::size_t>(labels.max_new_tokens)
                                                        : n_tokens;
  const double input = static_cast<double>(input_tokens);

  SyntheticTrace out;
  GroundTruth& truth = out.truth;
  truth.prefill_j = config.prefill_j_per_input_token * input;
  truth.intercept_j = config.decode_base_j + config.input_amplification_j_per_input_token * input;
  truth.slope_j_per_token = config.decode_slope_j_per_token;

  std::mt19937_64 rng(config.rng_seed);
  std::normal_distribution<double> noise(0.0, config.noise_sigma_j);
  truth.token_energies_j.reserve(n_tokens);
  truth.token_energies_j.push_back(truth.prefill_j);
  for (std::size_t m = 1; m < n_tokens; ++m) {
    double e = truth.intercept_j + truth.slope_j_per_token * static_cast<double>(m - 1);
    if (config.noise_sigma_j > 0.0) e += noise(rng);
    truth.token_energies_j.push_back(std::max(0.0, e));
  }

  InferenceTrace& trace = out.trace;
  trace.manifest.trace_id = labels.trace_id;
  trace.manifest.model_name = labels.model_name;
  trace.manifest.workload = labels.workload;
  trace.manifest.input_token_count = static_cast<std::int64_t>(input_tokens);
  trace.manifest.gen_start_t = kGenStart;
  trace.manifest.max_new_tokens = static_cast<std::int64_t>(budget);
  trace.manifest.clock = "synthetic";
  trace.manifest.samples_path = labels.trace_id + ".samples.ndjson";
  trace.manifest.tokens_path = labels.trace_id + ".tokens.ndjson";

  trace.tokens.reserve(n_tokens);
  std::vector<Watts> levels(n_tokens);
  Seconds prev = kGenStart;
  for (std::size_t n = 0; n < n_tokens; ++n) {
    TokenEvent tok;
    tok.index = static_cast<std::int64_t>(n + 1);
    tok.t = kGenStart + static_cast<double>(n + 1) * config.token_duration_s;
    tok.eos = (n + 1 == n_tokens) && n_tokens < budget;
    levels[n] = truth.token_energies_j[n] / (tok.t - prev);
    prev = tok.t;
    trace.tokens.push_back(std::move(tok));
  }

  // Sample k sits at gen_start + (k + 0.5) / rate, k = -1, 0, 1, ...; it takes
  // the level of the token whose interval (t_{n-1}, t_n] contains it.
  const double period = 1.0 / config.sample_rate_hz;
  const Seconds last_t = trace.tokens.back().t;
  std::vector<std::size_t> per_token(n_tokens, 0);
  std::size_t owner = 0;
  for (long k = -1;; ++k) {
    const Seconds t = kGenStart + (static_cast<double>(k) + 0.5) * period;
    Watts p = levels.front();
    if (t > kGenStart) {
      while (owner < n_tokens && trace.tokens[owner].t < t) ++owner;
      if (owner < n_tokens) {
        p = levels[owner];
        ++per_token[owner];
      } else {
        p = levels.back();
      }
    }
    trace.samples.push_back({t, p});
    if (t >= last_t) break;
  }

  truth.empty_intervals =
      static_cast<std::size_t>(std::count(per_token.begin(), per_token.end(), std::size_t{0}));
  truth.infeasible_sampling = truth.empty_intervals > 0;
  return out;
}

SimulationPreset parse_preset(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, "preset is not a JSON object");
  }
  try {
    SimulationPreset p;
    p.name = doc.value("name", std::string("custom"));
    p.model_name = doc.value("model_name", std::string("synthetic"));
    p.workload = Workload::from_string(doc.value("workload", std::string("0-shot")));
    p.input_tokens = doc.at("input_tokens").get<std::size_t>();
    p.output_tokens = doc.at("output_tokens").get<std::size_t>();
    p.max_new_tokens = doc.value("max_new_tokens", p.output_tokens);

    const json& m = doc.at("model");
    SyntheticModelConfig& c = p.config;
    c.prefill_j_per_input_token = m.at("prefill_j_per_input_token").get<double>();
    c.decode_base_j = m.at("decode_base_j").get<double>();
    c.input_amplification_j_per_input_token = m.value("input_amplification_j_per_input_token", 0.0);
    c.decode_slope_j_per_token = m.value("decode_slope_j_per_token", 0.0);
    c.noise_sigma_j = m.value("noise_sigma_j", 0.0);
    c.token_duration_s = m.value("token_duration_s", c.token_duration_s);
    c.sample_rate_hz = m.value("sample_rate_hz", c.sample_rate_hz);
    c.babble_tail_tokens = m.value("babble_tail_tokens", std::size_t{0});
    c.rng_seed = m.value("rng_seed", std::uint64_t{0});
    validate_config(c);
    if (p.input_tokens == 0 || p.output_tokens == 0) {
      throw Error(ErrorCode::kInvalidConfig, "input_tokens and output_tokens must be >= 1");
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("bad preset field: {}", e.what()));
  }
}

SimulationPreset load_preset(const fs::path& path) {
  return parse_preset(read_file(path));
}

SimulationPreset find_preset(const fs::path& presets_dir, std::string_view name) {
  const fs::path path = presets_dir / (std::string(name) + ".json");
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("no preset named '{}' in {}", name, presets_dir.string()));
  }
  return load_preset(path);
}

fs::path default_presets_dir() {
  if (const char* env = std::getenv("WATTLENS_PRESETS"); env != nullptr && *env != '\0') {
    return env;
  }
  return WATTLENS_PRESETS_DIR;
}

std::vector<std::string> split_code_tokens(std::string_view text) {
  std::vector<std::string> out;
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i + 1;
    if (is_word(text[i])) {
      while (j < text.size() && is_word(text[j])) ++j;
    } else if (text[i] == ' ') {
      while (j < text.size() && text[j] == ' ') ++j;
    }
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> babble_filler(std::size_t count) {
  static const std::vector<std::string> kCycle = {
      "\n", "#", " Example", " usage", ":", "\n",
      "#", " print", "(", "solution", "(", "1", ")", ")", "\n",
      "\n", "    ", "\n",
      "#", " Test", " cases", " below", "\n",
      "#", " assert", " solution", "(", "2", ")", "\n",
  };
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(kCycle[i % kCycle.size()]);
  return out;
}

ScriptedTokenSource generate_babbler_stream(std::span<const std::string> solution_tokens,
                                            std::size_t babble_tokens, std::size_t budget,
                                            const BabblerOptions& options) {
  if (solution_tokens.empty() || solution_tokens.back().find('\n') == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "solution must end with a newline token");
  }
  if (budget == 0) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be >= 1");
  }
  std::vector<std::string> texts(solution_tokens.begin(), solution_tokens.end());
  const auto filler = babble_filler(babble_tokens);
  texts.insert(texts.end(), filler.begin(), filler.end());
  const bool truncated = texts.size() >= budget;
  if (texts.size() > budget) texts.resize(budget);

  std::vector<TokenEvent> events;
  events.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    TokenEvent ev;
    ev.index = static_cast<std::int64_t>(i + 1);
    ev.t = static_cast<double>(i + 1) * options.token_period_s;
    ev.text = std::move(texts[i]);
    events.push_back(std::move(ev));
  }
  if (options.append_eos && !truncated && !events.empty()) events.back().eos = true;
  return ScriptedTokenSource(std::move(events));
}

}  // namespace wattlens
