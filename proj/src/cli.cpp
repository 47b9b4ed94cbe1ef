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

#include "wattlens/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "wattlens/report.hpp"
#include "wattlens/trace_io.hpp"

namespace wattlens::cli {

namespace fs = std::filesystem;

namespace {

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("wattlens");
    logger->set_pattern("wattlens: %l: %v");
    spdlog::set_default_logger(logger);
  });
  const char* env = std::getenv("WATTLENS_LOG");
  spdlog::set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::warn);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
}

struct GlobalOptions {
  std::string mode = "sample-mean";
  std::string outliers = "iqr1.5";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
};

fs::path out_dir(const GlobalOptions& g, const fs::path& fallback) {
  fs::path dir = g.out.empty() ? fallback : fs::path(g.out);
  fs::create_directories(dir);
  return dir;
}

int cmd_profile(const GlobalOptions& g, const std::vector<std::string>& manifests, bool include_estimated) {
  const EnergyMode mode = energy_mode_from_string(g.mode);
  const fs::path dir = out_dir(g, "wattlens-out");
  TrendOptions trend_options;
  trend_options.include_estimated = include_estimated;

  std::vector<std::string> diagnostics(manifests.size());
  parallel_for(manifests.size(), g.jobs, [&](std::size_t i) {
    try {
      const InferenceTrace trace = parse_trace(manifests[i]);
      const TraceProfile profile = profile_trace(trace, mode, trend_options);
      write_file_atomic(dir / token_csv_file_name(profile), token_energy_csv(profile.energies));
      write_file_atomic(dir / report_file_name(profile), trace_report_json(profile));
      spdlog::info("profiled {} ({} tokens)", trace.manifest.trace_id, profile.energies.size());
    } catch (const Error& e) {
      diagnostics[i] = e.what();
    }
  });

  int rc = kExitOk;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    if (diagnostics[i].empty()) continue;
    fmt::print(stderr, "{}: {}\n", manifests[i], diagnostics[i]);
    rc = kExitUser;
  }
  return rc;
}

int cmd_aggregate(const GlobalOptions& g, const std::string& report_dir) {
  const OutlierRule rule = outlier_rule_from_string(g.outliers);
  std::vector<fs::path> reports;
  if (fs::is_directory(report_dir)) {
    for (const auto& entry : fs::directory_iterator(report_dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.size() > 12 && name.ends_with(".report.json")) {
        reports.push_back(entry.path());
      }
    }
  }
  if (reports.empty()) {
    fmt::print(stderr, "{}: no reports found\n", report_dir);
    return kExitUser;
  }
  std::sort(reports.begin(), reports.end());

  std::map<std::pair<std::string, std::string>, std::vector<TraceResult>> groups;
  for (const auto& path : reports) {
    TraceResult r = load_trace_result(path);
    groups[{r.model_name, r.workload.name()}].push_back(std::move(r));
  }

  std::vector<WorkloadSummary> summaries;
  int rc = kExitOk;
  for (auto& [key, results] : groups) {
    try {
      summaries.push_back(aggregate_workload(std::move(results), rule));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllTracesRemoved) throw;
      fmt::print(stderr, "{} / {}: {}\n", key.first, key.second, e.what());
      rc = kExitUser;
    }
  }
  if (rc != kExitOk) return rc;

  const fs::path dir = out_dir(g, report_dir);
  write_file_atomic(dir / "summary.json", summaries_json(summaries, rule));
  write_file_atomic(dir / "summary.csv", summaries_csv(summaries));
  for (const auto& s : summaries) {
    spdlog::info("{} / {}: {} traces, {} outliers removed", s.model_name, s.workload.name(), s.n_traces,
                 s.n_outliers_removed);
  }
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const std::string& preset_name, const std::string& config_path,
                 const std::string& presets_dir, std::size_t count) {
  if (preset_name.empty() == config_path.empty()) {
    fmt::print(stderr, "simulate: give exactly one of --preset or --config\n");
    return kExitUser;
  }
  const SimulationPreset preset = config_path.empty()
                                      ? find_preset(presets_dir.empty() ? default_presets_dir() : fs::path(presets_dir),
                                                    preset_name)
                                      : load_preset(config_path);
  const fs::path dir = out_dir(g, "wattlens-sim");
  const std::uint64_t base_seed = g.seed.value_or(preset.config.rng_seed);

  std::vector<std::pair<std::string, GroundTruth>> truths(count);
  parallel_for(count, g.jobs, [&](std::size_t i) {
    SyntheticModelConfig config = preset.config;
    config.rng_seed = base_seed + i;
    TraceLabels labels;
    labels.trace_id = fmt::format("{}-{:04d}", preset.name, i);
    labels.model_name = preset.model_name;
    labels.workload = preset.workload;
    labels.max_new_tokens = static_cast<std::int64_t>(preset.max_new_tokens);
    SyntheticTrace sim = generate_trace(config, preset.input_tokens, preset.output_tokens, labels);
    write_trace(dir, sim.trace);
    truths[i] = {labels.trace_id, std::move(sim.truth)};
  });

  for (const auto& [id, truth] : truths) {
    if (truth.infeasible_sampling) {
      spdlog::warn("{}: sample period exceeds token duration; {} token intervals hold no sample and will be estimated",
                   id, truth.empty_intervals);
    }
  }
  write_file_atomic(dir / "ground_truth.json", ground_truth_json(truths, preset));
  return kExitOk;
}

int cmd_suppress(const GlobalOptions& g, const std::string& corpus_path, std::size_t budget,
                 const std::string& cadence, double timeout_s, const std::string& python,
                 std::string syntax_cmd, std::string test_cmd) {
  SuppressionConfig config;
  config.max_new_tokens = budget;
  config.cadence = Cadence::parse(cadence);
  config.validator_timeout_s = timeout_s;
  config.validate();

  std::vector<CorpusTask> tasks;
  try {
    tasks = load_corpus(corpus_path);
  } catch (const Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kExitUser;
  }
  if (syntax_cmd.empty()) syntax_cmd = default_syntax_command(python);
  if (test_cmd.empty()) test_cmd = default_test_command(python);
  const auto timeout = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000.0));
  const ValidatorFactory validators = command_validators(syntax_cmd, test_cmd, timeout);

  const CorpusReport report = evaluate_corpus(tasks, config, validators);
  const fs::path dir = out_dir(g, "wattlens-suppress");
  write_file_atomic(dir / "outcomes.json", corpus_outcomes_json(report, config));
  write_file_atomic(dir / "outcomes.csv", corpus_outcomes_csv(report));
  write_file_atomic(dir / "timing.json", corpus_timing_json(report));

  for (const auto& t : report.tasks) {
    if (!t.error.empty()) fmt::print(stderr, "{}: {}\n", t.task_id, t.error);
  }
  fmt::print("tasks {}  tokens {:.1f} -> {:.1f}  reduction {:.1f}%  pass rate {:.3f} -> {:.3f}\n", report.evaluated,
             report.mean_baseline_tokens, report.mean_suppressed_tokens, report.token_reduction_pct,
             report.baseline_pass_rate, report.suppressed_pass_rate);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  init_logging();

  CLI::App app{"Per-token LLM inference energy analysis and babbling suppression", "wattlens"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--mode", g.mode, "Token energy rule")
      ->check(CLI::IsMember({"sample-mean", "trapezoid"}))
      ->capture_default_str();
  app.add_option("--outliers", g.outliers, "Outlier rule for aggregation")
      ->check(CLI::IsMember({"none", "iqr1.5"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Base seed for synthetic traces");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* profile = app.add_subcommand("profile", "Per-token energy, phase split and decode trend per trace");
  std::vector<std::string> manifests;
  bool include_estimated = false;
  profile->add_option("manifests", manifests, "Trace manifest files")->required();
  profile->add_flag("--include-estimated", include_estimated, "Keep interpolated tokens in the trend fit");

  auto* aggregate = app.add_subcommand("aggregate", "Summarise reports per (model, workload)");
  std::string report_dir;
  aggregate->add_option("report_dir", report_dir, "Directory holding *.report.json")->required();

  auto* simulate = app.add_subcommand("simulate", "Write synthetic traces with known ground truth");
  std::string preset_name, config_path, presets_dir;
  std::size_t count = 1;
  simulate->add_option("--preset", preset_name, "Bundled preset name");
  simulate->add_option("--config", config_path, "Preset-format JSON file");
  simulate->add_option("--presets-dir", presets_dir, "Where to look up --preset");
  simulate->add_option("--count", count, "Number of traces")->check(CLI::PositiveNumber);

  auto* suppress = app.add_subcommand("suppress", "Replay a scripted corpus with and without early stopping");
  std::string corpus_path, cadence = "every-line", python = "python3", syntax_cmd, test_cmd;
  std::size_t budget = 300;
  double timeout_s = 5.0;
  suppress->add_option("corpus", corpus_path, "Corpus JSON file")->required();
  suppress->add_option("--budget", budget, "max_new_tokens")->check(CLI::PositiveNumber)->capture_default_str();
  suppress->add_option("--cadence", cadence, "every-line or every-k=<k>")->capture_default_str();
  suppress->add_option("--timeout", timeout_s, "Validator timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  suppress->add_option("--python", python, "Interpreter for the default validators")->capture_default_str();
  suppress->add_option("--syntax-cmd", syntax_cmd, "Syntax gate command template ({code})");
  suppress->add_option("--test-cmd", test_cmd, "Test command template ({code}, {tests})");

  std::vector<const char*> argv{"wattlens"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*profile) return cmd_profile(g, manifests, include_estimated);
    if (*aggregate) return cmd_aggregate(g, report_dir);
    if (*simulate) return cmd_simulate(g, preset_name, config_path, presets_dir, count);
    if (*suppress) return cmd_suppress(g, corpus_path, budget, cadence, timeout_s, python, syntax_cmd, test_cmd);
  } catch (const Error& e) {
    fmt::print(stderr, "wattlens: {}\n", e.what());
    return e.code() == ErrorCode::kIoError ? kExitInternal : kExitUser;
  } catch (const std::exception& e) {
    fmt::print(stderr, "wattlens: internal error: {}\n", e.what());
    return kExitInternal;
  }
  return kExitUser;
}

}  // namespace wattlens::cli
