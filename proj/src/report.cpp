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

#include "wattlens/report.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "wattlens/trace_io.hpp"

namespace wattlens {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) { return fmt::format("{}", v); }

TraceProfile profile_trace(const InferenceTrace& trace, EnergyMode mode, const TrendOptions& trend_options) {
  TraceProfile p;
  p.manifest = trace.manifest;
  p.mode = mode;
  p.trend_options = trend_options;
  p.energies = assign_token_energies(trace, mode);

  TraceResult& r = p.result;
  r.trace_id = trace.manifest.trace_id;
  r.model_name = trace.manifest.model_name;
  r.workload = trace.manifest.workload;
  r.breakdown = split_phases(p.energies);
  r.output_tokens = p.energies.size();
  r.decode_points = decode_points(p.energies, trend_options);
  try {
    r.trend = fit_trend(r.decode_points, static_cast<double>(r.breakdown.decode_token_count));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientPoints) throw;
  }
  return p;
}

std::string report_file_name(const TraceProfile& profile) { return profile.manifest.trace_id + ".report.json"; }

std::string token_csv_file_name(const TraceProfile& profile) { return profile.manifest.trace_id + ".tokens.csv"; }

namespace {

ordered_json trend_json(const std::optional<DecodingTrend>& trend) {
  if (!trend) return nullptr;
  ordered_json j;
  j["intercept_j"] = trend->intercept_j;
  j["slope_j_per_token"] = trend->slope_j_per_token;
  j["first_fit_j"] = trend->first_fit_j;
  j["last_fit_j"] = trend->last_fit_j;
  j["growth_pct"] = trend->growth_pct;
  j["r2"] = trend->r2;
  j["points"] = trend->points;
  return j;
}

ordered_json mean_std_json(const MeanStd& v) {
  ordered_json j;
  j["mean"] = v.mean;
  j["std"] = v.std;
  return j;
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_same_v<T, MeanStd>) {
    return mean_std_json(*v);
  } else {
    return ordered_json(*v);
  }
}

}  // namespace

std::string trace_report_json(const TraceProfile& p) {
  const auto& b = p.result.breakdown;
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["trace_id"] = p.manifest.trace_id;
  j["model_name"] = p.manifest.model_name;
  j["workload"] = p.manifest.workload.name();
  j["input_token_count"] = p.manifest.input_token_count;
  j["max_new_tokens"] = p.manifest.max_new_tokens;
  j["mode"] = std::string(to_string(p.mode));
  j["output_tokens"] = p.result.output_tokens;
  std::size_t estimated = 0;
  for (const auto& e : p.energies) estimated += e.estimated ? 1 : 0;
  j["estimated_tokens"] = estimated;

  ordered_json phases;
  phases["prefill_j"] = b.prefill_j;
  phases["decode_j"] = b.decode_j;
  phases["total_j"] = b.total_j;
  phases["prefill_fraction"] = b.prefill_fraction;
  phases["decode_token_count"] = b.decode_token_count;
  j["phase_breakdown"] = phases;

  j["energy_per_token_j"] = energy_per_token(b.total_j, p.result.output_tokens);
  j["energy_per_decode_token_j"] =
      b.decode_token_count > 0 ? ordered_json(energy_per_decode_token(b)) : ordered_json(nullptr);
  j["trend_includes_estimated"] = p.trend_options.include_estimated;
  j["decoding_trend"] = trend_json(p.result.trend);
  j["tokens_csv"] = token_csv_file_name(p);
  return j.dump(2) + "\n";
}

std::string token_energy_csv(std::span<const TokenEnergy> energies) {
  std::string out = "index,start_t,end_t,duration_s,energy_j,estimated\n";
  for (const auto& e : energies) {
    out += fmt::format("{},{},{},{},{},{}\n", e.index, format_double(e.start_t), format_double(e.end_t),
                       format_double(e.duration), format_double(e.energy_j), e.estimated ? 1 : 0);
  }
  return out;
}

std::vector<TokenEnergy> parse_token_energy_csv(std::string_view csv) {
  std::vector<TokenEnergy> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
      cells.push_back(line.substr(start, pos - start));
    }
    cells.push_back(line.substr(start));
    if (cells.size() != 6) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("token csv line {}: expected 6 columns", line_no));
    }
    auto num = [&](const std::string& s) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::kMalformedRecord, fmt::format("token csv line {}: bad number '{}'", line_no, s));
      }
      return v;
    };
    TokenEnergy e;
    e.index = static_cast<std::int64_t>(num(cells[0]));
    e.start_t = num(cells[1]);
    e.end_t = num(cells[2]);
    e.duration = num(cells[3]);
    e.energy_j = num(cells[4]);
    e.estimated = cells[5] == "1";
    out.push_back(e);
  }
  return out;
}

TraceResult load_trace_result(const fs::path& report_json) {
  json j = json::parse(read_file(report_json), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, fmt::format("{}: not a JSON report", report_json.string()));
  }
  try {
    if (j.at("format_version").get<int>() != kReportFormatVersion) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}: unsupported format_version", report_json.string()));
    }
    TraceResult r;
    r.trace_id = j.at("trace_id").get<std::string>();
    r.model_name = j.at("model_name").get<std::string>();
    r.workload = Workload::from_string(j.at("workload").get<std::string>());
    r.output_tokens = j.at("output_tokens").get<std::size_t>();
    const json& b = j.at("phase_breakdown");
    r.breakdown.prefill_j = b.at("prefill_j").get<double>();
    r.breakdown.decode_j = b.at("decode_j").get<double>();
    r.breakdown.total_j = b.at("total_j").get<double>();
    r.breakdown.prefill_fraction = b.at("prefill_fraction").get<double>();
    r.breakdown.decode_token_count = b.at("decode_token_count").get<std::size_t>();
    if (const json& t = j.at("decoding_trend"); !t.is_null()) {
      DecodingTrend trend;
      trend.intercept_j = t.at("intercept_j").get<double>();
      trend.slope_j_per_token = t.at("slope_j_per_token").get<double>();
      trend.first_fit_j = t.at("first_fit_j").get<double>();
      trend.last_fit_j = t.at("last_fit_j").get<double>();
      trend.growth_pct = t.at("growth_pct").get<double>();
      trend.r2 = t.at("r2").get<double>();
      trend.points = t.at("points").get<std::size_t>();
      r.trend = trend;
    }
    TrendOptions opts;
    opts.include_estimated = j.value("trend_includes_estimated", false);
    const auto energies =
        parse_token_energy_csv(read_file(report_json.parent_path() / j.at("tokens_csv").get<std::string>()));
    r.decode_points = decode_points(energies, opts);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, fmt::format("{}: {}", report_json.string(), e.what()));
  }
}

std::string summaries_json(std::span<const WorkloadSummary> summaries, OutlierRule rule) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["outlier_rule"] = std::string(to_string(rule));
  j["trend_source"] = "pooled";
  ordered_json list = ordered_json::array();
  for (const auto& s : summaries) {
    ordered_json e;
    e["model_name"] = s.model_name;
    e["workload"] = s.workload.name();
    e["n_traces"] = s.n_traces;
    e["n_outliers_removed"] = s.n_outliers_removed;
    e["removed_trace_ids"] = s.removed_trace_ids;
    e["total_j"] = mean_std_json(s.total_j);
    e["energy_per_token_j"] = mean_std_json(s.energy_per_token_j);
    e["energy_per_decode_token_j"] = optional_json(s.energy_per_decode_token_j);
    e["output_tokens"] = mean_std_json(s.output_tokens);
    e["mean_prefill_fraction"] = s.mean_prefill_fraction;
    e["pooled_trend"] = trend_json(s.pooled_trend);
    e["mean_trace_intercept_j"] = optional_json(s.mean_trace_intercept_j);
    e["mean_trace_slope_j_per_token"] = optional_json(s.mean_trace_slope_j_per_token);
    list.push_back(std::move(e));
  }
  j["summaries"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string summaries_csv(std::span<const WorkloadSummary> summaries) {
  auto cell = [](const MeanStd& v) { return fmt::format("{:.4f} ± {:.4f}", v.mean, v.std); };
  std::string out =
      "model,workload,n_traces,n_outliers_removed,total_j,energy_per_token_j,energy_per_decode_token_j,"
      "output_tokens,prefill_fraction,decode_intercept_j,decode_slope_j_per_token,decode_growth_pct\n";
  for (const auto& s : summaries) {
    out += fmt::format("{},{},{},{},{},{},{},{},{:.4f},{},{},{}\n", s.model_name, s.workload.name(), s.n_traces,
                       s.n_outliers_removed, cell(s.total_j), cell(s.energy_per_token_j),
                       s.energy_per_decode_token_j ? cell(*s.energy_per_decode_token_j) : std::string(),
                       cell(s.output_tokens), s.mean_prefill_fraction,
                       s.pooled_trend ? fmt::format("{:.4f}", s.pooled_trend->intercept_j) : std::string(),
                       s.pooled_trend ? fmt::format("{:.6g}", s.pooled_trend->slope_j_per_token) : std::string(),
                       s.pooled_trend ? fmt::format("{:.2f}", s.pooled_trend->growth_pct) : std::string());
  }
  return out;
}

std::string corpus_outcomes_json(const CorpusReport& report, const SuppressionConfig& config) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  ordered_json cfg;
  cfg["max_new_tokens"] = config.max_new_tokens;
  cfg["cadence"] = config.cadence.to_string();
  cfg["validator_timeout_s"] = config.validator_timeout_s;
  j["config"] = cfg;

  ordered_json tasks = ordered_json::array();
  for (const auto& t : report.tasks) {
    ordered_json e;
    e["task_id"] = t.task_id;
    if (!t.error.empty()) {
      e["error"] = t.error;
      tasks.push_back(std::move(e));
      continue;
    }
    e["baseline_tokens"] = t.baseline_tokens;
    e["suppressed_tokens"] = t.suppressed_tokens;
    e["baseline_halt"] = std::string(to_string(t.baseline_halt));
    e["suppressed_halt"] = std::string(to_string(t.suppressed_halt));
    e["baseline_pass"] = t.baseline_pass;
    e["suppressed_pass"] = t.suppressed_pass;
    e["sound"] = t.sound;
    e["checks_run"] = t.checks_run;
    e["syntax_checks"] = t.syntax_checks;
    e["test_runs"] = t.test_runs;
    tasks.push_back(std::move(e));
  }
  j["tasks"] = std::move(tasks);

  ordered_json agg;
  agg["evaluated"] = report.evaluated;
  agg["failed_tasks"] = report.failed_tasks;
  agg["mean_baseline_tokens"] = report.mean_baseline_tokens;
  agg["mean_suppressed_tokens"] = report.mean_suppressed_tokens;
  agg["token_reduction_pct"] = report.token_reduction_pct;
  agg["baseline_pass_rate"] = report.baseline_pass_rate;
  agg["suppressed_pass_rate"] = report.suppressed_pass_rate;
  agg["soundness_failures"] = report.soundness_failures;
  agg["total_checks"] = report.total_checks;
  agg["mean_checks_per_task"] = report.mean_checks_per_task;
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

std::string corpus_outcomes_csv(const CorpusReport& report) {
  std::string out =
      "task_id,baseline_tokens,suppressed_tokens,reduction_pct,baseline_halt,suppressed_halt,"
      "baseline_pass,suppressed_pass,checks_run,error\n";
  for (const auto& t : report.tasks) {
    const double reduction =
        t.baseline_tokens > 0
            ? 100.0 * (static_cast<double>(t.baseline_tokens) - static_cast<double>(t.suppressed_tokens)) /
                  static_cast<double>(t.baseline_tokens)
            : 0.0;
    out += fmt::format("{},{},{},{:.2f},{},{},{},{},{},{}\n", t.task_id, t.baseline_tokens, t.suppressed_tokens,
                       reduction, to_string(t.baseline_halt), to_string(t.suppressed_halt), t.baseline_pass ? 1 : 0,
                       t.suppressed_pass ? 1 : 0, t.checks_run, csv_escape(t.error));
  }
  out += fmt::format("ALL,{:.2f},{:.2f},{:.2f},,,{:.4f},{:.4f},{},\n", report.mean_baseline_tokens,
                     report.mean_suppressed_tokens, report.token_reduction_pct, report.baseline_pass_rate,
                     report.suppressed_pass_rate, report.total_checks);
  return out;
}

std::string corpus_timing_json(const CorpusReport& report) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  ordered_json tasks = ordered_json::array();
  for (const auto& t : report.tasks) {
    ordered_json e;
    e["task_id"] = t.task_id;
    e["checks_run"] = t.checks_run;
    e["check_wall_time_s"] = t.check_wall_time_s;
    tasks.push_back(std::move(e));
  }
  j["tasks"] = std::move(tasks);
  j["total_check_wall_time_s"] = report.total_check_wall_time_s;
  j["mean_check_wall_time_s"] = report.mean_check_wall_time_s;
  return j.dump(2) + "\n";
}

std::string ground_truth_json(std::span<const std::pair<std::string, GroundTruth>> truths,
                              const SimulationPreset& preset) {
  ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["preset"] = preset.name;
  j["input_tokens"] = preset.input_tokens;
  j["output_tokens"] = preset.output_tokens;
  ordered_json list = ordered_json::array();
  for (const auto& [id, truth] : truths) {
    ordered_json e;
    e["trace_id"] = id;
    e["prefill_j"] = truth.prefill_j;
    e["intercept_j"] = truth.intercept_j;
    e["slope_j_per_token"] = truth.slope_j_per_token;
    e["infeasible_sampling"] = truth.infeasible_sampling;
    e["empty_intervals"] = truth.empty_intervals;
    e["token_energies_j"] = truth.token_energies_j;
    list.push_back(std::move(e));
  }
  j["traces"] = std::move(list);
  return j.dump(2) + "\n";
}

}  // namespace wattlens
