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

#include "wattlens/suppression.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "wattlens/trace_io.hpp"

namespace wattlens {

namespace fs = std::filesystem;
using nlohmann::json;

Cadence Cadence::parse(std::string_view text) {
  if (text == "every-line") return every_line();
  constexpr std::string_view kPrefix = "every-k=";
  if (text.substr(0, kPrefix.size()) == kPrefix) {
    const auto digits = text.substr(kPrefix.size());
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1) {
      return every_k_tokens(k);
    }
  }
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("bad cadence '{}', expected every-line or every-k=<k>", text));
}

std::string Cadence::to_string() const {
  return kind == Kind::kEveryLine ? "every-line" : fmt::format("every-k={}", k);
}

std::string_view to_string(CodeExtraction mode) {
  return mode == CodeExtraction::kRaw ? "raw" : "fenced";
}

CodeExtraction code_extraction_from_string(std::string_view name) {
  if (name == "raw" || name == "Raw") return CodeExtraction::kRaw;
  if (name == "fenced" || name == "FencedBlock") return CodeExtraction::kFencedBlock;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown code extraction '{}'", name));
}

std::optional<std::string> extract_code(std::string_view text, CodeExtraction mode) {
  if (mode == CodeExtraction::kRaw) return std::string(text);

  // Walk complete lines; fence lines alternate open/close.
  std::optional<std::size_t> body_start;
  std::size_t body_end = std::string_view::npos;
  bool inside = false;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    const std::size_t nl = text.find('\n', line_start);
    const std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
    const auto line = text.substr(line_start, line_end - line_start);
    const auto first = line.find_first_not_of(" \t");
    const bool fence = first != std::string_view::npos && line.substr(first, 3) == "```";
    if (fence) {
      if (!inside) {
        if (nl == std::string_view::npos) break;  // opening fence line still being written
        inside = true;
        body_start = nl + 1;
        body_end = std::string_view::npos;
      } else {
        inside = false;
        body_end = line_start;
      }
    }
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  if (!body_start) return std::nullopt;
  const std::size_t end = body_end == std::string_view::npos ? text.size() : body_end;
  return std::string(text.substr(*body_start, end - *body_start));
}

void SuppressionConfig::validate() const {
  if (max_new_tokens < 1) throw Error(ErrorCode::kInvalidConfig, "max_new_tokens must be >= 1");
  if (cadence.kind == Cadence::Kind::kEveryKTokens && cadence.k < 1) {
    throw Error(ErrorCode::kInvalidConfig, "cadence k must be >= 1");
  }
  if (!(validator_timeout_s > 0.0)) throw Error(ErrorCode::kInvalidConfig, "validator_timeout must be > 0");
}

CheckResult FunctionValidator::check(std::string_view code) {
  ++calls_;
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.passed = predicate_(code);
  r.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.detail = r.passed ? "pass" : "fail";
  return r;
}

CommandValidator::CommandValidator(std::string command_template, std::chrono::milliseconds timeout,
                                   std::vector<std::pair<std::string, std::string>> values,
                                   std::string suffix)
    : template_(std::move(command_template)),
      values_(std::move(values)),
      suffix_(std::move(suffix)),
      scratch_("wattlens-check") {
  limits_.timeout = timeout;
}

CheckResult CommandValidator::check(std::string_view code) {
  const fs::path candidate = scratch_.path() / ("candidate" + suffix_);
  {
    std::ofstream out(candidate, std::ios::binary | std::ios::trunc);
    out << code;
  }
  auto values = values_;
  values.emplace_back("code", candidate.string());
  const std::string command = expand_command(template_, values);

  const CommandResult run = run_sandboxed({"/bin/sh", "-c", command}, limits_, scratch_.path());
  CheckResult r;
  r.elapsed_s = run.elapsed_s;
  r.timed_out = run.timed_out;
  r.passed = !run.timed_out && run.exit_code == 0;
  if (run.timed_out) {
    r.detail = fmt::format("ValidatorTimeout after {:.3f}s", run.elapsed_s);
  } else if (run.term_signal != 0) {
    r.detail = fmt::format("killed by signal {}", run.term_signal);
  } else {
    r.detail = fmt::format("exit {}", run.exit_code);
  }
  if (!r.passed && !run.output.empty()) {
    r.detail += ": " + run.output.substr(0, 300);
  }
  return r;
}

std::string_view to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::kTestsPassed: return "TestsPassed";
    case HaltReason::kEosToken: return "EosToken";
    case HaltReason::kBudget: return "Budget";
  }
  return "Unknown";
}

SuppressionSession::SuppressionSession(SuppressionConfig config) : config_(std::move(config)) {
  config_.validate();
}

bool SuppressionSession::cadence_fires(const std::string& token_text) const {
  if (config_.cadence.kind == Cadence::Kind::kEveryLine) {
    return token_text.find('\n') != std::string::npos;
  }
  return tokens_emitted_ % config_.cadence.k == 0;
}

Decision SuppressionSession::halt(HaltReason reason) {
  state_ = SessionState::kHalted;
  halt_reason_ = reason;
  return Decision::kHalt;
}

Decision SuppressionSession::on_token(const TokenEvent& token, Validator& syntax, Validator& tests) {
  if (state_ == SessionState::kHalted) {
    throw Error(ErrorCode::kSessionAlreadyHalted,
                fmt::format("session halted ({}) before token {}", to_string(*halt_reason_), token.index));
  }
  if (!token.text) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("token {} carries no text", token.index));
  }
  text_ += *token.text;
  ++tokens_emitted_;

  if (token.eos) return halt(HaltReason::kEosToken);
  if (tokens_emitted_ >= config_.max_new_tokens) return halt(HaltReason::kBudget);
  if (!cadence_fires(*token.text)) return Decision::kContinue;

  const auto code = extract_code(text_, config_.code_extraction);
  if (!code) return Decision::kContinue;

  ValidatorVerdict verdict;
  verdict.at_token = tokens_emitted_;
  const CheckResult parsed = syntax.check(*code);
  ++syntax_checks_;
  verdict.elapsed_s += parsed.elapsed_s;
  verdict.syntactically_valid = parsed.passed;
  verdict.detail = "syntax: " + parsed.detail;
  if (parsed.passed) {
    const CheckResult tested = tests.check(*code);
    ++test_runs_;
    verdict.elapsed_s += tested.elapsed_s;
    verdict.tests_passed = tested.passed;
    verdict.detail += "; tests: " + tested.detail;
  }
  check_wall_time_s_ += verdict.elapsed_s;
  const bool passed = verdict.tests_passed;
  verdicts_.push_back(std::move(verdict));
  return passed ? halt(HaltReason::kTestsPassed) : Decision::kContinue;
}

namespace {

SuppressionOutcome outcome_of(const SuppressionSession& s) {
  SuppressionOutcome o;
  o.final_text = s.accumulated_text();
  o.tokens_emitted = s.tokens_emitted();
  o.halt_reason = s.halt_reason().value_or(HaltReason::kEosToken);
  o.checks_run = s.checks_run();
  o.syntax_checks = s.syntax_checks();
  o.test_runs = s.test_runs();
  o.check_wall_time_s = s.check_wall_time_s();
  return o;
}

}  // namespace

SuppressionOutcome run_suppressed_generation(TokenSource& source, const SuppressionConfig& config,
                                             Validator& syntax, Validator& tests) {
  SuppressionSession session(config);
  while (session.state() == SessionState::kGenerating) {
    auto token = source.next();
    if (!token) break;
    session.on_token(*token, syntax, tests);
  }
  return outcome_of(session);
}

SuppressionOutcome run_baseline_generation(TokenSource& source, const SuppressionConfig& config) {
  config.validate();
  SuppressionOutcome o;
  o.halt_reason = HaltReason::kEosToken;
  while (auto token = source.next()) {
    if (!token->text) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("token {} carries no text", token->index));
    }
    o.final_text += *token->text;
    ++o.tokens_emitted;
    if (token->eos) break;
    if (o.tokens_emitted >= config.max_new_tokens) {
      o.halt_reason = HaltReason::kBudget;
      break;
    }
  }
  return o;
}

std::vector<CorpusTask> load_corpus(const fs::path& corpus_file) {
  json doc = json::parse(read_file(corpus_file), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kMalformedRecord, fmt::format("{}: corpus must be a JSON list", corpus_file.string()));
  }
  const fs::path base = fs::absolute(corpus_file).parent_path();
  std::vector<CorpusTask> tasks;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    try {
      CorpusTask task;
      task.task_id = entry.at("task_id").get<std::string>();
      task.stream_path = (base / entry.at("stream_path").get<std::string>()).lexically_normal();
      task.tests_path = (base / entry.at("tests_path").get<std::string>()).lexically_normal();
      task.extraction = code_extraction_from_string(entry.value("extraction_mode", std::string("raw")));
      tasks.push_back(std::move(task));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  fmt::format("{}: task {}: {}", corpus_file.string(), i + 1, e.what()));
    }
  }
  return tasks;
}

std::string default_syntax_command(std::string_view python) {
  return fmt::format(
      "{} -c 'import sys; compile(open(sys.argv[1]).read(), sys.argv[1], \"exec\")' {{code}}",
      python);
}

std::string default_test_command(std::string_view python) { return fmt::format("{} {{tests}} {{code}}", python); }

ValidatorFactory command_validators(std::string syntax_command, std::string test_command,
                                    std::chrono::milliseconds timeout) {
  ValidatorFactory f;
  f.syntax = [cmd = std::move(syntax_command), timeout](const CorpusTask&) -> std::unique_ptr<Validator> {
    return std::make_unique<CommandValidator>(cmd, timeout);
  };
  f.tests = [cmd = std::move(test_command), timeout](const CorpusTask& task) -> std::unique_ptr<Validator> {
    return std::make_unique<CommandValidator>(
        cmd, timeout, std::vector<std::pair<std::string, std::string>>{{"tests", task.tests_path.string()}});
  };
  return f;
}

namespace {

bool final_code_passes(const std::string& text, CodeExtraction mode, Validator& tests) {
  const auto code = extract_code(text, mode);
  return code && tests.check(*code).passed;
}

}  // namespace

CorpusReport evaluate_corpus(std::span<const CorpusTask> tasks, const SuppressionConfig& config,
                             const ValidatorFactory& validators) {
  CorpusReport report;
  double baseline_sum = 0.0;
  double suppressed_sum = 0.0;
  std::size_t baseline_passes = 0;
  std::size_t suppressed_passes = 0;

  for (const auto& task : tasks) {
    TaskOutcome out;
    out.task_id = task.task_id;
    try {
      SuppressionConfig cfg = config;
      cfg.code_extraction = task.extraction;
      auto source = ScriptedTokenSource::from_file(task.stream_path);

      const SuppressionOutcome base = run_baseline_generation(source, cfg);
      source.rewind();
      auto syntax = validators.syntax(task);
      auto tests = validators.tests(task);
      const SuppressionOutcome supp = run_suppressed_generation(source, cfg, *syntax, *tests);

      // Fresh validator for the final verdicts so nothing leaks from the session.
      auto judge = validators.tests(task);
      out.baseline_tokens = base.tokens_emitted;
      out.baseline_halt = base.halt_reason;
      out.baseline_pass = final_code_passes(base.final_text, cfg.code_extraction, *judge);
      out.suppressed_tokens = supp.tokens_emitted;
      out.suppressed_halt = supp.halt_reason;
      out.suppressed_pass = final_code_passes(supp.final_text, cfg.code_extraction, *judge);
      out.sound = supp.halt_reason != HaltReason::kTestsPassed || out.suppressed_pass;
      out.checks_run = supp.checks_run;
      out.syntax_checks = supp.syntax_checks;
      out.test_runs = supp.test_runs;
      out.check_wall_time_s = supp.check_wall_time_s;
    } catch (const Error& e) {
      out.error = e.what();
    }

    if (out.error.empty()) {
      ++report.evaluated;
      baseline_sum += static_cast<double>(out.baseline_tokens);
      suppressed_sum += static_cast<double>(out.suppressed_tokens);
      baseline_passes += out.baseline_pass ? 1 : 0;
      suppressed_passes += out.suppressed_pass ? 1 : 0;
      report.soundness_failures += out.sound ? 0 : 1;
      report.total_checks += out.checks_run;
      report.total_check_wall_time_s += out.check_wall_time_s;
    } else {
      ++report.failed_tasks;
    }
    report.tasks.push_back(std::move(out));
  }

  if (report.evaluated > 0) {
    const double n = static_cast<double>(report.evaluated);
    report.mean_baseline_tokens = baseline_sum / n;
    report.mean_suppressed_tokens = suppressed_sum / n;
    report.token_reduction_pct =
        baseline_sum > 0.0 ? 100.0 * (baseline_sum - suppressed_sum) / baseline_sum : 0.0;
    report.baseline_pass_rate = static_cast<double>(baseline_passes) / n;
    report.suppressed_pass_rate = static_cast<double>(suppressed_passes) / n;
    report.mean_checks_per_task = static_cast<double>(report.total_checks) / n;
    report.mean_check_wall_time_s = report.total_check_wall_time_s / n;
  }
  return report;
}

}  // namespace wattlens
