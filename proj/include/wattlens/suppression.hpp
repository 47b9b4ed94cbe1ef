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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wattlens/process.hpp"
#include "wattlens/token_source.hpp"
#include "wattlens/trace.hpp"

namespace wattlens {

/// When the controller inspects the accumulated output.
struct Cadence {
  enum class Kind { kEveryLine, kEveryKTokens };
  Kind kind = Kind::kEveryLine;
  std::size_t k = 1;

  static Cadence every_line() { return {}; }
  static Cadence every_k_tokens(std::size_t k) { return {Kind::kEveryKTokens, k}; }

  /// "every-line" or "every-k=<k>".
  static Cadence parse(std::string_view text);
  std::string to_string() const;
};

enum class CodeExtraction { kRaw, kFencedBlock };

std::string_view to_string(CodeExtraction mode);
CodeExtraction code_extraction_from_string(std::string_view name);

/// Raw returns the text unchanged. FencedBlock returns the body of the last
/// ``` block; a block that has not been closed yet runs to the end of the
/// text. Returns nullopt when no block has started.
std::optional<std::string> extract_code(std::string_view text, CodeExtraction mode);

struct SuppressionConfig {
  std::size_t max_new_tokens = 300;
  Cadence cadence;
  double validator_timeout_s = 5.0;
  CodeExtraction code_extraction = CodeExtraction::kRaw;

  void validate() const;
};

struct CheckResult {
  bool passed = false;
  bool timed_out = false;
  double elapsed_s = 0.0;
  std::string detail;
};

/// Judges a candidate program. Used both for the syntax gate and for the
/// test suite.
class Validator {
 public:
  virtual ~Validator() = default;
  virtual CheckResult check(std::string_view code) = 0;
};

/// In-process validator backed by a predicate.
class FunctionValidator : public Validator {
 public:
  explicit FunctionValidator(std::function<bool(std::string_view)> predicate)
      : predicate_(std::move(predicate)) {}

  CheckResult check(std::string_view code) override;
  std::size_t calls() const { return calls_; }

 private:
  std::function<bool(std::string_view)> predicate_;
  std::size_t calls_ = 0;
};

/// Writes the candidate to `<scratch>/candidate<suffix>` and runs a /bin/sh
/// command template in the sandbox. `{code}` expands to the candidate path;
/// extra placeholders (e.g. `{tests}`) come from `values`. Exit status 0
/// passes; any other status or a timeout fails.
class CommandValidator : public Validator {
 public:
  CommandValidator(std::string command_template, std::chrono::milliseconds timeout,
                   std::vector<std::pair<std::string, std::string>> values = {},
                   std::string suffix = ".py");

  CheckResult check(std::string_view code) override;

 private:
  std::string template_;
  SandboxLimits limits_;
  std::vector<std::pair<std::string, std::string>> values_;
  std::string suffix_;
  TempDir scratch_;
};

enum class HaltReason { kTestsPassed, kEosToken, kBudget };
std::string_view to_string(HaltReason reason);

enum class SessionState { kGenerating, kHalted };
enum class Decision { kContinue, kHalt };

struct ValidatorVerdict {
  bool syntactically_valid = false;
  bool tests_passed = false;
  double elapsed_s = 0.0;
  std::string detail;
  std::size_t at_token = 0;
};

/// Streaming early-stop controller. Each token is appended to the output;
/// at every cadence point the extracted code goes through the syntax gate
/// and, only if that passes, through the tests. Generation halts on the
/// first passing test run, on end-of-sequence, or when the budget is spent.
class SuppressionSession {
 public:
  explicit SuppressionSession(SuppressionConfig config);

  Decision on_token(const TokenEvent& token, Validator& syntax, Validator& tests);

  const SuppressionConfig& config() const { return config_; }
  const std::string& accumulated_text() const { return text_; }
  std::size_t tokens_emitted() const { return tokens_emitted_; }
  std::size_t checks_run() const { return syntax_checks_ + test_runs_; }
  std::size_t syntax_checks() const { return syntax_checks_; }
  std::size_t test_runs() const { return test_runs_; }
  double check_wall_time_s() const { return check_wall_time_s_; }
  SessionState state() const { return state_; }
  std::optional<HaltReason> halt_reason() const { return halt_reason_; }
  const std::vector<ValidatorVerdict>& verdicts() const { return verdicts_; }

 private:
  bool cadence_fires(const std::string& token_text) const;
  Decision halt(HaltReason reason);

  SuppressionConfig config_;
  std::string text_;
  std::size_t tokens_emitted_ = 0;
  std::size_t syntax_checks_ = 0;
  std::size_t test_runs_ = 0;
  double check_wall_time_s_ = 0.0;
  SessionState state_ = SessionState::kGenerating;
  std::optional<HaltReason> halt_reason_;
  std::vector<ValidatorVerdict> verdicts_;
};

struct SuppressionOutcome {
  std::string final_text;
  std::size_t tokens_emitted = 0;
  HaltReason halt_reason = HaltReason::kEosToken;
  std::size_t checks_run = 0;
  std::size_t syntax_checks = 0;
  std::size_t test_runs = 0;
  double check_wall_time_s = 0.0;
};

/// Drives a session until it halts. A source that runs dry without an
/// end-of-sequence token is treated as if its last token carried one.
SuppressionOutcome run_suppressed_generation(TokenSource& source, const SuppressionConfig& config,
                                             Validator& syntax, Validator& tests);

/// The same stream without any checks: stops only on eos or budget.
SuppressionOutcome run_baseline_generation(TokenSource& source, const SuppressionConfig& config);

struct CorpusTask {
  std::string task_id;
  std::filesystem::path stream_path;
  std::filesystem::path tests_path;
  CodeExtraction extraction = CodeExtraction::kRaw;
};

/// Reads a corpus file (JSON list of tasks). Relative paths resolve against
/// the corpus file's directory.
std::vector<CorpusTask> load_corpus(const std::filesystem::path& corpus_file);

struct TaskOutcome {
  std::string task_id;
  std::size_t baseline_tokens = 0;
  std::size_t suppressed_tokens = 0;
  HaltReason baseline_halt = HaltReason::kBudget;
  HaltReason suppressed_halt = HaltReason::kBudget;
  bool baseline_pass = false;
  bool suppressed_pass = false;
  // False only when the session claimed TestsPassed but an independent re-run
  // of the tests on the final code failed.
  bool sound = true;
  std::size_t checks_run = 0;
  std::size_t syntax_checks = 0;
  std::size_t test_runs = 0;
  double check_wall_time_s = 0.0;
  std::string error;  // non-empty when the task could not be evaluated
};

struct CorpusReport {
  std::vector<TaskOutcome> tasks;
  std::size_t evaluated = 0;
  std::size_t failed_tasks = 0;
  double mean_baseline_tokens = 0.0;
  double mean_suppressed_tokens = 0.0;
  double token_reduction_pct = 0.0;
  double baseline_pass_rate = 0.0;
  double suppressed_pass_rate = 0.0;
  std::size_t soundness_failures = 0;
  std::size_t total_checks = 0;
  double mean_checks_per_task = 0.0;
  double total_check_wall_time_s = 0.0;
  double mean_check_wall_time_s = 0.0;
};

/// Builds the validators used for one task.
struct ValidatorFactory {
  std::function<std::unique_ptr<Validator>(const CorpusTask&)> syntax;
  std::function<std::unique_ptr<Validator>(const CorpusTask&)> tests;
};

/// External-command validators. The syntax command sees `{code}`; the test
/// command sees `{code}` and `{tests}`.
ValidatorFactory command_validators(std::string syntax_command, std::string test_command,
                                    std::chrono::milliseconds timeout);

/// Default commands: a Python AST parse for the syntax gate and
/// `<python> {tests} {code}` for the tests.
std::string default_syntax_command(std::string_view python = "python3");
std::string default_test_command(std::string_view python = "python3");

/// Replays every task twice (baseline and suppressed), then re-runs the tests
/// on both final programs. Per-task failures are recorded, not thrown.
/// `config.code_extraction` is overridden by each task's extraction mode.
CorpusReport evaluate_corpus(std::span<const CorpusTask> tasks, const SuppressionConfig& config,
                             const ValidatorFactory& validators);

}  // namespace wattlens
