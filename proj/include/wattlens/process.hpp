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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wattlens {

struct CommandResult {
  int exit_code = -1;  // -1 when killed or not started
  bool timed_out = false;
  int term_signal = 0;
  double elapsed_s = 0.0;
  std::string output;  // combined stdout/stderr, truncated
};

struct SandboxLimits {
  std::chrono::milliseconds timeout{5000};
  // Extra CPU-seconds granted beyond the wall timeout before RLIMIT_CPU fires.
  int cpu_slack_s = 1;
  std::size_t max_output_bytes = 4096;
  std::size_t max_file_bytes = 16u << 20;
};

/// Runs argv[0] with argv in its own process group, stdin from /dev/null and
/// CPU/file-size rlimits applied. On timeout the whole group is SIGKILLed.
CommandResult run_sandboxed(const std::vector<std::string>& argv, const SandboxLimits& limits,
                            const std::filesystem::path& workdir = {});

/// Single-quotes `arg` for /bin/sh.
std::string shell_quote(std::string_view arg);

/// Replaces every `{key}` in `templ` with the shell-quoted value.
std::string expand_command(std::string_view templ,
                           const std::vector<std::pair<std::string, std::string>>& values);

/// Scratch directory removed (recursively) on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view prefix = "wattlens");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace wattlens
