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

#include "wattlens/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <system_error>

#include <fmt/format.h>

#include "wattlens/error.hpp"

namespace wattlens {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void child_exec(const std::vector<std::string>& argv, const SandboxLimits& limits,
                             const fs::path& workdir, int out_fd) {
  setpgid(0, 0);

  int devnull = open("/dev/null", O_RDONLY);
  if (devnull >= 0) dup2(devnull, STDIN_FILENO);
  dup2(out_fd, STDOUT_FILENO);
  dup2(out_fd, STDERR_FILENO);

  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(limits.timeout).count();
  rlimit cpu{static_cast<rlim_t>(timeout_s + limits.cpu_slack_s),
             static_cast<rlim_t>(timeout_s + limits.cpu_slack_s + 1)};
  setrlimit(RLIMIT_CPU, &cpu);
  rlimit fsize{static_cast<rlim_t>(limits.max_file_bytes), static_cast<rlim_t>(limits.max_file_bytes)};
  setrlimit(RLIMIT_FSIZE, &fsize);
  rlimit core{0, 0};
  setrlimit(RLIMIT_CORE, &core);

  if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(126);

  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  execvp(args[0], args.data());
  _exit(127);
}

}  // namespace

CommandResult run_sandboxed(const std::vector<std::string>& argv, const SandboxLimits& limits,
                            const fs::path& workdir) {
  if (argv.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty command");
  }
  int pipe_fds[2];
  if (pipe2(pipe_fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kIoError, fmt::format("pipe: {}", std::strerror(errno)));
  }

  const auto start = Clock::now();
  const pid_t pid = fork();
  if (pid < 0) {
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    throw Error(ErrorCode::kIoError, fmt::format("fork: {}", std::strerror(errno)));
  }
  if (pid == 0) {
    close(pipe_fds[0]);
    child_exec(argv, limits, workdir, pipe_fds[1]);
  }
  // Both sides race to set the group so killpg works no matter who runs first.
  setpgid(pid, pid);
  close(pipe_fds[1]);
  fcntl(pipe_fds[0], F_SETFL, O_NONBLOCK);

  CommandResult result;
  const auto deadline = start + limits.timeout;
  bool pipe_open = true;
  int status = 0;
  char buf[4096];

  for (;;) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;

    if (Clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    if (pipe_open) {
      pollfd pfd{pipe_fds[0], POLLIN, 0};
      poll(&pfd, 1, 2);
      const ssize_t n = read(pipe_fds[0], buf, sizeof buf);
      if (n > 0) {
        const auto room = limits.max_output_bytes - std::min(limits.max_output_bytes, result.output.size());
        result.output.append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(n)));
      } else if (n == 0) {
        pipe_open = false;
      }
    } else {
      usleep(1000);
    }
  }
  // Drain anything written between the last poll and exit.
  for (ssize_t n; pipe_open && (n = read(pipe_fds[0], buf, sizeof buf)) > 0;) {
    const auto room = limits.max_output_bytes - std::min(limits.max_output_bytes, result.output.size());
    result.output.append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(n)));
  }
  close(pipe_fds[0]);
  // Reap stragglers left in the group (e.g. a shell's background children).
  kill(-pid, SIGKILL);

  result.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.term_signal = WTERMSIG(status);
    }
  }
  return result;
}

std::string shell_quote(std::string_view arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string expand_command(std::string_view templ,
                           const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out(templ);
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    const std::string quoted = shell_quote(value);
    for (std::size_t pos = out.find(needle); pos != std::string::npos;
         pos = out.find(needle, pos + quoted.size())) {
      out.replace(pos, needle.size(), quoted);
    }
  }
  return out;
}

TempDir::TempDir(std::string_view prefix) {
  std::string templ = (fs::temp_directory_path() / (std::string(prefix) + "-XXXXXX")).string();
  if (mkdtemp(templ.data()) == nullptr) {
    throw Error(ErrorCode::kIoError, fmt::format("mkdtemp: {}", std::strerror(errno)));
  }
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace wattlens
