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


#include <doctest.h>

#include <fstream>
#include <thread>

#include "test_support.hpp"
#include "wattlens/process.hpp"

using namespace wattlens;
using namespace std::chrono_literals;
using wattlens::testing::error_code_of;

namespace {

CommandResult sh(const std::string& script, std::chrono::milliseconds timeout = 5000ms,
                 const std::filesystem::path& workdir = {}) {
  SandboxLimits limits;
  limits.timeout = timeout;
  return run_sandboxed({"/bin/sh", "-c", script}, limits, workdir);
}

}  // namespace

TEST_CASE("exit status and output are captured") {
  const auto ok = sh("echo hello; echo oops >&2");
  CHECK(ok.exit_code == 0);
  CHECK_FALSE(ok.timed_out);
  CHECK(ok.output.find("hello") != std::string::npos);
  CHECK(ok.output.find("oops") != std::string::npos);
  CHECK(sh("exit 3").exit_code == 3);
}

TEST_CASE("stdin is empty") {
  CHECK(sh("test -z \"$(cat)\"").exit_code == 0);
}

TEST_CASE("a command that overruns is killed with its children") {
  TempDir dir("wattlens-test");
  const auto marker = dir.path() / "late";
  const auto r = sh("(sleep 1; touch " + shell_quote(marker.string()) + ") & sleep 30", 200ms);
  CHECK(r.timed_out);
  CHECK(r.exit_code == -1);
  CHECK(r.elapsed_s < 5.0);
  std::this_thread::sleep_for(1500ms);
  CHECK_FALSE(std::filesystem::exists(marker));
}

TEST_CASE("a signal is reported") {
  const auto r = sh("kill -9 $$");
  CHECK(r.exit_code == -1);
  CHECK(r.term_signal == 9);
}

TEST_CASE("output is truncated") {
  SandboxLimits limits;
  limits.max_output_bytes = 100;
  const auto r = run_sandboxed({"/bin/sh", "-c", "yes | head -c 100000"}, limits);
  CHECK(r.exit_code == 0);
  CHECK(r.output.size() == 100);
}

TEST_CASE("file size limit applies") {
  TempDir dir("wattlens-test");
  SandboxLimits limits;
  limits.max_file_bytes = 1024;
  const auto r = run_sandboxed({"/bin/sh", "-c", "head -c 100000 /dev/zero > big"}, limits, dir.path());
  CHECK(r.exit_code != 0);
  CHECK(std::filesystem::file_size(dir.path() / "big") <= 1024);
}

TEST_CASE("workdir and missing programs") {
  TempDir dir("wattlens-test");
  const auto r = sh("pwd", 5000ms, dir.path());
  CHECK(r.output.find(dir.path().filename().string()) != std::string::npos);
  CHECK(run_sandboxed({"/no/such/program"}, {}).exit_code == 127);
  CHECK(error_code_of([] { run_sandboxed({}, {}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("shell quoting survives a round trip through sh") {
  for (std::string s : {"plain", "with space", "it's", "$HOME", "a\"b", "`x`", "", "semi;colon"}) {
    const auto r = sh("printf %s " + shell_quote(s));
    CHECK(r.output == s);
  }
}

TEST_CASE("expand_command quotes every placeholder") {
  CHECK(expand_command("python3 {tests} {code} {code}", {{"code", "/tmp/a b.py"}, {"tests", "t.py"}}) ==
        "python3 't.py' '/tmp/a b.py' '/tmp/a b.py'");
  CHECK(expand_command("x {unknown}", {{"code", "c"}}) == "x {unknown}");
}

TEST_CASE("TempDir removes its tree") {
  std::filesystem::path kept;
  {
    TempDir dir("wattlens-test");
    kept = dir.path();
    std::filesystem::create_directories(kept / "a" / "b");
    std::ofstream(kept / "a" / "b" / "f") << "x";
    CHECK(std::filesystem::is_directory(kept));
  }
  CHECK_FALSE(std::filesystem::exists(kept));
}
