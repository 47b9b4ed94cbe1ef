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

#include <fmt/format.h>
#include <json.hpp>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "wattlens/alignment.hpp"
#include "wattlens/cli.hpp"
#include "wattlens/process.hpp"
#include "wattlens/trace_io.hpp"

using namespace wattlens;
using namespace std::chrono_literals;
using wattlens::testing::corpus_dir;
using wattlens::testing::source_dir;
namespace fs = std::filesystem;

namespace {

fs::path traces_dir() { return source_dir() / "fixtures" / "traces"; }
fs::path golden_dir() { return source_dir() / "tests" / "golden"; }

std::vector<std::string> fixture_manifests() {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(traces_dir())) {
    if (e.path().string().ends_with(".manifest.json")) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int run_cli(std::vector<std::string> args) { return cli::run(args); }

/// Runs the installed binary so that exit status and console output can be inspected.
CommandResult cli_process(const std::vector<std::string>& args) {
  std::vector<std::string> argv{WATTLENS_CLI_BIN};
  argv.insert(argv.end(), args.begin(), args.end());
  SandboxLimits limits;
  limits.timeout = 120000ms;
  limits.cpu_slack_s = 120;
  limits.max_output_bytes = 1 << 20;
  return run_sandboxed(argv, limits);
}

std::set<std::string> names_in(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
  return out;
}

/// Same file names with the same bytes.
void check_same_tree(const fs::path& got, const fs::path& want) {
  REQUIRE(names_in(got) == names_in(want));
  for (const auto& name : names_in(want)) {
    INFO(name);
    CHECK(read_file(got / name) == read_file(want / name));
  }
}

}  // namespace

TEST_CASE("profile writes one report and one CSV per trace") {
  TempDir out("wattlens-test");
  const auto manifest = (traces_dir() / "paper-CU-like-0000.manifest.json").string();
  CHECK(run_cli({"profile", manifest, "--out", out.path().string()}) == cli::kExitOk);
  CHECK(names_in(out.path()) == std::set<std::string>{"paper-CU-like-0000.report.json", "paper-CU-like-0000.tokens.csv"});
  const auto csv = read_file(out.path() / "paper-CU-like-0000.tokens.csv");
  CHECK(csv.rfind("index,start_t,end_t,duration_s,energy_j,estimated\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("profile reports bad inputs and keeps the good ones") {
  TempDir work("wattlens-test");
  TempDir out("wattlens-test");
  auto trace = load_trace_unchecked(traces_dir() / "paper-CU-like-0001.manifest.json");
  trace.manifest.trace_id = "broken";
  trace.manifest.samples_path = "broken.samples.ndjson";
  trace.manifest.tokens_path = "broken.tokens.ndjson";
  trace.samples.resize(trace.samples.size() / 2);
  const auto broken = write_trace(work.path(), trace);
  const auto good = (traces_dir() / "paper-CU-like-0000.manifest.json").string();

  const auto r = cli_process({"profile", good, broken.string(), (work.path() / "missing.manifest.json").string(),
                              "--out", out.path().string()});
  CHECK(r.exit_code == cli::kExitUser);
  CHECK(r.output.find("broken.manifest.json: CoverageError") != std::string::npos);
  CHECK(r.output.find("missing.manifest.json: IoError") != std::string::npos);
  CHECK(names_in(out.path()) == std::set<std::string>{"paper-CU-like-0000.report.json", "paper-CU-like-0000.tokens.csv"});
}

TEST_CASE("trapezoid mode changes only energy fields") {
  TempDir a("wattlens-test"), b("wattlens-test");
  const auto manifest = (traces_dir() / "sparse-10hz-0000.manifest.json").string();
  REQUIRE(run_cli({"profile", manifest, "--out", a.path().string()}) == 0);
  REQUIRE(run_cli({"--mode", "trapezoid", "profile", manifest, "--out", b.path().string()}) == 0);

  auto ja = nlohmann::json::parse(read_file(a.path() / "sparse-10hz-0000.report.json"));
  auto jb = nlohmann::json::parse(read_file(b.path() / "sparse-10hz-0000.report.json"));
  CHECK(ja["mode"] == "sample-mean");
  CHECK(jb["mode"] == "trapezoid");
  CHECK(ja["phase_breakdown"]["total_j"] != jb["phase_breakdown"]["total_j"]);
  for (const char* key : {"mode", "phase_breakdown", "energy_per_token_j", "energy_per_decode_token_j", "decoding_trend"}) {
    ja.erase(key);
    jb.erase(key);
  }
  CHECK(ja == jb);

  auto columns = [](const std::string& csv, bool energy) {
    std::string out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) {
      std::vector<std::string> cells;
      std::istringstream row(line);
      for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
      out += energy ? cells[4] : cells[0] + cells[1] + cells[2] + cells[3] + cells[5];
      out += '\n';
    }
    return out;
  };
  const auto ca = read_file(a.path() / "sparse-10hz-0000.tokens.csv");
  const auto cb = read_file(b.path() / "sparse-10hz-0000.tokens.csv");
  CHECK(columns(ca, false) == columns(cb, false));
  CHECK(columns(ca, true) != columns(cb, true));
}

TEST_CASE("aggregate drops the extreme trace of a group") {
  TempDir reports("wattlens-test");
  REQUIRE(run_cli({"profile", (traces_dir() / "0-shot-like-0000.manifest.json").string(),
               (traces_dir() / "0-shot-like-0001.manifest.json").string(),
               (traces_dir() / "0-shot-like-0002.manifest.json").string(),
               (traces_dir() / "sparse-10hz-0000.manifest.json").string(), "--out", reports.path().string()}) == 0);
  REQUIRE(run_cli({"aggregate", reports.path().string()}) == 0);
  const auto summary = nlohmann::json::parse(read_file(reports.path() / "summary.json"));
  REQUIRE(summary["summaries"].size() == 1);
  CHECK(summary["summaries"][0]["n_outliers_removed"] == 1);
  CHECK(summary["summaries"][0]["removed_trace_ids"][0] == "sparse-10hz-0000");

  REQUIRE(run_cli({"--outliers", "none", "aggregate", reports.path().string()}) == 0);
  const auto kept = nlohmann::json::parse(read_file(reports.path() / "summary.json"));
  CHECK(kept["summaries"][0]["n_outliers_removed"] == 0);
  CHECK(kept["summaries"][0]["n_traces"] == 4);
}

TEST_CASE("aggregate of a single report has zero spread") {
  TempDir reports("wattlens-test");
  REQUIRE(run_cli({"profile", (traces_dir() / "paper-CU-like-0000.manifest.json").string(), "--out",
               reports.path().string()}) == 0);
  REQUIRE(run_cli({"aggregate", reports.path().string()}) == 0);
  const auto s = nlohmann::json::parse(read_file(reports.path() / "summary.json"))["summaries"][0];
  CHECK(s["n_traces"] == 1);
  CHECK(s["total_j"]["std"] == 0.0);
  CHECK(s["energy_per_token_j"]["std"] == 0.0);
  const auto csv = read_file(reports.path() / "summary.csv");
  CHECK(csv.find(" ± 0.0000") != std::string::npos);
}

TEST_CASE("aggregate of an empty directory") {
  TempDir empty("wattlens-test");
  const auto r = cli_process({"aggregate", empty.path().string()});
  CHECK(r.exit_code == cli::kExitUser);
  CHECK(r.output.find("no reports found") != std::string::npos);
}

TEST_CASE("simulate writes traces and ground truth deterministically") {
  TempDir a("wattlens-test"), b("wattlens-test");
  REQUIRE(run_cli({"simulate", "--preset", "paper-CU-like", "--count", "5", "--seed", "7", "--out", a.path().string()}) == 0);
  REQUIRE(run_cli({"--jobs", "1", "simulate", "--preset", "paper-CU-like", "--count", "5", "--seed", "7", "--out",
               b.path().string()}) == 0);
  const auto names = names_in(a.path());
  CHECK(names.size() == 16);
  CHECK(names.count("ground_truth.json") == 1);
  CHECK(names.count("paper-CU-like-0004.manifest.json") == 1);
  check_same_tree(a.path(), b.path());
  for (int i = 0; i < 5; ++i) {
    CHECK_NOTHROW(parse_trace(a.path() / fmt::format("paper-CU-like-{:04d}.manifest.json", i)));
  }
}

TEST_CASE("simulate warns about infeasible sampling") {
  TempDir out("wattlens-test");
  const auto r = cli_process({"simulate", "--preset", "sparse-10hz", "--count", "1", "--out", out.path().string()});
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("warning") != std::string::npos);
  CHECK(r.output.find("estimated") != std::string::npos);
  const auto trace = parse_trace(out.path() / "sparse-10hz-0000.manifest.json");
  const auto energies = assign_token_energies(trace);
  CHECK(std::any_of(energies.begin(), energies.end(), [](const auto& e) { return e.estimated; }));
}

TEST_CASE("simulate rejects bad configs") {
  TempDir dir("wattlens-test");
  write_file_atomic(dir.path() / "bad.json",
                    R"({"input_tokens": 10, "output_tokens": 5, "model": {"prefill_j_per_input_token": -1, "decode_base_j": 1}})");
  CHECK(run_cli({"simulate", "--config", (dir.path() / "bad.json").string(), "--out", dir.path().string()}) == cli::kExitUser);
  CHECK(run_cli({"simulate", "--preset", "nope", "--out", dir.path().string()}) == cli::kExitUser);
  CHECK(run_cli({"simulate", "--out", dir.path().string()}) == cli::kExitUser);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}) == cli::kExitUser);
  CHECK(run_cli({"frobnicate"}) == cli::kExitUser);
  CHECK(run_cli({"--mode", "median", "profile", "x.manifest.json"}) == cli::kExitUser);
  CHECK(run_cli({"suppress", "/no/such/corpus.json"}) == cli::kExitUser);
  CHECK(run_cli({"suppress", (corpus_dir() / "babbler" / "corpus.json").string(), "--cadence", "often"}) == cli::kExitUser);
}

TEST_CASE("outputs match the golden files") {
  SUBCASE("profile") {
    TempDir out("wattlens-test");
    auto args = std::vector<std::string>{"profile"};
    for (const auto& m : fixture_manifests()) args.push_back(m);
    args.insert(args.end(), {"--out", out.path().string()});
    REQUIRE(run_cli(args) == 0);
    check_same_tree(out.path(), golden_dir() / "profile");
  }
  SUBCASE("aggregate") {
    TempDir out("wattlens-test");
    REQUIRE(run_cli({"aggregate", (golden_dir() / "profile").string(), "--out", out.path().string()}) == 0);
    check_same_tree(out.path(), golden_dir() / "aggregate");
  }
  SUBCASE("suppress") {
    TempDir out("wattlens-test");
    REQUIRE(run_cli({"suppress", (corpus_dir() / "babbler" / "corpus.json").string(), "--out", out.path().string()}) == 0);
    fs::remove(out.path() / "timing.json");
    check_same_tree(out.path(), golden_dir() / "suppress");
  }
}

TEST_CASE("every-line never halts later than every-k=5 on the corpus") {
  TempDir line("wattlens-test"), k5("wattlens-test");
  const auto corpus = (corpus_dir() / "babbler" / "corpus.json").string();
  REQUIRE(run_cli({"suppress", corpus, "--out", line.path().string()}) == 0);
  REQUIRE(run_cli({"suppress", corpus, "--cadence", "every-k=5", "--out", k5.path().string()}) == 0);
  const auto a = nlohmann::json::parse(read_file(line.path() / "outcomes.json"))["tasks"];
  const auto b = nlohmann::json::parse(read_file(k5.path() / "outcomes.json"))["tasks"];
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO(a[i]["task_id"]);
    CHECK(a[i]["suppressed_tokens"].get<int>() <= b[i]["suppressed_tokens"].get<int>());
    CHECK(a[i]["suppressed_pass"] == b[i]["suppressed_pass"]);
  }
}
