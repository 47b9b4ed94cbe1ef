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

// Regenerates the scripted token-stream corpora under fixtures/corpus from the
// task solutions in fixtures/corpus/tasks:
//
//   babbler/       solution followed by filler, padded to 1000 tokens, no eos
//   nonbabbler/    solution followed directly by eos
//   babble_first/  filler lines, then the solution, then eos
//
// Usage: make_corpus <fixtures/corpus>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wattlens/simulator.hpp"
#include "wattlens/suppression.hpp"
#include "wattlens/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kPaddedLength = 1000;
constexpr std::size_t kLeadingFiller = 18;  // ends on a newline token

// Mimics tokenizers that attach the newline to the preceding piece.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  for (auto& piece : wattlens::split_code_tokens(text)) {
    const bool glue = piece == "\n" && !out.empty() && out.back().find('\n') == std::string::npos &&
                      out.back().find_first_not_of(' ') != std::string::npos;
    if (glue) {
      out.back() += piece;
    } else {
      out.push_back(std::move(piece));
    }
  }
  return out;
}

void write_corpus(const fs::path& dir, const std::vector<std::pair<json, wattlens::ScriptedTokenSource>>& tasks) {
  fs::create_directories(dir / "streams");
  ordered_json corpus = ordered_json::array();
  for (const auto& [task, source] : tasks) {
    const std::string id = task.at("task_id").get<std::string>();
    std::ostringstream stream;
    wattlens::write_token_stream(stream, source.events());
    wattlens::write_file_atomic(dir / "streams" / (id + ".ndjson"), stream.str());

    ordered_json entry;
    entry["task_id"] = id;
    entry["stream_path"] = "streams/" + id + ".ndjson";
    entry["tests_path"] = "../tasks/" + id + "_test.py";
    entry["extraction_mode"] = task.at("extraction_mode").get<std::string>();
    corpus.push_back(std::move(entry));
  }
  wattlens::write_file_atomic(dir / "corpus.json", corpus.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_corpus <fixtures/corpus>\n";
    return 2;
  }
  const fs::path root = argv[1];
  const json tasks = json::parse(wattlens::read_file(root / "tasks" / "tasks.json"));

  std::vector<std::pair<json, wattlens::ScriptedTokenSource>> babbler, nonbabbler, babble_first;
  for (const auto& task : tasks) {
    const std::string id = task.at("task_id").get<std::string>();
    std::string text = wattlens::read_file(root / "tasks" / (id + ".solution.py"));
    if (task.at("extraction_mode").get<std::string>() == "fenced") {
      text = "Here is the function:\n```python\n" + text + "```\n";
    }
    const auto solution = tokenize(text);

    babbler.emplace_back(task, wattlens::generate_babbler_stream(solution, kPaddedLength - solution.size(),
                                                                 kPaddedLength));

    wattlens::BabblerOptions eos;
    eos.append_eos = true;
    nonbabbler.emplace_back(task, wattlens::generate_babbler_stream(solution, 0, kPaddedLength, eos));

    auto leading = wattlens::babble_filler(kLeadingFiller);
    leading.insert(leading.end(), solution.begin(), solution.end());
    babble_first.emplace_back(task, wattlens::generate_babbler_stream(leading, 0, kPaddedLength, eos));

    std::cout << id << ": " << solution.size() << " solution tokens\n";
  }
  write_corpus(root / "babbler", babbler);
  write_corpus(root / "nonbabbler", nonbabbler);
  write_corpus(root / "babble_first", babble_first);
  return 0;
}
