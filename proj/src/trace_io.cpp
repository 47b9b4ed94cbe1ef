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

#include "wattlens/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <json.hpp>

namespace wattlens {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double require_number(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw Error(ErrorCode::kMalformedRecord,
                fmt::format("line {}: field \"{}\" missing or not a number", line, key));
  }
  return it->get<double>();
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("line {}: not a JSON object", line_no));
    }
    fn(obj, line_no);
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, fmt::format("cannot open {}", path.string()));
  }
  return in;
}

}  // namespace

std::vector<PowerSample> read_power_stream(std::istream& in) {
  std::vector<PowerSample> samples;
  for_each_record(in, [&](const json& obj, std::size_t line) {
    samples.push_back({require_number(obj, "t", line), require_number(obj, "p", line)});
  });
  return samples;
}

std::vector<TokenEvent> read_token_stream(std::istream& in) {
  std::vector<TokenEvent> tokens;
  for_each_record(in, [&](const json& obj, std::size_t line) {
    TokenEvent tok;
    auto idx = obj.find("i");
    if (idx == obj.end() || !idx->is_number_integer()) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("line {}: field \"i\" missing or not an integer", line));
    }
    tok.index = idx->get<std::int64_t>();
    tok.t = require_number(obj, "t", line);
    if (auto text = obj.find("text"); text != obj.end() && !text->is_null()) {
      if (!text->is_string()) {
        throw Error(ErrorCode::kMalformedRecord, fmt::format("line {}: field \"text\" must be a string or null", line));
      }
      tok.text = text->get<std::string>();
    }
    if (auto eos = obj.find("eos"); eos != obj.end()) {
      if (!eos->is_boolean()) {
        throw Error(ErrorCode::kMalformedRecord, fmt::format("line {}: field \"eos\" must be a boolean", line));
      }
      tok.eos = eos->get<bool>();
    }
    tokens.push_back(std::move(tok));
  });
  return tokens;
}

void write_power_stream(std::ostream& out, std::span<const PowerSample> samples) {
  for (const auto& s : samples) {
    ordered_json obj;
    obj["t"] = s.t;
    obj["p"] = s.p;
    out << obj.dump() << '\n';
  }
}

void write_token_stream(std::ostream& out, std::span<const TokenEvent> tokens) {
  for (const auto& tok : tokens) {
    ordered_json obj;
    obj["i"] = tok.index;
    obj["t"] = tok.t;
    obj["text"] = tok.text ? ordered_json(*tok.text) : ordered_json(nullptr);
    obj["eos"] = tok.eos;
    out << obj.dump() << '\n';
  }
}

std::vector<PowerSample> load_power_stream(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_power_stream(in);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<TokenEvent> load_token_stream(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_token_stream(in);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

TraceManifest read_manifest(std::istream& in) {
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "manifest is not a JSON object");
  }
  auto need = [&](const char* key) -> const json& {
    auto it = doc.find(key);
    if (it == doc.end()) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("manifest field \"{}\" missing", key));
    }
    return *it;
  };
  try {
    if (need("format_version").get<int>() != kTraceFormatVersion) {
      throw Error(ErrorCode::kMalformedRecord,
                  fmt::format("unsupported manifest format_version {}", doc["format_version"].dump()));
    }
    TraceManifest m;
    m.trace_id = need("trace_id").get<std::string>();
    m.model_name = need("model_name").get<std::string>();
    m.workload = Workload::from_string(need("workload").get<std::string>());
    m.input_token_count = need("input_token_count").get<std::int64_t>();
    m.gen_start_t = need("gen_start_t").get<double>();
    m.max_new_tokens = need("max_new_tokens").get<std::int64_t>();
    m.clock = need("clock").get<std::string>();
    m.samples_path = need("samples_path").get<std::string>();
    m.tokens_path = need("tokens_path").get<std::string>();
    if (m.clock.empty()) {
      throw Error(ErrorCode::kMalformedRecord, "manifest must declare a clock");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, fmt::format("manifest field has wrong type: {}", e.what()));
  }
}

void write_manifest(std::ostream& out, const TraceManifest& m) {
  ordered_json doc;
  doc["format_version"] = kTraceFormatVersion;
  doc["trace_id"] = m.trace_id;
  doc["model_name"] = m.model_name;
  doc["workload"] = m.workload.name();
  doc["input_token_count"] = m.input_token_count;
  doc["gen_start_t"] = m.gen_start_t;
  doc["max_new_tokens"] = m.max_new_tokens;
  doc["clock"] = m.clock;
  doc["samples_path"] = m.samples_path;
  doc["tokens_path"] = m.tokens_path;
  out << doc.dump(2) << '\n';
}

InferenceTrace load_trace_unchecked(const fs::path& manifest_file) {
  auto in = open_input(manifest_file);
  InferenceTrace trace;
  try {
    trace.manifest = read_manifest(in);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", manifest_file.string(), e.what()));
  }
  const fs::path base = manifest_file.parent_path();
  trace.samples = load_power_stream(base / trace.manifest.samples_path);
  trace.tokens = load_token_stream(base / trace.manifest.tokens_path);
  return trace;
}

InferenceTrace parse_trace(const fs::path& manifest_file) {
  InferenceTrace trace = load_trace_unchecked(manifest_file);
  auto issues = check_trace(trace);
  if (!issues.empty()) {
    throw Error(issues.front().code, fmt::format("{}: {}", manifest_file.string(), issues.front().message));
  }
  return trace;
}

std::string read_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", tmp.string()));
    }
    out << contents;
    if (!out.flush()) {
      throw Error(ErrorCode::kIoError, fmt::format("short write to {}", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
  }
}

fs::path write_trace(const fs::path& dir, const InferenceTrace& trace) {
  fs::create_directories(dir);
  std::ostringstream samples;
  write_power_stream(samples, trace.samples);
  write_file_atomic(dir / trace.manifest.samples_path, samples.str());

  std::ostringstream tokens;
  write_token_stream(tokens, trace.tokens);
  write_file_atomic(dir / trace.manifest.tokens_path, tokens.str());

  std::ostringstream manifest;
  write_manifest(manifest, trace.manifest);
  const fs::path manifest_path = dir / (trace.manifest.trace_id + ".manifest.json");
  write_file_atomic(manifest_path, manifest.str());
  return manifest_path;
}

}  // namespace wattlens
