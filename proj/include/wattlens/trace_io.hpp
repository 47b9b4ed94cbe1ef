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

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "wattlens/trace.hpp"

namespace wattlens {

inline constexpr int kTraceFormatVersion = 1;

// NDJSON streams. Readers skip blank lines, ignore unknown keys and report the
// 1-based line number in MalformedRecord errors. Ordering is not checked here.
std::vector<PowerSample> read_power_stream(std::istream& in);
std::vector<TokenEvent> read_token_stream(std::istream& in);
void write_power_stream(std::ostream& out, std::span<const PowerSample> samples);
void write_token_stream(std::ostream& out, std::span<const TokenEvent> tokens);

std::vector<PowerSample> load_power_stream(const std::filesystem::path& path);
std::vector<TokenEvent> load_token_stream(const std::filesystem::path& path);

TraceManifest read_manifest(std::istream& in);
void write_manifest(std::ostream& out, const TraceManifest& manifest);

/// Loads a manifest and both streams it references (paths are resolved
/// relative to the manifest's directory), then validates the whole trace.
InferenceTrace parse_trace(const std::filesystem::path& manifest_file);

/// Like parse_trace but skips validation; used for reporting on bad inputs.
InferenceTrace load_trace_unchecked(const std::filesystem::path& manifest_file);

/// Writes the manifest to `dir/<trace_id>.manifest.json` and the streams to the
/// manifest's samples_path/tokens_path (relative to `dir`). Returns the
/// manifest path.
std::filesystem::path write_trace(const std::filesystem::path& dir, const InferenceTrace& trace);

/// Writes `contents` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace wattlens
