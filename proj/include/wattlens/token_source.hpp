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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "wattlens/trace.hpp"

namespace wattlens {

/// Pull-based stream of generated tokens. Returns nullopt once the producer
/// has nothing more to give; errors surface as Error(kSourceError).
class TokenSource {
 public:
  virtual ~TokenSource() = default;
  virtual std::optional<TokenEvent> next() = 0;
};

/// Replays a fixed list of events.
class ScriptedTokenSource : public TokenSource {
 public:
  ScriptedTokenSource() = default;
  explicit ScriptedTokenSource(std::vector<TokenEvent> events) : events_(std::move(events)) {}

  /// Loads a token-stream NDJSON file. Every event must carry text.
  static ScriptedTokenSource from_file(const std::filesystem::path& path);

  std::optional<TokenEvent> next() override {
    if (pos_ >= events_.size()) return std::nullopt;
    return events_[pos_++];
  }

  void rewind() { pos_ = 0; }
  std::span<const TokenEvent> events() const { return events_; }
  std::size_t size() const { return events_.size(); }

 private:
  std::vector<TokenEvent> events_;
  std::size_t pos_ = 0;
};

}  // namespace wattlens
