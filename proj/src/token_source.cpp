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

#include "wattlens/token_source.hpp"

#include <fmt/format.h>

#include "wattlens/trace_io.hpp"

namespace wattlens {

namespace fs = std::filesystem;

ScriptedTokenSource ScriptedTokenSource::from_file(const fs::path& path) {
  auto events = load_token_stream(path);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!events[i].text) {
      throw Error(ErrorCode::kSourceError,
                  fmt::format("{}: token {} has no text", path.string(), events[i].index));
    }
    if (events[i].index != static_cast<std::int64_t>(i + 1)) {
      throw Error(ErrorCode::kSourceError, fmt::format("{}: token indices are not contiguous", path.string()));
    }
  }
  return ScriptedTokenSource(std::move(events));
}

}  // namespace wattlens
