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

#include <span>
#include <string_view>
#include <vector>

#include "wattlens/trace.hpp"

namespace wattlens {

enum class EnergyMode {
  kSampleMean,  // mean of the samples inside the interval times its duration
  kTrapezoid,   // integral of the piecewise-linear power curve
};

std::string_view to_string(EnergyMode mode);
EnergyMode energy_mode_from_string(std::string_view name);

/// Assigns energy to every token. Token n owns (t_{n-1}, t_n] with
/// t_0 = gen_start_t, so a sample sitting exactly on a token's end timestamp
/// belongs to that token. Intervals without any sample fall back to the
/// linearly interpolated power at the interval midpoint and are flagged
/// `estimated`. Samples at or before gen_start_t never contribute to
/// SampleMean energies.
///
/// The trace is validated first; invariant violations are thrown.
std::vector<TokenEnergy> assign_token_energies(const InferenceTrace& trace,
                                               EnergyMode mode = EnergyMode::kSampleMean);

/// Linear interpolation of the sampled power curve at `t`. Values outside the
/// sampled range clamp to the nearest endpoint.
Watts interpolate_power(std::span<const PowerSample> samples, Seconds t);

/// Token 1 is prefill; tokens 2..N are decoding.
PhaseBreakdown split_phases(std::span<const TokenEnergy> energies);

}  // namespace wattlens
