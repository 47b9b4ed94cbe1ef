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

#include "wattlens/alignment.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace wattlens {

std::string_view to_string(EnergyMode mode) {
  return mode == EnergyMode::kSampleMean ? "sample-mean" : "trapezoid";
}

EnergyMode energy_mode_from_string(std::string_view name) {
  if (name == "sample-mean") return EnergyMode::kSampleMean;
  if (name == "trapezoid") return EnergyMode::kTrapezoid;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown energy mode '{}'", name));
}

namespace {

auto first_after(std::span<const PowerSample> samples, Seconds t) {
  return std::upper_bound(samples.begin(), samples.end(), t,
                          [](Seconds value, const PowerSample& s) { return value < s.t; });
}

// Everything below is written in terms of timestamp differences so that a
// constant clock offset cannot change the result.
Joules trapezoid_energy(std::span<const PowerSample> samples, Seconds start, Seconds end) {
  auto it = first_after(samples, start);
  Seconds prev_t = start;
  Watts prev_p = interpolate_power(samples, start);
  Joules energy = 0.0;
  for (; it != samples.end() && it->t < end; ++it) {
    energy += 0.5 * (prev_p + it->p) * (it->t - prev_t);
    prev_t = it->t;
    prev_p = it->p;
  }
  energy += 0.5 * (prev_p + interpolate_power(samples, end)) * (end - prev_t);
  return energy;
}

}  // namespace

Watts interpolate_power(std::span<const PowerSample> samples, Seconds t) {
  if (samples.empty()) {
    throw Error(ErrorCode::kCoverageError, "cannot interpolate an empty power stream");
  }
  auto upper = first_after(samples, t);
  if (upper == samples.begin()) return samples.front().p;
  const auto& lo = *(upper - 1);
  if (upper == samples.end() || lo.t == t) return lo.p;
  const auto& hi = *upper;
  return lo.p + (hi.p - lo.p) * ((t - lo.t) / (hi.t - lo.t));
}

std::vector<TokenEnergy> assign_token_energies(const InferenceTrace& trace, EnergyMode mode) {
  validate_trace(trace);

  const std::span<const PowerSample> samples(trace.samples);
  std::vector<TokenEnergy> energies;
  energies.reserve(trace.tokens.size());

  Seconds start = trace.manifest.gen_start_t;
  for (const auto& token : trace.tokens) {
    TokenEnergy te;
    te.index = token.index;
    te.start_t = start;
    te.end_t = token.t;
    te.duration = token.t - start;

    const auto lo = first_after(samples, start);
    const auto hi = first_after(samples, token.t);
    te.sample_count = static_cast<std::size_t>(hi - lo);

    if (te.sample_count == 0) {
      te.estimated = true;
      te.energy_j = interpolate_power(samples, start + 0.5 * te.duration) * te.duration;
    } else if (mode == EnergyMode::kSampleMean) {
      Watts sum = 0.0;
      for (auto it = lo; it != hi; ++it) sum += it->p;
      te.energy_j = (sum / static_cast<double>(te.sample_count)) * te.duration;
    } else {
      te.energy_j = trapezoid_energy(samples, start, token.t);
    }

    energies.push_back(te);
    start = token.t;
  }
  return energies;
}

PhaseBreakdown split_phases(std::span<const TokenEnergy> energies) {
  if (energies.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no token energies to split");
  }
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (energies[i].index != static_cast<std::int64_t>(i + 1)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("token energies must be contiguous from 1; position {} has index {}",
                              i + 1, energies[i].index));
    }
  }

  PhaseBreakdown b;
  b.prefill_j = energies.front().energy_j;
  for (std::size_t i = 1; i < energies.size(); ++i) b.decode_j += energies[i].energy_j;
  b.total_j = b.prefill_j + b.decode_j;
  b.decode_token_count = energies.size() - 1;
  // Undefined for a zero-energy trace; reported as 0.
  b.prefill_fraction = b.total_j > 0.0 ? b.prefill_j / b.total_j : 0.0;
  return b;
}

}  // namespace wattlens
