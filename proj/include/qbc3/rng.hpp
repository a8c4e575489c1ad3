// Copyright 2026 The qbc3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qbc3 {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a of a short tag (subcommand names).
std::uint64_t tag_hash(std::string_view tag);

/// Seed of an independent stream: mix of (root, tag, grid index, session
/// index). Streams for distinct tuples are decorrelated by the mixer; the
/// same tuple always yields the same seed.
std::uint64_t split_seed(std::uint64_t root, std::string_view tag, std::uint64_t grid_index,
                         std::uint64_t session_index);

inline Rng make_rng(std::uint64_t root, std::string_view tag, std::uint64_t grid_index = 0,
                    std::uint64_t session_index = 0) {
  return Rng(split_seed(root, tag, grid_index, session_index));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound) by rejection; identical across standard
/// libraries, unlike std::uniform_int_distribution.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

}  // namespace qbc3
