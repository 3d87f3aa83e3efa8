// Copyright 2026 The mixsim Authors
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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixsim {

// Philox4x32-10 counter-based block function (Salmon et al., Random123).
// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// SplitMix64 finalizer of (x + golden gamma); the mixing step used for seed
// derivation.
std::uint64_t splitmix64(std::uint64_t x);

// 64-bit FNV-1a of the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text);

// Every independent random decision in the pipeline has its own stage.
enum class Stage {
  kUtterance,  // speaker count, group and utterance selection
  kTurn,       // speaker-turn draws in meetings
  kGap,        // silence/overlap decision and durations
  kOffset,     // classical-mixture offsets and overlap ratios
  kScaling,    // per-utterance gains
  kRir,        // room and source-position assignment
  kNoise,      // noise parameters
  kSro,        // sampling-rate offsets
  kRoom,       // room generation for RIR inventories
};

std::string_view stage_label(Stage stage);
// Throws mixsim::Error for labels outside the registry.
Stage stage_from_label(std::string_view label);

struct StreamSeed {
  std::uint64_t value = 0;
  friend bool operator==(StreamSeed, StreamSeed) = default;
};

// seed = M(M(M(M(root) ^ H(label)) ^ index) ^ H(stage)) with M = splitmix64
// and H = fnv1a64. Pure function of its inputs.
StreamSeed derive_stream_seed(std::uint64_t root_seed, std::string_view dataset_label,
                              std::int64_t example_index, Stage stage);
StreamSeed derive_stream_seed(std::uint64_t root_seed, std::string_view dataset_label,
                              std::int64_t example_index, std::string_view stage_label);

// Child seed for sub-streams (e.g. one noise stream per channel).
StreamSeed derive_child_seed(StreamSeed parent, std::uint64_t index);

// A value-type random stream over Philox4x32-10.
//
// Draw contract (all documented so sequences are reproducible anywhere):
//  * next_u64: one counter step; result = word1 << 32 | word0 of the block.
//  * uniform01: one step, (next_u64 >> 11) * 2^-53, in [0, 1).
//  * uniform_real(lo, hi): one step, lo + (hi - lo) * uniform01; returns lo
//    exactly when lo == hi.
//  * uniform_int(lo, hi): one step, lo + floor(next_u64 * (hi - lo + 1) / 2^64)
//    (multiply-shift, no rejection; bias below 2^-32 for spans < 2^32).
//  * weighted_choice: one step, inverse CDF over the non-zero weights.
//  * permutation(n): n - 1 steps, Fisher-Yates from the back.
//  * normal: two steps, Box-Muller (cosine branch).
class RandomStream {
 public:
  RandomStream() = default;
  explicit RandomStream(StreamSeed seed) : seed_(seed) {}

  StreamSeed seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  double uniform01();
  double uniform_real(double lo, double hi);
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  std::size_t weighted_choice(std::span<const double> weights);
  std::vector<std::size_t> permutation(std::size_t n);
  double normal();

 private:
  StreamSeed seed_{};
  std::uint64_t counter_ = 0;
};

}  // namespace mixsim
