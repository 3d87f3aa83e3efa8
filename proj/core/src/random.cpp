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

#include "mixsim/random.hpp"

#include <cmath>
#include <numbers>

#include "mixsim/error.hpp"

namespace mixsim {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::array<std::string_view, 9> kStageLabels = {
    "utterance", "turn", "gap", "offset", "scaling", "rir", "noise", "sro", "room"};

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

std::string_view stage_label(Stage stage) {
  return kStageLabels.at(static_cast<std::size_t>(stage));
}

Stage stage_from_label(std::string_view label) {
  for (std::size_t i = 0; i < kStageLabels.size(); ++i) {
    if (kStageLabels[i] == label) return static_cast<Stage>(i);
  }
  throw Error("unknown stage label '" + std::string(label) + "'");
}

StreamSeed derive_stream_seed(std::uint64_t root_seed, std::string_view dataset_label,
                              std::int64_t example_index, Stage stage) {
  std::uint64_t h = splitmix64(root_seed);
  h = splitmix64(h ^ fnv1a64(dataset_label));
  h = splitmix64(h ^ static_cast<std::uint64_t>(example_index));
  h = splitmix64(h ^ fnv1a64(stage_label(stage)));
  return StreamSeed{h};
}

StreamSeed derive_stream_seed(std::uint64_t root_seed, std::string_view dataset_label,
                              std::int64_t example_index, std::string_view label) {
  return derive_stream_seed(root_seed, dataset_label, example_index, stage_from_label(label));
}

StreamSeed derive_child_seed(StreamSeed parent, std::uint64_t index) {
  return StreamSeed{splitmix64(parent.value ^ splitmix64(index + 1))};
}

std::uint64_t RandomStream::next_u64() {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_),
                                            static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_.value),
                                            static_cast<std::uint32_t>(seed_.value >> 32)};
  ++counter_;
  const auto block = philox4x32(ctr, key);
  return (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
}

double RandomStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_real(double lo, double hi) {
  if (!(lo <= hi)) throw Error("uniform_real: empty interval");
  const double u = uniform01();
  if (lo == hi) return lo;
  return lo + (hi - lo) * u;
}

namespace {
__extension__ using Uint128 = unsigned __int128;
}  // namespace

std::int64_t RandomStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw Error("uniform_int: empty interval");
  const auto span = static_cast<Uint128>(static_cast<std::uint64_t>(hi - lo)) + 1;
  const auto scaled = (static_cast<Uint128>(next_u64()) * span) >> 64;
  return lo + static_cast<std::int64_t>(scaled);
}

std::size_t RandomStream::weighted_choice(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weighted_choice: weights must be finite and >= 0");
    total += w;
  }
  if (weights.empty() || total <= 0.0) throw Error("weighted_choice: all weights are zero");
  const double target = uniform01() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    cumulative += weights[i];
    if (target < cumulative) return i;
  }
  // Rounding can leave target == total; the last positive weight owns it.
  return last_positive;
}

std::vector<std::size_t> RandomStream::permutation(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

double RandomStream::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mixsim
