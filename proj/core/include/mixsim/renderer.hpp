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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mixsim/audio.hpp"
#include "mixsim/corpus.hpp"
#include "mixsim/environment.hpp"
#include "mixsim/rir.hpp"

namespace mixsim {

// A multi-channel signal that is zero outside [offset, offset + frames).
struct Segment {
  std::int64_t offset = 0;
  std::vector<std::vector<double>> channels;

  std::int64_t frames() const { return channels.empty() ? 0 : static_cast<std::int64_t>(channels.front().size()); }
  std::vector<double> dense(std::size_t channel, std::int64_t length) const;
};

struct RenderedMixture {
  int sample_rate = 0;
  std::int64_t length = 0;
  Waveform mixture;
  std::vector<Segment> sources;  // scaled and shifted clean utterances, one channel
  std::vector<Segment> images;   // reverberated (or copied) per channel, after SRO
  Waveform noise;
  double reference_power = 0.0;  // mean power of the summed images over active samples
  bool noise_floor_used = false;
};

// Speech-active samples are the recording-mode activity of the entries.
double reference_power(const MixtureDescriptor& descriptor, std::span<const Segment> images, std::int64_t length);

// Unit-variance Gaussian noise, one child stream of seed per channel.
std::vector<std::vector<double>> white_noise(std::uint64_t seed, int num_channels, std::int64_t length);
// reference_power / 10^(snr/10), or the absolute floor when the reference is 0.
double noise_target_power(const NoiseParams& params, double reference_power, bool* floor_used = nullptr);
// Rescales so the mean power over all channels and samples equals power.
void scale_to_power(std::vector<std::vector<double>>& channels, double power);

std::vector<std::vector<double>> synthesize_noise(const NoiseParams& params, int num_channels, std::int64_t length,
                                                  double reference_power, bool* floor_used = nullptr);

// Output sample k takes the input at position k (1 + ppm 1e-6), linearly
// interpolated; the length is preserved and positions past the end read 0.
std::vector<double> apply_sro(std::span<const double> signal, double ppm);
// Same mapping for a signal that is zero outside [offset, offset + size);
// returns a one-channel segment clipped to [0, length).
Segment apply_sro(std::span<const double> data, std::int64_t offset, double ppm, std::int64_t length);

RenderedMixture render_mixture(const MixtureDescriptor& descriptor, const CorpusManifest& manifest,
                               const RoomInventory* inventory);

}  // namespace mixsim
