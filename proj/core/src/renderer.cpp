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

#include "mixsim/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "mixsim/convolution.hpp"
#include "mixsim/error.hpp"
#include "mixsim/random.hpp"

namespace mixsim {

std::vector<double> Segment::dense(std::size_t channel, std::int64_t length) const {
  std::vector<double> out(static_cast<std::size_t>(length), 0.0);
  const auto& data = channels.at(channel);
  for (std::int64_t i = 0; i < frames(); ++i) {
    const std::int64_t t = offset + i;
    if (t >= 0 && t < length) out[static_cast<std::size_t>(t)] = data[static_cast<std::size_t>(i)];
  }
  return out;
}

namespace {

double active_power(const MixtureDescriptor& descriptor, const std::vector<std::vector<double>>& speech,
                    std::int64_t length) {
  std::vector<char> active(static_cast<std::size_t>(length), 0);
  for (const auto& e : descriptor.entries) {
    const std::int64_t end = std::min(e.end(), length);
    for (std::int64_t t = e.offset; t < end; ++t) active[static_cast<std::size_t>(t)] = 1;
  }
  double energy = 0.0;
  std::int64_t count = 0;
  for (const auto& channel : speech) {
    for (std::int64_t t = 0; t < length; ++t) {
      if (active[static_cast<std::size_t>(t)]) {
        energy += channel[static_cast<std::size_t>(t)] * channel[static_cast<std::size_t>(t)];
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : energy / static_cast<double>(count);
}

void add_segment(std::vector<double>& target, const std::vector<double>& data, std::int64_t offset) {
  const auto length = static_cast<std::int64_t>(target.size());
  const auto n = std::min(static_cast<std::int64_t>(data.size()), length - offset);
  for (std::int64_t i = 0; i < n; ++i) target[static_cast<std::size_t>(offset + i)] += data[static_cast<std::size_t>(i)];
}

std::vector<std::vector<double>> sum_images(std::span<const Segment> images, std::size_t num_channels,
                                            std::int64_t length) {
  std::vector<std::vector<double>> sum(num_channels, std::vector<double>(static_cast<std::size_t>(length), 0.0));
  for (const auto& image : images) {
    for (std::size_t c = 0; c < num_channels; ++c) add_segment(sum[c], image.channels[c], image.offset);
  }
  return sum;
}

}  // namespace

double reference_power(const MixtureDescriptor& descriptor, std::span<const Segment> images, std::int64_t length) {
  const std::size_t num_channels = images.empty() ? 0 : images.front().channels.size();
  return active_power(descriptor, sum_images(images, num_channels, length), length);
}

std::vector<std::vector<double>> white_noise(std::uint64_t seed, int num_channels, std::int64_t length) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(num_channels));
  for (int c = 0; c < num_channels; ++c) {
    RandomStream stream(derive_child_seed(StreamSeed{seed}, static_cast<std::uint64_t>(c)));
    auto& channel = out[static_cast<std::size_t>(c)];
    channel.resize(static_cast<std::size_t>(length));
    for (auto& v : channel) v = stream.normal();
  }
  return out;
}

double noise_target_power(const NoiseParams& params, double reference, bool* floor_used) {
  const bool floor = !(reference > 0.0);
  if (floor_used != nullptr) *floor_used = floor;
  return floor ? params.floor_power : reference / std::pow(10.0, params.snr_db / 10.0);
}

void scale_to_power(std::vector<std::vector<double>>& channels, double power) {
  double energy = 0.0;
  std::size_t count = 0;
  for (const auto& c : channels) {
    for (double v : c) energy += v * v;
    count += c.size();
  }
  if (count == 0 || !(energy > 0.0)) return;
  const double gain = std::sqrt(power / (energy / static_cast<double>(count)));
  for (auto& c : channels) {
    for (double& v : c) v *= gain;
  }
}

std::vector<std::vector<double>> synthesize_noise(const NoiseParams& params, int num_channels, std::int64_t length,
                                                  double reference, bool* floor_used) {
  if (params.kind == NoiseKind::kNone) {
    if (floor_used != nullptr) *floor_used = false;
    return std::vector<std::vector<double>>(static_cast<std::size_t>(num_channels),
                                            std::vector<double>(static_cast<std::size_t>(length), 0.0));
  }
  auto noise = white_noise(params.seed, num_channels, length);
  scale_to_power(noise, noise_target_power(params, reference, floor_used));
  return noise;
}

Segment apply_sro(std::span<const double> data, std::int64_t offset, double ppm, std::int64_t length) {
  if (std::abs(ppm) > 1000.0) throw Error("apply_sro", "|ppm| must be <= 1000");
  const double ratio = 1.0 + ppm * 1e-6;
  const auto n = static_cast<std::int64_t>(data.size());
  auto at = [&](std::int64_t i) {
    const std::int64_t j = i - offset;
    return j >= 0 && j < n ? data[static_cast<std::size_t>(j)] : 0.0;
  };
  const auto lo = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((offset - 1) / ratio)) - 1, 0, length);
  const auto hi = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil((offset + n) / ratio)) + 2, lo, length);
  Segment out;
  out.offset = lo;
  out.channels.assign(1, std::vector<double>(static_cast<std::size_t>(hi - lo), 0.0));
  for (std::int64_t k = lo; k < hi; ++k) {
    const double position = static_cast<double>(k) * ratio;
    const double base = std::floor(position);
    const double frac = position - base;
    const auto i = static_cast<std::int64_t>(base);
    const double a = at(i);
    const double b = at(i + 1);
    out.channels[0][static_cast<std::size_t>(k - lo)] = frac == 0.0 ? a : a + frac * (b - a);
  }
  return out;
}

std::vector<double> apply_sro(std::span<const double> signal, double ppm) {
  const auto length = static_cast<std::int64_t>(signal.size());
  return apply_sro(signal, 0, ppm, length).dense(0, length);
}

namespace {

// Applies per-channel SRO to a multi-channel segment; channels share one
// offset afterwards.
Segment resample_segment(const Segment& segment, const std::vector<double>& ppm, std::int64_t length) {
  std::vector<Segment> parts;
  std::int64_t lo = length, hi = 0;
  for (std::size_t c = 0; c < segment.channels.size(); ++c) {
    parts.push_back(apply_sro(segment.channels[c], segment.offset, ppm[c], length));
    lo = std::min(lo, parts.back().offset);
    hi = std::max(hi, parts.back().offset + parts.back().frames());
  }
  Segment out;
  out.offset = std::min(lo, hi);
  out.channels.assign(segment.channels.size(), std::vector<double>(static_cast<std::size_t>(hi - out.offset), 0.0));
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const auto shift = static_cast<std::size_t>(parts[c].offset - out.offset);
    std::copy(parts[c].channels[0].begin(), parts[c].channels[0].end(), out.channels[c].begin() + shift);
  }
  return out;
}

}  // namespace

RenderedMixture render_mixture(const MixtureDescriptor& descriptor, const CorpusManifest& manifest,
                               const RoomInventory* inventory) {
  descriptor.validate();
  const std::string ctx = descriptor.dataset_label + "#" + std::to_string(descriptor.example_index);
  if (descriptor.sample_rate != manifest.sample_rate()) {
    throw Error(ctx, "descriptor sample rate " + std::to_string(descriptor.sample_rate) +
                         " differs from the manifest (" + std::to_string(manifest.sample_rate()) + ")");
  }
  const bool reverberant = std::any_of(descriptor.entries.begin(), descriptor.entries.end(),
                                       [](const DescriptorEntry& e) { return e.rir.has_value(); });
  if (reverberant) {
    if (inventory == nullptr) throw Error(ctx, "reverberant descriptor but no RIR inventory given");
    if (inventory->sample_rate != descriptor.sample_rate) throw Error(ctx, "RIR inventory sample rate mismatch");
    if (inventory->num_mics != descriptor.num_channels) throw Error(ctx, "RIR inventory mic count mismatch");
  }

  const std::int64_t length = descriptor.render_length();
  const auto num_channels = static_cast<std::size_t>(descriptor.num_channels);
  RenderedMixture out;
  out.sample_rate = descriptor.sample_rate;
  out.length = length;

  for (const auto& entry : descriptor.entries) {
    const UtteranceRecord* record = manifest.find(entry.utterance_id);
    if (record == nullptr) throw Error(ctx, "unknown utterance_id '" + entry.utterance_id + "'");
    if (record->num_samples != entry.duration) {
      throw Error(ctx, "utterance '" + entry.utterance_id + "' duration differs from the manifest");
    }
    const Waveform wave = read_audio(manifest.resolve(*record));
    if (wave.sample_rate != descriptor.sample_rate) {
      throw Error(manifest.resolve(*record).string(), "sample rate mismatch");
    }
    if (wave.num_channels() != 1) throw Error(manifest.resolve(*record).string(), "expected a single-channel source");
    if (static_cast<std::int64_t>(wave.num_frames()) != entry.duration) {
      throw Error(manifest.resolve(*record).string(), "length differs from num_samples in the manifest");
    }

    std::vector<double> scaled(wave.channels[0]);
    for (double& v : scaled) v *= entry.gain;
    const std::int64_t room_left = std::max<std::int64_t>(length - entry.offset, 0);

    Segment source;
    source.offset = entry.offset;
    source.channels.emplace_back(scaled.begin(), scaled.begin() + std::min(entry.duration, room_left));

    Segment image;
    image.offset = entry.offset;
    if (entry.rir) {
      const Waveform& h = inventory->rir(static_cast<std::size_t>(entry.rir->room),
                                         static_cast<std::size_t>(entry.rir->position));
      const auto full = static_cast<std::int64_t>(full_convolution_length(scaled.size(), h.num_frames()));
      const auto n = static_cast<std::size_t>(std::min(full, room_left));
      for (std::size_t c = 0; c < num_channels; ++c) image.channels.push_back(convolve(scaled, h.channels[c], n));
    } else {
      image.channels.assign(num_channels, source.channels[0]);
    }
    if (descriptor.sro_ppm) image = resample_segment(image, *descriptor.sro_ppm, length);

    out.sources.push_back(std::move(source));
    out.images.push_back(std::move(image));
  }

  out.mixture.sample_rate = descriptor.sample_rate;
  out.mixture.channels = sum_images(out.images, num_channels, length);
  out.reference_power = active_power(descriptor, out.mixture.channels, length);

  out.noise = Waveform(descriptor.sample_rate, num_channels, static_cast<std::size_t>(length));
  if (descriptor.noise && descriptor.noise->kind != NoiseKind::kNone) {
    auto noise = white_noise(descriptor.noise->seed, descriptor.num_channels, length);
    if (descriptor.sro_ppm) {
      for (std::size_t c = 0; c < num_channels; ++c) noise[c] = apply_sro(noise[c], (*descriptor.sro_ppm)[c]);
    }
    scale_to_power(noise, noise_target_power(*descriptor.noise, out.reference_power, &out.noise_floor_used));
    out.noise.channels = std::move(noise);
    for (std::size_t c = 0; c < num_channels; ++c) {
      auto& mix = out.mixture.channels[c];
      const auto& n = out.noise.channels[c];
      for (std::size_t t = 0; t < mix.size(); ++t) mix[t] += n[t];
    }
  }
  return out;
}

}  // namespace mixsim
