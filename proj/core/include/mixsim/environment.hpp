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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixsim/corpus.hpp"
#include "mixsim/patterns.hpp"
#include "mixsim/random.hpp"
#include "mixsim/rir.hpp"

namespace mixsim {

enum class ReverbKind { kNone, kSimulated };
enum class NoiseKind { kNone, kWhite };

std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

struct EnvironmentConfig {
  ReverbKind reverb = ReverbKind::kNone;
  std::filesystem::path inventory;  // reverb == simulated
  Range gain_range_db{-5.0, 5.0};
  Range snr_range_db{20.0, 30.0};
  NoiseKind noise_kind = NoiseKind::kWhite;
  double noise_floor_power = 1e-10;  // used when the speech reference is silent
  std::optional<Range> sro_ppm_range;
  int positions_per_room = 8;
  bool resample_position_per_utterance = false;
  int num_channels = 1;  // anechoic only; reverberant mixtures take the mic count

  void validate() const;
};

// Relative paths are resolved against base_dir.
EnvironmentConfig environment_from_json(const nlohmann::json& document, const std::filesystem::path& base_dir = {},
                                        const std::string& path = "environment");
nlohmann::json to_json(const EnvironmentConfig& config);

struct RirRef {
  int room = 0;
  int position = 0;
  friend bool operator==(const RirRef&, const RirRef&) = default;
};

struct DescriptorEntry {
  std::string speaker_id;
  std::string utterance_id;
  std::int64_t offset = 0;
  std::int64_t duration = 0;
  double gain = 1.0;  // linear
  std::optional<RirRef> rir;
  nlohmann::json extra = nlohmann::json::object();

  std::int64_t end() const { return offset + duration; }
  friend bool operator==(const DescriptorEntry&, const DescriptorEntry&) = default;
};

struct NoiseParams {
  NoiseKind kind = NoiseKind::kWhite;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double floor_power = 1e-10;
  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

struct MixtureDescriptor {
  std::string dataset_label;
  std::int64_t example_index = 0;
  std::uint64_t root_seed = 0;
  int sample_rate = 0;
  int num_channels = 1;
  ScenarioMode mode = ScenarioMode::kMeeting;
  std::vector<std::string> speakers;
  std::optional<int> room;
  std::vector<DescriptorEntry> entries;
  std::optional<NoiseParams> noise;
  std::optional<std::vector<double>> sro_ppm;  // per channel
  std::int64_t total_samples = 0;              // max(offset + duration)
  std::optional<std::int64_t> crop_samples;

  std::int64_t render_length() const { return crop_samples.value_or(total_samples); }
  Timeline timeline() const;
  // Throws mixsim::Error on broken invariants.
  void validate() const;
  friend bool operator==(const MixtureDescriptor&, const MixtureDescriptor&) = default;
};

nlohmann::json to_json(const MixtureDescriptor& descriptor);
MixtureDescriptor descriptor_from_json(const nlohmann::json& document, const std::string& path = "descriptor");

// One JSON array per dataset; a single object is accepted on read.
void write_descriptors(const std::filesystem::path& path, const std::vector<MixtureDescriptor>& descriptors);
std::vector<MixtureDescriptor> read_descriptors(const std::filesystem::path& path);

struct EnvironmentStreams {
  RandomStream scaling;
  RandomStream rir;
  RandomStream noise;
  RandomStream sro;
};

EnvironmentStreams derive_environment_streams(std::uint64_t root_seed, std::string_view dataset_label,
                                              std::int64_t example_index);

NoiseParams sample_noise_params(const EnvironmentConfig& config, RandomStream& stream);
std::vector<double> sample_sro(const Range& ppm_range, int num_channels, RandomStream& stream);

// rooms is required when config.reverb == simulated. Per-entry extra is
// copied from the manifest record.
MixtureDescriptor assign_environment(const Timeline& timeline, const EnvironmentConfig& config,
                                     const InventoryShape* rooms, const CorpusManifest& manifest,
                                     EnvironmentStreams& streams);

}  // namespace mixsim
