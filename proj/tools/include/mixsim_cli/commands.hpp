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

#include <nlohmann/json.hpp>

#include "mixsim/analysis.hpp"
#include "mixsim/audio.hpp"

namespace mixsim::cli {

// Relative output paths are placed under $MIXSIM_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output(const std::filesystem::path& path);

struct SampleOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> manifest;  // overrides the config's manifest
  std::optional<std::filesystem::path> output;
  unsigned workers = 1;
};

struct RenderOptions {
  std::filesystem::path descriptors;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> inventory;
  std::filesystem::path output;
  bool intermediates = false;
  SampleEncoding encoding = SampleEncoding::kFloat32;
  unsigned workers = 1;
};

struct StatsOptions {
  std::filesystem::path descriptors;
  std::filesystem::path manifest;
  BoundaryMode boundary = BoundaryMode::kVad;
  bool energy_vad_fallback = false;
  bool per_meeting = false;
  bool normalize_by_total_samples = false;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> rttm_dir;
  unsigned workers = 1;
};

struct RirOptions {
  std::filesystem::path config;  // a generator config, or a full config with "rir_generator"
  std::filesystem::path output;
  std::optional<std::uint64_t> seed;
  std::optional<int> num_rooms;
  std::optional<int> positions_per_room;
  std::optional<int> num_mics;
  unsigned workers = 1;
};

struct ValidateOptions {
  std::filesystem::path manifest;
};

// Each command returns a JSON summary and throws mixsim::Error on failure.
nlohmann::json cmd_sample(const SampleOptions& options);
nlohmann::json cmd_render(const RenderOptions& options);
nlohmann::json cmd_stats(const StatsOptions& options);
nlohmann::json cmd_rir(const RirOptions& options);
nlohmann::json cmd_validate(const ValidateOptions& options);

}  // namespace mixsim::cli
