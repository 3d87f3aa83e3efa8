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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixsim/audio.hpp"
#include "mixsim/random.hpp"

namespace mixsim {

using Point3 = std::array<double, 3>;

// Shoebox room for the image method. Walls are ordered
// x = 0, x = Lx, y = 0, y = Ly, z = 0, z = Lz.
struct RoomSetup {
  Point3 dimensions{};
  std::vector<Point3> source_positions;
  std::vector<Point3> mic_positions;
  std::array<double, 6> reflection{};  // pressure reflection coefficients, [0, 1)
  int sample_rate = 8000;
  std::int64_t rir_length = 8000;
  double sound_speed = 343.0;

  void validate() const;
};

// Uniform wall reflection coefficient for a target T60 via Eyring:
// alpha = 1 - exp(-0.163 V / (S T60)), beta = sqrt(1 - alpha).
double reflection_from_t60(const Point3& dimensions, double t60);

inline constexpr int kAutoOrder = -1;
inline constexpr int kKernelHalfWidth = 16;

struct ImageSource {
  double delay = 0.0;      // samples
  double amplitude = 0.0;  // product of reflections / (4 pi distance)
  int order = 0;
};

// All mirror images of a source with delay < rir_length and reflection order
// <= max_order (kAutoOrder: only the delay bound applies, which equals
// choosing the smallest order whose images all fall outside the window).
std::vector<ImageSource> enumerate_images(const RoomSetup& setup, std::size_t source_index, std::size_t mic_index,
                                          int max_order = kAutoOrder);

// h[n] = sum_i A_i k(n - delay_i), k a Hann-windowed sinc of half-width 16.
std::vector<double> generate_rir(const RoomSetup& setup, std::size_t source_index, std::size_t mic_index,
                                 int max_order = kAutoOrder);

// --- inventories ---------------------------------------------------------

struct Room {
  RoomSetup setup;
  double t60 = 0.0;
  std::vector<Waveform> rirs;  // per source position; one channel per mic
};

// Counts needed to assign positions without loading any RIR audio.
struct InventoryShape {
  int num_rooms = 0;
  int positions_per_room = 0;
  int num_mics = 0;
};

struct RoomInventory {
  int sample_rate = 0;
  std::int64_t rir_length = 0;
  int positions_per_room = 0;
  int num_mics = 0;
  std::vector<Room> rooms;
  nlohmann::json provenance = nlohmann::json::object();

  const Waveform& rir(std::size_t room, std::size_t position) const;
  InventoryShape shape() const {
    return {static_cast<int>(rooms.size()), positions_per_room, num_mics};
  }
  void validate() const;
};

// Ranges for randomly drawn rooms. Defaults are SMS-WSJ-style values
// (8 x 6 x 3 m rooms with jitter, T60 in [0.2, 0.5] s, 6-mic circular array
// of radius 10 cm near the room center, sources 1-2 m from the array).
struct RirGeneratorConfig {
  int num_rooms = 4;
  int positions_per_room = 8;
  int sample_rate = 8000;
  std::int64_t rir_length = 0;  // 0: one second
  double sound_speed = 343.0;
  Point3 room_dimensions{8.0, 6.0, 3.0};
  Point3 room_jitter{1.0, 1.0, 0.5};
  std::pair<double, double> t60_range{0.2, 0.5};
  int num_mics = 6;
  double array_radius = 0.1;
  double array_height = 1.4;
  Point3 array_jitter{0.4, 0.4, 0.1};
  std::pair<double, double> source_distance{1.0, 2.0};
  std::pair<double, double> source_height_offset{-0.2, 0.4};
  double wall_margin = 0.2;
  int max_order = kAutoOrder;
  int max_retries = 100;
  std::uint64_t seed = 0;
  std::string label = "rir";

  std::int64_t resolved_rir_length() const { return rir_length > 0 ? rir_length : sample_rate; }
  void validate() const;
};

RirGeneratorConfig rir_config_from_json(const nlohmann::json& document, const std::string& path = "rir");
nlohmann::json to_json(const RirGeneratorConfig& config);

// Draws rooms from `stream` sequentially and simulates every
// (position, mic) RIR, in parallel over pairs.
RoomInventory build_inventory(const RirGeneratorConfig& config, RandomStream& stream, unsigned workers = 1);
// Same, with the stream derived from config.seed / config.label.
RoomInventory build_inventory(const RirGeneratorConfig& config, unsigned workers = 1);

// One float32 WAV per (room, position) holding the mic channels, plus
// index.json with geometry, reflection coefficients, T60 and provenance.
void save_inventory(const std::filesystem::path& directory, const RoomInventory& inventory);
// Accepts the inventory directory or its index.json.
RoomInventory load_inventory(const std::filesystem::path& path);
// Reads only the JSON index.
InventoryShape read_inventory_shape(const std::filesystem::path& path);

}  // namespace mixsim
