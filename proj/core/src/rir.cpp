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

#include "mixsim/rir.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json_util.hpp"
#include "mixsim/error.hpp"
#include "mixsim/parallel.hpp"

namespace mixsim {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

bool strictly_inside(const Point3& p, const Point3& dims, double margin = 0.0) {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] > margin && p[a] < dims[a] - margin)) return false;
  }
  return true;
}

double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

// Mirror images along one axis: coordinate offset to the mic, reflection
// gain and number of reflections.
struct AxisImage {
  double offset;
  double gain;
  int order;
};

std::vector<AxisImage> axis_images(double source, double mic, double length, double beta_low, double beta_high,
                                   double max_distance, int max_order) {
  std::vector<AxisImage> out;
  auto bound = static_cast<int>(std::ceil(max_distance / (2.0 * length))) + 1;
  if (max_order >= 0) bound = std::min(bound, max_order + 1);
  for (int m = -bound; m <= bound; ++m) {
    for (int q = 0; q <= 1; ++q) {
      const double position = (1 - 2 * q) * source + 2.0 * m * length;
      const double offset = position - mic;
      if (std::abs(offset) >= max_distance) continue;
      const int low = std::abs(m - q);
      const int high = std::abs(m);
      if (max_order >= 0 && low + high > max_order) continue;
      out.push_back({offset, std::pow(beta_low, low) * std::pow(beta_high, high), low + high});
    }
  }
  return out;
}

// Adds amplitude * k(n - delay) for the 32 taps around delay, using
// sin(pi (t0 + j)) = (-1)^j sin(pi t0) and an angle-addition recurrence for
// the window so only three transcendental calls are needed per image.
void add_pulse(std::vector<double>& h, double delay, double amplitude) {
  struct Tables {
    std::array<double, 2 * kKernelHalfWidth> cos_step{}, sin_step{};
    Tables() {
      for (int j = 0; j < 2 * kKernelHalfWidth; ++j) {
        cos_step[j] = std::cos(kPi * j / kKernelHalfWidth);
        sin_step[j] = std::sin(kPi * j / kKernelHalfWidth);
      }
    }
  };
  static const Tables tables;

  const double whole = std::floor(delay);
  const double frac = delay - whole;
  const auto first = static_cast<std::int64_t>(whole) - (kKernelHalfWidth - 1);
  const double t0 = -(kKernelHalfWidth - 1) - frac;  // in (-16, -15]
  // sin(pi t0) = sin(pi frac); reduced by hand so near-integer delays keep
  // full relative precision.
  const double sin_t0 = frac <= 0.5 ? std::sin(kPi * frac) : std::sin(kPi * (1.0 - frac));
  const double window_angle = kPi * t0 / kKernelHalfWidth;
  const double cos_a = std::cos(window_angle);
  const double sin_a = std::sin(window_angle);
  const auto size = static_cast<std::int64_t>(h.size());
  for (int j = 0; j < 2 * kKernelHalfWidth; ++j) {
    const std::int64_t n = first + j;
    if (n < 0 || n >= size) continue;
    const double t = static_cast<double>(j - (kKernelHalfWidth - 1)) - frac;
    double sinc;
    if (t == 0.0) {
      sinc = 1.0;
    } else {
      const double s = (j & 1) ? -sin_t0 : sin_t0;
      sinc = s / (kPi * t);
    }
    const double window = 0.5 * (1.0 + cos_a * tables.cos_step[j] - sin_a * tables.sin_step[j]);
    h[static_cast<std::size_t>(n)] += amplitude * sinc * window;
  }
}

Point3 as_point(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 3) throw Error(path, "expected [x, y, z]");
  return {detail::as<double>(value[0], path + "[0]"), detail::as<double>(value[1], path + "[1]"),
          detail::as<double>(value[2], path + "[2]")};
}

json point_json(const Point3& p) { return json::array({p[0], p[1], p[2]}); }

}  // namespace

void RoomSetup::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(dimensions[a] > 0.0)) throw Error("room.dimensions", "must be positive");
  }
  for (double b : reflection) {
    if (!(b >= 0.0 && b < 1.0)) throw Error("room.reflection", "coefficients must lie in [0, 1)");
  }
  if (sample_rate <= 0) throw Error("room.sample_rate", "must be > 0");
  if (!(sound_speed > 0.0)) throw Error("room.sound_speed", "must be > 0");
  if (source_positions.empty() || mic_positions.empty()) throw Error("room", "needs sources and microphones");
  for (const auto& p : source_positions) {
    if (!strictly_inside(p, dimensions)) throw Error("room.source_positions", "position outside the room");
  }
  for (const auto& p : mic_positions) {
    if (!strictly_inside(p, dimensions)) throw Error("room.mic_positions", "position outside the room");
  }
  for (const auto& s : source_positions) {
    for (const auto& m : mic_positions) {
      const double d = distance(s, m);
      if (!(d > 0.0)) throw Error("room", "source coincides with a microphone");
      if (static_cast<double>(rir_length) <= d * sample_rate / sound_speed) {
        throw Error("room.rir_length", "shorter than a direct-path delay");
      }
    }
  }
}

double reflection_from_t60(const Point3& dims, double t60) {
  if (!(t60 > 0.0)) throw Error("t60", "must be > 0");
  for (double d : dims) {
    if (!(d > 0.0)) throw Error("dimensions", "must be positive");
  }
  const double volume = dims[0] * dims[1] * dims[2];
  const double surface = 2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2]);
  const double alpha = 1.0 - std::exp(-0.163 * volume / (surface * t60));
  const double beta = std::sqrt(1.0 - alpha);
  if (!(alpha < 1.0) || !(beta > 0.0)) throw Error("t60", "too small: absorption coefficient reaches 1");
  return beta;
}

std::vector<ImageSource> enumerate_images(const RoomSetup& setup, std::size_t source_index, std::size_t mic_index,
                                          int max_order) {
  if (source_index >= setup.source_positions.size() || mic_index >= setup.mic_positions.size()) {
    throw Error("enumerate_images: index out of range");
  }
  const Point3& src = setup.source_positions[source_index];
  const Point3& mic = setup.mic_positions[mic_index];
  const double samples_per_meter = setup.sample_rate / setup.sound_speed;
  const double max_distance = static_cast<double>(setup.rir_length) / samples_per_meter;
  const auto& beta = setup.reflection;

  const auto xs = axis_images(src[0], mic[0], setup.dimensions[0], beta[0], beta[1], max_distance, max_order);
  const auto ys = axis_images(src[1], mic[1], setup.dimensions[1], beta[2], beta[3], max_distance, max_order);
  const auto zs = axis_images(src[2], mic[2], setup.dimensions[2], beta[4], beta[5], max_distance, max_order);

  const double limit2 = max_distance * max_distance;
  std::vector<ImageSource> images;
  for (const auto& x : xs) {
    const double dx2 = x.offset * x.offset;
    for (const auto& y : ys) {
      const double dxy2 = dx2 + y.offset * y.offset;
      if (dxy2 >= limit2) continue;
      for (const auto& z : zs) {
        const int order = x.order + y.order + z.order;
        if (max_order >= 0 && order > max_order) continue;
        const double d2 = dxy2 + z.offset * z.offset;
        if (d2 >= limit2) continue;
        const double d = std::sqrt(d2);
        images.push_back({d * samples_per_meter, x.gain * y.gain * z.gain / (4.0 * kPi * d), order});
      }
    }
  }
  return images;
}

std::vector<double> generate_rir(const RoomSetup& setup, std::size_t source_index, std::size_t mic_index,
                                 int max_order) {
  setup.validate();
  std::vector<double> h(static_cast<std::size_t>(setup.rir_length), 0.0);
  for (const auto& image : enumerate_images(setup, source_index, mic_index, max_order)) {
    if (image.amplitude != 0.0) add_pulse(h, image.delay, image.amplitude);
  }
  return h;
}

const Waveform& RoomInventory::rir(std::size_t room, std::size_t position) const {
  if (room >= rooms.size()) throw Error("inventory", "room " + std::to_string(room) + " out of range");
  const auto& r = rooms[room];
  if (position >= r.rirs.size()) {
    throw Error("inventory", "position " + std::to_string(position) + " out of range in room " + std::to_string(room));
  }
  return r.rirs[position];
}

void RoomInventory::validate() const {
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    const auto& room = rooms[r];
    if (static_cast<int>(room.rirs.size()) != positions_per_room) {
      throw Error("inventory.rooms[" + std::to_string(r) + "]", "inconsistent positions_per_room");
    }
    for (const auto& w : room.rirs) {
      if (static_cast<int>(w.num_channels()) != num_mics ||
          static_cast<std::int64_t>(w.num_frames()) != rir_length || w.sample_rate != sample_rate) {
        throw Error("inventory.rooms[" + std::to_string(r) + "]", "RIR tensor shape does not match the setup");
      }
    }
  }
}

void RirGeneratorConfig::validate() const {
  if (num_rooms < 1) throw Error("rir.num_rooms", "must be >= 1");
  if (positions_per_room < 1) throw Error("rir.positions_per_room", "must be >= 1");
  if (sample_rate <= 0) throw Error("rir.sample_rate", "must be > 0");
  if (rir_length < 0) throw Error("rir.rir_length", "must be >= 0");
  if (num_mics < 1) throw Error("rir.num_mics", "must be >= 1");
  if (!(t60_range.first > 0.0 && t60_range.first <= t60_range.second)) throw Error("rir.t60_range", "invalid range");
  if (!(source_distance.first > 0.0 && source_distance.first <= source_distance.second)) {
    throw Error("rir.source_distance", "invalid range");
  }
  if (source_height_offset.first > source_height_offset.second) throw Error("rir.source_height_offset", "invalid range");
  for (int a = 0; a < 3; ++a) {
    if (!(room_dimensions[a] - room_jitter[a] > 0.0)) throw Error("rir.room_dimensions", "must stay positive");
  }
  if (max_retries < 1) throw Error("rir.max_retries", "must be >= 1");
}

RirGeneratorConfig rir_config_from_json(const json& doc, const std::string& path) {
  using namespace detail;
  if (!doc.is_object()) throw Error(path, "expected an object");
  RirGeneratorConfig c;
  c.num_rooms = value_or<int>(doc, "num_rooms", c.num_rooms, path);
  c.positions_per_room = value_or<int>(doc, "positions_per_room", c.positions_per_room, path);
  c.sample_rate = value_or<int>(doc, "sample_rate", c.sample_rate, path);
  c.rir_length = value_or<std::int64_t>(doc, "rir_length", c.rir_length, path);
  c.sound_speed = value_or<double>(doc, "sound_speed", c.sound_speed, path);
  if (has(doc, "room_dimensions")) c.room_dimensions = as_point(doc["room_dimensions"], join_path(path, "room_dimensions"));
  if (has(doc, "room_jitter")) c.room_jitter = as_point(doc["room_jitter"], join_path(path, "room_jitter"));
  if (has(doc, "t60_range")) c.t60_range = as_range(doc["t60_range"], join_path(path, "t60_range"));
  c.num_mics = value_or<int>(doc, "num_mics", c.num_mics, path);
  c.array_radius = value_or<double>(doc, "array_radius", c.array_radius, path);
  c.array_height = value_or<double>(doc, "array_height", c.array_height, path);
  if (has(doc, "array_jitter")) c.array_jitter = as_point(doc["array_jitter"], join_path(path, "array_jitter"));
  if (has(doc, "source_distance")) c.source_distance = as_range(doc["source_distance"], join_path(path, "source_distance"));
  if (has(doc, "source_height_offset")) {
    c.source_height_offset = as_range(doc["source_height_offset"], join_path(path, "source_height_offset"));
  }
  c.wall_margin = value_or<double>(doc, "wall_margin", c.wall_margin, path);
  c.max_order = value_or<int>(doc, "max_order", c.max_order, path);
  c.max_retries = value_or<int>(doc, "max_retries", c.max_retries, path);
  c.seed = value_or<std::uint64_t>(doc, "seed", c.seed, path);
  c.label = value_or<std::string>(doc, "label", c.label, path);
  c.validate();
  return c;
}

json to_json(const RirGeneratorConfig& c) {
  return {{"num_rooms", c.num_rooms},
          {"positions_per_room", c.positions_per_room},
          {"sample_rate", c.sample_rate},
          {"rir_length", c.resolved_rir_length()},
          {"sound_speed", c.sound_speed},
          {"room_dimensions", point_json(c.room_dimensions)},
          {"room_jitter", point_json(c.room_jitter)},
          {"t60_range", detail::range_to_json(c.t60_range)},
          {"num_mics", c.num_mics},
          {"array_radius", c.array_radius},
          {"array_height", c.array_height},
          {"array_jitter", point_json(c.array_jitter)},
          {"source_distance", detail::range_to_json(c.source_distance)},
          {"source_height_offset", detail::range_to_json(c.source_height_offset)},
          {"wall_margin", c.wall_margin},
          {"max_order", c.max_order},
          {"max_retries", c.max_retries},
          {"seed", c.seed},
          {"label", c.label}};
}

namespace {

// One attempt at a room geometry; returns false if any point leaves the
// room (minus the wall margin).
bool draw_room(const RirGeneratorConfig& c, RandomStream& stream, RoomSetup& setup, double& t60) {
  for (int a = 0; a < 3; ++a) {
    setup.dimensions[a] = stream.uniform_real(c.room_dimensions[a] - c.room_jitter[a],
                                              c.room_dimensions[a] + c.room_jitter[a]);
  }
  t60 = stream.uniform_real(c.t60_range.first, c.t60_range.second);
  const Point3 center = {setup.dimensions[0] / 2 + stream.uniform_real(-c.array_jitter[0], c.array_jitter[0]),
                         setup.dimensions[1] / 2 + stream.uniform_real(-c.array_jitter[1], c.array_jitter[1]),
                         c.array_height + stream.uniform_real(-c.array_jitter[2], c.array_jitter[2])};
  const double rotation = stream.uniform_real(0.0, 2.0 * kPi);
  setup.mic_positions.clear();
  for (int m = 0; m < c.num_mics; ++m) {
    const double phi = rotation + 2.0 * kPi * m / c.num_mics;
    const double radius = c.num_mics == 1 ? 0.0 : c.array_radius;
    setup.mic_positions.push_back({center[0] + radius * std::cos(phi), center[1] + radius * std::sin(phi), center[2]});
  }
  setup.source_positions.clear();
  for (int p = 0; p < c.positions_per_room; ++p) {
    const double azimuth = stream.uniform_real(0.0, 2.0 * kPi);
    const double dist = stream.uniform_real(c.source_distance.first, c.source_distance.second);
    const double height = stream.uniform_real(c.source_height_offset.first, c.source_height_offset.second);
    setup.source_positions.push_back(
        {center[0] + dist * std::cos(azimuth), center[1] + dist * std::sin(azimuth), center[2] + height});
  }
  for (const auto& p : setup.mic_positions) {
    if (!strictly_inside(p, setup.dimensions, c.wall_margin)) return false;
  }
  for (const auto& p : setup.source_positions) {
    if (!strictly_inside(p, setup.dimensions, c.wall_margin)) return false;
  }
  return true;
}

}  // namespace

RoomInventory build_inventory(const RirGeneratorConfig& config, RandomStream& stream, unsigned workers) {
  config.validate();
  RoomInventory inventory;
  inventory.sample_rate = config.sample_rate;
  inventory.rir_length = config.resolved_rir_length();
  inventory.positions_per_room = config.positions_per_room;
  inventory.num_mics = config.num_mics;
  inventory.provenance = {{"generator", to_json(config)}, {"stream_seed", stream.seed().value},
                          {"stream_counter", stream.counter()}};

  for (int r = 0; r < config.num_rooms; ++r) {
    Room room;
    room.setup.sample_rate = config.sample_rate;
    room.setup.rir_length = inventory.rir_length;
    room.setup.sound_speed = config.sound_speed;
    bool ok = false;
    for (int attempt = 0; attempt < config.max_retries && !ok; ++attempt) {
      ok = draw_room(config, stream, room.setup, room.t60);
    }
    if (!ok) {
      throw Error("rir", "room " + std::to_string(r) + ": no feasible geometry after " +
                             std::to_string(config.max_retries) + " attempts");
    }
    room.setup.reflection.fill(reflection_from_t60(room.setup.dimensions, room.t60));
    room.setup.validate();
    room.rirs.assign(static_cast<std::size_t>(config.positions_per_room),
                     Waveform(config.sample_rate, static_cast<std::size_t>(config.num_mics), 0));
    inventory.rooms.push_back(std::move(room));
  }

  const std::size_t pairs_per_room = static_cast<std::size_t>(config.positions_per_room) * config.num_mics;
  parallel_for(inventory.rooms.size() * pairs_per_room, workers, [&](std::size_t task) {
    auto& room = inventory.rooms[task / pairs_per_room];
    const std::size_t pair = task % pairs_per_room;
    const std::size_t position = pair / static_cast<std::size_t>(config.num_mics);
    const std::size_t mic = pair % static_cast<std::size_t>(config.num_mics);
    room.rirs[position].channels[mic] = generate_rir(room.setup, position, mic, config.max_order);
  });
  return inventory;
}

RoomInventory build_inventory(const RirGeneratorConfig& config, unsigned workers) {
  RandomStream stream(derive_stream_seed(config.seed, config.label, 0, Stage::kRoom));
  return build_inventory(config, stream, workers);
}

void save_inventory(const std::filesystem::path& directory, const RoomInventory& inventory) {
  inventory.validate();
  std::filesystem::create_directories(directory);
  json rooms = json::array();
  for (std::size_t r = 0; r < inventory.rooms.size(); ++r) {
    const auto& room = inventory.rooms[r];
    json files = json::array();
    for (std::size_t p = 0; p < room.rirs.size(); ++p) {
      char name[64];
      std::snprintf(name, sizeof(name), "room%03zu_pos%02zu.wav", r, p);
      write_audio(directory / name, room.rirs[p], SampleEncoding::kFloat32);
      files.push_back(name);
    }
    json sources = json::array(), mics = json::array();
    for (const auto& s : room.setup.source_positions) sources.push_back(point_json(s));
    for (const auto& m : room.setup.mic_positions) mics.push_back(point_json(m));
    rooms.push_back({{"room_id", r},
                     {"dimensions", point_json(room.setup.dimensions)},
                     {"reflection", room.setup.reflection},
                     {"t60", room.t60},
                     {"sound_speed", room.setup.sound_speed},
                     {"source_positions", std::move(sources)},
                     {"mic_positions", std::move(mics)},
                     {"files", std::move(files)}});
  }
  const json index = {{"sample_rate", inventory.sample_rate},
                      {"rir_length", inventory.rir_length},
                      {"positions_per_room", inventory.positions_per_room},
                      {"num_mics", inventory.num_mics},
                      {"provenance", inventory.provenance},
                      {"rooms", std::move(rooms)}};
  std::ofstream out(directory / "index.json");
  if (!out) throw Error((directory / "index.json").string(), "cannot open for writing");
  out << index.dump(2) << '\n';
}

namespace {

std::filesystem::path index_file(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? path / "index.json" : path;
}

json read_index(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(file.string(), "cannot open RIR inventory index");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(file.string(), std::string("parse failure: ") + e.what());
  }
}

}  // namespace

InventoryShape read_inventory_shape(const std::filesystem::path& path) {
  using namespace detail;
  const json index = read_index(index_file(path));
  InventoryShape shape;
  shape.num_rooms = static_cast<int>(require(index, "rooms", "").size());
  shape.positions_per_room = require_as<int>(index, "positions_per_room", "");
  shape.num_mics = require_as<int>(index, "num_mics", "");
  return shape;
}

RoomInventory load_inventory(const std::filesystem::path& path) {
  using namespace detail;
  const auto index_path_ = index_file(path);
  const auto directory = index_path_.parent_path();
  const json index = read_index(index_path_);
  RoomInventory inv;
  inv.sample_rate = require_as<int>(index, "sample_rate", "");
  inv.rir_length = require_as<std::int64_t>(index, "rir_length", "");
  inv.positions_per_room = require_as<int>(index, "positions_per_room", "");
  inv.num_mics = require_as<int>(index, "num_mics", "");
  if (has(index, "provenance")) inv.provenance = index["provenance"];
  const json& rooms = require(index, "rooms", "");
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    const json& item = rooms[r];
    const std::string p = index_path("rooms", r);
    Room room;
    room.setup.dimensions = as_point(require(item, "dimensions", p), join_path(p, "dimensions"));
    const json& refl = require(item, "reflection", p);
    if (!refl.is_array() || refl.size() != 6) throw Error(join_path(p, "reflection"), "expected 6 values");
    for (int w = 0; w < 6; ++w) room.setup.reflection[w] = as<double>(refl[w], join_path(p, "reflection"));
    room.t60 = value_or<double>(item, "t60", 0.0, p);
    room.setup.sound_speed = value_or<double>(item, "sound_speed", 343.0, p);
    room.setup.sample_rate = inv.sample_rate;
    room.setup.rir_length = inv.rir_length;
    for (const auto& s : require(item, "source_positions", p)) room.setup.source_positions.push_back(as_point(s, p));
    for (const auto& m : require(item, "mic_positions", p)) room.setup.mic_positions.push_back(as_point(m, p));
    for (const auto& f : require(item, "files", p)) {
      const auto file = directory / as<std::string>(f, join_path(p, "files"));
      room.rirs.push_back(read_audio(file));
    }
    inv.rooms.push_back(std::move(room));
  }
  inv.validate();
  return inv;
}

}  // namespace mixsim
