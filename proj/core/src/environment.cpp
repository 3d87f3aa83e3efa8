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

#include "mixsim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json_util.hpp"
#include "mixsim/error.hpp"

namespace mixsim {

using nlohmann::json;

std::string_view to_string(NoiseKind kind) { return kind == NoiseKind::kWhite ? "white" : "none"; }

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "none") return NoiseKind::kNone;
  throw Error("noise_kind", "unknown noise kind '" + std::string(name) + "'");
}

void EnvironmentConfig::validate() const {
  if (gain_range_db.first > gain_range_db.second) throw Error("environment.gain_range_db", "lo > hi");
  if (snr_range_db.first > snr_range_db.second) throw Error("environment.snr_range_db", "lo > hi");
  if (!(noise_floor_power > 0.0)) throw Error("environment.noise_floor_power", "must be > 0");
  if (sro_ppm_range) {
    if (sro_ppm_range->first > sro_ppm_range->second) throw Error("environment.sro_ppm_range", "lo > hi");
    if (std::max(std::abs(sro_ppm_range->first), std::abs(sro_ppm_range->second)) > 1000.0) {
      throw Error("environment.sro_ppm_range", "|ppm| must be <= 1000");
    }
  }
  if (positions_per_room < 1) throw Error("environment.positions_per_room", "must be >= 1");
  if (num_channels < 1) throw Error("environment.num_channels", "must be >= 1");
  if (reverb == ReverbKind::kSimulated && inventory.empty()) {
    throw Error("environment.inventory", "required when reverb is simulated");
  }
}

EnvironmentConfig environment_from_json(const json& doc, const std::filesystem::path& base_dir,
                                        const std::string& path) {
  using namespace detail;
  if (!doc.is_object()) throw Error(path, "expected an object");
  EnvironmentConfig c;
  const auto reverb = value_or<std::string>(doc, "reverb", "none", path);
  if (reverb == "none") {
    c.reverb = ReverbKind::kNone;
  } else if (reverb == "simulated") {
    c.reverb = ReverbKind::kSimulated;
  } else {
    throw Error(join_path(path, "reverb"), "expected \"none\" or \"simulated\"");
  }
  if (has(doc, "inventory")) {
    std::filesystem::path p = as<std::string>(doc["inventory"], join_path(path, "inventory"));
    c.inventory = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (has(doc, "gain_range_db")) c.gain_range_db = as_range(doc["gain_range_db"], join_path(path, "gain_range_db"));
  if (has(doc, "snr_range_db")) c.snr_range_db = as_range(doc["snr_range_db"], join_path(path, "snr_range_db"));
  if (has(doc, "noise_kind")) {
    try {
      c.noise_kind = noise_kind_from_string(as<std::string>(doc["noise_kind"], join_path(path, "noise_kind")));
    } catch (const Error& e) {
      throw Error(join_path(path, "noise_kind"), e.what());
    }
  }
  c.noise_floor_power = value_or<double>(doc, "noise_floor_power", c.noise_floor_power, path);
  if (has(doc, "sro_ppm_range")) c.sro_ppm_range = as_range(doc["sro_ppm_range"], join_path(path, "sro_ppm_range"));
  c.positions_per_room = value_or<int>(doc, "positions_per_room", c.positions_per_room, path);
  c.resample_position_per_utterance =
      value_or<bool>(doc, "resample_position_per_utterance", c.resample_position_per_utterance, path);
  c.num_channels = value_or<int>(doc, "num_channels", c.num_channels, path);
  c.validate();
  return c;
}

json to_json(const EnvironmentConfig& c) {
  json out = {{"reverb", c.reverb == ReverbKind::kSimulated ? "simulated" : "none"},
              {"gain_range_db", detail::range_to_json(c.gain_range_db)},
              {"snr_range_db", detail::range_to_json(c.snr_range_db)},
              {"noise_kind", std::string(to_string(c.noise_kind))},
              {"noise_floor_power", c.noise_floor_power},
              {"positions_per_room", c.positions_per_room},
              {"resample_position_per_utterance", c.resample_position_per_utterance},
              {"num_channels", c.num_channels}};
  if (!c.inventory.empty()) out["inventory"] = c.inventory.string();
  out["sro_ppm_range"] = c.sro_ppm_range ? detail::range_to_json(*c.sro_ppm_range) : json(nullptr);
  return out;
}

Timeline MixtureDescriptor::timeline() const {
  Timeline t;
  t.sample_rate = sample_rate;
  t.speakers = speakers;
  t.crop_samples = crop_samples;
  for (const auto& e : entries) t.entries.push_back({e.speaker_id, e.utterance_id, e.offset, e.duration});
  return t;
}

void MixtureDescriptor::validate() const {
  const std::string ctx = dataset_label + "#" + std::to_string(example_index);
  if (sample_rate <= 0) throw Error(ctx, "sample_rate must be > 0");
  if (num_channels < 1) throw Error(ctx, "num_channels must be >= 1");
  std::int64_t length = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.offset < 0 || e.duration <= 0) {
      throw Error(ctx, "entries[" + std::to_string(i) + "]: offset must be >= 0 and duration > 0");
    }
    if (e.rir && !room) throw Error(ctx, "entries[" + std::to_string(i) + "]: rir reference without a room");
    length = std::max(length, e.end());
  }
  if (length != total_samples) throw Error(ctx, "total_samples does not match the entries");
  if (crop_samples && (*crop_samples <= 0 || *crop_samples > total_samples)) {
    throw Error(ctx, "crop_samples out of range");
  }
  if (sro_ppm && static_cast<int>(sro_ppm->size()) != num_channels) {
    throw Error(ctx, "sro_ppm needs one value per channel");
  }
}

json to_json(const MixtureDescriptor& d) {
  json entries = json::array();
  for (const auto& e : d.entries) {
    entries.push_back({{"speaker_id", e.speaker_id},
                       {"utterance_id", e.utterance_id},
                       {"offset", e.offset},
                       {"num_samples", e.duration},
                       {"gain", e.gain},
                       {"rir", e.rir ? json{{"room", e.rir->room}, {"position", e.rir->position}} : json(nullptr)},
                       {"extra", e.extra}});
  }
  json noise = nullptr;
  if (d.noise) {
    noise = {{"kind", std::string(to_string(d.noise->kind))},
             {"snr_db", d.noise->snr_db},
             {"seed", d.noise->seed},
             {"floor_power", d.noise->floor_power}};
  }
  return {{"dataset_label", d.dataset_label},
          {"example_index", d.example_index},
          {"root_seed", d.root_seed},
          {"sample_rate", d.sample_rate},
          {"num_channels", d.num_channels},
          {"mode", std::string(to_string(d.mode))},
          {"speakers", d.speakers},
          {"room", d.room ? json(*d.room) : json(nullptr)},
          {"entries", std::move(entries)},
          {"noise", std::move(noise)},
          {"sro_ppm", d.sro_ppm ? json(*d.sro_ppm) : json(nullptr)},
          {"total_samples", d.total_samples},
          {"crop_samples", d.crop_samples ? json(*d.crop_samples) : json(nullptr)}};
}

MixtureDescriptor descriptor_from_json(const json& doc, const std::string& path) {
  using namespace detail;
  if (!doc.is_object()) throw Error(path, "expected an object");
  MixtureDescriptor d;
  d.dataset_label = require_as<std::string>(doc, "dataset_label", path);
  d.example_index = require_as<std::int64_t>(doc, "example_index", path);
  d.root_seed = require_as<std::uint64_t>(doc, "root_seed", path);
  d.sample_rate = require_as<int>(doc, "sample_rate", path);
  d.num_channels = require_as<int>(doc, "num_channels", path);
  try {
    d.mode = scenario_mode_from_string(require_as<std::string>(doc, "mode", path));
  } catch (const Error& e) {
    throw Error(join_path(path, "mode"), e.what());
  }
  for (const auto& s : require(doc, "speakers", path)) d.speakers.push_back(as<std::string>(s, join_path(path, "speakers")));
  if (has(doc, "room")) d.room = as<int>(doc["room"], join_path(path, "room"));
  const json& entries = require(doc, "entries", path);
  if (!entries.is_array()) throw Error(join_path(path, "entries"), "expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string p = index_path(join_path(path, "entries"), i);
    const json& item = entries[i];
    DescriptorEntry e;
    e.speaker_id = require_as<std::string>(item, "speaker_id", p);
    e.utterance_id = require_as<std::string>(item, "utterance_id", p);
    e.offset = require_as<std::int64_t>(item, "offset", p);
    e.duration = require_as<std::int64_t>(item, "num_samples", p);
    e.gain = require_as<double>(item, "gain", p);
    if (has(item, "rir")) {
      const json& r = item["rir"];
      e.rir = RirRef{require_as<int>(r, "room", join_path(p, "rir")), require_as<int>(r, "position", join_path(p, "rir"))};
    }
    if (has(item, "extra")) e.extra = item["extra"];
    d.entries.push_back(std::move(e));
  }
  if (has(doc, "noise")) {
    const json& n = doc["noise"];
    const std::string p = join_path(path, "noise");
    NoiseParams np;
    np.kind = noise_kind_from_string(require_as<std::string>(n, "kind", p));
    np.snr_db = require_as<double>(n, "snr_db", p);
    np.seed = require_as<std::uint64_t>(n, "seed", p);
    np.floor_power = value_or<double>(n, "floor_power", np.floor_power, p);
    d.noise = np;
  }
  if (has(doc, "sro_ppm")) {
    std::vector<double> ppm;
    for (const auto& v : doc["sro_ppm"]) ppm.push_back(as<double>(v, join_path(path, "sro_ppm")));
    d.sro_ppm = std::move(ppm);
  }
  d.total_samples = require_as<std::int64_t>(doc, "total_samples", path);
  if (has(doc, "crop_samples")) d.crop_samples = as<std::int64_t>(doc["crop_samples"], join_path(path, "crop_samples"));
  d.validate();
  return d;
}

void write_descriptors(const std::filesystem::path& path, const std::vector<MixtureDescriptor>& descriptors) {
  json doc = json::array();
  for (const auto& d : descriptors) doc.push_back(to_json(d));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string(), "cannot open for writing");
  out << doc.dump(1) << '\n';
}

std::vector<MixtureDescriptor> read_descriptors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string(), "cannot open descriptor file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string(), std::string("parse failure: ") + e.what());
  }
  std::vector<MixtureDescriptor> out;
  if (doc.is_object()) {
    out.push_back(descriptor_from_json(doc));
  } else if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(descriptor_from_json(doc[i], detail::index_path("", i)));
  } else {
    throw Error(path.string(), "expected a descriptor object or an array of descriptors");
  }
  return out;
}

EnvironmentStreams derive_environment_streams(std::uint64_t root_seed, std::string_view dataset_label,
                                              std::int64_t example_index) {
  return {RandomStream(derive_stream_seed(root_seed, dataset_label, example_index, Stage::kScaling)),
          RandomStream(derive_stream_seed(root_seed, dataset_label, example_index, Stage::kRir)),
          RandomStream(derive_stream_seed(root_seed, dataset_label, example_index, Stage::kNoise)),
          RandomStream(derive_stream_seed(root_seed, dataset_label, example_index, Stage::kSro))};
}

NoiseParams sample_noise_params(const EnvironmentConfig& config, RandomStream& stream) {
  NoiseParams p;
  p.kind = config.noise_kind;
  p.snr_db = stream.uniform_real(config.snr_range_db.first, config.snr_range_db.second);
  p.seed = stream.next_u64();
  p.floor_power = config.noise_floor_power;
  return p;
}

std::vector<double> sample_sro(const Range& ppm_range, int num_channels, RandomStream& stream) {
  std::vector<double> ppm(static_cast<std::size_t>(std::max(num_channels, 0)), 0.0);
  for (std::size_t c = 1; c < ppm.size(); ++c) ppm[c] = stream.uniform_real(ppm_range.first, ppm_range.second);
  return ppm;
}

MixtureDescriptor assign_environment(const Timeline& timeline, const EnvironmentConfig& config,
                                     const InventoryShape* rooms, const CorpusManifest& manifest,
                                     EnvironmentStreams& streams) {
  config.validate();
  MixtureDescriptor d;
  d.sample_rate = timeline.sample_rate;
  d.speakers = timeline.speakers;
  d.crop_samples = timeline.crop_samples;
  d.total_samples = timeline.length();

  const std::size_t num_speakers = timeline.speakers.size();
  // allotted[k]: positions speaker k may occupy
  std::vector<std::vector<int>> allotted(num_speakers);
  if (config.reverb == ReverbKind::kSimulated) {
    if (rooms == nullptr || rooms->num_rooms < 1) throw Error("environment", "reverb enabled but the RIR inventory is empty");
    if (rooms->positions_per_room != config.positions_per_room) {
      throw Error("environment.positions_per_room", "does not match the RIR inventory (" +
                                                        std::to_string(rooms->positions_per_room) + ")");
    }
    if (num_speakers > static_cast<std::size_t>(rooms->positions_per_room)) {
      throw Error("environment", std::to_string(num_speakers) + " speakers exceed " +
                                     std::to_string(rooms->positions_per_room) + " positions per room");
    }
    d.room = static_cast<int>(streams.rir.uniform_int(0, rooms->num_rooms - 1));
    d.num_channels = rooms->num_mics;
    const auto perm = streams.rir.permutation(static_cast<std::size_t>(rooms->positions_per_room));
    for (std::size_t j = 0; j < perm.size(); ++j) {
      if (j < num_speakers || config.resample_position_per_utterance) {
        allotted[j % num_speakers].push_back(static_cast<int>(perm[j]));
      }
    }
  } else {
    d.num_channels = config.num_channels;
  }

  for (const auto& entry : timeline.entries) {
    const auto it = std::find(timeline.speakers.begin(), timeline.speakers.end(), entry.speaker_id);
    if (it == timeline.speakers.end()) throw Error("environment", "timeline entry for unknown speaker " + entry.speaker_id);
    const auto k = static_cast<std::size_t>(it - timeline.speakers.begin());
    DescriptorEntry e;
    e.speaker_id = entry.speaker_id;
    e.utterance_id = entry.utterance_id;
    e.offset = entry.offset;
    e.duration = entry.duration;
    const double gain_db = streams.scaling.uniform_real(config.gain_range_db.first, config.gain_range_db.second);
    e.gain = std::pow(10.0, gain_db / 20.0);
    if (d.room) {
      const auto& set = allotted[k];
      int position = set.front();
      if (config.resample_position_per_utterance && set.size() > 1) {
        position = set[static_cast<std::size_t>(streams.rir.uniform_int(0, static_cast<std::int64_t>(set.size()) - 1))];
      }
      e.rir = RirRef{*d.room, position};
    }
    e.extra = manifest.at(entry.utterance_id).extra;
    d.entries.push_back(std::move(e));
  }

  if (config.noise_kind != NoiseKind::kNone) d.noise = sample_noise_params(config, streams.noise);
  if (config.sro_ppm_range) d.sro_ppm = sample_sro(*config.sro_ppm_range, d.num_channels, streams.sro);
  return d;
}

}  // namespace mixsim
