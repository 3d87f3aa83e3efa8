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

#include "mixsim/corpus.hpp"

#include <fstream>
#include <map>

#include "json_util.hpp"
#include "mixsim/audio.hpp"
#include "mixsim/error.hpp"

namespace mixsim {

using nlohmann::json;

CorpusManifest::CorpusManifest(std::string name, int sample_rate, std::vector<UtteranceRecord> utterances,
                               std::filesystem::path base_dir)
    : name_(std::move(name)),
      sample_rate_(sample_rate),
      utterances_(std::move(utterances)),
      base_dir_(std::move(base_dir)) {
  if (sample_rate_ <= 0) throw Error("manifest", "sample_rate must be > 0");
  for (std::size_t i = 0; i < utterances_.size(); ++i) {
    auto& record = utterances_[i];
    const std::string& id = record.utterance_id;
    if (id.empty()) throw Error("utterance #" + std::to_string(i), "empty utterance_id");
    if (record.speaker_id.empty()) throw Error(id, "empty speaker_id");
    if (record.num_samples <= 0) throw Error(id, "num_samples must be > 0");
    if (record.sample_rate == 0) record.sample_rate = sample_rate_;
    if (record.sample_rate != sample_rate_) {
      throw Error(id, "sample rate " + std::to_string(record.sample_rate) + " differs from manifest rate " +
                          std::to_string(sample_rate_));
    }
    if (record.vad_bounds) {
      const auto [start, end] = *record.vad_bounds;
      if (start >= end) throw Error(id, "vad start >= end");
      if (start < 0 || end > record.num_samples) throw Error(id, "vad bounds outside [0, num_samples]");
    }
    if (!record.extra.is_object()) throw Error(id, "extra must be an object");
    if (!index_.emplace(id, i).second) throw Error(id, "duplicate utterance_id");
  }
}

const UtteranceRecord* CorpusManifest::find(std::string_view utterance_id) const {
  auto it = index_.find(std::string(utterance_id));
  return it == index_.end() ? nullptr : &utterances_[it->second];
}

const UtteranceRecord& CorpusManifest::at(std::string_view utterance_id) const {
  if (const auto* record = find(utterance_id)) return *record;
  throw Error(std::string(utterance_id), "unknown utterance_id");
}

std::filesystem::path CorpusManifest::resolve(const UtteranceRecord& record) const {
  if (record.audio_path.is_absolute()) return record.audio_path;
  return base_dir_ / record.audio_path;
}

std::vector<std::string> CorpusManifest::speakers() const {
  std::vector<std::string> out;
  std::unordered_map<std::string, bool> seen;
  for (const auto& record : utterances_) {
    if (seen.emplace(record.speaker_id, true).second) out.push_back(record.speaker_id);
  }
  return out;
}

CorpusManifest parse_manifest(const json& document, const std::filesystem::path& base_dir) {
  using namespace detail;
  const std::string root;
  if (!document.is_object()) throw Error("manifest", "expected a JSON object");
  const auto name = value_or<std::string>(document, "name", "", root);
  const auto sample_rate = require_as<int>(document, "sample_rate", root);
  const json& items = require(document, "utterances", root);
  if (!items.is_array()) throw Error("utterances", "expected an array");

  std::vector<UtteranceRecord> records;
  records.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const json& item = items[i];
    const std::string path = index_path("utterances", i);
    UtteranceRecord r;
    r.utterance_id = require_as<std::string>(item, "utterance_id", path);
    // From here on errors name the record id rather than its index.
    const std::string& id = r.utterance_id;
    try {
      r.speaker_id = require_as<std::string>(item, "speaker_id", path);
      r.audio_path = require_as<std::string>(item, "audio_path", path);
      r.num_samples = require_as<std::int64_t>(item, "num_samples", path);
      r.sample_rate = value_or<int>(item, "sample_rate", sample_rate, path);
      if (has(item, "vad_bounds")) {
        const json& vad = item["vad_bounds"];
        if (!vad.is_array() || vad.size() != 2) throw Error(join_path(path, "vad_bounds"), "expected [start, end]");
        r.vad_bounds = VadBounds{as<std::int64_t>(vad[0], join_path(path, "vad_bounds[0]")),
                                 as<std::int64_t>(vad[1], join_path(path, "vad_bounds[1]"))};
      }
      if (has(item, "scenario_id")) r.scenario_id = require_as<std::string>(item, "scenario_id", path);
      if (has(item, "extra")) r.extra = item["extra"];
    } catch (const Error& e) {
      throw Error(id, e.what());
    }
    records.push_back(std::move(r));
  }
  return CorpusManifest(name, sample_rate, std::move(records), base_dir);
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string(), "cannot open manifest");
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string(), std::string("parse failure: ") + e.what());
  }
  return parse_manifest(document, path.parent_path());
}

json manifest_to_json(const CorpusManifest& manifest) {
  json items = json::array();
  for (const auto& r : manifest.utterances()) {
    json item = {{"utterance_id", r.utterance_id},
                 {"speaker_id", r.speaker_id},
                 {"audio_path", r.audio_path.generic_string()},
                 {"num_samples", r.num_samples}};
    if (r.vad_bounds) item["vad_bounds"] = {r.vad_bounds->start, r.vad_bounds->end};
    if (r.scenario_id) item["scenario_id"] = *r.scenario_id;
    if (!r.extra.empty()) item["extra"] = r.extra;
    items.push_back(std::move(item));
  }
  return {{"name", manifest.name()}, {"sample_rate", manifest.sample_rate()}, {"utterances", std::move(items)}};
}

void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(path.string(), "cannot open for writing");
  out << manifest_to_json(manifest).dump(2) << '\n';
}

SpeakerGroups group_utterances(const CorpusManifest& manifest, GroupKey key_mode) {
  SpeakerGroups result;
  result.key_mode = key_mode;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& r : manifest.utterances()) {
    std::string key = r.speaker_id;
    if (key_mode == GroupKey::kSpeakerAndScenario && r.scenario_id) key += "/" + *r.scenario_id;
    auto [it, inserted] = slot.emplace(key, result.groups.size());
    if (inserted) result.groups.push_back(SpeakerGroup{key, r.speaker_id, {}});
    result.groups[it->second].utterance_ids.push_back(r.utterance_id);
  }
  return result;
}

std::vector<std::string> validate_audio(const CorpusManifest& manifest) {
  std::vector<std::string> problems;
  for (const auto& r : manifest.utterances()) {
    const auto path = manifest.resolve(r);
    if (!std::filesystem::exists(path)) {
      problems.push_back(r.utterance_id + ": missing audio file " + path.string());
      continue;
    }
    try {
      const AudioInfo info = read_audio_info(path);
      if (info.num_channels != 1) {
        problems.push_back(r.utterance_id + ": expected mono audio, found " + std::to_string(info.num_channels) +
                           " channels in " + path.string());
      }
      if (info.num_frames != r.num_samples) {
        problems.push_back(r.utterance_id + ": num_samples " + std::to_string(r.num_samples) + " but " +
                           path.string() + " has " + std::to_string(info.num_frames));
      }
      if (info.sample_rate != r.sample_rate) {
        problems.push_back(r.utterance_id + ": sample rate " + std::to_string(info.sample_rate) + " in " +
                           path.string() + " differs from " + std::to_string(r.sample_rate));
      }
    } catch (const Error& e) {
      problems.push_back(r.utterance_id + ": " + e.what());
    }
  }
  return problems;
}

}  // namespace mixsim
