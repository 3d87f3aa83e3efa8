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
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixsim {

// Start/end sample of actual speech inside a recording, end exclusive.
struct VadBounds {
  std::int64_t start = 0;
  std::int64_t end = 0;
  friend bool operator==(const VadBounds&, const VadBounds&) = default;
};

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::filesystem::path audio_path;  // as written in the manifest
  std::int64_t num_samples = 0;
  int sample_rate = 0;
  std::optional<VadBounds> vad_bounds;
  std::optional<std::string> scenario_id;
  nlohmann::json extra = nlohmann::json::object();  // passthrough, never interpreted

  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

// Immutable, validated list of source utterances. Audio paths resolve
// relative to `base_dir` (the manifest's directory).
class CorpusManifest {
 public:
  CorpusManifest() = default;
  // Throws mixsim::Error naming the offending record on any invariant
  // violation (duplicate id, bad vad bounds, mixed sample rates, ...).
  CorpusManifest(std::string name, int sample_rate, std::vector<UtteranceRecord> utterances,
                 std::filesystem::path base_dir = {});

  const std::string& name() const { return name_; }
  int sample_rate() const { return sample_rate_; }
  const std::vector<UtteranceRecord>& utterances() const { return utterances_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

  const UtteranceRecord* find(std::string_view utterance_id) const;
  const UtteranceRecord& at(std::string_view utterance_id) const;
  std::filesystem::path resolve(const UtteranceRecord& record) const;
  // Distinct speaker ids in order of first appearance.
  std::vector<std::string> speakers() const;

 private:
  std::string name_;
  int sample_rate_ = 0;
  std::vector<UtteranceRecord> utterances_;
  std::filesystem::path base_dir_;
  std::unordered_map<std::string, std::size_t> index_;
};

CorpusManifest parse_manifest(const nlohmann::json& document, const std::filesystem::path& base_dir);
CorpusManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const CorpusManifest& manifest);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

enum class GroupKey { kSpeaker, kSpeakerAndScenario };

struct SpeakerGroup {
  std::string key;
  std::string speaker_id;
  std::vector<std::string> utterance_ids;  // manifest order
};

struct SpeakerGroups {
  GroupKey key_mode = GroupKey::kSpeaker;
  std::vector<SpeakerGroup> groups;  // order of first appearance in the manifest
};

SpeakerGroups group_utterances(const CorpusManifest& manifest, GroupKey key_mode);

// Checks that referenced audio exists, is mono and matches num_samples and
// sample_rate. Returns one message per problem; empty means valid.
std::vector<std::string> validate_audio(const CorpusManifest& manifest);

}  // namespace mixsim
