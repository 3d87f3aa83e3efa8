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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixsim/corpus.hpp"
#include "mixsim/random.hpp"

namespace mixsim {

enum class ScenarioMode { kFullOverlap, kPaddedShift, kPartialOverlap, kMeeting };

std::string_view to_string(ScenarioMode mode);
ScenarioMode scenario_mode_from_string(std::string_view name);

using Range = std::pair<double, double>;

// Durations are in seconds; they are converted to samples at the corpus
// sample rate with round-to-nearest.
struct ScenarioConfig {
  ScenarioMode mode = ScenarioMode::kMeeting;
  int num_speakers_min = 2;
  int num_speakers_max = 2;
  double target_length = 120.0;
  Range overlap_range{0.0, 0.0};
  Range silence_range{0.0, 0.0};
  double silence_probability = 0.1;
  double minimal_overlap = 0.0;
  int max_concurrent = 2;
  std::vector<double> activity_targets;  // empty: equalize activity
  Range partial_overlap_ratio{0.0, 1.0};
  bool truncate_to_shortest = false;  // full_overlap: crop to the shortest source
  GroupKey group_key = GroupKey::kSpeaker;

  // Throws mixsim::Error with a field path on violated invariants.
  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& document, const std::string& path = "scenario");
nlohmann::json to_json(const ScenarioConfig& config);

std::int64_t seconds_to_samples(double seconds, int sample_rate);

struct TimelineEntry {
  std::string speaker_id;
  std::string utterance_id;
  std::int64_t offset = 0;
  std::int64_t duration = 0;

  std::int64_t end() const { return offset + duration; }
  friend bool operator==(const TimelineEntry&, const TimelineEntry&) = default;
};

struct Timeline {
  std::vector<TimelineEntry> entries;  // placement order
  std::vector<std::string> speakers;   // the K participating speakers
  int sample_rate = 0;
  std::optional<std::int64_t> crop_samples;  // min-style cropping at render time

  std::size_t num_speakers() const { return speakers.size(); }
  // max(offset + duration) over entries, 0 when empty.
  std::int64_t length() const;
  friend bool operator==(const Timeline&, const Timeline&) = default;
};

// Maximum number of simultaneously active entries (exact sweep).
int max_concurrency(const Timeline& timeline);
// True if two entries of one speaker intersect.
bool has_self_overlap(const Timeline& timeline);

// --- speaker turns -------------------------------------------------------

// Probability of each speaker taking the next turn.
//
// Without targets: p_k proportional to 1 / share_k; if any share is 0 the
// mass is spread uniformly over the zero-share speakers. With targets:
// p_k proportional to max(target_k - share_k, 0); when every deficit is 0
// the inverse-activity rule applies instead.
std::vector<double> turn_probabilities(std::span<const double> shares, std::span<const double> targets = {});

struct SpeakerState {
  std::string speaker_id;
  std::int64_t accumulated_activity = 0;
  std::vector<std::string> remaining_shuffle;  // next id at the back
  std::int64_t last_end = 0;
};

// Pops the next utterance of the speaker's group; draws a fresh permutation
// of the whole group when the pending order is exhausted.
std::string next_utterance(SpeakerState& state, std::span<const std::string> group, RandomStream& stream);

// --- overlap / silence ---------------------------------------------------

struct GapParams {
  std::int64_t overlap_min = 0;
  std::int64_t overlap_max = 0;
  std::int64_t silence_min = 0;
  std::int64_t silence_max = 0;
  std::int64_t minimal_overlap = 0;
  double silence_probability = 0.0;
  int max_concurrent = 2;

  static GapParams from(const ScenarioConfig& config, int sample_rate);
};

struct GapDecision {
  std::int64_t offset = 0;
  std::int64_t gap = 0;           // signed: offset - end of timeline (negative = overlap)
  bool silence = false;
  bool fallback = false;          // overlap was drawn but infeasible
};

// Largest overlap ov in [lower, upper] such that starting `duration` samples
// at timeline.length() - ov' is feasible for every ov' in [lower, ov]:
// at most max_concurrent active speakers and no overlap with the speaker's
// own entries. nullopt when `lower` itself is infeasible.
std::optional<std::int64_t> max_feasible_overlap(const Timeline& timeline, const std::string& speaker_id,
                                                 std::int64_t duration, int max_concurrent, std::int64_t lower,
                                                 std::int64_t upper);

// Start offset of the next utterance, relative to the end of the timeline
// so far. First utterance goes to 0 without drawing.
GapDecision sample_gap(const GapParams& params, const Timeline& timeline, const std::string& speaker_id,
                       std::int64_t next_duration, RandomStream& gap_stream);

// --- whole patterns ------------------------------------------------------

struct MeetingStreams {
  RandomStream utterance;
  RandomStream turn;
  RandomStream gap;
};

// Resolves num_speakers_min..max with one uniform_int draw.
int resolve_num_speakers(const ScenarioConfig& config, RandomStream& stream);

// Sequential meeting generation until the timeline reaches target_length.
Timeline sample_meeting(const ScenarioConfig& config, const SpeakerGroups& groups, const CorpusManifest& manifest,
                        int num_speakers, MeetingStreams& streams);

// Source data selection for classical mixtures: K distinct speakers, one
// uniformly chosen utterance each.
std::vector<const UtteranceRecord*> select_sources(const SpeakerGroups& groups, const CorpusManifest& manifest,
                                                   int num_speakers, RandomStream& stream);

Timeline sample_classical(const ScenarioConfig& config, std::span<const UtteranceRecord* const> selected,
                          RandomStream& offset_stream);

}  // namespace mixsim
