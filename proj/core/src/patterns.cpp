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

#include "mixsim/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "json_util.hpp"
#include "mixsim/error.hpp"

namespace mixsim {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kModeNames = {"full_overlap", "padded_shift", "partial_overlap",
                                                         "meeting"};

}  // namespace

std::string_view to_string(ScenarioMode mode) { return kModeNames.at(static_cast<std::size_t>(mode)); }

ScenarioMode scenario_mode_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (kModeNames[i] == name) return static_cast<ScenarioMode>(i);
  }
  throw Error("unknown scenario mode '" + std::string(name) + "'");
}

std::int64_t seconds_to_samples(double seconds, int sample_rate) {
  return std::llround(seconds * sample_rate);
}

void ScenarioConfig::validate() const {
  const std::string p = "scenario";
  if (num_speakers_min < 1) throw Error(p + ".num_speakers", "must be >= 1");
  if (num_speakers_min > num_speakers_max) throw Error(p + ".num_speakers", "empty range");
  if (mode == ScenarioMode::kMeeting && !(target_length > 0.0)) throw Error(p + ".target_length", "must be > 0");
  if (!(overlap_range.first >= 0.0 && overlap_range.first <= overlap_range.second)) {
    throw Error(p + ".overlap_range", "need 0 <= ov_min <= ov_max");
  }
  if (!(silence_range.first >= 0.0 && silence_range.first <= silence_range.second)) {
    throw Error(p + ".silence_range", "need 0 <= sil_min <= sil_max");
  }
  if (!(minimal_overlap >= 0.0 && minimal_overlap <= overlap_range.second)) {
    throw Error(p + ".minimal_overlap", "need 0 <= minimal_overlap <= ov_max");
  }
  if (!(silence_probability >= 0.0 && silence_probability <= 1.0)) {
    throw Error(p + ".silence_probability", "must lie in [0, 1]");
  }
  if (max_concurrent < 1) throw Error(p + ".max_concurrent", "must be >= 1");
  if (!(partial_overlap_ratio.first >= 0.0 && partial_overlap_ratio.second <= 1.0 &&
        partial_overlap_ratio.first <= partial_overlap_ratio.second)) {
    throw Error(p + ".partial_overlap_ratio", "need 0 <= lo <= hi <= 1");
  }
  if (!activity_targets.empty()) {
    if (num_speakers_min != num_speakers_max ||
        activity_targets.size() != static_cast<std::size_t>(num_speakers_min)) {
      throw Error(p + ".activity_targets", "needs a fixed num_speakers equal to the number of targets");
    }
    double sum = 0.0;
    for (double t : activity_targets) {
      if (!(t >= 0.0)) throw Error(p + ".activity_targets", "targets must be >= 0");
      sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error(p + ".activity_targets", "targets must sum to 1");
  }
}

ScenarioConfig scenario_from_json(const json& doc, const std::string& path) {
  using namespace detail;
  if (!doc.is_object()) throw Error(path, "expected an object");
  ScenarioConfig c;
  c.mode = scenario_mode_from_string(require_as<std::string>(doc, "mode", path));
  const json& speakers = require(doc, "num_speakers", path);
  if (speakers.is_array()) {
    const auto range = as_range(speakers, join_path(path, "num_speakers"));
    c.num_speakers_min = static_cast<int>(range.first);
    c.num_speakers_max = static_cast<int>(range.second);
    if (c.num_speakers_min != range.first || c.num_speakers_max != range.second) {
      throw Error(join_path(path, "num_speakers"), "expected integers");
    }
  } else {
    c.num_speakers_min = c.num_speakers_max = as<int>(speakers, join_path(path, "num_speakers"));
  }
  c.target_length = value_or<double>(doc, "target_length", c.target_length, path);
  if (has(doc, "overlap_range")) c.overlap_range = as_range(doc["overlap_range"], join_path(path, "overlap_range"));
  if (has(doc, "silence_range")) c.silence_range = as_range(doc["silence_range"], join_path(path, "silence_range"));
  c.silence_probability = value_or<double>(doc, "silence_probability", c.silence_probability, path);
  c.minimal_overlap = value_or<double>(doc, "minimal_overlap", c.minimal_overlap, path);
  c.max_concurrent = value_or<int>(doc, "max_concurrent", c.max_concurrent, path);
  if (has(doc, "activity_targets")) {
    const json& t = doc["activity_targets"];
    if (!t.is_array()) throw Error(join_path(path, "activity_targets"), "expected an array");
    for (std::size_t i = 0; i < t.size(); ++i) {
      c.activity_targets.push_back(as<double>(t[i], index_path(join_path(path, "activity_targets"), i)));
    }
  }
  if (has(doc, "partial_overlap_ratio")) {
    c.partial_overlap_ratio = as_range(doc["partial_overlap_ratio"], join_path(path, "partial_overlap_ratio"));
  }
  c.truncate_to_shortest = value_or<bool>(doc, "truncate_to_shortest", false, path);
  const auto group_by = value_or<std::string>(doc, "group_by", "speaker", path);
  if (group_by == "speaker") {
    c.group_key = GroupKey::kSpeaker;
  } else if (group_by == "speaker_and_scenario") {
    c.group_key = GroupKey::kSpeakerAndScenario;
  } else {
    throw Error(join_path(path, "group_by"), "expected 'speaker' or 'speaker_and_scenario'");
  }
  c.validate();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json doc = {
      {"mode", to_string(c.mode)},
      {"num_speakers", c.num_speakers_min == c.num_speakers_max
                           ? json(c.num_speakers_min)
                           : json::array({c.num_speakers_min, c.num_speakers_max})},
      {"target_length", c.target_length},
      {"overlap_range", detail::range_to_json(c.overlap_range)},
      {"silence_range", detail::range_to_json(c.silence_range)},
      {"silence_probability", c.silence_probability},
      {"minimal_overlap", c.minimal_overlap},
      {"max_concurrent", c.max_concurrent},
      {"partial_overlap_ratio", detail::range_to_json(c.partial_overlap_ratio)},
      {"truncate_to_shortest", c.truncate_to_shortest},
      {"group_by", c.group_key == GroupKey::kSpeaker ? "speaker" : "speaker_and_scenario"},
  };
  if (!c.activity_targets.empty()) doc["activity_targets"] = c.activity_targets;
  return doc;
}

std::int64_t Timeline::length() const {
  std::int64_t end = 0;
  for (const auto& e : entries) end = std::max(end, e.end());
  return end;
}

int max_concurrency(const Timeline& timeline) {
  std::vector<std::pair<std::int64_t, int>> events;
  events.reserve(timeline.entries.size() * 2);
  for (const auto& e : timeline.entries) {
    events.emplace_back(e.offset, +1);
    events.emplace_back(e.end(), -1);
  }
  // Ends sort before starts at the same sample: intervals are half-open.
  std::sort(events.begin(), events.end());
  int active = 0, peak = 0;
  for (const auto& [_, delta] : events) {
    active += delta;
    peak = std::max(peak, active);
  }
  return peak;
}

bool has_self_overlap(const Timeline& timeline) {
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> per_speaker;
  for (const auto& e : timeline.entries) per_speaker[e.speaker_id].emplace_back(e.offset, e.end());
  for (auto& [_, intervals] : per_speaker) {
    std::sort(intervals.begin(), intervals.end());
    for (std::size_t i = 1; i < intervals.size(); ++i) {
      if (intervals[i].first < intervals[i - 1].second) return true;
    }
  }
  return false;
}

std::vector<double> turn_probabilities(std::span<const double> shares, std::span<const double> targets) {
  if (shares.empty()) throw Error("turn_probabilities: no speakers");
  for (double s : shares) {
    if (!(s >= 0.0)) throw Error("turn_probabilities: negative activity share");
  }
  std::vector<double> weights(shares.size(), 0.0);

  if (!targets.empty()) {
    if (targets.size() != shares.size()) throw Error("turn_probabilities: one target per speaker required");
    double sum = 0.0;
    for (double t : targets) sum += t;
    if (std::abs(sum - 1.0) > 1e-6) throw Error("turn_probabilities: targets must sum to 1");
    double total = 0.0;
    for (std::size_t k = 0; k < shares.size(); ++k) {
      weights[k] = std::max(targets[k] - shares[k], 0.0);
      total += weights[k];
    }
    if (total > 0.0) {
      for (double& w : weights) w /= total;
      return weights;
    }
  }

  const auto zeros = static_cast<std::size_t>(std::count(shares.begin(), shares.end(), 0.0));
  if (zeros > 0) {
    for (std::size_t k = 0; k < shares.size(); ++k) weights[k] = shares[k] == 0.0 ? 1.0 / zeros : 0.0;
    return weights;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    weights[k] = 1.0 / shares[k];
    total += weights[k];
  }
  for (double& w : weights) w /= total;
  return weights;
}

std::string next_utterance(SpeakerState& state, std::span<const std::string> group, RandomStream& stream) {
  if (group.empty()) throw Error(state.speaker_id, "empty utterance group");
  if (state.remaining_shuffle.empty()) {
    const auto order = stream.permutation(group.size());
    state.remaining_shuffle.reserve(order.size());
    // Stored reversed so the next id is popped from the back.
    for (auto it = order.rbegin(); it != order.rend(); ++it) state.remaining_shuffle.push_back(group[*it]);
  }
  std::string id = std::move(state.remaining_shuffle.back());
  state.remaining_shuffle.pop_back();
  return id;
}

GapParams GapParams::from(const ScenarioConfig& c, int sample_rate) {
  GapParams p;
  p.overlap_min = seconds_to_samples(c.overlap_range.first, sample_rate);
  p.overlap_max = seconds_to_samples(c.overlap_range.second, sample_rate);
  p.silence_min = seconds_to_samples(c.silence_range.first, sample_rate);
  p.silence_max = seconds_to_samples(c.silence_range.second, sample_rate);
  p.minimal_overlap = seconds_to_samples(c.minimal_overlap, sample_rate);
  p.silence_probability = c.silence_probability;
  p.max_concurrent = c.max_concurrent;
  return p;
}

std::optional<std::int64_t> max_feasible_overlap(const Timeline& timeline, const std::string& speaker_id,
                                                 std::int64_t duration, int max_concurrent, std::int64_t lower,
                                                 std::int64_t upper) {
  if (upper < lower) return std::nullopt;
  const std::int64_t reference = timeline.length();

  // Regions [a, b) the new utterance must not touch: where the cap is
  // already reached, and the speaker's own utterances.
  std::vector<std::pair<std::int64_t, std::int64_t>> blocked;
  std::vector<std::pair<std::int64_t, int>> events;
  for (const auto& e : timeline.entries) {
    events.emplace_back(e.offset, +1);
    events.emplace_back(e.end(), -1);
    if (e.speaker_id == speaker_id) blocked.emplace_back(e.offset, e.end());
  }
  std::sort(events.begin(), events.end());
  int active = 0;
  std::int64_t region_start = 0;
  for (std::size_t i = 0; i < events.size();) {
    const std::int64_t t = events[i].first;
    const int before = active;
    for (; i < events.size() && events[i].first == t; ++i) active += events[i].second;
    if (before < max_concurrent && active >= max_concurrent) region_start = t;
    if (before >= max_concurrent && active < max_concurrent) blocked.emplace_back(region_start, t);
  }

  // [s, s + duration) meets [a, b) iff a - duration < s < b; with
  // s = reference - ov this is reference - b < ov < reference - a + duration.
  std::int64_t best = upper;
  for (const auto& [a, b] : blocked) {
    const std::int64_t bad_lo = reference - b + 1;
    const std::int64_t bad_hi = reference - a + duration - 1;
    if (bad_lo > bad_hi) continue;
    if (bad_lo <= lower && lower <= bad_hi) return std::nullopt;
    if (bad_lo > lower) best = std::min(best, bad_lo - 1);
  }
  return best;
}

GapDecision sample_gap(const GapParams& params, const Timeline& timeline, const std::string& speaker_id,
                       std::int64_t next_duration, RandomStream& gap_stream) {
  GapDecision decision;
  if (timeline.entries.empty()) return decision;

  const std::int64_t reference = timeline.length();
  decision.silence = gap_stream.uniform01() < params.silence_probability;
  if (!decision.silence) {
    const std::int64_t lower = std::max(params.overlap_min, params.minimal_overlap);
    // Keeps placement offsets non-decreasing.
    const std::int64_t upper = std::min(params.overlap_max, reference - timeline.entries.back().offset);
    if (const auto limit =
            max_feasible_overlap(timeline, speaker_id, next_duration, params.max_concurrent, lower, upper)) {
      const std::int64_t overlap = gap_stream.uniform_int(lower, *limit);
      decision.gap = -overlap;
      decision.offset = reference - overlap;
      return decision;
    }
    decision.fallback = true;
  }
  const std::int64_t silence = gap_stream.uniform_int(params.silence_min, params.silence_max);
  decision.gap = silence;
  decision.offset = reference + silence;
  return decision;
}

int resolve_num_speakers(const ScenarioConfig& config, RandomStream& stream) {
  return static_cast<int>(stream.uniform_int(config.num_speakers_min, config.num_speakers_max));
}

namespace {

// Draws K distinct speakers and one group per speaker.
std::vector<const SpeakerGroup*> draw_groups(const SpeakerGroups& groups, int num_speakers, RandomStream& stream) {
  std::vector<std::string> speakers;
  std::unordered_map<std::string, std::vector<const SpeakerGroup*>> by_speaker;
  for (const auto& g : groups.groups) {
    auto& list = by_speaker[g.speaker_id];
    if (list.empty()) speakers.push_back(g.speaker_id);
    list.push_back(&g);
  }
  if (num_speakers < 1 || static_cast<std::size_t>(num_speakers) > speakers.size()) {
    throw Error("requested " + std::to_string(num_speakers) + " speakers but only " +
                std::to_string(speakers.size()) + " are available");
  }
  const auto order = stream.permutation(speakers.size());
  std::vector<const SpeakerGroup*> chosen;
  for (int k = 0; k < num_speakers; ++k) {
    const auto& candidates = by_speaker[speakers[order[static_cast<std::size_t>(k)]]];
    const auto pick = stream.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1);
    chosen.push_back(candidates[static_cast<std::size_t>(pick)]);
  }
  return chosen;
}

}  // namespace

Timeline sample_meeting(const ScenarioConfig& config, const SpeakerGroups& groups, const CorpusManifest& manifest,
                        int num_speakers, MeetingStreams& streams) {
  if (config.mode != ScenarioMode::kMeeting) throw Error("sample_meeting: scenario mode is not 'meeting'");
  const int rate = manifest.sample_rate();
  const auto chosen = draw_groups(groups, num_speakers, streams.utterance);

  Timeline timeline;
  timeline.sample_rate = rate;
  std::vector<SpeakerState> states;
  for (const auto* g : chosen) {
    timeline.speakers.push_back(g->speaker_id);
    states.push_back(SpeakerState{g->speaker_id, 0, {}, 0});
  }

  const GapParams gaps = GapParams::from(config, rate);
  const std::int64_t target = seconds_to_samples(config.target_length, rate);
  std::vector<double> shares(states.size(), 0.0);
  std::int64_t total_activity = 0;

  while (true) {
    for (std::size_t k = 0; k < states.size(); ++k) {
      shares[k] = total_activity == 0 ? 0.0
                                      : static_cast<double>(states[k].accumulated_activity) /
                                            static_cast<double>(total_activity);
    }
    const auto probabilities = turn_probabilities(shares, config.activity_targets);
    const std::size_t k = streams.turn.weighted_choice(probabilities);
    SpeakerState& state = states[k];

    std::string utterance_id = next_utterance(state, chosen[k]->utterance_ids, streams.utterance);
    const std::int64_t duration = manifest.at(utterance_id).num_samples;
    const GapDecision gap = sample_gap(gaps, timeline, state.speaker_id, duration, streams.gap);

    timeline.entries.push_back(TimelineEntry{state.speaker_id, std::move(utterance_id), gap.offset, duration});
    state.accumulated_activity += duration;
    state.last_end = gap.offset + duration;
    total_activity += duration;
    if (timeline.length() >= target) break;
  }
  return timeline;
}

std::vector<const UtteranceRecord*> select_sources(const SpeakerGroups& groups, const CorpusManifest& manifest,
                                                   int num_speakers, RandomStream& stream) {
  const auto chosen = draw_groups(groups, num_speakers, stream);
  std::vector<const UtteranceRecord*> out;
  for (const auto* g : chosen) {
    const auto pick = stream.uniform_int(0, static_cast<std::int64_t>(g->utterance_ids.size()) - 1);
    out.push_back(&manifest.at(g->utterance_ids[static_cast<std::size_t>(pick)]));
  }
  return out;
}

Timeline sample_classical(const ScenarioConfig& config, std::span<const UtteranceRecord* const> selected,
                          RandomStream& offset_stream) {
  if (config.mode == ScenarioMode::kMeeting) throw Error("sample_classical: scenario mode is 'meeting'");
  if (selected.empty()) throw Error("sample_classical: empty selection");

  Timeline timeline;
  timeline.sample_rate = selected.front()->sample_rate;
  std::int64_t longest = 0, shortest = selected.front()->num_samples;
  for (const auto* r : selected) {
    timeline.speakers.push_back(r->speaker_id);
    longest = std::max(longest, r->num_samples);
    shortest = std::min(shortest, r->num_samples);
  }

  std::int64_t previous_offset = 0, previous_length = 0;
  for (std::size_t u = 0; u < selected.size(); ++u) {
    const auto* r = selected[u];
    std::int64_t offset = 0;
    switch (config.mode) {
      case ScenarioMode::kFullOverlap:
        break;
      case ScenarioMode::kPaddedShift:
        offset = offset_stream.uniform_int(0, longest - r->num_samples);
        break;
      case ScenarioMode::kPartialOverlap:
        if (u > 0) {
          const double ratio =
              offset_stream.uniform_real(config.partial_overlap_ratio.first, config.partial_overlap_ratio.second);
          const auto overlap =
              std::llround(ratio * static_cast<double>(std::min(previous_length, r->num_samples)));
          offset = previous_offset + previous_length - overlap;
        }
        break;
      case ScenarioMode::kMeeting:
        break;
    }
    timeline.entries.push_back(TimelineEntry{r->speaker_id, r->utterance_id, offset, r->num_samples});
    previous_offset = offset;
    previous_length = r->num_samples;
  }
  if (config.mode == ScenarioMode::kFullOverlap && config.truncate_to_shortest) timeline.crop_samples = shortest;
  return timeline;
}

}  // namespace mixsim
