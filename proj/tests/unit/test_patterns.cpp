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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "mixsim/error.hpp"
#include "mixsim/patterns.hpp"
#include "test_support.hpp"

using namespace mixsim;

namespace {

UtteranceRecord rec(const std::string& id, const std::string& speaker, std::int64_t n) {
  UtteranceRecord r;
  r.utterance_id = id;
  r.speaker_id = speaker;
  r.audio_path = id + ".wav";
  r.num_samples = n;
  r.sample_rate = 8000;
  return r;
}

ScenarioConfig meeting_config(Range ov, Range sil, double p_sil, int k = 4, double length = 120.0) {
  ScenarioConfig c;
  c.mode = ScenarioMode::kMeeting;
  c.num_speakers_min = c.num_speakers_max = k;
  c.target_length = length;
  c.overlap_range = ov;
  c.silence_range = sil;
  c.silence_probability = p_sil;
  c.max_concurrent = 2;
  return c;
}

MeetingStreams streams_for(std::uint64_t seed, std::int64_t index) {
  return {RandomStream(derive_stream_seed(seed, "patterns", index, Stage::kUtterance)),
          RandomStream(derive_stream_seed(seed, "patterns", index, Stage::kTurn)),
          RandomStream(derive_stream_seed(seed, "patterns", index, Stage::kGap))};
}

// Largest ov in [lower, upper] such that every overlap in [lower, ov] keeps
// the cap and avoids self-overlap, found by scanning each candidate.
std::optional<std::int64_t> brute_force_limit(const Timeline& t, const std::string& speaker, std::int64_t duration,
                                              int cap, std::int64_t lower, std::int64_t upper) {
  std::optional<std::int64_t> best;
  const std::int64_t reference = t.length();
  for (std::int64_t ov = lower; ov <= upper; ++ov) {
    Timeline trial = t;
    trial.entries.push_back({speaker, "new", reference - ov, duration});
    if (reference - ov < 0 || max_concurrency(trial) > cap || has_self_overlap(trial)) break;
    best = ov;
  }
  return best;
}

}  // namespace

TEST_CASE("classical scenarios") {
  const auto a = rec("a", "A", 80000), b = rec("b", "B", 64000), c = rec("c", "C", 80000);
  RandomStream s(StreamSeed{1});
  ScenarioConfig cfg;
  cfg.mode = ScenarioMode::kFullOverlap;
  cfg.num_speakers_min = cfg.num_speakers_max = 2;
  {
    const std::vector<const UtteranceRecord*> sel{&a, &b};
    const auto t = sample_classical(cfg, sel, s);
    CHECK(t.entries[0].offset == 0);
    CHECK(t.entries[1].offset == 0);
    CHECK(t.length() == 80000);
    CHECK(!t.crop_samples);
    cfg.truncate_to_shortest = true;
    CHECK(sample_classical(cfg, sel, s).crop_samples == 64000);
  }
  {
    cfg.mode = ScenarioMode::kPaddedShift;
    const std::vector<const UtteranceRecord*> sel{&a, &c};
    for (int i = 0; i < 10; ++i) {
      const auto t = sample_classical(cfg, sel, s);
      CHECK(t.entries[0].offset == 0);
      CHECK(t.entries[1].offset == 0);
    }
    const std::vector<const UtteranceRecord*> mixed{&a, &b};
    for (int i = 0; i < 100; ++i) {
      const auto t = sample_classical(cfg, mixed, s);
      CHECK(t.entries[1].offset >= 0);
      CHECK(t.entries[1].end() <= 80000);
      CHECK(t.length() == 80000);
    }
  }
  {
    cfg.mode = ScenarioMode::kPartialOverlap;
    cfg.partial_overlap_ratio = {0.25, 0.25};
    const std::vector<const UtteranceRecord*> sel{&a, &c};
    const auto t = sample_classical(cfg, sel, s);
    CHECK(t.entries[1].offset == 60000);
    CHECK(t.entries[0].end() - t.entries[1].offset == 20000);
  }
  cfg.mode = ScenarioMode::kMeeting;
  const std::vector<const UtteranceRecord*> sel{&a};
  CHECK_THROWS_AS(sample_classical(cfg, sel, s), Error);
  cfg.mode = ScenarioMode::kFullOverlap;
  CHECK_THROWS_AS(sample_classical(cfg, {}, s), Error);
}

TEST_CASE("turn probabilities") {
  auto probs = [](std::vector<double> shares, std::vector<double> targets = {}) {
    return turn_probabilities(shares, targets);
  };
  auto near = [](const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  };
  near(probs({1.0 / 3, 1.0 / 3, 1.0 / 3}), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  near(probs({0.5, 0.25, 0.25}), {0.2, 0.4, 0.4});
  near(probs({0.4, 0.0, 0.6}), {0.0, 1.0, 0.0});
  near(probs({0.0, 0.0, 0.0, 0.0}), {0.25, 0.25, 0.25, 0.25});
  near(probs({0.5, 0.5}, {0.8, 0.2}), {1.0, 0.0});
  // all deficits zero: inverse activity
  near(probs({0.8, 0.2}, {0.8, 0.2}), {0.2, 0.8});
  CHECK_THROWS_AS(probs({-0.1, 1.1}), Error);
  CHECK_THROWS_AS(probs({0.5, 0.5}, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(probs({0.5, 0.5}, {1.0}), Error);
}

TEST_CASE("target mode: above target gets 0, below target gets mass") {
  RandomStream s(StreamSeed{8});
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> shares(4), targets(4);
    double ss = 0, ts = 0;
    for (int k = 0; k < 4; ++k) {
      shares[k] = s.uniform01();
      targets[k] = s.uniform01() + 0.01;
      ss += shares[k];
      ts += targets[k];
    }
    for (int k = 0; k < 4; ++k) {
      shares[k] /= ss;
      targets[k] /= ts;
    }
    const auto p = turn_probabilities(shares, targets);
    for (int k = 0; k < 4; ++k) {
      if (shares[k] > targets[k]) CHECK(p[k] == 0.0);
      if (shares[k] < targets[k]) CHECK(p[k] > 0.0);
    }
  }
}

TEST_CASE("next_utterance draws without replacement") {
  RandomStream s(StreamSeed{5});
  const std::vector<std::string> group{"x", "y", "z"};
  SpeakerState st{"A", 0, {}, 0};
  std::multiset<std::string> first, six;
  for (int i = 0; i < 3; ++i) first.insert(next_utterance(st, group, s));
  CHECK(first == std::multiset<std::string>{"x", "y", "z"});
  for (int i = 0; i < 6; ++i) six.insert(next_utterance(st, group, s));
  for (const auto& id : group) CHECK(six.count(id) == 2);

  const std::vector<std::string> one{"only"};
  SpeakerState lone{"B", 0, {}, 0};
  for (int i = 0; i < 4; ++i) CHECK(next_utterance(lone, one, s) == "only");
  CHECK_THROWS_AS(next_utterance(lone, {}, s), Error);
}

TEST_CASE("gap sampling: forced branches") {
  Timeline t;
  t.sample_rate = 8000;
  t.speakers = {"A", "B"};
  t.entries = {{"A", "a0", 0, 40000}};
  RandomStream s(StreamSeed{3});

  GapParams p;
  p.silence_probability = 0.0;
  const auto first = sample_gap(p, Timeline{}, "A", 100, s);
  CHECK(first.offset == 0);

  for (int i = 0; i < 200; ++i) {
    const auto d = sample_gap(p, t, "B", 30000, s);
    CHECK(d.offset == 40000);
    CHECK(!d.silence);
  }
  p.silence_probability = 1.0;
  p.silence_max = 16000;
  p.overlap_max = 64000;
  for (int i = 0; i < 200; ++i) {
    const auto d = sample_gap(p, t, "B", 30000, s);
    CHECK(d.silence);
    CHECK((d.gap >= 0 && d.gap <= 16000));
  }
}

TEST_CASE("effective maximum overlap under the concurrency cap") {
  // A on [0, 10 s), B on [5 s, 13 s); a 4 s utterance of C may start no
  // earlier than 10 s, so at most 3 s of overlap with ov_max = 8 s.
  constexpr int fs = 1000;
  Timeline t;
  t.sample_rate = fs;
  t.speakers = {"A", "B", "C"};
  t.entries = {{"A", "q", 0, 10 * fs}, {"B", "p", 5 * fs, 8 * fs}};
  const auto limit = max_feasible_overlap(t, "C", 4 * fs, 2, 0, 8 * fs);
  REQUIRE(limit);
  CHECK(*limit == 3 * fs);
  CHECK(brute_force_limit(t, "C", 4 * fs, 2, 0, 8 * fs) == limit);
  // speaker B may not overlap its own utterance at all
  CHECK(max_feasible_overlap(t, "B", 4 * fs, 2, 0, 8 * fs) == 0);
  CHECK(!max_feasible_overlap(t, "B", 4 * fs, 2, 1, 8 * fs));
}

TEST_CASE("effective maximum overlap agrees with a brute-force scan") {
  testing::SyntheticCorpusSpec spec;
  spec.num_speakers = 6;
  spec.sample_rate = 100;
  spec.min_duration = 1.0;
  spec.max_duration = 6.0;
  const auto m = testing::make_manifest(spec);
  const auto groups = group_utterances(m, GroupKey::kSpeaker);
  RandomStream pick(StreamSeed{17});
  int compared = 0;
  for (std::int64_t i = 0; i < 60; ++i) {
    auto cfg = meeting_config({0, 5}, {0, 1}, 0.2, 4, 30.0);
    cfg.max_concurrent = static_cast<int>(1 + i % 3);
    auto st = streams_for(2, i);
    const auto t = sample_meeting(cfg, groups, m, 4, st);
    const auto& speaker = t.speakers[static_cast<std::size_t>(pick.uniform_int(0, 3))];
    const auto duration = pick.uniform_int(50, 600);
    const std::int64_t upper = std::min<std::int64_t>(500, t.length() - t.entries.back().offset);
    for (std::int64_t lower : {0, 20}) {
      CHECK(max_feasible_overlap(t, speaker, duration, cfg.max_concurrent, lower, upper) ==
            brute_force_limit(t, speaker, duration, cfg.max_concurrent, lower, upper));
      ++compared;
    }
  }
  CHECK(compared == 120);
}

TEST_CASE("meeting invariants hold over many seeds") {
  testing::SyntheticCorpusSpec spec;
  spec.sample_rate = 1000;
  const auto m = testing::make_manifest(spec);
  const auto groups = group_utterances(m, GroupKey::kSpeaker);
  for (const auto& [ov, sil, p] : {std::tuple{Range{0, 8}, Range{0, 2}, 0.1}, std::tuple{Range{2, 8}, Range{0, 1}, 0.01},
                                   std::tuple{Range{0, 0}, Range{0, 2}, 0.1}}) {
    for (std::int64_t i = 0; i < 40; ++i) {
      auto cfg = meeting_config(ov, sil, p, static_cast<int>(3 + i % 6));
      cfg.max_concurrent = static_cast<int>(2 + i % 2);
      auto st = streams_for(3, i);
      const auto t = sample_meeting(cfg, groups, m, cfg.num_speakers_min, st);
      CHECK(max_concurrency(t) <= cfg.max_concurrent);
      CHECK(!has_self_overlap(t));
      CHECK(t.length() >= 120 * 1000);
      CHECK(t.entries.front().offset == 0);
      // placement order has non-decreasing offsets; gaps stay in range
      std::int64_t reference = 0;
      std::map<std::string, std::set<std::string>> used;
      for (std::size_t e = 0; e < t.entries.size(); ++e) {
        const auto& entry = t.entries[e];
        if (e > 0) {
          CHECK(entry.offset >= t.entries[e - 1].offset);
          const std::int64_t gap = entry.offset - reference;
          const bool in_overlap = -gap >= seconds_to_samples(ov.first, 1000) && -gap <= seconds_to_samples(ov.second, 1000);
          const bool in_silence = gap >= seconds_to_samples(sil.first, 1000) && gap <= seconds_to_samples(sil.second, 1000);
          CHECK((in_overlap || in_silence));
        }
        reference = std::max(reference, entry.end());
        used[entry.speaker_id].insert(entry.utterance_id);
      }
      // without replacement: a group of 12 is not reused before exhaustion
      std::map<std::string, int> counts;
      for (const auto& entry : t.entries) ++counts[entry.speaker_id];
      for (const auto& [speaker, n] : counts) {
        CHECK(used[speaker].size() == static_cast<std::size_t>(std::min(n, spec.utterances_per_speaker)));
      }
    }
  }
}

TEST_CASE("no-overlap parameters give zero overlap") {
  testing::SyntheticCorpusSpec spec;
  const auto m = testing::make_manifest(spec);
  const auto groups = group_utterances(m, GroupKey::kSpeaker);
  for (std::int64_t i = 0; i < 20; ++i) {
    auto st = streams_for(4, i);
    const auto t = sample_meeting(meeting_config({0, 0}, {0, 2}, 0.1, 6), groups, m, 6, st);
    CHECK(max_concurrency(t) == 1);
  }
}

TEST_CASE("a target shorter than the first utterance yields one entry") {
  testing::SyntheticCorpusSpec spec;
  const auto m = testing::make_manifest(spec);
  auto st = streams_for(1, 0);
  const auto t = sample_meeting(meeting_config({0, 8}, {0, 2}, 0.1, 3, 1.0), group_utterances(m, GroupKey::kSpeaker),
                                m, 3, st);
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].offset == 0);
}

TEST_CASE("too many speakers requested") {
  testing::SyntheticCorpusSpec spec;
  spec.num_speakers = 3;
  const auto m = testing::make_manifest(spec);
  auto st = streams_for(1, 0);
  CHECK_THROWS_AS(sample_meeting(meeting_config({0, 8}, {0, 2}, 0.1, 4), group_utterances(m, GroupKey::kSpeaker), m,
                                 4, st),
                  Error);
}

TEST_CASE("overlap parameters do not change the speaker and utterance sequence") {
  testing::SyntheticCorpusSpec spec;
  const auto m = testing::make_manifest(spec);
  const auto groups = group_utterances(m, GroupKey::kSpeaker);
  for (std::int64_t i = 0; i < 20; ++i) {
    auto s1 = streams_for(6, i), s2 = streams_for(6, i), s3 = streams_for(6, i);
    const auto a = sample_meeting(meeting_config({0, 8}, {0, 2}, 0.1, 5), groups, m, 5, s1);
    const auto b = sample_meeting(meeting_config({2, 8}, {0, 1}, 0.01, 5), groups, m, 5, s2);
    const auto c = sample_meeting(meeting_config({0, 0}, {0, 2}, 0.5, 5), groups, m, 5, s3);
    for (const auto* other : {&b, &c}) {
      const std::size_t n = std::min(a.entries.size(), other->entries.size());
      CHECK(a.speakers == other->speakers);
      for (std::size_t e = 0; e < n; ++e) {
        CHECK(a.entries[e].speaker_id == other->entries[e].speaker_id);
        CHECK(a.entries[e].utterance_id == other->entries[e].utterance_id);
      }
    }
  }
}

TEST_CASE("activity equalizes without targets") {
  testing::SyntheticCorpusSpec spec;
  const auto m = testing::make_manifest(spec);
  const auto groups = group_utterances(m, GroupKey::kSpeaker);
  for (const int k : {3, 5}) {
    for (std::int64_t i = 0; i < 20; ++i) {
      auto st = streams_for(9, i);
      const auto t = sample_meeting(meeting_config({0, 8}, {0, 2}, 0.1, k, 50.0 * k * 12.0), groups, m, k, st);
      REQUIRE(t.entries.size() >= static_cast<std::size_t>(50 * k));
      std::map<std::string, double> activity;
      double total = 0;
      for (std::size_t e = 0; e < static_cast<std::size_t>(50 * k); ++e) {
        activity[t.entries[e].speaker_id] += static_cast<double>(t.entries[e].duration);
        total += static_cast<double>(t.entries[e].duration);
      }
      for (const auto& [_, a] : activity) CHECK(std::abs(a / total - 1.0 / k) <= 0.1);
    }
  }
}

TEST_CASE("scenario config parsing and validation") {
  const nlohmann::json doc = {{"mode", "meeting"},         {"num_speakers", {5, 8}},      {"target_length", 120},
                              {"overlap_range", {0, 8}},   {"silence_range", {0, 2}},      {"silence_probability", 0.1}};
  const auto c = scenario_from_json(doc);
  CHECK(c.num_speakers_min == 5);
  CHECK(c.num_speakers_max == 8);
  CHECK(scenario_from_json(to_json(c)).overlap_range == c.overlap_range);
  auto bad = doc;
  bad["overlap_range"] = {8, 0};
  CHECK_THROWS_WITH_AS(scenario_from_json(bad), doctest::Contains("scenario.overlap_range"), Error);
  bad = doc;
  bad["minimal_overlap"] = 9.0;
  CHECK_THROWS_AS(scenario_from_json(bad), Error);
  bad = doc;
  bad["mode"] = "chaos";
  CHECK_THROWS_AS(scenario_from_json(bad), Error);
  bad = doc;
  bad["group_by"] = "room";
  CHECK_THROWS_WITH_AS(scenario_from_json(bad), doctest::Contains("scenario.group_by"), Error);
  CHECK(seconds_to_samples(2.5, 8000) == 20000);
}
