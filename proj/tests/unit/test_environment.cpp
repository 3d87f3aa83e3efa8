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

#include <cmath>
#include <map>
#include <set>

#include "mixsim/environment.hpp"
#include "mixsim/error.hpp"
#include "test_support.hpp"

using namespace mixsim;

namespace {

struct Fixture {
  CorpusManifest manifest = testing::make_manifest({});
  SpeakerGroups groups = group_utterances(manifest, GroupKey::kSpeaker);

  Timeline meeting(int k, std::int64_t index) const {
    ScenarioConfig c;
    c.num_speakers_min = c.num_speakers_max = k;
    c.overlap_range = {0, 8};
    c.silence_range = {0, 2};
    MeetingStreams s{RandomStream(derive_stream_seed(0, "env", index, Stage::kUtterance)),
                     RandomStream(derive_stream_seed(0, "env", index, Stage::kTurn)),
                     RandomStream(derive_stream_seed(0, "env", index, Stage::kGap))};
    return sample_meeting(c, groups, manifest, k, s);
  }
};

}  // namespace

TEST_CASE("anechoic with a 0 dB gain range") {
  Fixture f;
  EnvironmentConfig cfg;
  cfg.gain_range_db = {0, 0};
  auto streams = derive_environment_streams(0, "env", 0);
  const auto t = f.meeting(4, 0);
  const auto d = assign_environment(t, cfg, nullptr, f.manifest, streams);
  REQUIRE(d.entries.size() == t.entries.size());
  for (const auto& e : d.entries) {
    CHECK(e.gain == 1.0);
    CHECK(!e.rir);
    CHECK(e.extra == f.manifest.at(e.utterance_id).extra);
  }
  CHECK(!d.room);
  CHECK(d.total_samples == t.length());
  CHECK(d.timeline() == t);
}

TEST_CASE("eight speakers take a permutation of eight positions") {
  Fixture f;
  EnvironmentConfig cfg;
  cfg.reverb = ReverbKind::kSimulated;
  cfg.inventory = "unused";
  const InventoryShape rooms{4, 8, 6};
  for (std::int64_t i = 0; i < 10; ++i) {
    auto streams = derive_environment_streams(1, "env", i);
    const auto d = assign_environment(f.meeting(8, i), cfg, &rooms, f.manifest, streams);
    REQUIRE(d.room);
    CHECK((*d.room >= 0 && *d.room < 4));
    CHECK(d.num_channels == 6);
    std::map<std::string, int> position;
    for (const auto& e : d.entries) {
      REQUIRE(e.rir);
      CHECK(e.rir->room == *d.room);
      auto [it, inserted] = position.emplace(e.speaker_id, e.rir->position);
      CHECK(it->second == e.rir->position);
    }
    std::set<int> ids;
    for (const auto& [_, p] : position) ids.insert(p);
    CHECK(ids.size() == position.size());
    if (position.size() == 8) CHECK(ids == std::set<int>{0, 1, 2, 3, 4, 5, 6, 7});
  }
}

TEST_CASE("moving speakers stay inside their allotted positions") {
  Fixture f;
  EnvironmentConfig cfg;
  cfg.reverb = ReverbKind::kSimulated;
  cfg.inventory = "unused";
  cfg.resample_position_per_utterance = true;
  const InventoryShape rooms{2, 8, 1};
  auto streams = derive_environment_streams(1, "move", 0);
  const auto d = assign_environment(f.meeting(3, 0), cfg, &rooms, f.manifest, streams);
  std::map<int, std::string> owner;
  std::map<std::string, std::set<int>> used;
  for (const auto& e : d.entries) {
    auto [it, _] = owner.emplace(e.rir->position, e.speaker_id);
    CHECK(it->second == e.speaker_id);
    used[e.speaker_id].insert(e.rir->position);
  }
  std::size_t moves = 0;
  for (const auto& [_, set] : used) moves += set.size() > 1;
  CHECK(moves > 0);
}

TEST_CASE("environment errors") {
  Fixture f;
  EnvironmentConfig cfg;
  cfg.reverb = ReverbKind::kSimulated;
  cfg.inventory = "unused";
  auto streams = derive_environment_streams(0, "env", 0);
  const auto t = f.meeting(8, 1);
  const InventoryShape small{1, 4, 1};
  cfg.positions_per_room = 4;
  CHECK_THROWS_WITH_AS(assign_environment(t, cfg, &small, f.manifest, streams), doctest::Contains("exceed"), Error);
  CHECK_THROWS_AS(assign_environment(t, cfg, nullptr, f.manifest, streams), Error);
  const InventoryShape empty{0, 8, 1};
  cfg.positions_per_room = 8;
  CHECK_THROWS_AS(assign_environment(t, cfg, &empty, f.manifest, streams), Error);
}

TEST_CASE("gains and SNRs stay in range over 1000 descriptors") {
  Fixture f;
  EnvironmentConfig cfg;
  cfg.gain_range_db = {-5, 5};
  cfg.snr_range_db = {20, 30};
  const auto t = f.meeting(3, 2);
  const double lo = std::pow(10.0, -0.25), hi = std::pow(10.0, 0.25);
  std::set<std::uint64_t> seeds;
  for (std::int64_t i = 0; i < 1000; ++i) {
    auto streams = derive_environment_streams(3, "range", i);
    const auto d = assign_environment(t, cfg, nullptr, f.manifest, streams);
    for (const auto& e : d.entries) CHECK((e.gain >= lo && e.gain <= hi));
    REQUIRE(d.noise);
    CHECK((d.noise->snr_db >= 20.0 && d.noise->snr_db <= 30.0));
    seeds.insert(d.noise->seed);
  }
  CHECK(seeds.size() == 1000);
}

TEST_CASE("noise parameters") {
  EnvironmentConfig cfg;
  cfg.snr_range_db = {25, 25};
  RandomStream s(StreamSeed{1});
  CHECK(sample_noise_params(cfg, s).snr_db == 25.0);
  auto a = derive_environment_streams(0, "n", 0), b = derive_environment_streams(0, "n", 1);
  CHECK(sample_noise_params(cfg, a.noise).seed != sample_noise_params(cfg, b.noise).seed);
}

TEST_CASE("sampling-rate offsets") {
  RandomStream s(StreamSeed{2});
  CHECK(sample_sro({0, 0}, 3, s) == std::vector<double>{0, 0, 0});
  const auto ppm = sample_sro({-100, 100}, 4, s);
  REQUIRE(ppm.size() == 4);
  CHECK(ppm[0] == 0.0);
  for (int c = 1; c < 4; ++c) CHECK(std::abs(ppm[static_cast<std::size_t>(c)]) <= 100.0);
  RandomStream x(StreamSeed{5}), y(StreamSeed{5});
  CHECK(sample_sro({-100, 100}, 4, x) == sample_sro({-100, 100}, 4, y));
}

TEST_CASE("environment streams do not touch the timeline") {
  Fixture f;
  const auto t = f.meeting(5, 3);
  EnvironmentConfig cfg;
  auto s1 = derive_environment_streams(1, "env", 3), s2 = derive_environment_streams(2, "other", 9);
  const auto a = assign_environment(t, cfg, nullptr, f.manifest, s1);
  const auto b = assign_environment(t, cfg, nullptr, f.manifest, s2);
  CHECK(a.timeline() == b.timeline());
  CHECK(a.entries[0].gain != b.entries[0].gain);
}

TEST_CASE("descriptor JSON round trip") {
  Fixture f;
  EnvironmentConfig cfg;
  cfg.reverb = ReverbKind::kSimulated;
  cfg.inventory = "unused";
  cfg.sro_ppm_range = Range{-50, 50};
  const InventoryShape rooms{3, 8, 2};
  auto streams = derive_environment_streams(4, "rt", 0);
  auto d = assign_environment(f.meeting(4, 5), cfg, &rooms, f.manifest, streams);
  d.dataset_label = "rt";
  d.root_seed = 0xfedcba9876543210ull;
  d.example_index = 5;
  const auto back = descriptor_from_json(nlohmann::json::parse(to_json(d).dump()));
  CHECK(back == d);

  const auto dir = testing::fresh_dir("env_roundtrip");
  write_descriptors(dir / "d.json", {d, d});
  const auto many = read_descriptors(dir / "d.json");
  REQUIRE(many.size() == 2);
  CHECK(many[1] == d);

  auto broken = to_json(d);
  broken["total_samples"] = 1;
  CHECK_THROWS_AS(descriptor_from_json(broken), Error);
  broken = to_json(d);
  broken["entries"][0].erase("gain");
  CHECK_THROWS_WITH_AS(descriptor_from_json(broken), doctest::Contains("entries[0].gain"), Error);
}

TEST_CASE("environment config parsing") {
  const nlohmann::json doc = {{"reverb", "simulated"}, {"inventory", "rirs"}, {"sro_ppm_range", {-10, 10}}};
  const auto c = environment_from_json(doc, "/base");
  CHECK(c.inventory == std::filesystem::path("/base/rirs"));
  CHECK(c.sro_ppm_range == Range{-10, 10});
  CHECK_THROWS_AS(environment_from_json({{"reverb", "simulated"}}), Error);
  CHECK_THROWS_WITH_AS(environment_from_json({{"snr_range_db", {30, 20}}}), doctest::Contains("snr_range_db"), Error);
  CHECK_THROWS_AS(environment_from_json({{"noise_kind", "pink"}}), Error);
  CHECK_THROWS_AS(environment_from_json({{"sro_ppm_range", {-2000, 0}}}), Error);
}
