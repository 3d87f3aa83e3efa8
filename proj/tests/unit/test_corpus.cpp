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

#include <fstream>
#include <set>

#include "mixsim/audio.hpp"
#include "mixsim/corpus.hpp"
#include "mixsim/error.hpp"
#include "mixsim/random.hpp"
#include "test_support.hpp"

using namespace mixsim;
using nlohmann::json;

namespace {

json record(const std::string& id, const std::string& speaker, std::int64_t n = 16000) {
  return {{"utterance_id", id}, {"speaker_id", speaker}, {"audio_path", id + ".wav"}, {"num_samples", n}};
}

json two_by_three() {
  json items = json::array();
  for (const char* s : {"A", "B"}) {
    for (int u = 0; u < 3; ++u) items.push_back(record(std::string(s) + std::to_string(u), s));
  }
  return {{"name", "toy"}, {"sample_rate", 8000}, {"utterances", items}};
}

std::string error_of(const json& doc) {
  try {
    parse_manifest(doc, {});
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("load a 2 x 3 manifest") {
  const auto m = parse_manifest(two_by_three(), "/data");
  CHECK(m.utterances().size() == 6);
  CHECK(m.speakers() == std::vector<std::string>{"A", "B"});
  CHECK(m.utterances()[4].utterance_id == "B1");
  CHECK(m.resolve(m.at("A2")) == std::filesystem::path("/data/A2.wav"));
  CHECK(m.find("C0") == nullptr);
  CHECK_THROWS_AS(m.at("C0"), Error);
}

TEST_CASE("manifest errors name the offending record") {
  json doc = two_by_three();
  doc["utterances"].push_back(record("A1", "A"));
  CHECK(error_of(doc).find("A1") != std::string::npos);
  CHECK(error_of(doc).find("duplicate") != std::string::npos);

  doc = two_by_three();
  doc["utterances"][2]["vad_bounds"] = {100, 50};
  CHECK(error_of(doc) == "A2: vad start >= end");

  doc = two_by_three();
  doc["utterances"][1]["vad_bounds"] = {10, 20000};
  CHECK(error_of(doc).find("A1") == 0);

  doc = two_by_three();
  doc["utterances"][5]["sample_rate"] = 16000;
  CHECK(error_of(doc).find("B2") == 0);

  doc = two_by_three();
  doc["utterances"][0]["num_samples"] = 0;
  CHECK(error_of(doc).find("A0") == 0);

  doc = two_by_three();
  doc["utterances"][3].erase("speaker_id");
  CHECK(error_of(doc).find("B0") == 0);
}

TEST_CASE("load_manifest reports parse failures with the path") {
  const auto dir = testing::fresh_dir("corpus_parse");
  std::ofstream(dir / "bad.json") << "{\"name\": ";
  try {
    load_manifest(dir / "bad.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
  }
  CHECK_THROWS_AS(load_manifest(dir / "missing.json"), Error);
}

TEST_CASE("group by speaker and by speaker and scenario") {
  const auto m = parse_manifest(two_by_three(), {});
  const auto g = group_utterances(m, GroupKey::kSpeaker);
  REQUIRE(g.groups.size() == 2);
  CHECK(g.groups[0].utterance_ids == std::vector<std::string>{"A0", "A1", "A2"});
  CHECK(g.groups[1].utterance_ids.size() == 3);

  json doc = {{"sample_rate", 8000},
              {"utterances", {record("a1", "A"), record("a2", "A"), record("b1", "B")}}};
  doc["utterances"][0]["scenario_id"] = "s1";
  doc["utterances"][1]["scenario_id"] = "s2";
  doc["utterances"][2]["scenario_id"] = "s1";
  const auto s = group_utterances(parse_manifest(doc, {}), GroupKey::kSpeakerAndScenario);
  REQUIRE(s.groups.size() == 3);
  CHECK(s.groups[0].key == "A/s1");
  CHECK(s.groups[1].key == "A/s2");
  CHECK(s.groups[2].key == "B/s1");
  CHECK(s.groups[1].speaker_id == "A");

  json single = {{"sample_rate", 8000}, {"utterances", {record("x", "Z"), record("y", "Z")}}};
  CHECK(group_utterances(parse_manifest(single, {}), GroupKey::kSpeaker).groups.size() == 1);
}

TEST_CASE("grouping is a partition that keeps manifest order") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    testing::SyntheticCorpusSpec spec;
    spec.num_speakers = 7;
    spec.utterances_per_speaker = 5;
    spec.seed = seed;
    auto m = testing::make_manifest(spec);
    // interleave scenario ids to exercise the composite key
    std::vector<UtteranceRecord> records = m.utterances();
    RandomStream r(StreamSeed{seed});
    for (auto& rec : records) rec.scenario_id = "s" + std::to_string(r.uniform_int(0, 2));
    const CorpusManifest shuffled("x", 8000, records);
    for (auto mode : {GroupKey::kSpeaker, GroupKey::kSpeakerAndScenario}) {
      const auto g = group_utterances(shuffled, mode);
      std::multiset<std::string> seen;
      for (const auto& group : g.groups) {
        CHECK(!group.utterance_ids.empty());
        std::size_t last = 0;
        for (const auto& id : group.utterance_ids) {
          seen.insert(id);
          const auto pos = static_cast<std::size_t>(shuffled.find(id) - shuffled.utterances().data());
          CHECK(pos >= last);
          last = pos;
          CHECK(shuffled.at(id).speaker_id == group.speaker_id);
        }
      }
      CHECK(seen.size() == records.size());
      CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == records.size());
    }
  }
}

TEST_CASE("write_manifest then load_manifest is the identity") {
  const auto dir = testing::fresh_dir("corpus_roundtrip");
  testing::SyntheticCorpusSpec spec;
  spec.num_speakers = 4;
  spec.utterances_per_speaker = 3;
  const auto m = testing::make_manifest(spec, dir);
  write_manifest(dir / "m.json", m);
  const auto back = load_manifest(dir / "m.json");
  CHECK(back.name() == m.name());
  CHECK(back.sample_rate() == m.sample_rate());
  CHECK(back.utterances() == m.utterances());
  CHECK(back.at("spk001_u002").extra == m.at("spk001_u002").extra);
}

TEST_CASE("validate_audio finds missing and mismatched files") {
  const auto dir = testing::fresh_dir("corpus_validate");
  testing::SyntheticCorpusSpec spec;
  spec.num_speakers = 2;
  spec.utterances_per_speaker = 2;
  spec.min_duration = spec.max_duration = 1.0;
  spec.min_border = 0.1;
  spec.max_border = 0.2;
  auto m = testing::write_corpus(spec, dir);
  CHECK(validate_audio(m).empty());
  std::filesystem::remove(dir / "spk001" / "spk001_u000.wav");
  write_audio(dir / "spk000" / "spk000_u001.wav", Waveform(8000, 1, 100));
  const auto problems = validate_audio(m);
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].find("spk000_u001") != std::string::npos);
  CHECK(problems[1].find("spk001_u000.wav") != std::string::npos);
}
