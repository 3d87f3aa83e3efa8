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


#include <benchmark/benchmark.h>

#include <random>

#include "mixsim/convolution.hpp"
#include "mixsim/corpus.hpp"
#include "mixsim/patterns.hpp"
#include "mixsim/rir.hpp"

namespace {

using namespace mixsim;

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

void BM_Convolve(benchmark::State& state) {
  const auto x = noise(64000);
  const auto h = noise(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(convolve(x, h, x.size() + h.size() - 1));
  state.SetItemsProcessed(state.iterations() * 64000);
}
BENCHMARK(BM_Convolve)->Arg(32)->Arg(512)->Arg(8000);

void BM_GenerateRir(benchmark::State& state) {
  RoomSetup s;
  s.dimensions = {8.0, 6.0, 3.0};
  s.source_positions = {{2.5, 2.0, 1.6}};
  s.mic_positions = {{4.0, 3.0, 1.4}};
  s.reflection.fill(reflection_from_t60(s.dimensions, 0.35));
  s.sample_rate = 8000;
  s.rir_length = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(generate_rir(s, 0, 0));
}
BENCHMARK(BM_GenerateRir)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

CorpusManifest synthetic_manifest() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> len(32000, 96000);
  std::vector<UtteranceRecord> records;
  for (int s = 0; s < 24; ++s) {
    for (int u = 0; u < 12; ++u) {
      UtteranceRecord r;
      r.speaker_id = "s" + std::to_string(s);
      r.utterance_id = r.speaker_id + "_" + std::to_string(u);
      r.audio_path = r.utterance_id + ".wav";
      r.num_samples = len(rng);
      records.push_back(std::move(r));
    }
  }
  return CorpusManifest("bench", 8000, std::move(records));
}

void BM_SampleMeeting(benchmark::State& state) {
  const auto manifest = synthetic_manifest();
  const auto groups = group_utterances(manifest, GroupKey::kSpeaker);
  ScenarioConfig c;
  c.num_speakers_min = c.num_speakers_max = 8;
  c.overlap_range = {0, 8};
  c.silence_range = {0, 2};
  std::int64_t index = 0;
  for (auto _ : state) {
    MeetingStreams s{RandomStream(derive_stream_seed(0, "bench", index, Stage::kUtterance)),
                     RandomStream(derive_stream_seed(0, "bench", index, Stage::kTurn)),
                     RandomStream(derive_stream_seed(0, "bench", index, Stage::kGap))};
    benchmark::DoNotOptimize(sample_meeting(c, groups, manifest, 8, s));
    ++index;
  }
}
BENCHMARK(BM_SampleMeeting);

}  // namespace

BENCHMARK_MAIN();
