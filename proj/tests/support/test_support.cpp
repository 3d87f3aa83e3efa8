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

#include "test_support.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "mixsim/audio.hpp"
#include "mixsim/random.hpp"

namespace mixsim::testing {

namespace {

std::string id(const char* prefix, int value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, value);
  return buf;
}

}  // namespace

CorpusManifest make_manifest(const SyntheticCorpusSpec& spec, const std::filesystem::path& base_dir) {
  RandomStream stream(derive_stream_seed(spec.seed, "synthetic_corpus", 0, Stage::kUtterance));
  std::vector<UtteranceRecord> records;
  for (int s = 0; s < spec.num_speakers; ++s) {
    for (int u = 0; u < spec.utterances_per_speaker; ++u) {
      UtteranceRecord r;
      r.speaker_id = id("spk", s);
      r.utterance_id = r.speaker_id + "_" + id("u", u);
      r.audio_path = r.speaker_id + "/" + r.utterance_id + ".wav";
      r.sample_rate = spec.sample_rate;
      r.num_samples = std::llround(stream.uniform_real(spec.min_duration, spec.max_duration) * spec.sample_rate);
      const auto lead = std::llround(stream.uniform_real(spec.min_border, spec.max_border) * spec.sample_rate);
      const auto trail = std::llround(stream.uniform_real(spec.min_border, spec.max_border) * spec.sample_rate);
      r.vad_bounds = VadBounds{lead, r.num_samples - trail};
      r.extra = {{"transcription", "utterance " + std::to_string(u) + " of " + r.speaker_id}};
      records.push_back(std::move(r));
    }
  }
  return CorpusManifest("synthetic", spec.sample_rate, std::move(records), base_dir);
}

CorpusManifest write_corpus(const SyntheticCorpusSpec& spec, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const CorpusManifest manifest = make_manifest(spec, directory);
  std::uint64_t n = 0;
  for (const auto& r : manifest.utterances()) {
    RandomStream stream(derive_child_seed(StreamSeed{spec.seed}, n++));
    Waveform w(r.sample_rate, 1, static_cast<std::size_t>(r.num_samples));
    // amplitude-modulated noise at a syllable-like rate inside the vad bounds
    const double rate = stream.uniform_real(3.0, 6.0);
    for (std::int64_t t = r.vad_bounds->start; t < r.vad_bounds->end; ++t) {
      const double env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * rate * static_cast<double>(t) / r.sample_rate);
      w.channels[0][static_cast<std::size_t>(t)] = 0.1 * env * stream.normal();
    }
    const auto path = manifest.resolve(r);
    std::filesystem::create_directories(path.parent_path());
    write_audio(path, w, SampleEncoding::kFloat32);
  }
  write_manifest(directory / "manifest.json", manifest);
  return load_manifest(directory / "manifest.json");
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mixsim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mixsim::testing
