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

#include "mixsim/generator.hpp"

#include "mixsim/error.hpp"
#include "mixsim/parallel.hpp"

namespace mixsim {

Generator::Generator(GeneratorConfig config, CorpusManifest manifest, std::optional<InventoryShape> rooms)
    : config_(std::move(config)), manifest_(std::move(manifest)), rooms_(rooms) {
  config_.validate();
  groups_ = group_utterances(manifest_, config_.scenario.group_key);
  if (config_.environment.reverb == ReverbKind::kSimulated && !rooms_) {
    throw Error("environment.inventory", "reverb is simulated but no RIR inventory was provided");
  }
}

int Generator::num_speakers_for(std::int64_t index, RandomStream& utterance_stream) const {
  if (index < 0 || index >= size()) throw Error("example index " + std::to_string(index) + " out of range");
  if (config_.counts.empty()) return resolve_num_speakers(config_.scenario, utterance_stream);
  std::int64_t start = 0;
  for (const auto& [k, n] : config_.counts) {
    if (index < start + n) return k;
    start += n;
  }
  throw Error("example index out of range");
}

Timeline Generator::sample_timeline(std::int64_t index) const {
  const auto seed = [&](Stage stage) {
    return RandomStream(derive_stream_seed(config_.root_seed, config_.dataset_label, index, stage));
  };
  RandomStream utterance = seed(Stage::kUtterance);
  const int k = num_speakers_for(index, utterance);
  if (config_.scenario.mode == ScenarioMode::kMeeting) {
    MeetingStreams streams{std::move(utterance), seed(Stage::kTurn), seed(Stage::kGap)};
    return sample_meeting(config_.scenario, groups_, manifest_, k, streams);
  }
  const auto sources = select_sources(groups_, manifest_, k, utterance);
  RandomStream offsets = seed(Stage::kOffset);
  return sample_classical(config_.scenario, sources, offsets);
}

MixtureDescriptor Generator::sample(std::int64_t index) const {
  const Timeline timeline = sample_timeline(index);
  EnvironmentStreams streams = derive_environment_streams(config_.root_seed, config_.dataset_label, index);
  MixtureDescriptor d =
      assign_environment(timeline, config_.environment, rooms_ ? &*rooms_ : nullptr, manifest_, streams);
  d.dataset_label = config_.dataset_label;
  d.example_index = index;
  d.root_seed = config_.root_seed;
  d.mode = config_.scenario.mode;
  return d;
}

std::vector<MixtureDescriptor> Generator::sample_all(unsigned workers) const {
  std::vector<MixtureDescriptor> out(static_cast<std::size_t>(size()));
  parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = sample(static_cast<std::int64_t>(i)); });
  return out;
}

RenderedMixture Generator::render(std::int64_t index, const RoomInventory* inventory) const {
  return render_mixture(sample(index), manifest_, inventory);
}

}  // namespace mixsim
