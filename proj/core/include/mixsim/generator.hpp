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
#include <vector>

#include "mixsim/config.hpp"
#include "mixsim/corpus.hpp"
#include "mixsim/environment.hpp"
#include "mixsim/patterns.hpp"
#include "mixsim/renderer.hpp"
#include "mixsim/rir.hpp"

namespace mixsim {

// The sampling pipeline addressed by example index, usable without any
// files beyond the manifest (on-the-fly generation). Immutable and safe to
// share between threads.
class Generator {
 public:
  // rooms is required when the environment enables reverberation.
  Generator(GeneratorConfig config, CorpusManifest manifest, std::optional<InventoryShape> rooms = std::nullopt);

  const GeneratorConfig& config() const { return config_; }
  const CorpusManifest& manifest() const { return manifest_; }
  std::int64_t size() const { return config_.total_examples(); }

  // Fixed by counts when given, otherwise drawn from the utterance stream
  // (which is why this takes the stream).
  int num_speakers_for(std::int64_t index, RandomStream& utterance_stream) const;

  Timeline sample_timeline(std::int64_t index) const;
  MixtureDescriptor sample(std::int64_t index) const;
  std::vector<MixtureDescriptor> sample_all(unsigned workers = 1) const;

  RenderedMixture render(std::int64_t index, const RoomInventory* inventory = nullptr) const;

 private:
  GeneratorConfig config_;
  CorpusManifest manifest_;
  SpeakerGroups groups_;
  std::optional<InventoryShape> rooms_;
};

}  // namespace mixsim
