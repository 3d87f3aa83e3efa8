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
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixsim/corpus.hpp"
#include "mixsim/environment.hpp"
#include "mixsim/patterns.hpp"

namespace mixsim {

enum class BoundaryMode { kRecording, kVad };

std::string_view to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(std::string_view name);

using Interval = std::pair<std::int64_t, std::int64_t>;  // [start, end) in samples

struct ActivitySegments {
  std::vector<std::string> speakers;
  std::vector<std::vector<Interval>> intervals;  // per speaker: sorted, disjoint, merged
  std::int64_t total_length = 0;
  BoundaryMode mode = BoundaryMode::kRecording;
  int sample_rate = 0;
  std::size_t num_utterances = 0;
};

struct ActivityOptions {
  BoundaryMode mode = BoundaryMode::kRecording;
  // Without vad_bounds, measure bounds from the audio with energy_vad.
  bool energy_vad_fallback = false;
  double vad_threshold_db = 40.0;
  double vad_window_ms = 25.0;
  // Normalization length; defaults to the recording-mode end of the last
  // utterance.
  std::optional<std::int64_t> total_length;
};

ActivitySegments activity_from_timeline(const Timeline& timeline, const CorpusManifest& manifest,
                                        const ActivityOptions& options = {});
ActivitySegments activity_from_descriptor(const MixtureDescriptor& descriptor, const CorpusManifest& manifest,
                                          const ActivityOptions& options = {});

struct MeetingStats {
  std::int64_t total_length = 0;
  std::int64_t silence = 0;  // samples with 0 active speakers
  std::int64_t single = 0;   // exactly 1
  std::int64_t overlap = 0;  // 2 or more
  double ov_rel = 0.0;
  double sil_rel = 0.0;
  std::vector<std::string> speakers;
  std::vector<double> shares;  // per-speaker activity / total speech
  int max_concurrency = 0;
  std::size_t num_utterances = 0;
};

MeetingStats meeting_stats(const ActivitySegments& segments);
nlohmann::json to_json(const MeetingStats& stats);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);
nlohmann::json to_json(const Summary& summary);

// Non-overlapping windows; bounds span the first through last window whose
// RMS is at least peak RMS minus threshold_db.
VadBounds energy_vad(std::span<const double> signal, int sample_rate, double threshold_db = 40.0,
                     double window_ms = 25.0);

std::string export_rttm(const ActivitySegments& segments, std::string_view recording_id);

struct RttmLine {
  std::string recording_id;
  std::string speaker_id;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds
};

std::vector<RttmLine> parse_rttm(std::string_view text);
// Lines of one recording, converted back to merged sample intervals.
ActivitySegments rttm_to_segments(std::span<const RttmLine> lines, int sample_rate);

}  // namespace mixsim
