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

#include "mixsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mixsim/audio.hpp"
#include "mixsim/error.hpp"

namespace mixsim {

using nlohmann::json;

std::string_view to_string(BoundaryMode mode) { return mode == BoundaryMode::kVad ? "vad" : "recording"; }

BoundaryMode boundary_mode_from_string(std::string_view name) {
  if (name == "recording") return BoundaryMode::kRecording;
  if (name == "vad") return BoundaryMode::kVad;
  throw Error("boundary", "expected \"recording\" or \"vad\", got '" + std::string(name) + "'");
}

namespace {

std::vector<Interval> merge(std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end());
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (iv.second <= iv.first) continue;
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

ActivitySegments activity_from_timeline(const Timeline& timeline, const CorpusManifest& manifest,
                                        const ActivityOptions& options) {
  ActivitySegments seg;
  seg.mode = options.mode;
  seg.sample_rate = timeline.sample_rate;
  seg.speakers = timeline.speakers;
  seg.total_length = options.total_length.value_or(timeline.length());
  seg.num_utterances = timeline.entries.size();
  for (const auto& e : timeline.entries) {
    if (std::find(seg.speakers.begin(), seg.speakers.end(), e.speaker_id) == seg.speakers.end()) {
      seg.speakers.push_back(e.speaker_id);
    }
  }
  std::vector<std::vector<Interval>> raw(seg.speakers.size());
  std::vector<std::string> missing;
  for (const auto& e : timeline.entries) {
    const auto k = static_cast<std::size_t>(std::find(seg.speakers.begin(), seg.speakers.end(), e.speaker_id) -
                                            seg.speakers.begin());
    Interval iv{e.offset, e.end()};
    if (options.mode == BoundaryMode::kVad) {
      const UtteranceRecord& record = manifest.at(e.utterance_id);
      if (record.vad_bounds) {
        iv = {e.offset + record.vad_bounds->start, e.offset + record.vad_bounds->end};
      } else if (options.energy_vad_fallback) {
        const Waveform wave = read_audio(manifest.resolve(record));
        const auto b = energy_vad(wave.channels.at(0), wave.sample_rate, options.vad_threshold_db, options.vad_window_ms);
        iv = {e.offset + b.start, e.offset + b.end};
      } else {
        missing.push_back(e.utterance_id);
        continue;
      }
    }
    iv.first = std::clamp<std::int64_t>(iv.first, 0, seg.total_length);
    iv.second = std::clamp<std::int64_t>(iv.second, 0, seg.total_length);
    raw[k].push_back(iv);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw Error("analysis", "vad boundary mode needs vad_bounds; missing for: " + list);
  }
  for (auto& r : raw) seg.intervals.push_back(merge(std::move(r)));
  return seg;
}

ActivitySegments activity_from_descriptor(const MixtureDescriptor& descriptor, const CorpusManifest& manifest,
                                          const ActivityOptions& options) {
  return activity_from_timeline(descriptor.timeline(), manifest, options);
}

MeetingStats meeting_stats(const ActivitySegments& segments) {
  if (segments.speakers.empty() || segments.total_length <= 0) throw Error("meeting_stats", "empty segments");
  std::vector<std::pair<std::int64_t, int>> events;
  MeetingStats stats;
  stats.total_length = segments.total_length;
  stats.speakers = segments.speakers;
  stats.num_utterances = segments.num_utterances;
  std::vector<std::int64_t> active(segments.speakers.size(), 0);
  for (std::size_t k = 0; k < segments.intervals.size(); ++k) {
    for (const auto& [start, end] : segments.intervals[k]) {
      if (start < 0 || end > segments.total_length || start >= end) {
        throw Error("meeting_stats", "interval outside [0, total_length]");
      }
      events.emplace_back(start, +1);
      events.emplace_back(end, -1);
      active[k] += end - start;
    }
  }
  std::sort(events.begin(), events.end());  // ends (-1) before starts at equal positions
  int count = 0;
  std::int64_t previous = 0;
  for (const auto& [position, delta] : events) {
    const std::int64_t span = position - previous;
    if (count == 1) {
      stats.single += span;
    } else if (count >= 2) {
      stats.overlap += span;
    }
    previous = position;
    count += delta;
    stats.max_concurrency = std::max(stats.max_concurrency, count);
  }
  stats.silence = stats.total_length - stats.single - stats.overlap;
  stats.ov_rel = static_cast<double>(stats.overlap) / static_cast<double>(stats.total_length);
  stats.sil_rel = static_cast<double>(stats.silence) / static_cast<double>(stats.total_length);
  std::int64_t speech = 0;
  for (auto a : active) speech += a;
  for (auto a : active) stats.shares.push_back(speech > 0 ? static_cast<double>(a) / static_cast<double>(speech) : 0.0);
  return stats;
}

json to_json(const MeetingStats& s) {
  json shares = json::object();
  for (std::size_t k = 0; k < s.speakers.size(); ++k) shares[s.speakers[k]] = s.shares[k];
  return {{"total_length", s.total_length}, {"silence_samples", s.silence}, {"single_samples", s.single},
          {"overlap_samples", s.overlap},   {"ov_rel", s.ov_rel},           {"sil_rel", s.sil_rel},
          {"shares", shares},               {"max_concurrency", s.max_concurrency},
          {"num_utterances", s.num_utterances}};
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

VadBounds energy_vad(std::span<const double> signal, int sample_rate, double threshold_db, double window_ms) {
  if (signal.empty()) throw Error("energy_vad", "empty signal");
  if (sample_rate <= 0 || !(window_ms > 0.0) || threshold_db < 0.0) throw Error("energy_vad", "invalid parameters");
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0)));
  const std::size_t count = (signal.size() + window - 1) / window;
  std::vector<double> power(count, 0.0);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t lo = w * window;
    const std::size_t hi = std::min(signal.size(), lo + window);
    double e = 0.0;
    for (std::size_t i = lo; i < hi; ++i) e += signal[i] * signal[i];
    power[w] = e / static_cast<double>(hi - lo);
  }
  const double peak = *std::max_element(power.begin(), power.end());
  if (!(peak > 0.0)) throw Error("energy_vad", "no activity");
  // compare mean-square values: RMS in dB is 10 log10 of the power
  const double floor = peak * std::pow(10.0, -threshold_db / 10.0);
  std::size_t first = count, last = 0;
  for (std::size_t w = 0; w < count; ++w) {
    if (power[w] >= floor) {
      first = std::min(first, w);
      last = w;
    }
  }
  return {static_cast<std::int64_t>(first * window),
          static_cast<std::int64_t>(std::min(signal.size(), (last + 1) * window))};
}

std::string export_rttm(const ActivitySegments& segments, std::string_view recording_id) {
  std::string out;
  char line[512];
  const double fs = segments.sample_rate;
  for (std::size_t k = 0; k < segments.speakers.size(); ++k) {
    for (const auto& [start, end] : segments.intervals[k]) {
      std::snprintf(line, sizeof(line), "SPEAKER %.*s 1 %.3f %.3f <NA> <NA> %s <NA> <NA>\n",
                    static_cast<int>(recording_id.size()), recording_id.data(), static_cast<double>(start) / fs,
                    static_cast<double>(end - start) / fs, segments.speakers[k].c_str());
      out += line;
    }
  }
  return out;
}

std::vector<RttmLine> parse_rttm(std::string_view text) {
  std::vector<RttmLine> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::istringstream fields(raw);
    std::vector<std::string> f;
    for (std::string token; fields >> token;) f.push_back(token);
    if (f.empty() || f[0].starts_with(";")) continue;
    if (f[0] != "SPEAKER") continue;
    if (f.size() < 8) throw Error("rttm line " + std::to_string(number), "expected at least 8 fields");
    try {
      out.push_back({f[1], f[7], std::stod(f[3]), std::stod(f[4])});
    } catch (const std::exception&) {
      throw Error("rttm line " + std::to_string(number), "onset or duration is not a number");
    }
  }
  return out;
}

ActivitySegments rttm_to_segments(std::span<const RttmLine> lines, int sample_rate) {
  ActivitySegments seg;
  seg.sample_rate = sample_rate;
  std::vector<std::vector<Interval>> raw;
  for (const auto& line : lines) {
    auto it = std::find(seg.speakers.begin(), seg.speakers.end(), line.speaker_id);
    if (it == seg.speakers.end()) {
      seg.speakers.push_back(line.speaker_id);
      raw.emplace_back();
      it = seg.speakers.end() - 1;
    }
    const auto start = static_cast<std::int64_t>(std::llround(line.onset * sample_rate));
    const auto end = static_cast<std::int64_t>(std::llround((line.onset + line.duration) * sample_rate));
    raw[static_cast<std::size_t>(it - seg.speakers.begin())].emplace_back(start, end);
    seg.total_length = std::max(seg.total_length, end);
  }
  seg.num_utterances = lines.size();
  for (auto& r : raw) seg.intervals.push_back(merge(std::move(r)));
  return seg;
}

}  // namespace mixsim
