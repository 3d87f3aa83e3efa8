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
#include <filesystem>
#include <vector>

namespace mixsim {

enum class SampleEncoding { kPcm16, kFloat32 };

// Planar multi-channel signal. All channels have the same length.
struct Waveform {
  int sample_rate = 0;
  std::vector<std::vector<double>> channels;

  Waveform() = default;
  Waveform(int rate, std::size_t num_channels, std::size_t num_frames)
      : sample_rate(rate), channels(num_channels, std::vector<double>(num_frames, 0.0)) {}

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_frames() const { return channels.empty() ? 0 : channels.front().size(); }
};

struct AudioInfo {
  int sample_rate = 0;
  int num_channels = 0;
  std::int64_t num_frames = 0;
  SampleEncoding encoding = SampleEncoding::kPcm16;
};

// RIFF/WAVE reader for PCM16 and IEEE float32 (plain or extensible format).
// PCM16 maps to [-1, 1) by division by 32768.
AudioInfo read_audio_info(const std::filesystem::path& path);
Waveform read_audio(const std::filesystem::path& path);

// PCM16 writes round half away from zero after scaling by 32768 and clip to
// [-32768, 32767]. Float32 writes are lossless for float-representable data.
void write_audio(const std::filesystem::path& path, const Waveform& waveform,
                 SampleEncoding encoding = SampleEncoding::kFloat32);

}  // namespace mixsim
