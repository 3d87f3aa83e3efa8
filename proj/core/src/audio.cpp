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

#include "mixsim/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "mixsim/error.hpp"

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace mixsim {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct ParsedWav {
  AudioInfo info;
  std::size_t data_offset = 0;
};

template <typename T>
T load_le(const std::vector<char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string(), "cannot open audio file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// `bytes` may hold only a prefix of a file of `file_size` bytes; returns
// nullopt when the prefix ends before the data chunk header is reached.
std::optional<ParsedWav> parse_header(const std::vector<char>& bytes, std::size_t file_size,
                                      const std::filesystem::path& path) {
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(where, "malformed header: not a RIFF/WAVE file");
  }
  ParsedWav parsed;
  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= file_size) {
    if (pos + 8 > bytes.size()) return std::nullopt;
    const std::string id(bytes.data() + pos, 4);
    const auto size = load_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > file_size) throw Error(where, "malformed header: truncated fmt chunk");
      if (body + size > bytes.size()) return std::nullopt;
      format = load_le<std::uint16_t>(bytes, body);
      parsed.info.num_channels = load_le<std::uint16_t>(bytes, body + 2);
      parsed.info.sample_rate = static_cast<int>(load_le<std::uint32_t>(bytes, body + 4));
      bits = load_le<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(where, "malformed header: short extensible fmt chunk");
        format = load_le<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(where, "malformed header: data chunk before fmt chunk");
      if (body + size > file_size) throw Error(where, "malformed header: truncated data chunk");
      if (parsed.info.num_channels <= 0 || parsed.info.sample_rate <= 0) {
        throw Error(where, "malformed header: invalid channel count or sample rate");
      }
      std::size_t sample_bytes = 0;
      if (format == kFormatPcm && bits == 16) {
        parsed.info.encoding = SampleEncoding::kPcm16;
        sample_bytes = 2;
      } else if (format == kFormatFloat && bits == 32) {
        parsed.info.encoding = SampleEncoding::kFloat32;
        sample_bytes = 4;
      } else {
        throw Error(where, "unsupported encoding (format " + std::to_string(format) + ", " +
                               std::to_string(bits) + " bits)");
      }
      const std::size_t frame_bytes = sample_bytes * static_cast<std::size_t>(parsed.info.num_channels);
      parsed.info.num_frames = static_cast<std::int64_t>(size / frame_bytes);
      parsed.data_offset = body;
      return parsed;
    }
    pos = body + size + (size & 1u);
  }
  throw Error(where, have_fmt ? "malformed header: missing data chunk" : "malformed header: missing fmt chunk");
}

template <typename T>
void put_le(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

}  // namespace

AudioInfo read_audio_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string(), "cannot open audio file");
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<char> head(std::min<std::size_t>(file_size, 4096));
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  if (auto parsed = parse_header(head, file_size, path)) return parsed->info;
  // Long metadata chunks ahead of the data chunk.
  const auto bytes = slurp(path);
  return parse_header(bytes, bytes.size(), path)->info;
}

Waveform read_audio(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const ParsedWav parsed = *parse_header(bytes, bytes.size(), path);
  const auto channels = static_cast<std::size_t>(parsed.info.num_channels);
  const auto frames = static_cast<std::size_t>(parsed.info.num_frames);
  Waveform wave(parsed.info.sample_rate, channels, frames);
  std::size_t pos = parsed.data_offset;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      if (parsed.info.encoding == SampleEncoding::kPcm16) {
        wave.channels[c][f] = load_le<std::int16_t>(bytes, pos) / 32768.0;
        pos += 2;
      } else {
        wave.channels[c][f] = load_le<float>(bytes, pos);
        pos += 4;
      }
    }
  }
  return wave;
}

void write_audio(const std::filesystem::path& path, const Waveform& wave, SampleEncoding encoding) {
  if (wave.num_channels() == 0) throw Error(path.string(), "cannot write audio without channels");
  if (wave.sample_rate <= 0) throw Error(path.string(), "invalid sample rate");
  const std::size_t frames = wave.num_frames();
  for (const auto& ch : wave.channels) {
    if (ch.size() != frames) throw Error(path.string(), "channels differ in length");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string(), "cannot open for writing");

  const auto channels = static_cast<std::uint16_t>(wave.num_channels());
  const std::uint16_t bits = encoding == SampleEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_bytes = static_cast<std::uint32_t>(frames * block_align);

  out.write("RIFF", 4);
  put_le<std::uint32_t>(out, 36u + data_bytes);
  out.write("WAVEfmt ", 8);
  put_le<std::uint32_t>(out, 16u);
  put_le<std::uint16_t>(out, encoding == SampleEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_le<std::uint16_t>(out, channels);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(wave.sample_rate) * block_align);
  put_le<std::uint16_t>(out, block_align);
  put_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  put_le<std::uint32_t>(out, data_bytes);

  std::vector<char> buffer(static_cast<std::size_t>(data_bytes));
  char* dst = buffer.data();
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = wave.channels[c][f];
      if (encoding == SampleEncoding::kPcm16) {
        const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
        const auto v = static_cast<std::int16_t>(scaled);
        std::memcpy(dst, &v, 2);
        dst += 2;
      } else {
        const auto v = static_cast<float>(x);
        std::memcpy(dst, &v, 4);
        dst += 4;
      }
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) throw Error(path.string(), "write failed");
}

}  // namespace mixsim
