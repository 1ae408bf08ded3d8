/*
 * Copyright 2026 The srpnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Minimal RIFF/WAVE reader and writer. Reads PCM 16/24-bit and IEEE float
// 32-bit (mono or multichannel, including WAVE_FORMAT_EXTENSIBLE); writes
// 32-bit float.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "srpnet/common.hpp"
#include "srpnet/signal_core.hpp"

namespace srpnet {

namespace wav_detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace wav_detail

// Reads every channel of a WAV file. When `expected_rate` is given, a
// different file rate is a hard error; there is no resampling.
inline std::vector<SignalBuffer> read_wav(const std::filesystem::path& path,
                                          std::optional<double> expected_rate = std::nullopt) {
  using namespace wav_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size() && std::memcmp(chunk, "data", 4) != 0)
      throw DataError("truncated WAV chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("short fmt chunk in " + path.string());
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 26) format = read_u16(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || rate == 0) throw DataError("missing fmt chunk in " + path.string());
  if (data == nullptr) throw DataError("missing data chunk in " + path.string());
  if (expected_rate && static_cast<double>(rate) != *expected_rate)
    throw DataError("sample rate mismatch in " + path.string() + ": file has " + std::to_string(rate) +
                    " Hz, expected " + std::to_string(static_cast<long long>(*expected_rate)) + " Hz");

  const bool pcm = format == 1 && (bits == 16 || bits == 24);
  const bool flt = format == 3 && bits == 32;
  if (!pcm && !flt)
    throw DataError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits) in " + path.string());

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  std::vector<SignalBuffer> out(channels);
  for (auto& s : out) {
    s.sample_rate = rate;
    s.samples.resize(frames);
  }
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (i * channels + c) * width;
      double v;
      if (flt) {
        float f;
        const std::uint32_t u = read_u32(p);
        std::memcpy(&f, &u, 4);
        v = f;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        std::int32_t x = static_cast<std::int32_t>(p[0] | p[1] << 8 | p[2] << 16);
        if (x & 0x800000) x -= 0x1000000;
        v = x / 8388608.0;
      }
      out[c].samples[i] = v;
    }
  }
  return out;
}

// Writes interleaved 32-bit float WAV. All channels must share rate and length.
inline void write_wav_float(const std::filesystem::path& path, const std::vector<SignalBuffer>& channels) {
  using namespace wav_detail;
  if (channels.empty()) throw DataError("write_wav_float: no channels");
  const std::size_t frames = channels.front().size();
  const double rate = channels.front().sample_rate;
  for (const auto& c : channels)
    if (c.size() != frames || c.sample_rate != rate)
      throw DataError("write_wav_float: channels differ in length or rate");

  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * nch * 4);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 3);
  put_u16(out, nch);
  put_u32(out, static_cast<std::uint32_t>(rate));
  put_u32(out, static_cast<std::uint32_t>(rate) * nch * 4);
  put_u16(out, static_cast<std::uint16_t>(nch * 4));
  put_u16(out, 32);
  out += "data";
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& c : channels) {
      const float f = static_cast<float>(c.samples[i]);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write WAV file: " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw DataError("write failed: " + path.string());
}

}  // namespace srpnet
