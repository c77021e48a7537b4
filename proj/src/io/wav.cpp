// Copyright 2026 The ASC Authors. All Rights Reserved.
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

#include "asc/io/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "binary.hpp"

namespace asc::io {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

int bits_of(WavEncoding e) {
  switch (e) {
    case WavEncoding::kPcm16: return 16;
    case WavEncoding::kPcm24: return 24;
    case WavEncoding::kPcm32: return 32;
    case WavEncoding::kFloat32: return 32;
  }
  return 0;
}

}  // namespace

WavData read_wav_data(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error(name + ": not a RIFF/WAVE file");
  }
  WavData out;
  bool have_fmt = false;
  std::uint16_t format = 0, bits = 0, block_align = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* h = bytes.data() + pos;
    const std::uint32_t size = le32(h + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(h, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw std::runtime_error(name + ": truncated fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      format = le16(f);
      out.info.channels = le16(f + 2);
      out.info.sample_rate = static_cast<int>(le32(f + 4));
      block_align = le16(f + 12);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw std::runtime_error(name + ": truncated fmt chunk");
        format = le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(h, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error(name + ": data before fmt chunk");
      if (body + size > bytes.size()) {
        throw std::runtime_error(name + ": truncated data chunk (" +
                                 std::to_string(bytes.size() - body) + " of " +
                                 std::to_string(size) + " bytes)");
      }
      if (format == kFormatPcm && bits == 16) {
        out.info.encoding = WavEncoding::kPcm16;
      } else if (format == kFormatPcm && bits == 24) {
        out.info.encoding = WavEncoding::kPcm24;
      } else if (format == kFormatPcm && bits == 32) {
        out.info.encoding = WavEncoding::kPcm32;
      } else if (format == kFormatFloat && bits == 32) {
        out.info.encoding = WavEncoding::kFloat32;
      } else {
        throw std::runtime_error(name + ": unsupported codec (format " +
                                 std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits)");
      }
      if (out.info.channels <= 0 || out.info.sample_rate <= 0 ||
          block_align != out.info.channels * (bits / 8)) {
        throw std::runtime_error(name + ": inconsistent fmt chunk");
      }
      const std::size_t width = bits / 8;
      const std::size_t count = size / width;
      out.info.frames = count / static_cast<std::size_t>(out.info.channels);
      out.samples.resize(out.info.frames * out.info.channels);
      const unsigned char* d = bytes.data() + body;
      for (std::size_t i = 0; i < out.samples.size(); ++i, d += width) {
        switch (out.info.encoding) {
          case WavEncoding::kPcm16:
            out.samples[i] = static_cast<float>(static_cast<std::int16_t>(le16(d))) /
                             32768.0f;
            break;
          case WavEncoding::kPcm24: {
            std::int32_t v = static_cast<std::int32_t>(
                (static_cast<std::uint32_t>(d[0]) << 8) |
                (static_cast<std::uint32_t>(d[1]) << 16) |
                (static_cast<std::uint32_t>(d[2]) << 24));
            out.samples[i] = static_cast<float>(v >> 8) / 8388608.0f;
            break;
          }
          case WavEncoding::kPcm32:
            out.samples[i] = static_cast<float>(
                static_cast<double>(static_cast<std::int32_t>(le32(d))) /
                2147483648.0);
            break;
          case WavEncoding::kFloat32: {
            const std::uint32_t u = le32(d);
            std::memcpy(&out.samples[i], &u, 4);
            break;
          }
        }
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw std::runtime_error(name + (have_fmt ? ": no data chunk" : ": no fmt chunk"));
}

dsp::AudioSegment read_audio(const std::filesystem::path& path, int channel) {
  const WavData data = read_wav_data(path);
  if (channel < 0 || channel >= data.info.channels) {
    throw std::invalid_argument(path.string() + ": channel " +
                                std::to_string(channel) + " out of range (" +
                                std::to_string(data.info.channels) +
                                " channels)");
  }
  dsp::AudioSegment seg;
  seg.sample_rate = data.info.sample_rate;
  seg.source_id = path.stem().string();
  seg.samples.resize(data.info.frames);
  for (std::size_t i = 0; i < data.info.frames; ++i) {
    seg.samples[i] = data.samples[i * data.info.channels + channel];
  }
  return seg;
}

void write_wav(const std::filesystem::path& path,
               std::span<const float> interleaved, int channels,
               int sample_rate, WavEncoding encoding) {
  if (channels <= 0 || sample_rate <= 0 ||
      interleaved.size() % static_cast<std::size_t>(channels) != 0) {
    throw std::invalid_argument("write_wav: bad channel count or length");
  }
  const int bits = bits_of(encoding);
  const std::uint32_t width = static_cast<std::uint32_t>(bits / 8);
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * width);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  using detail::put;
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 16);
  put<std::uint16_t>(out, encoding == WavEncoding::kFloat32 ? kFormatFloat
                                                           : kFormatPcm);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(channels));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * channels * width);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(channels * width));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(bits));
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  std::vector<unsigned char> buf(interleaved.size() * width);
  unsigned char* p = buf.data();
  for (float x : interleaved) {
    if (encoding == WavEncoding::kFloat32) {
      std::uint32_t u;
      std::memcpy(&u, &x, 4);
      for (int b = 0; b < 4; ++b) *p++ = static_cast<unsigned char>(u >> (8 * b));
      continue;
    }
    const double scale = std::ldexp(1.0, bits - 1);
    const double v = std::clamp(std::nearbyint(static_cast<double>(x) * scale),
                                -scale, scale - 1.0);
    const auto u = static_cast<std::uint32_t>(static_cast<std::int64_t>(v));
    for (std::uint32_t b = 0; b < width; ++b) {
      *p++ = static_cast<unsigned char>(u >> (8 * b));
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace asc::io
