// fblab/wav.hpp

// Copyright 2026 The fblab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "fblab/dsp_core.hpp"
#include "fblab/error.hpp"

namespace fblab {

class WavError : public IoError {
 public:
  enum class Kind { MalformedHeader, Multichannel, UnsupportedCodec, Io };

  WavError(Kind kind, const std::string &what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class WavEncoding { Pcm16, Float32 };

namespace detail {

inline std::uint32_t read_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<unsigned char> &out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFF));
}

inline void put_u16(std::vector<unsigned char> &out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_tag(std::vector<unsigned char> &out, const char *tag) {
  out.insert(out.end(), tag, tag + 4);
}

/// Shortest-form decimal with up to 17 significant digits, locale independent.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Parses a RIFF/WAVE byte buffer holding mono PCM16 or IEEE float32 audio.
inline Waveform parse_wav(const std::vector<unsigned char> &bytes) {
  using K = WavError::Kind;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw WavError(K::MalformedHeader, "malformed header");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char *chunk = bytes.data() + pos;
    const std::uint32_t size = detail::read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw WavError(K::MalformedHeader, "malformed header");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw WavError(K::MalformedHeader, "malformed header");
      const unsigned char *f = bytes.data() + body;
      format = detail::read_u16(f);
      channels = detail::read_u16(f + 2);
      rate = detail::read_u32(f + 4);
      bits = detail::read_u16(f + 14);
      // WAVE_FORMAT_EXTENSIBLE: the real codec is the first two bytes of the subformat GUID.
      if (format == 0xFFFE) {
        if (size < 40) throw WavError(K::MalformedHeader, "malformed header");
        format = detail::read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw WavError(K::MalformedHeader, "malformed header");
      if (channels != 1) throw WavError(K::Multichannel, "multichannel unsupported");
      if (rate == 0 || rate > 0x7FFFFFFF) throw WavError(K::MalformedHeader, "malformed header");
      const unsigned char *d = bytes.data() + body;
      std::vector<double> samples;
      if (format == 1 && bits == 16) {
        samples.resize(size / 2);
        for (std::size_t i = 0; i < samples.size(); ++i)
          samples[i] = static_cast<std::int16_t>(detail::read_u16(d + 2 * i)) / 32768.0;
      } else if (format == 3 && bits == 32) {
        samples.resize(size / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const float v = std::bit_cast<float>(detail::read_u32(d + 4 * i));
          if (!std::isfinite(v)) throw WavError(K::MalformedHeader, "non-finite sample in data chunk");
          samples[i] = v;
        }
      } else {
        throw WavError(K::UnsupportedCodec, "unsupported codec");
      }
      return Waveform(std::move(samples), static_cast<int>(rate));
    }
    pos = body + size + (size & 1u);
  }
  throw WavError(K::MalformedHeader, "malformed header");
}

inline Waveform read_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Kind::Io, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

/// Serializes to RIFF/WAVE. PCM16 clips to [-1, 1) and rounds to the nearest LSB.
inline std::vector<unsigned char> encode_wav(const Waveform &w, WavEncoding enc = WavEncoding::Pcm16) {
  const std::uint16_t bits = enc == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(w.size() * block);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 36 + data_size);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, enc == WavEncoding::Pcm16 ? 1 : 3);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate()));
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate()) * block);
  detail::put_u16(out, block);
  detail::put_u16(out, bits);
  detail::put_tag(out, "data");
  detail::put_u32(out, data_size);
  for (double v : w.samples()) {
    if (enc == WavEncoding::Pcm16) {
      const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

inline void write_wav(const std::string &path, const Waveform &w, WavEncoding enc = WavEncoding::Pcm16) {
  const auto bytes = encode_wav(w, enc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError(WavError::Kind::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WavError(WavError::Kind::Io, "cannot write " + path);
}

/// One sample per line, '.' decimal separator, LF newlines.
inline std::string waveform_csv(const Waveform &w) {
  std::string s;
  for (double v : w.samples()) {
    s += detail::format_double(v);
    s += '\n';
  }
  return s;
}

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

}  // namespace fblab
