// fblab/filterbank.hpp

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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fblab/dsp_core.hpp"
#include "fblab/erb.hpp"
#include "fblab/error.hpp"
#include "fblab/wav.hpp"

namespace fblab {

enum class FilterKind { Gammatone, MPGTF, ParaMPGTF, STFT, Learned, Custom };

inline std::string_view to_string(FilterKind k) {
  switch (k) {
    case FilterKind::Gammatone: return "gammatone";
    case FilterKind::MPGTF: return "mpgtf";
    case FilterKind::ParaMPGTF: return "parampgtf";
    case FilterKind::STFT: return "stft";
    case FilterKind::Learned: return "learned";
    case FilterKind::Custom: return "custom";
  }
  return "custom";
}

inline std::optional<FilterKind> parse_filter_kind(std::string_view s) {
  for (auto k : {FilterKind::Gammatone, FilterKind::MPGTF, FilterKind::ParaMPGTF, FilterKind::STFT,
                 FilterKind::Learned, FilterKind::Custom})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline bool is_gammatone_kind(FilterKind k) {
  return k == FilterKind::Gammatone || k == FilterKind::MPGTF || k == FilterKind::ParaMPGTF;
}

/// N filters of L taps plus provenance. Row n is the n-th filter h_n(1..L)
/// stored at columns 0..L-1.
struct Filterbank {
  Matrix taps;
  int sample_rate = 8000;
  FilterKind kind = FilterKind::Custom;
  std::optional<std::vector<double>> center_freqs;
  std::optional<ErbParams> erb_params;
  /// Set for overcomplete constructions whose pseudo-inverse deserves a look.
  bool conditioning_warning = false;

  Eigen::Index num_filters() const { return taps.rows(); }
  Eigen::Index length() const { return taps.cols(); }

  void validate() const {
    detail::require(taps.rows() >= 1 && taps.cols() >= 1, "filterbank must have N >= 1 and L >= 1");
    detail::require(sample_rate > 0, "sample rate must be positive");
    detail::require(taps.allFinite(), "filterbank taps must be finite");
    if (center_freqs) {
      const auto &fc = *center_freqs;
      for (std::size_t j = 1; j < fc.size(); ++j)
        detail::require(fc[j] > fc[j - 1], "center frequencies must be strictly increasing");
      if (is_gammatone_kind(kind))
        for (double f : fc)
          detail::require(f >= 100.0 && f <= 4000.0, "gammatone centers must lie in [100, 4000] Hz");
    }
  }
};

/// True when the second half of the rows is the exact negation of the first
/// half, the layout produced by appending -h for every filter h.
inline bool is_sign_split(const Filterbank &bank) {
  const Eigen::Index n = bank.num_filters();
  if (n % 2 != 0) return false;
  const Eigen::Index half = n / 2;
  return (bank.taps.topRows(half) + bank.taps.bottomRows(half)).cwiseAbs().maxCoeff() == 0.0;
}

// FBANK1 text format:
//   FBANK1 kind=<K> n=<N> len=<L> fs=<Hz> c1=<v|-> c2=<v|->
//   followed by N lines of L space-separated decimals.

inline std::string serialize_fbank(const Filterbank &bank) {
  bank.validate();
  std::string out = "FBANK1 kind=";
  out += to_string(bank.kind);
  out += " n=" + std::to_string(bank.num_filters());
  out += " len=" + std::to_string(bank.length());
  out += " fs=" + std::to_string(bank.sample_rate);
  out += " c1=" + (bank.erb_params ? detail::format_double(bank.erb_params->c1) : std::string("-"));
  out += " c2=" + (bank.erb_params ? detail::format_double(bank.erb_params->c2) : std::string("-"));
  out += '\n';
  for (Eigen::Index n = 0; n < bank.num_filters(); ++n) {
    for (Eigen::Index l = 0; l < bank.length(); ++l) {
      if (l) out += ' ';
      out += detail::format_double(bank.taps(n, l));
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline double parse_double(std::string_view tok) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw IoError("FBANK1: bad number '" + std::string(tok) + "'");
  return v;
}

inline long parse_long(std::string_view tok) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw IoError("FBANK1: bad integer '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) toks.push_back(line.substr(j, i - j));
  }
  return toks;
}

}  // namespace detail

inline Filterbank parse_fbank(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.empty()) throw IoError("FBANK1: empty file");

  const auto header = detail::split_ws(lines[0]);
  if (header.size() != 7 || header[0] != "FBANK1") throw IoError("FBANK1: malformed header");
  auto field = [&](std::size_t idx, std::string_view key) {
    const auto tok = header[idx];
    if (tok.substr(0, key.size()) != key || tok.size() <= key.size() || tok[key.size()] != '=')
      throw IoError("FBANK1: expected field '" + std::string(key) + "'");
    return tok.substr(key.size() + 1);
  };

  Filterbank bank;
  const auto kind = parse_filter_kind(field(1, "kind"));
  if (!kind) throw IoError("FBANK1: unknown kind");
  bank.kind = *kind;
  const long n = detail::parse_long(field(2, "n"));
  const long len = detail::parse_long(field(3, "len"));
  const long fs = detail::parse_long(field(4, "fs"));
  if (n < 1 || len < 1 || fs < 1) throw IoError("FBANK1: non-positive dimension");
  bank.sample_rate = static_cast<int>(fs);
  const auto c1 = field(5, "c1");
  const auto c2 = field(6, "c2");
  if ((c1 == "-") != (c2 == "-")) throw IoError("FBANK1: c1 and c2 must both be present or absent");
  if (c1 != "-") bank.erb_params = ErbParams{detail::parse_double(c1), detail::parse_double(c2)};

  // Allow a single trailing empty line from the final LF.
  std::size_t rows = lines.size() - 1;
  while (rows > 0 && detail::split_ws(lines[rows]).empty()) --rows;
  if (rows != static_cast<std::size_t>(n)) throw IoError("FBANK1: row count does not match n");
  bank.taps.resize(n, len);
  for (long r = 0; r < n; ++r) {
    const auto toks = detail::split_ws(lines[static_cast<std::size_t>(r) + 1]);
    if (toks.size() != static_cast<std::size_t>(len)) throw IoError("FBANK1: row length does not match len");
    for (long l = 0; l < len; ++l) bank.taps(r, l) = detail::parse_double(toks[static_cast<std::size_t>(l)]);
  }
  // Multi-phase gammatone banks are fully determined by (c1, c2, fs); restore
  // their center grid so the time-frequency layout is known after loading.
  if ((bank.kind == FilterKind::MPGTF || bank.kind == FilterKind::ParaMPGTF) && bank.erb_params &&
      bank.erb_params->valid() && bank.sample_rate > 200)
    bank.center_freqs = center_frequency_grid(*bank.erb_params, 100.0, std::min(4000.0, bank.sample_rate / 2.0));
  try {
    bank.validate();
  } catch (const InvalidArgument &e) {
    throw IoError(std::string("FBANK1: ") + e.what());
  }
  return bank;
}

inline void save_fbank(const std::string &path, const Filterbank &bank) {
  write_text(path, serialize_fbank(bank));
}

inline Filterbank load_fbank(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fbank(ss.str());
}

/// |DFT| of every filter zero-padded to `nfft` points; result is N x nfft.
inline Matrix frequency_response(const Filterbank &bank, int nfft = 512) {
  detail::require(nfft >= bank.length(), "nfft must be at least the filter length");
  Matrix mag(bank.num_filters(), nfft);
  std::vector<double> cs(static_cast<std::size_t>(nfft)), sn(static_cast<std::size_t>(nfft));
  for (int m = 0; m < nfft; ++m) {
    const double w = 2.0 * std::numbers::pi * m / nfft;
    cs[static_cast<std::size_t>(m)] = std::cos(w);
    sn[static_cast<std::size_t>(m)] = std::sin(w);
  }
  for (Eigen::Index n = 0; n < bank.num_filters(); ++n) {
    for (int k = 0; k < nfft; ++k) {
      double re = 0.0, im = 0.0;
      for (Eigen::Index l = 0; l < bank.length(); ++l) {
        const auto idx = static_cast<std::size_t>((static_cast<long long>(k) * l) % nfft);
        re += bank.taps(n, l) * cs[idx];
        im -= bank.taps(n, l) * sn[idx];
      }
      mag(n, k) = std::hypot(re, im);
    }
  }
  return mag;
}

/// Rows `filter_index,bin_hz,magnitude`, one per (filter, bin).
inline std::string frequency_response_csv(const Filterbank &bank, int nfft = 512) {
  const Matrix mag = frequency_response(bank, nfft);
  std::string out = "filter_index,bin_hz,magnitude\n";
  for (Eigen::Index n = 0; n < mag.rows(); ++n)
    for (Eigen::Index k = 0; k < mag.cols(); ++k) {
      out += std::to_string(n);
      out += ',';
      out += detail::format_double(static_cast<double>(k) * bank.sample_rate / nfft);
      out += ',';
      out += detail::format_double(mag(n, k));
      out += '\n';
    }
  return out;
}

}  // namespace fblab
