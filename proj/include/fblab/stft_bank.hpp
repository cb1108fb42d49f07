// fblab/stft_bank.hpp

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

#include <cmath>
#include <numbers>
#include <vector>

#include "fblab/codec.hpp"
#include "fblab/error.hpp"
#include "fblab/filterbank.hpp"

namespace fblab {

enum class StftMode { Linear, SignSplit };
enum class StftWindow { Rectangular, Hann };

struct StftSpec {
  int frame_len = 16;
  int n_freqs = 128;
  StftMode mode = StftMode::SignSplit;
  StftWindow window = StftWindow::Rectangular;
  /// Scale rows by 1/sqrt(n_freqs). With a rectangular window and
  /// n_freqs >= L/2 the cos/sin rows then form a Parseval frame.
  bool parseval_scaling = false;

  int num_filters() const { return (mode == StftMode::Linear ? 2 : 4) * n_freqs; }
};

/// Frequency of STFT row pair k (0-based): half-bin centers (k + 1/2) fs / (2 n_freqs),
/// evenly spaced inside (0, fs/2).
inline double stft_frequency(int k, int n_freqs, int sample_rate) {
  return (k + 0.5) * (sample_rate / 2.0) / n_freqs;
}

inline double stft_window(StftWindow w, int l, int len) {
  if (w == StftWindow::Rectangular) return 1.0;
  const double s = std::sin(std::numbers::pi * (l + 0.5) / len);
  return s * s;
}

/// Real STFT analysis bank: rows 2k and 2k+1 are w(l) cos(2 pi f_k l / fs) and
/// w(l) sin(2 pi f_k l / fs). SignSplit appends the negation of every row so
/// the ReLU encoder keeps both signs.
inline Filterbank build_stft_bank(const StftSpec &spec, int sample_rate = 8000) {
  detail::require(spec.frame_len >= 1, "frame length must be >= 1");
  detail::require(spec.n_freqs >= 1, "n_freqs must be >= 1");
  detail::require(sample_rate > 0, "sample rate must be positive");
  const int L = spec.frame_len;
  const int pairs = 2 * spec.n_freqs;

  Filterbank bank;
  bank.kind = FilterKind::STFT;
  bank.sample_rate = sample_rate;
  bank.taps.resize(spec.num_filters(), L);
  bank.conditioning_warning = 2 * spec.n_freqs > L;
  std::vector<double> freqs(static_cast<std::size_t>(spec.n_freqs));
  const double scale = spec.parseval_scaling ? 1.0 / std::sqrt(static_cast<double>(spec.n_freqs)) : 1.0;
  for (int k = 0; k < spec.n_freqs; ++k) {
    const double f = stft_frequency(k, spec.n_freqs, sample_rate);
    freqs[static_cast<std::size_t>(k)] = f;
    for (int l = 0; l < L; ++l) {
      const double w = scale * stft_window(spec.window, l, L);
      const double arg = 2.0 * std::numbers::pi * f * l / sample_rate;
      bank.taps(2 * k, l) = w * std::cos(arg);
      bank.taps(2 * k + 1, l) = w * std::sin(arg);
    }
  }
  if (spec.mode == StftMode::SignSplit) bank.taps.bottomRows(pairs) = -bank.taps.topRows(pairs);
  bank.center_freqs = std::move(freqs);
  bank.validate();
  return bank;
}

/// Inverse-STFT decoder. Linear banks get the pseudo-inverse; sign-split banks
/// get the ReLU-aware inverse, so decode(encode(x, relu)) reproduces x.
/// Throws when the bank spans fewer than L dimensions unless the caller
/// acknowledges the loss.
inline Filterbank istft_decoder(const Filterbank &bank, bool acknowledge_rank_deficiency = false) {
  detail::require(bank.kind == FilterKind::STFT, "istft_decoder requires an STFT bank");
  bank.validate();
  const bool split = is_sign_split(bank);
  const Matrix a = analysis_matrix(bank);
  const Eigen::Index rank = numerical_rank(split ? Matrix(a.topRows(a.rows() / 2)) : a);
  if (rank < bank.length() && !acknowledge_rank_deficiency)
    throw InvalidArgument("STFT bank is rank deficient (rank " + std::to_string(rank) + " < " +
                          std::to_string(bank.length()) + ")");
  return split ? sign_split_pseudo_inverse(bank) : pseudo_inverse(bank);
}

}  // namespace fblab
