// fblab/gammatone.hpp

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
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "fblab/dsp_core.hpp"
#include "fblab/erb.hpp"
#include "fblab/error.hpp"
#include "fblab/filterbank.hpp"

namespace fblab {

/// One FIR-truncated gammatone filter
///   gamma(t) = alpha t^(n-1) exp(-2 pi b t) cos(2 pi fc t + phi),  t > 0.
struct GammatoneSpec {
  int order_n = 2;
  double amplitude_alpha = 1.0;
  double phase_phi = 0.0;
  double center_fc = 1000.0;
  double bandwidth_b = 100.0;
  int length = 16;
  int sample_rate = 8000;

  void validate() const {
    detail::require(order_n >= 1, "gammatone order must be >= 1");
    detail::require(bandwidth_b > 0.0, "gammatone bandwidth must be positive");
    detail::require(center_fc > 0.0 && center_fc < sample_rate / 2.0,
                    "center frequency must lie in (0, fs/2)");
    detail::require(length >= 1, "filter length must be >= 1");
    detail::require(sample_rate > 0, "sample rate must be positive");
  }
};

/// Samples gamma at t = (k+1)/fs for k = 0..L-1. With `normalize` the filter
/// is scaled so its peak absolute tap is 1.
inline std::vector<double> gammatone_ir(const GammatoneSpec &s, bool normalize = true) {
  s.validate();
  std::vector<double> taps(static_cast<std::size_t>(s.length));
  const double two_pi = 2.0 * std::numbers::pi;
  double peak = 0.0;
  for (int k = 0; k < s.length; ++k) {
    const double t = static_cast<double>(k + 1) / s.sample_rate;
    const double v = s.amplitude_alpha * std::pow(t, s.order_n - 1) * std::exp(-two_pi * s.bandwidth_b * t) *
                     std::cos(two_pi * s.center_fc * t + s.phase_phi);
    taps[static_cast<std::size_t>(k)] = v;
    peak = std::max(peak, std::abs(v));
  }
  if (normalize && peak > 0.0)
    for (double &v : taps) v /= peak;
  return taps;
}

struct MpgtfOptions {
  int order_n = 2;
  double amplitude_alpha = 1.0;
  double f_first = 100.0;
  double f_max = 4000.0;
  /// Fixed phase count per center. When unset, n_filters/2 is spread over the
  /// centers with the remainder going to the lowest ones.
  std::optional<int> phases_per_center;
};

/// Phase variants per center so that the counts sum to `half` exactly.
inline std::vector<int> allocate_phases(int half, int num_centers) {
  if (half < num_centers) throw InvalidArgument("not enough filters for one phase per center");
  std::vector<int> counts(static_cast<std::size_t>(num_centers), half / num_centers);
  for (int j = 0; j < half % num_centers; ++j) ++counts[static_cast<std::size_t>(j)];
  return counts;
}

namespace detail {

struct MultiphaseLayout {
  std::vector<double> centers;
  std::vector<int> phase_counts;
};

inline MultiphaseLayout multiphase_layout(const ErbParams &p, int n_filters, int frame_len, int sample_rate,
                                          const MpgtfOptions &opt) {
  p.validate();
  require(sample_rate > 0, "sample rate must be positive");
  require(frame_len >= 1, "frame length must be >= 1");
  require(n_filters >= 2 && n_filters % 2 == 0, "number of filters must be even and >= 2");
  MultiphaseLayout layout;
  layout.centers = center_frequency_grid(p, opt.f_first, std::min(opt.f_max, sample_rate / 2.0));
  const int num_centers = static_cast<int>(layout.centers.size());
  const int half = n_filters / 2;
  if (opt.phases_per_center) {
    require(*opt.phases_per_center >= 1, "phases per center must be >= 1");
    require(*opt.phases_per_center * num_centers == half,
            "phases_per_center * number of centers must equal n_filters / 2");
    layout.phase_counts.assign(static_cast<std::size_t>(num_centers), *opt.phases_per_center);
  } else {
    layout.phase_counts = allocate_phases(half, num_centers);
  }
  return layout;
}

/// Calls fn(spec) for the filters of the first half of the bank, in row order.
template <typename Fn>
void for_each_multiphase_filter(const ErbParams &p, const MultiphaseLayout &layout, int frame_len, int sample_rate,
                                const MpgtfOptions &opt, Fn &&fn) {
  for (std::size_t j = 0; j < layout.centers.size(); ++j) {
    const double fc = layout.centers[j];
    const double b = bandwidth_b(erb(fc, p), opt.order_n);
    const int k_count = layout.phase_counts[j];
    for (int k = 0; k < k_count; ++k)
      fn(GammatoneSpec{opt.order_n, opt.amplitude_alpha, std::numbers::pi * k / k_count, fc, b, frame_len,
                       sample_rate});
  }
}

inline Filterbank build_multiphase_bank(const ErbParams &p, int n_filters, int frame_len, int sample_rate,
                                        const MpgtfOptions &opt, FilterKind kind) {
  const MultiphaseLayout layout = multiphase_layout(p, n_filters, frame_len, sample_rate, opt);
  const int half = n_filters / 2;
  Filterbank bank;
  bank.taps.resize(n_filters, frame_len);
  bank.sample_rate = sample_rate;
  bank.kind = kind;
  bank.center_freqs = layout.centers;
  bank.erb_params = p;

  Eigen::Index row = 0;
  for_each_multiphase_filter(p, layout, frame_len, sample_rate, opt, [&](const GammatoneSpec &spec) {
    const auto taps = gammatone_ir(spec);
    for (int l = 0; l < frame_len; ++l) bank.taps(row, l) = taps[static_cast<std::size_t>(l)];
    ++row;
  });
  bank.taps.bottomRows(half) = -bank.taps.topRows(half);
  bank.validate();
  return bank;
}

}  // namespace detail

/// Multi-phase gammatone bank: centers on the ERB-rate grid from 100 Hz to
/// 4000 Hz, several phases in [0, pi) per center, and the negation of every
/// filter appended as the second half of the rows.
inline Filterbank build_mpgtf(const ErbParams &p, int n_filters = 512, int frame_len = 16,
                              int sample_rate = 8000, const MpgtfOptions &opt = {}) {
  return detail::build_multiphase_bank(p, n_filters, frame_len, sample_rate, opt, FilterKind::MPGTF);
}

/// Same construction as build_mpgtf at a trainable (c1, c2). The first
/// center stays at 100 Hz for every parameter value.
inline Filterbank build_parampgtf(const ErbParams &p, int n_filters = 512, int frame_len = 16,
                                  int sample_rate = 8000, const MpgtfOptions &opt = {}) {
  p.validate();
  MpgtfOptions pinned = opt;
  pinned.f_first = 100.0;
  return detail::build_multiphase_bank(p, n_filters, frame_len, sample_rate, pinned, FilterKind::ParaMPGTF);
}

/// Index of the peak-magnitude tap of every filter before normalization, in
/// row order for the first half of the bank. The bank is a smooth function of
/// (c1, c2) wherever this pattern (and hence the center count) is locally
/// constant; max-abs normalization has a kink where it changes.
inline std::vector<int> normalization_pattern(const ErbParams &p, int n_filters = 512, int frame_len = 16,
                                              int sample_rate = 8000, const MpgtfOptions &opt = {}) {
  const auto layout = detail::multiphase_layout(p, n_filters, frame_len, sample_rate, opt);
  std::vector<int> pattern;
  detail::for_each_multiphase_filter(p, layout, frame_len, sample_rate, opt, [&](const GammatoneSpec &spec) {
    const auto raw = gammatone_ir(spec, false);
    const auto it = std::max_element(raw.begin(), raw.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    pattern.push_back(static_cast<int>(it - raw.begin()));
  });
  return pattern;
}

/// Recommended 2 ms filter length in samples.
inline int two_ms_length(int sample_rate) { return static_cast<int>(std::lround(0.002 * sample_rate)); }

}  // namespace fblab
