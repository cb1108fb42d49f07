// fblab/dsp_core.hpp

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
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fblab/error.hpp"

namespace fblab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mono time-domain signal. Samples are finite; the rate is positive.
class Waveform {
 public:
  Waveform() = default;

  Waveform(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    detail::require(sample_rate_ > 0, "sample rate must be positive");
    for (double v : samples_)
      detail::require(std::isfinite(v), "waveform contains a non-finite sample");
  }

  static Waveform zeros(std::size_t n, int sample_rate) {
    return Waveform(std::vector<double>(n, 0.0), sample_rate);
  }

  std::span<const double> samples() const { return samples_; }
  const std::vector<double> &data() const { return samples_; }
  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  double energy() const {
    double e = 0.0;
    for (double v : samples_) e += v * v;
    return e;
  }

  Waveform scaled(double g) const {
    std::vector<double> out(samples_);
    for (double &v : out) v *= g;
    return Waveform(std::move(out), sample_rate_);
  }

  /// First `n` samples, zero-padded when the signal is shorter.
  Waveform resized(std::size_t n) const {
    std::vector<double> out(samples_);
    out.resize(n, 0.0);
    return Waveform(std::move(out), sample_rate_);
  }

  friend bool operator==(const Waveform &, const Waveform &) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 8000;
};

inline Waveform operator+(const Waveform &a, const Waveform &b) {
  detail::require(a.sample_rate() == b.sample_rate(), "sample rate mismatch");
  detail::require(a.size() == b.size(), "length mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Waveform(std::move(out), a.sample_rate());
}

/// Frame length L and hop D, both in samples.
struct FrameParams {
  int frame_len = 16;
  int hop = 8;

  void validate() const {
    detail::require(frame_len >= 1, "frame length must be >= 1");
    detail::require(hop >= 1 && hop <= frame_len, "hop must satisfy 1 <= hop <= frame_len");
  }
  friend bool operator==(const FrameParams &, const FrameParams &) = default;
};

/// Number of frames produced for a signal of `len` samples.
inline std::size_t num_frames(std::size_t len, const FrameParams &p) {
  const std::size_t L = static_cast<std::size_t>(p.frame_len);
  const std::size_t D = static_cast<std::size_t>(p.hop);
  const std::size_t excess = len > L ? len - L : 0;
  return (excess + D - 1) / D + 1;
}

/// Length of the signal rebuilt by overlap-add from `frames` frames.
inline std::size_t ola_length(std::size_t frames, const FrameParams &p) {
  return frames == 0 ? 0 : (frames - 1) * static_cast<std::size_t>(p.hop) + p.frame_len;
}

/// Slices `x` into frames of `frame_len` samples every `hop` samples.
/// Row i of the result holds x(iD), ..., x(iD+L-1); the trailing partial
/// frame is zero-padded.
inline Matrix frame_signal(const Waveform &x, const FrameParams &p) {
  p.validate();
  if (x.empty()) throw InvalidArgument("empty input");
  const std::size_t count = num_frames(x.size(), p);
  Matrix frames = Matrix::Zero(static_cast<Eigen::Index>(count), p.frame_len);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * static_cast<std::size_t>(p.hop);
    for (int l = 0; l < p.frame_len; ++l) {
      const std::size_t t = start + static_cast<std::size_t>(l);
      if (t < x.size()) frames(static_cast<Eigen::Index>(i), l) = x[t];
    }
  }
  return frames;
}

/// Sums frame rows back into a signal of length (frames-1)*D + L.
/// Overlapping regions are added without any window compensation.
inline Waveform overlap_add(const Matrix &frames, const FrameParams &p, int sample_rate) {
  p.validate();
  detail::require(frames.cols() == p.frame_len, "frame length does not match frame params");
  std::vector<double> out(ola_length(static_cast<std::size_t>(frames.rows()), p), 0.0);
  // Fixed summation order: frame by frame, left to right.
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    const std::size_t start = static_cast<std::size_t>(i) * static_cast<std::size_t>(p.hop);
    for (int l = 0; l < p.frame_len; ++l) out[start + static_cast<std::size_t>(l)] += frames(i, l);
  }
  return Waveform(std::move(out), sample_rate);
}

inline Waveform overlap_add(const std::vector<std::vector<double>> &frames, const FrameParams &p,
                            int sample_rate) {
  p.validate();
  Matrix m(static_cast<Eigen::Index>(frames.size()), p.frame_len);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].size() != static_cast<std::size_t>(p.frame_len))
      throw InvalidArgument("inconsistent frame lengths");
    for (int l = 0; l < p.frame_len; ++l) m(static_cast<Eigen::Index>(i), l) = frames[i][l];
  }
  return overlap_add(m, p, sample_rate);
}

/// Target mixing level. `snr_db` is the energy ratio of the first source
/// to the scaled second source.
struct MixSpec {
  double snr_db = 0.0;
  std::uint64_t seed = 0;

  /// Draws snr_db uniformly from [lo, hi] using `seed`.
  static MixSpec random(std::uint64_t seed, double lo = -5.0, double hi = 5.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    return MixSpec{dist(rng), seed};
  }
};

struct MixResult {
  Waveform mixture;
  double gain = 1.0;
  /// The sources as actually summed: s1 and gain * s2, at the common length.
  Waveform source1;
  Waveform source2;
};

/// Mixes x = s1 + g*s2 with g chosen so that 10*log10(E1 / (g^2 E2)) equals
/// spec.snr_db. Both sources are truncated to the shorter length first.
inline MixResult mix_at_snr(const Waveform &s1, const Waveform &s2, const MixSpec &spec) {
  detail::require(s1.sample_rate() == s2.sample_rate(), "sample rate mismatch");
  detail::require(std::isfinite(spec.snr_db), "snr_db must be finite");
  const std::size_t n = std::min(s1.size(), s2.size());
  Waveform a = s1.resized(n);
  Waveform b = s2.resized(n);
  const double e1 = a.energy();
  const double e2 = b.energy();
  if (!(e1 > 0.0) || !(e2 > 0.0)) throw InvalidArgument("silent source");
  const double g = std::sqrt((e1 / e2) * std::pow(10.0, -spec.snr_db / 10.0));
  Waveform b_scaled = b.scaled(g);
  Waveform mix = a + b_scaled;
  return MixResult{std::move(mix), g, std::move(a), std::move(b_scaled)};
}

}  // namespace fblab
