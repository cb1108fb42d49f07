// fblab/codec.hpp

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
#include <string>

#include <Eigen/SVD>

#include "fblab/dsp_core.hpp"
#include "fblab/error.hpp"
#include "fblab/filterbank.hpp"
#include "fblab/wav.hpp"

namespace fblab {

/// Encoder output X(n, i): N rows (filters) by I columns (frames).
struct TFRepresentation {
  Matrix values;
  FrameParams frame_params;
  bool relu_applied = false;
  int sample_rate = 8000;

  Eigen::Index num_filters() const { return values.rows(); }
  Eigen::Index num_frames() const { return values.cols(); }
};

/// Elementwise weights in [0, 1], same shape as the representation it masks.
struct Mask {
  Matrix values;

  void validate() const {
    detail::require(values.allFinite(), "mask must be finite");
    detail::require(values.size() == 0 || (values.minCoeff() >= 0.0 && values.maxCoeff() <= 1.0),
                    "mask values must lie in [0, 1]");
  }
  static Mask constant(Eigen::Index rows, Eigen::Index cols, double v) {
    return Mask{Matrix::Constant(rows, cols, v)};
  }
};

/// The matrix the encoder applies to each frame. The encoder convolves, so
/// entry (n, l) pairs sample l of the frame with h_n(L - l), i.e. tap L-1-l.
inline Matrix analysis_matrix(const Filterbank &bank) { return bank.taps.rowwise().reverse(); }

/// X(n, i) = H(sum_l x(iD + l) h_n(L - l)), H = ReLU when `apply_relu`.
inline TFRepresentation encode(const Waveform &x, const Filterbank &bank, const FrameParams &p, bool apply_relu) {
  p.validate();
  bank.validate();
  detail::require(bank.sample_rate == x.sample_rate(), "bank and signal sample rates differ");
  detail::require(bank.length() == p.frame_len, "bank tap length must equal the frame length");
  const Matrix frames = frame_signal(x, p);
  const Matrix a = analysis_matrix(bank);
  const Eigen::Index n_rows = a.rows(), n_frames = frames.rows(), L = a.cols();
  TFRepresentation rep;
  rep.values = Matrix::Zero(n_rows, n_frames);
  // Every output accumulates its L products in order l = 0..L-1, so results
  // do not depend on how a matrix library would block the product.
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    double *out = rep.values.col(i).data();
    for (Eigen::Index l = 0; l < L; ++l) {
      const double xv = frames(i, l);
      const double *col = a.col(l).data();
      for (Eigen::Index n = 0; n < n_rows; ++n) out[n] += xv * col[n];
    }
  }
  if (apply_relu) rep.values = rep.values.cwiseMax(0.0);
  rep.frame_params = p;
  rep.relu_applied = apply_relu;
  rep.sample_rate = x.sample_rate();
  return rep;
}

/// Frame synthesis s(k, i) = sum_n S(n, i) d_n(k) with decoder row d_n,
/// followed by overlap-add at the representation's hop.
inline Waveform decode(const TFRepresentation &s, const Filterbank &dec_bank) {
  dec_bank.validate();
  detail::require(dec_bank.num_filters() == s.num_filters(), "decoder filter count must match representation rows");
  detail::require(dec_bank.length() == s.frame_params.frame_len, "decoder tap length must equal the frame length");
  const Matrix frames = s.values.transpose() * dec_bank.taps;
  return overlap_add(frames, s.frame_params, s.sample_rate);
}

inline TFRepresentation apply_mask(const TFRepresentation &x, const Mask &m) {
  detail::require(m.values.rows() == x.values.rows() && m.values.cols() == x.values.cols(),
                  "mask shape does not match representation");
  TFRepresentation out = x;
  out.values = x.values.cwiseProduct(m.values);
  return out;
}

/// Relative cutoff below which singular values are treated as zero.
inline constexpr double kPinvRelTol = 1e-10;

/// Moore-Penrose pseudo-inverse via SVD; singular values below
/// kPinvRelTol * sigma_max are dropped.
inline Matrix pinv(const Matrix &a, double rel_tol = kPinvRelTol) {
  detail::require(a.allFinite(), "pseudo-inverse of a non-finite matrix");
  if (a.size() == 0) return Matrix(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &sv = svd.singularValues();
  const double cutoff = rel_tol * (sv.size() ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cutoff) inv(k) = 1.0 / sv(k);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline Eigen::Index numerical_rank(const Matrix &a, double rel_tol = kPinvRelTol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto &sv = svd.singularValues();
  const double cutoff = rel_tol * sv(0);
  return (sv.array() > cutoff).count();
}

namespace detail {

inline Filterbank decoder_from_rows(const Filterbank &enc, Matrix rows) {
  Filterbank dec;
  dec.taps = std::move(rows);
  dec.sample_rate = enc.sample_rate;
  dec.kind = FilterKind::Custom;
  dec.center_freqs = enc.center_freqs;
  dec.erb_params = enc.erb_params;
  dec.conditioning_warning = enc.conditioning_warning;
  return dec;
}

}  // namespace detail

/// Decoder bank built from the pseudo-inverse of the encoder's analysis
/// matrix, stored transposed (row n has L taps). With a full-rank bank,
/// decode(encode(x)) reproduces every frame.
inline Filterbank pseudo_inverse(const Filterbank &bank) {
  detail::require(bank.taps.allFinite(), "filterbank taps must be finite");
  bank.validate();
  return detail::decoder_from_rows(bank, pinv(analysis_matrix(bank)).transpose());
}

/// Decoder for a sign-split bank [H; -H] fed with ReLU outputs. Since
/// relu(a) - relu(-a) = a, rows [P^T; -P^T] with P = pinv(H) undo the
/// rectified representation exactly. Applied to a linear (non-ReLU)
/// representation it returns twice the input.
inline Filterbank sign_split_pseudo_inverse(const Filterbank &bank) {
  bank.validate();
  detail::require(is_sign_split(bank), "bank is not sign-split (second half must negate the first)");
  const Eigen::Index half = bank.num_filters() / 2;
  const Matrix p_t = pinv(analysis_matrix(bank).topRows(half)).transpose();
  Matrix rows(bank.num_filters(), bank.length());
  rows.topRows(half) = p_t;
  rows.bottomRows(half) = -p_t;
  return detail::decoder_from_rows(bank, std::move(rows));
}

/// The decoder used for a given encoder mode: the ReLU-aware inverse for
/// sign-split banks under ReLU, the plain pseudo-inverse otherwise.
inline Filterbank decoder_for(const Filterbank &enc, bool apply_relu) {
  if (apply_relu && is_sign_split(enc)) return sign_split_pseudo_inverse(enc);
  return pseudo_inverse(enc);
}

/// Time-frequency bin of every filter row. Rows that differ only in phase or
/// sign share a bin: the cos/sin pair of an STFT frequency, or every phase
/// variant (and its negation) at one gammatone center. Banks without that
/// structure get one bin per row.
inline std::vector<int> tf_bins(const Filterbank &bank) {
  const auto n = static_cast<int>(bank.num_filters());
  std::vector<int> bins(static_cast<std::size_t>(n));
  const bool split = is_sign_split(bank);
  const int half = split ? n / 2 : n;
  if (bank.kind == FilterKind::STFT && half % 2 == 0) {
    for (int r = 0; r < n; ++r) bins[static_cast<std::size_t>(r)] = (r % half) / 2;
    return bins;
  }
  if ((bank.kind == FilterKind::MPGTF || bank.kind == FilterKind::ParaMPGTF) && split && bank.center_freqs &&
      !bank.center_freqs->empty() && half >= static_cast<int>(bank.center_freqs->size())) {
    const int m = static_cast<int>(bank.center_freqs->size());
    int r = 0;
    for (int j = 0; j < m; ++j) {
      const int count = half / m + (j < half % m ? 1 : 0);
      for (int k = 0; k < count; ++k, ++r) {
        bins[static_cast<std::size_t>(r)] = j;
        bins[static_cast<std::size_t>(r + half)] = j;
      }
    }
    return bins;
  }
  for (int r = 0; r < n; ++r) bins[static_cast<std::size_t>(r)] = r;
  return bins;
}

/// Rows `n,i,value`.
inline std::string representation_csv(const TFRepresentation &x) {
  std::string out = "n,i,value\n";
  for (Eigen::Index n = 0; n < x.values.rows(); ++n)
    for (Eigen::Index i = 0; i < x.values.cols(); ++i) {
      out += std::to_string(n);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += detail::format_double(x.values(n, i));
      out += '\n';
    }
  return out;
}

}  // namespace fblab
