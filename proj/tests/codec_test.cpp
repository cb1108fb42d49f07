// tests/codec_test.cpp

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

#include <random>

#include <gtest/gtest.h>

#include "fblab/codec.hpp"
#include "fblab/gammatone.hpp"
#include "fblab/stft_bank.hpp"
#include "oracles.hpp"

namespace fblab {
namespace {

using testing::max_abs;

std::vector<std::vector<double>> rows_of(const Filterbank &b) {
  std::vector<std::vector<double>> h(static_cast<std::size_t>(b.num_filters()));
  for (Eigen::Index n = 0; n < b.num_filters(); ++n)
    for (Eigen::Index l = 0; l < b.length(); ++l) h[static_cast<std::size_t>(n)].push_back(b.taps(n, l));
  return h;
}

TEST(Encode, MatchesLoopedEvaluationExactly) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 8), len(1, 64);
  for (int trial = 0; trial < 200; ++trial) {
    const int N = dim(rng), L = dim(rng);
    const int D = std::uniform_int_distribution<int>(1, L)(rng);
    const bool relu = trial % 2 == 1;
    const Filterbank b = testing::random_bank(rng, N, L);
    const Waveform x = testing::random_signal(rng, static_cast<std::size_t>(len(rng)));
    const TFRepresentation rep = encode(x, b, {L, D}, relu);
    const auto want = testing::naive_encode(std::vector<double>(x.samples().begin(), x.samples().end()), rows_of(b),
                                            L, D, relu);
    ASSERT_EQ(rep.num_frames(), static_cast<Eigen::Index>(want[0].size()));
    for (int n = 0; n < N; ++n)
      for (std::size_t i = 0; i < want[0].size(); ++i)
        ASSERT_EQ(rep.values(n, static_cast<Eigen::Index>(i)), want[static_cast<std::size_t>(n)][i])
            << "trial " << trial;
  }
}

TEST(Encode, LastTapImpulsePicksFrameStart) {
  // h = [0, 0, 0, 1]: the tap h(L - l) is nonzero only at l = 0, so each
  // frame reads its first sample.
  Filterbank b;
  b.taps = Matrix::Zero(1, 4);
  b.taps(0, 3) = 1.0;
  const Waveform x({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}, 8000);
  const TFRepresentation rep = encode(x, b, {4, 4}, false);
  ASSERT_EQ(rep.num_frames(), 2);
  EXPECT_EQ(rep.values(0, 0), 1.0);
  EXPECT_EQ(rep.values(0, 1), 5.0);

  // The first tap pairs with the last sample of each frame instead.
  b.taps = Matrix::Zero(1, 4);
  b.taps(0, 0) = 1.0;
  const TFRepresentation last = encode(x, b, {4, 4}, false);
  EXPECT_EQ(last.values(0, 0), 4.0);
  EXPECT_EQ(last.values(0, 1), 8.0);
}

TEST(Encode, ZeroSignalAndRelu) {
  const Filterbank b = build_mpgtf({24.7, 9.265});
  const TFRepresentation z = encode(Waveform::zeros(100, 8000), b, {16, 8}, false);
  EXPECT_EQ(max_abs(z.values), 0.0);

  Filterbank one;
  one.taps = Matrix::Zero(2, 2);
  one.taps(0, 1) = 1.0;
  one.taps(1, 1) = -1.0;
  const Waveform x({3.0, 0.0, -2.0, 0.0}, 8000);
  const TFRepresentation lin = encode(x, one, {2, 2}, false);
  const TFRepresentation rel = encode(x, one, {2, 2}, true);
  EXPECT_TRUE(rel.relu_applied);
  for (Eigen::Index n = 0; n < 2; ++n)
    for (Eigen::Index i = 0; i < 2; ++i) EXPECT_EQ(rel.values(n, i), lin.values(n, i) < 0.0 ? 0.0 : lin.values(n, i));
  EXPECT_EQ(lin.values(1, 0), -3.0);
  EXPECT_EQ(rel.values(1, 0), 0.0);
  EXPECT_EQ(rel.values(0, 0), 3.0);
}

TEST(Encode, LinearInSignal) {
  std::mt19937_64 rng(9);
  const Filterbank b = build_mpgtf({24.7, 9.265});
  for (int trial = 0; trial < 10; ++trial) {
    const Waveform x = testing::random_signal(rng, 200), y = testing::random_signal(rng, 200);
    const double a = 0.7, c = -1.3;
    const Matrix lhs = encode(x.scaled(a) + y.scaled(c), b, {16, 8}, false).values;
    const Matrix rhs = a * encode(x, b, {16, 8}, false).values + c * encode(y, b, {16, 8}, false).values;
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
  }
}

TEST(Encode, ShapeErrors) {
  const Filterbank b = build_mpgtf({24.7, 9.265});
  EXPECT_THROW(encode(Waveform::zeros(100, 8000), b, {8, 4}, false), InvalidArgument);
  EXPECT_THROW(encode(Waveform::zeros(100, 16000), b, {16, 8}, false), InvalidArgument);
}

TEST(Decode, ZeroAndSingleEntry) {
  const Filterbank b = build_mpgtf({24.7, 9.265});
  const Filterbank d = pseudo_inverse(b);
  TFRepresentation s;
  s.values = Matrix::Zero(512, 5);
  s.frame_params = {16, 8};
  const Waveform z = decode(s, d);
  EXPECT_EQ(z.size(), (5u - 1u) * 8u + 16u);
  for (double v : z.samples()) EXPECT_EQ(v, 0.0);

  s.values = Matrix::Zero(512, 1);
  s.values(37, 0) = 2.5;
  const Waveform one = decode(s, d);
  ASSERT_EQ(one.size(), 16u);
  for (int k = 0; k < 16; ++k) EXPECT_EQ(one[static_cast<std::size_t>(k)], 2.5 * d.taps(37, k));

  s.values = Matrix::Zero(511, 1);
  EXPECT_THROW(decode(s, d), InvalidArgument);
}

TEST(Decode, OverlapsAreSummed) {
  Filterbank d;
  d.taps = Matrix::Ones(1, 4);
  TFRepresentation s;
  s.values = Matrix::Ones(1, 3);
  s.frame_params = {4, 2};
  const Waveform y = decode(s, d);
  const std::vector<double> want{1, 1, 2, 2, 2, 2, 1, 1};
  ASSERT_EQ(y.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_EQ(y[k], want[k]);
}

TEST(Pinv, PenroseConditionsOnRandomBanks) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix w = analysis_matrix(testing::random_bank(rng, 512, 16));
    const Matrix p = pseudo_inverse(Filterbank{w.rowwise().reverse()}).taps.transpose();
    EXPECT_LT(max_abs(w * p * w - w), 1e-8);
    EXPECT_LT(max_abs(p * w * p - p), 1e-8);
    EXPECT_LT(max_abs((w * p).transpose() - w * p), 1e-8);
    EXPECT_LT(max_abs((p * w).transpose() - p * w), 1e-8);
    EXPECT_LT(max_abs(p - testing::normal_equation_pinv(w)), 1e-8);
  }
}

TEST(Pinv, PenroseConditionsOnRankDeficientBank) {
  // Sign-split banks repeat every row negated; MPGTF at L = 16 spans R^16.
  const Matrix w = analysis_matrix(build_mpgtf({24.7, 9.265}));
  EXPECT_EQ(numerical_rank(w), 16);
  const Matrix p = pinv(w);
  EXPECT_LT(max_abs(w * p * w - w), 1e-8);
  EXPECT_LT(max_abs(p * w * p - p), 1e-8);
  EXPECT_LT(max_abs((w * p).transpose() - w * p), 1e-8);
  EXPECT_LT(max_abs((p * w).transpose() - p * w), 1e-8);

  // A genuinely rank-deficient matrix: its pinv still satisfies all four.
  Matrix r(3, 3);
  r << 1, 2, 3, 2, 4, 6, 1, 0, 1;
  const Matrix rp = pinv(r);
  EXPECT_EQ(numerical_rank(r), 2);
  EXPECT_LT(max_abs(r * rp * r - r), 1e-8);
  EXPECT_LT(max_abs(rp * r * rp - rp), 1e-8);
  EXPECT_LT(max_abs((r * rp).transpose() - r * rp), 1e-8);
  EXPECT_LT(max_abs((rp * r).transpose() - rp * r), 1e-8);
}

TEST(Pinv, SimpleCases) {
  std::mt19937_64 rng(4);
  const Matrix q = Eigen::HouseholderQR<Matrix>(Matrix::Random(8, 8)).householderQ();
  EXPECT_LT(max_abs(pinv(q) - q.transpose()), 1e-12);
  EXPECT_LT(max_abs(pinv(2.0 * Matrix::Identity(5, 5)) - 0.5 * Matrix::Identity(5, 5)), 1e-15);

  // As a decoder: an orthonormal bank decodes with its own analysis rows.
  Filterbank b;
  b.taps = q;
  EXPECT_LT(max_abs(pseudo_inverse(b).taps - analysis_matrix(b)), 1e-12);

  Filterbank bad;
  bad.taps = Matrix::Ones(2, 2);
  bad.taps(0, 0) = std::nan("");
  EXPECT_THROW(pseudo_inverse(bad), InvalidArgument);
  EXPECT_THROW(pinv(bad.taps), InvalidArgument);
}

TEST(Pinv, DecodeEncodeIsIdentity) {
  std::mt19937_64 rng(8);
  for (const Filterbank &b : {build_mpgtf({24.7, 9.265}), build_parampgtf({25.09, 9.198}),
                              build_stft_bank({16, 8, StftMode::Linear}), testing::random_bank(rng, 512, 16)}) {
    const Filterbank d = pseudo_inverse(b);
    for (int trial = 0; trial < 10; ++trial) {
      const Waveform x = testing::random_signal(rng, 160);
      EXPECT_LT(testing::relative_error(decode(encode(x, b, {16, 16}, false), d).resized(160), x), 1e-9);
    }
  }
}

TEST(Pinv, SignSplitDecoderUndoesRelu) {
  std::mt19937_64 rng(12);
  const Filterbank b = build_mpgtf({24.7, 9.265});
  const Filterbank d = decoder_for(b, true);
  EXPECT_EQ(d.num_filters(), 512);
  for (Eigen::Index r = 0; r < 256; ++r) EXPECT_TRUE((d.taps.row(r + 256).array() == -d.taps.row(r).array()).all());
  for (int trial = 0; trial < 10; ++trial) {
    const Waveform x = testing::random_signal(rng, 160);
    EXPECT_LT(testing::relative_error(decode(encode(x, b, {16, 16}, true), d).resized(160), x), 1e-9);
  }
  // The plain pseudo-inverse recovers only half of a rectified sign-split code.
  const Waveform x = testing::random_signal(rng, 160);
  EXPECT_LT(testing::relative_error(decode(encode(x, b, {16, 16}, true), pseudo_inverse(b)).resized(160),
                                    x.scaled(0.5)),
            1e-9);
  // Without ReLU the plain pseudo-inverse is chosen.
  EXPECT_TRUE((decoder_for(b, false).taps.array() == pseudo_inverse(b).taps.array()).all());
  Filterbank single;
  single.taps = Matrix::Identity(3, 3);
  EXPECT_THROW(sign_split_pseudo_inverse(single), InvalidArgument);
}

TEST(ApplyMask, Identities) {
  std::mt19937_64 rng(6);
  const Filterbank b = build_mpgtf({24.7, 9.265});
  const TFRepresentation x = encode(testing::random_signal(rng, 120), b, {16, 8}, true);
  const Eigen::Index N = x.num_filters(), I = x.num_frames();
  EXPECT_TRUE((apply_mask(x, Mask::constant(N, I, 1.0)).values.array() == x.values.array()).all());
  EXPECT_EQ(max_abs(apply_mask(x, Mask::constant(N, I, 0.0)).values), 0.0);
  EXPECT_TRUE(apply_mask(x, Mask::constant(N, I, 0.3)).relu_applied);

  // Complementary masks on a dyadic grid: both products and the sum are exact.
  std::uniform_int_distribution<int> q(0, 64);
  Mask m{Matrix(N, I)};
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index i = 0; i < I; ++i) m.values(n, i) = q(rng) / 64.0;
  Mask comp{Matrix::Ones(N, I) - m.values};
  const Matrix sum = apply_mask(x, m).values + apply_mask(x, comp).values;
  EXPECT_LT(max_abs(sum - x.values), 1e-15 * max_abs(x.values));

  EXPECT_THROW(apply_mask(x, Mask::constant(N, I + 1, 1.0)), InvalidArgument);
  EXPECT_THROW(Mask::constant(2, 2, 1.5).validate(), InvalidArgument);
  EXPECT_NO_THROW(Mask::constant(2, 2, 1.0).validate());
}

TEST(TfBins, Grouping) {
  const Filterbank s = build_stft_bank({16, 4, StftMode::SignSplit});
  EXPECT_EQ(tf_bins(s), (std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3, 0, 0, 1, 1, 2, 2, 3, 3}));
  const auto g = tf_bins(build_mpgtf({24.7, 9.265}));
  ASSERT_EQ(g.size(), 512u);
  EXPECT_EQ(g[0], 0);
  EXPECT_EQ(g[10], 0);
  EXPECT_EQ(g[11], 1);
  EXPECT_EQ(g[255], 23);
  EXPECT_EQ(g[256], 0);
  std::mt19937_64 rng(1);
  const auto r = tf_bins(testing::random_bank(rng, 5, 4));
  EXPECT_EQ(r, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Representation, Csv) {
  TFRepresentation x;
  x.values = Matrix(2, 2);
  x.values << 1.0, -0.5, 0.0, 0.1;
  EXPECT_EQ(representation_csv(x), "n,i,value\n0,0,1\n0,1,-0.5\n1,0,0\n1,1,0.10000000000000001\n");
}

}  // namespace
}  // namespace fblab
