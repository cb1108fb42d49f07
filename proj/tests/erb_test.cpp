// tests/erb_test.cpp

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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fblab/erb.hpp"
#include "oracles.hpp"

namespace fblab {
namespace {

const ErbParams kDefaults{24.7, 9.265};

// Frozen from a 30-digit evaluation of the closed forms.
constexpr double kErbAt100 = 35.4933081489476524554776;
constexpr double kErbScaleAt100 = 3.35894173712947068194416;
constexpr double kSecondCenter = 137.479573106989826790592;
constexpr double kErbScaleInvAtC2 = 393.221064174624436408643;

TEST(Erb, Examples) {
  EXPECT_NEAR(erb(100.0, kDefaults), kErbAt100, 1e-9);
  EXPECT_EQ(erb(0.0, kDefaults), kDefaults.c1);
  EXPECT_DOUBLE_EQ(erb(kDefaults.c2, kDefaults), kDefaults.c1 + 1.0);
}

TEST(BandwidthB, Examples) {
  EXPECT_NEAR(bandwidth_b(std::numbers::pi, 2), 2.0, 1e-15);
  EXPECT_NEAR(bandwidth_b(35.4933, 2), 22.595736566574274, 1e-12);
  EXPECT_NEAR(bandwidth_b(35.4933, 1), 35.4933 / std::numbers::pi, 1e-12);
  // n = 3 as printed: ERB sqrt(2!) / (pi 4! 2^-4).
  EXPECT_NEAR(bandwidth_b(35.4933, 3), 10.651732368086337, 1e-12);
}

TEST(BandwidthB, OrderTwoMatchesClosedForm) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(1.0, 1000.0);
  for (int i = 0; i < 100; ++i) {
    const double e = d(rng);
    EXPECT_NEAR(bandwidth_b(e, 2), 2.0 * e / std::numbers::pi, 1e-12);
  }
}

TEST(BandwidthB, Errors) {
  EXPECT_THROW(bandwidth_b(10.0, 13), InvalidArgument);
  EXPECT_THROW(bandwidth_b(10.0, 0), InvalidArgument);
  EXPECT_THROW(bandwidth_b(0.0, 2), InvalidArgument);
  EXPECT_NO_THROW(bandwidth_b(10.0, 12));
}

TEST(ErbScale, Examples) {
  EXPECT_EQ(erb_scale(0.0, kDefaults), 0.0);
  EXPECT_NEAR(erb_scale(100.0, kDefaults), kErbScaleAt100, 1e-12);
  for (const ErbParams p : {kDefaults, ErbParams{25.09, 9.198}, ErbParams{3.0, 40.0}}) {
    const double f = p.c1 * p.c2 * (std::numbers::e - 1.0);
    EXPECT_NEAR(erb_scale(f, p), p.c2, 1e-12 * p.c2);
  }
}

TEST(ErbScaleInv, Examples) {
  EXPECT_EQ(erb_scale_inv(0.0, kDefaults), 0.0);
  EXPECT_NEAR(erb_scale_inv(kDefaults.c2, kDefaults), kErbScaleInvAtC2, 1e-10);
  for (double f : {100.0, 500.0, 4000.0})
    EXPECT_NEAR(erb_scale_inv(erb_scale(f, kDefaults), kDefaults), f, 1e-9 * f);
}

TEST(ErbScale, InverseIdentityForRandomParams) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> c1(1.0, 100.0), c2(1.0, 30.0), f(0.0, 8000.0);
  for (int i = 0; i < 2000; ++i) {
    const ErbParams p{c1(rng), c2(rng)};
    const double x = f(rng);
    const double back = erb_scale_inv(erb_scale(x, p), p);
    EXPECT_LE(std::abs(back - x), 1e-9 * std::max(x, 1e-300)) << x;
  }
}

TEST(ErbScale, StrictlyIncreasing) {
  double prev = -1.0;
  for (int f = 0; f <= 8000; f += 10) {
    const double u = erb_scale(f, kDefaults);
    EXPECT_GT(u, prev);
    prev = u;
  }
}

TEST(CenterGrid, DefaultGrid) {
  const auto g = center_frequency_grid(kDefaults, 100.0, 4000.0);
  ASSERT_EQ(g.size(), 24u);
  EXPECT_EQ(g.front(), 100.0);
  EXPECT_NEAR(g[1], kSecondCenter, 1e-9);
  EXPECT_LE(g.back(), 4000.0);
  const auto oracle = testing::center_grid_oracle(24.7, 9.265, 100.0, 4000.0);
  ASSERT_EQ(oracle.size(), g.size());
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(g[j], oracle[j], 1e-9 * oracle[j]);
}

TEST(CenterGrid, UnitErbStepsForRandomParams) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c1(15.0, 35.0), c2(6.0, 12.0);
  for (int i = 0; i < 200; ++i) {
    const ErbParams p{c1(rng), c2(rng)};
    const auto g = center_frequency_grid(p, 100.0, 4000.0);
    EXPECT_EQ(g.front(), 100.0);
    for (std::size_t j = 1; j < g.size(); ++j) {
      EXPECT_GT(g[j], g[j - 1]);
      EXPECT_NEAR(erb_scale(g[j], p) - erb_scale(g[j - 1], p), 1.0, 1e-9);
    }
    EXPECT_LE(g.back(), 4000.0);
    EXPECT_GT(erb_scale_inv(erb_scale(g.back(), p) + 1.0, p), 4000.0);
  }
}

TEST(CenterGrid, DependsOnC2) {
  const auto a = center_frequency_grid(kDefaults, 100.0, 4000.0);
  const auto b = center_frequency_grid({24.7, 9.265 * (1 + 1e-6)}, 100.0, 4000.0);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a[0], b[0]);
  for (std::size_t j = 1; j < a.size(); ++j) EXPECT_NE(a[j], b[j]);
}

TEST(CenterGrid, Errors) {
  EXPECT_THROW(center_frequency_grid(kDefaults, 4000.0, 4000.0), InvalidArgument);
  EXPECT_THROW(center_frequency_grid(kDefaults, 5000.0, 4000.0), InvalidArgument);
  EXPECT_THROW(center_frequency_grid({-1.0, 9.265}, 100.0, 4000.0), InvalidArgument);
}

}  // namespace
}  // namespace fblab
