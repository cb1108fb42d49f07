// fblab/erb.hpp

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

#include "fblab/error.hpp"

namespace fblab {

/// The affine ERB model ERB(f) = c1 + f / c2. c1 is in Hz, c2 is dimensionless.
struct ErbParams {
  double c1 = 24.7;
  double c2 = 9.265;

  bool valid() const { return std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 && c2 > 0.0; }
  void validate() const {
    if (!valid()) throw InvalidArgument("invalid ERB parameters");
  }
  friend bool operator==(const ErbParams &, const ErbParams &) = default;
};

/// Equivalent rectangular bandwidth at center frequency `fc` (Hz).
inline double erb(double fc, const ErbParams &p) { return p.c1 + fc / p.c2; }

/// Gammatone bandwidth parameter b for a filter of order `order` whose ERB is
/// `erb_value`:
///
///   b = ERB * sqrt((n-1)!) / (pi * (2n-2)! * 2^(2-2n))
///
/// At n = 2 this is 2*ERB/pi, matching the usual ERB-to-b relation.
inline double bandwidth_b(double erb_value, int order) {
  detail::require(order >= 1, "gammatone order must be >= 1");
  if (order > 12) throw InvalidArgument("gammatone order > 12 overflows the factorial terms");
  detail::require(erb_value > 0.0, "ERB must be positive");
  auto factorial = [](int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  const double num = erb_value * std::sqrt(factorial(order - 1));
  const double den = std::numbers::pi * factorial(2 * order - 2) * std::ldexp(1.0, 2 - 2 * order);
  return num / den;
}

/// ERB-rate of `f_hz`: c2 * ln(1 + f / (c1 c2)).
inline double erb_scale(double f_hz, const ErbParams &p) {
  return p.c2 * std::log1p(f_hz / (p.c1 * p.c2));
}

/// Inverse of erb_scale: c1 c2 (exp(u / c2) - 1).
inline double erb_scale_inv(double u, const ErbParams &p) {
  return p.c1 * p.c2 * std::expm1(u / p.c2);
}

/// Centers spaced one ERB-rate unit apart, starting exactly at `f_start` and
/// stopping before the next center would exceed `f_max`.
inline std::vector<double> center_frequency_grid(const ErbParams &p, double f_start, double f_max) {
  p.validate();
  detail::require(f_start > 0.0, "f_start must be positive");
  if (!(f_start < f_max)) throw InvalidArgument("f_start must be below f_max");
  std::vector<double> centers{f_start};
  for (;;) {
    const double next = erb_scale_inv(erb_scale(centers.back(), p) + 1.0, p);
    if (next > f_max) break;
    centers.push_back(next);
  }
  return centers;
}

}  // namespace fblab
