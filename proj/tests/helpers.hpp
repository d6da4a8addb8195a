#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 ddvcg authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "ddvcg/instance.hpp"

#include <array>
#include <vector>

namespace ddvcg::testing {

// Two agents observe conditionally independent binary signals of a binary
// state with the given accuracy. Utilities are supplied by the caller.
inline Instance binary_accuracy_instance(double accuracy, std::vector<double> theta_levels,
                                         UtilitySpec util, OutcomeSpace out,
                                         bool full_support = true) {
  StateGrid states;
  for (double w : {0.0, 1.0}) {
    Vec p(1);
    p(0) = w;
    states.points.push_back(p);
  }
  Vec prior(2);
  prior << 0.5, 0.5;

  std::vector<std::vector<Vec>> theta_grids(2), sig_grids(2);
  std::vector<Mat> kernels(2);
  for (int i = 0; i < 2; ++i) {
    for (double t : theta_levels) {
      Vec p(1);
      p(0) = t;
      theta_grids[i].push_back(p);
    }
    for (double s : {0.0, 1.0}) {
      Vec p(1);
      p(0) = s;
      sig_grids[i].push_back(p);
    }
    kernels[i].resize(2, 2);
    kernels[i] << accuracy, 1 - accuracy, 1 - accuracy, accuracy;
  }
  // kernel rows are P(s | omega): omega=0 row has mass `accuracy` on s=0
  for (int i = 0; i < 2; ++i) {
    kernels[i](0, 0) = accuracy;
    kernels[i](0, 1) = 1 - accuracy;
    kernels[i](1, 0) = 1 - accuracy;
    kernels[i](1, 1) = accuracy;
  }
  return Instance(std::move(states), std::move(theta_grids), std::move(sig_grids), prior,
                  std::move(kernels), std::nullopt, {}, std::move(util), std::move(out),
                  full_support);
}

// Independent enumeration of the 8-cell (omega, s1, s2) table for the instance
// above; the oracle the posterior examples were frozen from.
inline double oracle_binary_posterior(double accuracy, int s1, int s2) {
  auto like = [&](int w, int s) { return s == w ? accuracy : 1 - accuracy; };
  double num = 0.5 * like(1, s1) * like(1, s2);
  double den = num + 0.5 * like(0, s1) * like(0, s2);
  return num / den;
}

inline UtilitySpec quadratic_util(int agents, double lipschitz) {
  UtilitySpec util;
  util.lipschitz_omega.assign(agents, lipschitz);
  util.sup_bound.assign(agents, lipschitz * lipschitz / 4);
  for (int i = 0; i < agents; ++i)
    util.payoff.push_back([i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
      double d = x(0) - th[i](0) - w(0);
      return -d * d;
    });
  return util;
}

inline OutcomeSpace scalar_outcomes(double lo, double hi, int n) {
  OutcomeSpace out;
  out.mode = OutcomeSpace::Mode::finite_list;
  for (int k = 0; k < n; ++k) {
    Vec p(1);
    p(0) = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    out.points.push_back(p);
  }
  return out;
}

}  // namespace ddvcg::testing
