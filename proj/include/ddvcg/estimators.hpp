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

#include "ddvcg/common.hpp"

#include <random>
#include <vector>

namespace ddvcg {

struct SupportPoint {
  Vec value;
  double mass = 0.0;
};

// State estimators with commonly known conditional laws. Finite-support kinds
// expose exact mass functions; sampling kinds expose a seeded sampler. Draws
// need not lie on the state grid.
class Estimator {
 public:
  enum class Kind { ex_post, unbiased_noise, sample_mean, bernoulli_ctr };

  static Estimator ex_post();
  // omega +/- h per coordinate, each with probability 1/2 (mean-zero noise).
  static Estimator unbiased_noise(double h);
  // mean of m i.i.d. normal draws centered at omega: omega + N(0, sigma^2/m) per
  // coordinate.
  static Estimator sample_mean(int m, double sigma, double rate_kappa = 0.4);
  // per-coordinate Binomial(m, omega_k)/m click frequencies.
  static Estimator bernoulli_ctr(int m, double rate_kappa = 0.4);

  Kind kind() const { return kind_; }
  bool has_exact_law() const { return kind_ != Kind::sample_mean; }
  int m() const { return m_; }
  double noise_h() const { return h_; }
  double noise_sigma() const { return sigma_; }
  double rate_kappa() const { return kappa_; }

  // Same family at a different sample size.
  Estimator with_m(int m) const;

  // r_m = m^kappa (1 for the ex-post benchmark).
  double rate(int m) const;
  double rate() const { return rate(m_); }

  // Exact conditional mass function; throws EstimatorUnavailable for sampling
  // kinds.
  std::vector<SupportPoint> conditional_law(const Vec& omega) const;

  Vec sample(const Vec& omega, std::mt19937_64& rng) const;

  // E || omega_hat - omega || in the Euclidean norm, exact per kind.
  double mean_abs_error(const Vec& omega) const;

  // E[omega_hat_k | omega] for one coordinate, via the marginal law.
  double coordinate_mean(const Vec& omega, int k) const;

 private:
  Kind kind_ = Kind::ex_post;
  int m_ = 1;
  double h_ = 0.0;
  double sigma_ = 1.0;
  double kappa_ = 0.4;
};

struct ConvergenceRow {
  int m = 0;
  double mean_abs = 0.0;
  double se = 0.0;
  double exact = std::numeric_limits<double>::quiet_NaN();  // NaN when no exact value
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;  // log-log OLS slope of mean_abs in m
  bool monotone = true;
  double sup_rate_scaled = 0.0;  // sup over rows of r_m * E||omega_hat_m - omega||
};

// Per-m mean absolute deviation E||omega_hat_m - omega|| at a fixed omega, with
// Monte Carlo standard errors for sampling kinds and exact values otherwise.
ConvergenceTable empirical_convergence(const Estimator& family, const Vec& omega,
                                       const std::vector<int>& ms, int replications,
                                       std::uint64_t seed);

std::string to_string(Estimator::Kind kind);

}  // namespace ddvcg
