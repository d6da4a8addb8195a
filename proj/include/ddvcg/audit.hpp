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

#include "ddvcg/scenarios.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace ddvcg {

struct AuditOptions {
  std::int64_t budget = 50'000'000;  // cap on deviation evaluations
  int workers = 1;                   // worker count; must not affect outputs
  double zero_tol = 1e-9;            // exact-law "zero regret" tolerance
};

// Best unilateral deviation of one agent at one true profile.
struct DeviationRow {
  int agent = 0;
  int theta_flat = 0;  // joint index over all agents' theta grids
  int sig_flat = 0;    // joint index over all agents' signal grids
  int best_theta_dev = 0;
  int best_sig_dev = 0;
  double gain = 0.0;
  double se = 0.0;
};

struct RegretReport {
  std::vector<DeviationRow> rows;
  double epsilon = 0.0;     // max gain over agents and profiles
  double epsilon_se = 0.0;  // standard error of the argmax row
  double discretization_bound = 0.0;  // max |grid vs closed form gap|, when registered
  bool exact_mode = true;
  std::int64_t evaluations = 0;
};

// Exhaustive unilateral-deviation search: for every agent and true profile,
// maximize v_i(x(dev), theta_i, s) + E[t_i(dev)] over all grid deviations and
// subtract the truthful value. Deviation ties resolve to the last enumerated
// maximizer.
RegretReport posterior_regret(const Scenario& scn, const TransferRule& rule, const Estimator& est,
                              const AuditOptions& opts = {});

// 2 max_s sum_{j != i} L_j E[ ||omega - omega_hat|| | s ] over the signal grid.
double regret_upper_bound(const Scenario& scn, int agent, const Estimator& est);

struct RateRow {
  int m = 0;
  double epsilon = 0.0;
  double se = 0.0;
  double bound = 0.0;
  double rate = 0.0;      // r_m
  double rate_eps = 0.0;  // r_m * epsilon_m
};

struct RateSweep {
  std::vector<RateRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool slope_defined = false;  // false when too few rows exceed the tolerance
};

RateSweep convergence_sweep(const Scenario& scn, const TransferRule& rule,
                            const Estimator& family, const std::vector<int>& ms,
                            const AuditOptions& opts = {});

// Machine-checkable witness that no message-driven transfer scheme exists: the
// VCG-implied offset difference across two signal reports varies with theta_1
// by exactly |theta_a - theta_b| |delta mean| while a valid offset could not
// depend on theta_1 at all.
struct ImpossibilityCertificate {
  double s1 = 0, s1_alt = 0, s2 = 0;
  double theta1_a = 0, theta1_b = 0, theta2 = 0;
  double mean_s = 0, mean_alt = 0;
  double var_s = 0, var_alt = 0;
  double delta_mean = 0;
  double rhs_a = 0, rhs_b = 0;  // offset identity at the two theta_1 values
  double gap = 0;               // |rhs_a - rhs_b|
  double product = 0;           // |theta1_a - theta1_b| * |delta_mean|
  bool matched = false;         // gap equals product within 1e-9
};

// Throws ConditionStarFails when the two posterior means coincide (no witness).
ImpossibilityCertificate impossibility_certificate(const Scenario& scn, double s1, double s1_alt,
                                                   double s2, double theta1_a, double theta1_b,
                                                   double theta2);

// Shared worker-pool helper; any scheduling yields identical results because
// every cell derives from its own seeded stream.
void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& fn);

}  // namespace ddvcg
