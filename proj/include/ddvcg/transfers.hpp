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

#include "ddvcg/estimators.hpp"
#include "ddvcg/instance.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ddvcg {

struct Scenario;

struct TransferRule {
  enum class Kind {
    vcg,                          // message-driven VCG (signals priced via the reported posterior)
    generalized_vcg,              // message-driven, quadratic-loss scenario only
    data_driven_vcg,              // payoffs of others evaluated at the estimator draw
    regularized_data_driven_vcg,  // data-driven VCG with the divergence penalty
    per_click_pivot,              // winner pays max_{j != i} theta_j per realized click
    per_impression,               // message-driven per-impression pivot
    leave_one_out                 // two-stage: state estimate built from others' reports
  };
  enum class HPolicy { zero, pivot };

  Kind kind = Kind::data_driven_vcg;
  HPolicy h_policy = HPolicy::pivot;
  int mc_samples = 500;
  std::uint64_t seed = 0;
};

bool is_message_driven(TransferRule::Kind kind);
std::string to_string(TransferRule::Kind kind);
std::string to_string(TransferRule::HPolicy policy);

// An estimator realization. sample_size 0 denotes the ex-post case.
struct EstimateDraw {
  Vec value;
  int sample_size = 0;
};

// A reported profile with its allocations solved once. The draw-dependent part
// of every transfer evaluates against this.
struct SolvedProfile {
  std::vector<int> theta_idx, sig_idx;
  std::vector<Vec> theta;
  Vec x;                       // x*(theta', s')
  int x_index = -1;            // finite outcome index when applicable
  std::vector<Vec> x_excl;     // per agent: x*(theta'_{-i}, s'_{-i})
  std::vector<int> x_excl_index;
  double penalty = 0.0;              // alpha * rho(x*, x_0(s')) in regularized scenarios
  std::vector<double> penalty_excl;  // per agent, same for the sub-problem
  // Maximized social objective of the (n-1)-agent problem at the leave-one-out
  // posterior (alpha log Z(theta_{-i}, s_{-i}) under KL); the regularized pivot
  // charges it as a deterministic offset.
  std::vector<double> sub_objective;
};

SolvedProfile solve_profile(const Scenario& scn, const TransferRule& rule,
                            const std::vector<int>& theta_idx, const std::vector<int>& sig_idx);

// t_i(theta', s', omega_hat) given the solved allocations. For message-driven
// kinds the value is constant in omega_hat.
double realized_transfer(const Scenario& scn, const TransferRule& rule, const SolvedProfile& sp,
                         int i, const Vec& omega_hat);

// --- named payment rules ------------------------------------------------------

double vcg_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                    const std::vector<int>& sig_idx, TransferRule::HPolicy h_policy);

// k_i(s_{-i}; theta) - (theta_i - theta_j) E[omega | s], k normalized to zero.
// Registered for the quadratic-loss scenario only.
double generalized_vcg_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                                const std::vector<int>& sig_idx);

double data_driven_vcg_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                                const std::vector<int>& sig_idx, const EstimateDraw& draw,
                                TransferRule::HPolicy h_policy);

double regularized_data_driven_vcg_transfer(const Scenario& scn, int i,
                                            const std::vector<int>& theta_idx,
                                            const std::vector<int>& sig_idx,
                                            const EstimateDraw& draw,
                                            TransferRule::HPolicy h_policy);

// Per-click price max_{j != i} theta_j, charged on the winner's realized clicks.
double per_click_pivot_price(const Scenario& scn, int i, const std::vector<int>& theta_idx);

// Builds the leave-one-out estimate from the other agents' second-stage
// reports (coordinate-wise mean by default) and evaluates the data-driven
// formula. Exactly invariant in agent i's own entry.
double leave_one_out_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                              const std::vector<int>& sig_idx,
                              const std::vector<Vec>& second_stage_reports,
                              TransferRule::HPolicy h_policy);

Vec leave_one_out_aggregate(const std::vector<Vec>& reports, int excl_agent);

// --- expected transfers ---------------------------------------------------------

struct ExpectedValue {
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error; 0 in exact-law mode
};

// E_{omega|s_true} E_{omega_hat|omega} [ t_i(theta', s', omega_hat) ], exact for
// finite-support estimators and seeded Monte Carlo otherwise.
ExpectedValue expected_transfer(const Scenario& scn, const TransferRule& rule,
                                const Estimator& est, int i, const std::vector<int>& theta_rep,
                                const std::vector<int>& sig_rep, const std::vector<int>& sig_true);

// Same integrand conditional on one state (the inner expectation only).
ExpectedValue expected_transfer_given_state(const Scenario& scn, const TransferRule& rule,
                                            const Estimator& est, const SolvedProfile& sp, int i,
                                            int omega_index);

}  // namespace ddvcg
