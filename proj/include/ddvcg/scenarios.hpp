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

#include "ddvcg/allocation.hpp"
#include "ddvcg/instance.hpp"
#include "ddvcg/transfers.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ddvcg {

// A registered instance family: validated instance, default allocation and
// transfer rules, and whatever closed forms the family supplies.
struct Scenario {
  std::string name;
  std::shared_ptr<const Instance> instance;
  AllocationRule allocation;
  TransferRule default_transfer;

  ClosedFormFn closed_form;            // null when the family has none
  ClosedFormExclFn closed_form_excl;   // sub-problem closed form for pivots
  RegularizedContext reg;              // simplex scenarios only
  bool has_reg = false;

  // Posterior over states conditioned on off-grid signal values, available when
  // the family's signal kernels extend to the continuum (quadratic loss).
  std::function<Vec(const std::vector<double>& sig_values)> continuous_posterior;

  bool supports_generalized_vcg = false;
  int ctr_coordinate(int winner) const { return ctr_individual_states ? winner : 0; }
  bool ctr_individual_states = false;
  bool is_ctr = false;

  const Instance& inst() const { return *instance; }
};

// Allocation for a reported profile under the scenario's rule; excl_agent >= 0
// solves the (n-1)-agent sub-problem.
AllocationResult solve_allocation(const Scenario& scn, const std::vector<int>& theta_idx,
                                  const std::vector<int>& sig_idx, int excl_agent = -1);

// --- builders -----------------------------------------------------------------

struct QuadraticParams {
  double mu0 = 0.0;
  double sigma0 = 1.0;
  std::vector<double> sigma_obs = {1.0, 1.0};
  int state_points = 41;
  int signal_points = 9;
  int theta_points = 5;
  double theta_min = -1.0;
  double theta_max = 1.0;
  int x_points = 181;
  double x_margin = 0.5;
  double truncation = 3.0;  // grid half-width in posterior standard deviations
};
Scenario make_quadratic_loss(const QuadraticParams& p = {});

struct CtrCommonParams {
  int num_agents = 2;
  std::vector<double> ctr_levels = {0.2, 0.5, 0.8};
  std::vector<double> theta_levels = {0.1, 0.3, 0.5, 0.7, 0.9};
  double signal_accuracy = 0.6;  // mass on the matching level, rest split evenly
};
Scenario make_ctr_common(const CtrCommonParams& p = {});

struct CtrIndividualParams {
  std::vector<double> ctr_levels = {0.3, 0.6, 1.0};
  std::vector<double> theta_levels = {0.4, 0.5, 1.0};
};
Scenario make_ctr_individual(const CtrIndividualParams& p = {});

struct LlmKlParams {
  int tokens = 3;
  double alpha = 1.0;
  std::vector<double> omega_levels = {0.0, 0.5, 1.0};
  std::vector<double> theta_levels = {0.5, 1.0};
  double signal_accuracy = 0.7;
  std::vector<Mat> base_rewards;  // per agent |T| x |Omega|; defaults built in
  Vec x0;                         // reference distribution; defaults to uniform
  int simplex_resolution = 1000;
};
Scenario make_llm_kl(const LlmKlParams& p = {});

struct InterdependentParams {
  std::vector<double> theta_levels = {0.0, 0.3, 0.5, 0.8};
  double accuracy = 0.8;  // binary-state signal accuracy
};
Scenario make_interdependent_counterexample(const InterdependentParams& p = {});

std::vector<std::string> scenario_names();

// --- scenario demos -------------------------------------------------------------

struct ClickOutcome {
  int clicks = 0;
  double sample_ctr = 0.0;
  double per_click_price = 0.0;
  double payment = 0.0;
};

// Bernoulli click process for the auctioned slot; realized payment prices the
// winner's clicks at the per-click pivot.
ClickOutcome ctr_click_process(const Scenario& scn, int winner, const Vec& omega_true,
                               const std::vector<int>& theta_idx, int impressions,
                               std::uint64_t seed);

struct CtrManipulationDemo {
  double theta1 = 0, theta2 = 0, s1 = 0, s2 = 0;
  double truthful_net = 0;
  double deviation_net = 0;
  double gain = 0;            // (theta1 - theta2) * s1
  int corner_theta_idx = -1;  // index of the (1,1) corner report
  int corner_sig_idx = -1;
};

// Reproduces the profitable corner deviation under per-click pivot payments
// with agent-specific click-through rates.
CtrManipulationDemo individual_ctr_manipulation_demo(const Scenario& scn,
                                                     const std::vector<int>& theta_idx,
                                                     const std::vector<int>& sig_idx);

struct InterdependentDemo {
  double posterior_mean = 0;
  double truthful_net = 0;
  double deviation_net = 0;  // h + theta2 * E[omega|s]
  double gain = 0;
  int best_theta_idx = -1;   // index of theta' = 0
};

// Reproduces the failure of data-driven VCG under interdependent preferences:
// agent 1's best report is theta' = 0.
InterdependentDemo interdependent_counterexample_demo(const Scenario& scn,
                                                      const std::vector<int>& theta_idx,
                                                      const std::vector<int>& sig_idx);

// Posterior mean / variance over the state grid for a posterior vector.
double posterior_mean_scalar(const Instance& inst, const Vec& posterior);
double posterior_var_scalar(const Instance& inst, const Vec& posterior);

}  // namespace ddvcg
