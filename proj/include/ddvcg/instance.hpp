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
#include "ddvcg/index.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace ddvcg {

// Finite grid of state vectors.
struct StateGrid {
  std::vector<Vec> points;

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
};

// Either a finite list of allocation points or the simplex over a token list.
struct OutcomeSpace {
  enum class Mode { finite_list, simplex };

  Mode mode = Mode::finite_list;
  std::vector<Vec> points;  // finite_list mode
  int tokens = 0;           // simplex mode
  int resolution = 1000;    // simplex mode: search cells per coordinate

  int dim() const {
    if (mode == Mode::simplex) return tokens;
    return points.empty() ? 0 : static_cast<int>(points.front().size());
  }
  int size() const { return static_cast<int>(points.size()); }
};

// Per-agent payoff u_i(x, omega, theta). The full theta profile is passed so
// that profile-dependent payoffs are representable; standard payoffs read only
// their own coordinate. omega may be off-grid (estimator draws are plugged in
// directly).
using PayoffFn = std::function<double(const Vec& x, const Vec& omega, const std::vector<Vec>& theta)>;

struct UtilitySpec {
  std::vector<PayoffFn> payoff;
  std::vector<double> lipschitz_omega;  // L_i, NaN when undeclared
  std::vector<double> sup_bound;        // M_i, NaN when undeclared
  bool profile_dependent = false;       // some u_j reads another agent's theta
};

struct SignalCondition {
  int agent = 0;
  int index = 0;  // index into the agent's signal grid
};

// An instance on finite grids: agents, state grid, per-agent preference and
// signal grids, a joint prior in product form P(omega) P(theta) P(s|omega),
// payoff functions and an outcome space. Immutable after construction; all
// queries are pure reads.
class Instance {
 public:
  Instance(StateGrid states,
           std::vector<std::vector<Vec>> theta_grids,
           std::vector<std::vector<Vec>> signal_grids,
           Vec state_prior,
           std::vector<Mat> signal_kernels,           // per agent: |Omega| x |S_i|
           std::optional<Mat> joint_signal_kernel,    // |Omega| x |S joint|; overrides product form
           std::vector<Vec> theta_priors,             // per agent; empty -> uniform
           UtilitySpec utility,
           OutcomeSpace outcomes,
           bool full_support = false);

  int num_agents() const { return n_; }
  const StateGrid& states() const { return states_; }
  const std::vector<Vec>& theta_grid(int i) const { return theta_grids_[i]; }
  const std::vector<Vec>& signal_grid(int i) const { return signal_grids_[i]; }
  const OutcomeSpace& outcomes() const { return outcomes_; }
  const UtilitySpec& utility() const { return utility_; }
  const Vec& state_prior() const { return state_prior_; }
  const Vec& theta_prior(int i) const { return theta_priors_[i]; }

  const IndexProduct& signal_space() const { return sig_space_; }

  // P(omega | conditioned signal coordinates). Throws ZeroMassEvent when the
  // conditioning event has prior mass zero. An empty conditioning set returns
  // the prior marginal over states.
  Vec posterior(const std::vector<SignalCondition>& given) const;

  // Same, conditioning on grid signal values instead of indices.
  Vec posterior_values(const std::vector<std::pair<int, Vec>>& given) const;

  // Cached full-profile posterior P(omega | s) by joint signal index.
  Vec posterior_full(int sig_flat) const;
  double signal_mass(int sig_flat) const { return sig_mass_[sig_flat]; }

  // Cached leave-one-out posterior P(omega | s_{-i}).
  Vec posterior_excl(int agent, int sig_excl_flat) const;

  // Cached single-signal posterior P(omega | s_i).
  Vec posterior_single(int agent, int sig_index) const;

  double payoff(int i, const Vec& x, const Vec& omega, const std::vector<Vec>& theta) const {
    return utility_.payoff[i](x, omega, theta);
  }

  // u_i(x, omega_k, theta) for every state grid point.
  Vec payoff_over_states(int i, const Vec& x, const std::vector<Vec>& theta) const;

  // v_i(x, theta_i, s) = sum_omega P(omega|s) u_i(x, omega, theta_i).
  double interim_payoff(int i, const Vec& x, const std::vector<Vec>& theta, int sig_flat) const;
  double interim_payoff(int i, const Vec& x, const std::vector<Vec>& theta,
                        const std::vector<int>& sig_idx) const;

  int sig_flat(const std::vector<int>& sig_idx) const { return sig_space_.flatten(sig_idx); }

  // Flat joint signal index with agent i's coordinate removed.
  int sig_excl_flat(int agent, int sig_flat) const;
  const IndexProduct& sig_excl_space(int agent) const { return sig_excl_space_[agent]; }

  double declared_lipschitz(int i) const;  // throws MissingLipschitzConstant when undeclared

 private:
  void validate(bool full_support) const;
  void build_posteriors();

  int n_ = 0;
  StateGrid states_;
  std::vector<std::vector<Vec>> theta_grids_;
  std::vector<std::vector<Vec>> signal_grids_;
  Vec state_prior_;
  std::vector<Mat> signal_kernels_;
  std::vector<Vec> theta_priors_;
  UtilitySpec utility_;
  OutcomeSpace outcomes_;

  IndexProduct sig_space_;
  std::vector<IndexProduct> sig_excl_space_;
  Mat joint_ws_;                    // |Omega| x |S joint|: P(omega, s)
  Mat posterior_full_;              // |S joint| x |Omega| rows P(.|s)
  Vec sig_mass_;                    // P(s) per joint signal index
  std::vector<Mat> posterior_excl_; // per agent: |S_{-i}| x |Omega|
  std::vector<Vec> excl_mass_;
  std::vector<Mat> posterior_single_;
  std::vector<Vec> single_mass_;
};

// Distinctness helper shared by grid validation.
bool all_points_distinct(const std::vector<Vec>& pts, double tol = 0.0);

}  // namespace ddvcg
