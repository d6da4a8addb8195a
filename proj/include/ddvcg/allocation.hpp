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

#include <functional>
#include <string>
#include <vector>

namespace ddvcg {

struct AllocationRule {
  enum class Mode { grid_argmax, closed_form, kl_closed_form };
  Mode mode = Mode::grid_argmax;
  std::string closed_form_name;  // registered scenario closed form, Mode::closed_form only
};

// Closed-form allocation: grid profile indices -> allocation point (possibly
// off the outcome grid).
using ClosedFormFn =
    std::function<Vec(const Instance&, const std::vector<int>& theta_idx, const std::vector<int>& sig_idx)>;

// Closed form of the (n-1)-agent sub-problem used by pivot offsets.
using ClosedFormExclFn = std::function<Vec(const Instance&, int excl_agent,
                                           const std::vector<int>& theta_idx,
                                           const std::vector<int>& sig_idx)>;

struct AllocationResult {
  Vec point;
  int index = -1;  // index into the finite outcome list; -1 for off-grid / simplex points
};

std::vector<Vec> theta_vectors(const Instance& inst, const std::vector<int>& theta_idx);
std::vector<Vec> sig_vectors(const Instance& inst, const std::vector<int>& sig_idx);

// sum over included agents of v_i(x, theta_i, s) under the given posterior.
double welfare(const Instance& inst, const Vec& x, const std::vector<Vec>& theta,
               const Vec& posterior, int excl_agent = -1);

// argmax over the finite outcome list; ties resolve to the lowest index.
AllocationResult finite_argmax(const Instance& inst, const std::vector<Vec>& theta,
                               const Vec& posterior, int excl_agent = -1);

// --- KL-regularized simplex allocations -------------------------------------

// Aggregate expected token rewards R(t) = sum_i E_{omega|s}[r_i(t, omega, theta_i)],
// obtained by evaluating payoffs at simplex vertices.
Vec token_rewards(const Instance& inst, const std::vector<Vec>& theta, const Vec& posterior,
                  int excl_agent = -1);

// x*(t) proportional to x0(t) exp(R(t)/alpha), normalized in log-sum-exp form.
Vec kl_regularized_distribution(const Vec& rewards, const Vec& x0, double alpha);

// log of the partition function Z = sum_t x0(t) exp(R(t)/alpha).
double kl_log_partition(const Vec& rewards, const Vec& x0, double alpha);

double kl_divergence(const Vec& x, const Vec& x0);  // throws DivergenceUndefined

// sum_t R(t) x(t) - alpha * KL(x || x0).
double regularized_objective_value(const Vec& rewards, const Vec& x, const Vec& x0, double alpha);

// Brute-force argmax of the regularized objective over the simplex grid with
// `resolution` cells per coordinate. Desk-scale verification route.
Vec simplex_grid_argmax(const Vec& rewards, const Vec& x0, double alpha, int resolution);

// --- top-level dispatch ------------------------------------------------------

// Regularization context for simplex outcome spaces. The reference
// distribution may condition on reported signals; excl_agent >= 0 asks for the
// reference of the (n-1)-agent sub-problem.
struct RegularizedContext {
  double alpha = 1.0;
  std::function<Vec(const std::vector<int>& sig_idx, int excl_agent)> reference;  // x_0(s)
};

AllocationResult efficient_allocation(const Instance& inst, const AllocationRule& rule,
                                      const ClosedFormFn* closed_form,
                                      const RegularizedContext* reg,
                                      const std::vector<int>& theta_idx,
                                      const std::vector<int>& sig_idx, int excl_agent = -1);

// Welfare at the grid argmax minus welfare at the registered closed-form
// optimum (<= 0 up to float noise); bounds the discretization error.
double grid_vs_closed_form_gap(const Instance& inst, const ClosedFormFn& closed_form,
                               const std::vector<int>& theta_idx, const std::vector<int>& sig_idx);

}  // namespace ddvcg
