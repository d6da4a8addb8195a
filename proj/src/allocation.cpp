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

#include <cmath>

namespace ddvcg {

std::vector<Vec> theta_vectors(const Instance& inst, const std::vector<int>& theta_idx) {
  std::vector<Vec> out(theta_idx.size());
  for (size_t i = 0; i < theta_idx.size(); ++i) out[i] = inst.theta_grid(static_cast<int>(i))[theta_idx[i]];
  return out;
}

std::vector<Vec> sig_vectors(const Instance& inst, const std::vector<int>& sig_idx) {
  std::vector<Vec> out(sig_idx.size());
  for (size_t i = 0; i < sig_idx.size(); ++i) out[i] = inst.signal_grid(static_cast<int>(i))[sig_idx[i]];
  return out;
}

double welfare(const Instance& inst, const Vec& x, const std::vector<Vec>& theta,
               const Vec& posterior, int excl_agent) {
  double w = 0.0;
  for (int i = 0; i < inst.num_agents(); ++i) {
    if (i == excl_agent) continue;
    w += posterior.dot(inst.payoff_over_states(i, x, theta));
  }
  return w;
}

AllocationResult finite_argmax(const Instance& inst, const std::vector<Vec>& theta,
                               const Vec& posterior, int excl_agent) {
  const auto& pts = inst.outcomes().points;
  if (pts.empty()) throw EmptyOutcomeSpace("outcome space has no points");
  AllocationResult best;
  double best_w = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
    double w = welfare(inst, pts[k], theta, posterior, excl_agent);
    if (w > best_w) {
      best_w = w;
      best.index = k;
    }
  }
  best.point = pts[best.index];
  return best;
}

Vec token_rewards(const Instance& inst, const std::vector<Vec>& theta, const Vec& posterior,
                  int excl_agent) {
  const int nt = inst.outcomes().tokens;
  Vec r = Vec::Zero(nt);
  for (int t = 0; t < nt; ++t) {
    Vec vertex = Vec::Unit(nt, t);
    for (int i = 0; i < inst.num_agents(); ++i) {
      if (i == excl_agent) continue;
      r(t) += posterior.dot(inst.payoff_over_states(i, vertex, theta));
    }
  }
  return r;
}

Vec kl_regularized_distribution(const Vec& rewards, const Vec& x0, double alpha) {
  if (alpha <= 0) throw NonPositiveAlpha("alpha must be positive");
  if ((x0.array() <= 0).any()) throw ZeroReferenceMass("reference distribution must have full support");
  Vec logits = x0.array().log() + rewards.array() / alpha;
  double shift = logits.maxCoeff();
  Vec w = (logits.array() - shift).exp();
  return w / w.sum();
}

double kl_log_partition(const Vec& rewards, const Vec& x0, double alpha) {
  if (alpha <= 0) throw NonPositiveAlpha("alpha must be positive");
  if ((x0.array() <= 0).any()) throw ZeroReferenceMass("reference distribution must have full support");
  Vec logits = x0.array().log() + rewards.array() / alpha;
  double shift = logits.maxCoeff();
  return shift + std::log((logits.array() - shift).exp().sum());
}

double kl_divergence(const Vec& x, const Vec& x0) {
  double d = 0.0;
  for (int t = 0; t < x.size(); ++t) {
    if (x(t) <= 0) continue;
    if (x0(t) <= 0) throw DivergenceUndefined("x puts mass where the reference has none");
    d += x(t) * std::log(x(t) / x0(t));
  }
  return d;
}

double regularized_objective_value(const Vec& rewards, const Vec& x, const Vec& x0, double alpha) {
  return rewards.dot(x) - alpha * kl_divergence(x, x0);
}

namespace {

void enumerate_compositions(int remaining, int slots, Vec& current, int pos, int resolution,
                            const std::function<void(const Vec&)>& visit) {
  if (slots == 1) {
    current(pos) = static_cast<double>(remaining) / resolution;
    visit(current);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current(pos) = static_cast<double>(k) / resolution;
    enumerate_compositions(remaining - k, slots - 1, current, pos + 1, resolution, visit);
  }
}

}  // namespace

Vec simplex_grid_argmax(const Vec& rewards, const Vec& x0, double alpha, int resolution) {
  const int nt = static_cast<int>(rewards.size());
  if (resolution < 2) throw InvalidInstance("simplex resolution must be >= 2");
  // number of grid points = C(resolution + nt - 1, nt - 1)
  double count = 1.0;
  for (int k = 1; k < nt; ++k) count = count * (resolution + k) / k;
  if (count > 3e7) throw BudgetExceeded("simplex grid too large for brute-force search");

  Vec best;
  double best_v = -std::numeric_limits<double>::infinity();
  Vec current(nt);
  enumerate_compositions(resolution, nt, current, 0, resolution, [&](const Vec& x) {
    double v;
    try {
      v = regularized_objective_value(rewards, x, x0, alpha);
    } catch (const DivergenceUndefined&) {
      return;
    }
    if (v > best_v) {
      best_v = v;
      best = x;
    }
  });
  if (best.size() == 0) throw EmptyOutcomeSpace("no feasible simplex grid point");
  return best;
}

AllocationResult efficient_allocation(const Instance& inst, const AllocationRule& rule,
                                      const ClosedFormFn* closed_form,
                                      const RegularizedContext* reg,
                                      const std::vector<int>& theta_idx,
                                      const std::vector<int>& sig_idx, int excl_agent) {
  std::vector<Vec> theta = theta_vectors(inst, theta_idx);
  Vec posterior;
  if (excl_agent < 0) {
    posterior = inst.posterior_full(inst.sig_flat(sig_idx));
  } else {
    std::vector<int> rest;
    for (int j = 0; j < inst.num_agents(); ++j)
      if (j != excl_agent) rest.push_back(sig_idx[j]);
    int flat = 0;
    for (size_t k = 0; k < rest.size(); ++k)
      flat = flat * inst.sig_excl_space(excl_agent).axis_size(static_cast<int>(k)) + rest[k];
    posterior = inst.posterior_excl(excl_agent, flat);
  }

  switch (rule.mode) {
    case AllocationRule::Mode::grid_argmax:
      if (inst.outcomes().mode == OutcomeSpace::Mode::finite_list)
        return finite_argmax(inst, theta, posterior, excl_agent);
      else {
        if (!reg) throw InvalidInstance("simplex grid search needs a regularization context");
        Vec r = token_rewards(inst, theta, posterior, excl_agent);
        AllocationResult res;
        res.point = simplex_grid_argmax(r, reg->reference(sig_idx, excl_agent), reg->alpha,
                                        inst.outcomes().resolution);
        return res;
      }
    case AllocationRule::Mode::closed_form: {
      if (!closed_form) throw NoClosedForm("no closed form registered");
      AllocationResult res;
      if (excl_agent >= 0)
        throw NoClosedForm("closed forms are registered for the full-agent problem only");
      res.point = (*closed_form)(inst, theta_idx, sig_idx);
      return res;
    }
    case AllocationRule::Mode::kl_closed_form: {
      if (!reg) throw InvalidInstance("kl_closed_form needs a regularization context");
      Vec r = token_rewards(inst, theta, posterior, excl_agent);
      AllocationResult res;
      res.point = kl_regularized_distribution(r, reg->reference(sig_idx, excl_agent), reg->alpha);
      return res;
    }
  }
  throw InvalidInstance("unreachable allocation mode");
}

double grid_vs_closed_form_gap(const Instance& inst, const ClosedFormFn& closed_form,
                               const std::vector<int>& theta_idx, const std::vector<int>& sig_idx) {
  std::vector<Vec> theta = theta_vectors(inst, theta_idx);
  Vec posterior = inst.posterior_full(inst.sig_flat(sig_idx));
  AllocationResult grid = finite_argmax(inst, theta, posterior);
  Vec exact = closed_form(inst, theta_idx, sig_idx);
  return welfare(inst, grid.point, theta, posterior) - welfare(inst, exact, theta, posterior);
}

}  // namespace ddvcg
