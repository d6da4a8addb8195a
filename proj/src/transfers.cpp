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

#include "ddvcg/transfers.hpp"

#include "ddvcg/rng.hpp"
#include "ddvcg/scenarios.hpp"

#include <cmath>

namespace ddvcg {

bool is_message_driven(TransferRule::Kind kind) {
  switch (kind) {
    case TransferRule::Kind::vcg:
    case TransferRule::Kind::generalized_vcg:
    case TransferRule::Kind::per_impression:
      return true;
    default:
      return false;
  }
}

std::string to_string(TransferRule::Kind kind) {
  switch (kind) {
    case TransferRule::Kind::vcg: return "vcg";
    case TransferRule::Kind::generalized_vcg: return "generalized_vcg";
    case TransferRule::Kind::data_driven_vcg: return "data_driven_vcg";
    case TransferRule::Kind::regularized_data_driven_vcg: return "regularized_data_driven_vcg";
    case TransferRule::Kind::per_click_pivot: return "per_click_pivot";
    case TransferRule::Kind::per_impression: return "per_impression";
    case TransferRule::Kind::leave_one_out: return "leave_one_out";
  }
  return "?";
}

std::string to_string(TransferRule::HPolicy policy) {
  return policy == TransferRule::HPolicy::zero ? "zero" : "pivot";
}

namespace {

bool needs_sub_allocation(const TransferRule& rule) {
  if (rule.h_policy != TransferRule::HPolicy::pivot) return false;
  switch (rule.kind) {
    case TransferRule::Kind::vcg:
    case TransferRule::Kind::data_driven_vcg:
    case TransferRule::Kind::regularized_data_driven_vcg:
    case TransferRule::Kind::leave_one_out:
      return true;
    default:
      return false;
  }
}

double max_other_theta(const SolvedProfile& sp, int i) {
  double best = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < sp.theta.size(); ++j)
    if (static_cast<int>(j) != i) best = std::max(best, sp.theta[j](0));
  return best;
}

}  // namespace

SolvedProfile solve_profile(const Scenario& scn, const TransferRule& rule,
                            const std::vector<int>& theta_idx, const std::vector<int>& sig_idx) {
  const Instance& inst = scn.inst();
  SolvedProfile sp;
  sp.theta_idx = theta_idx;
  sp.sig_idx = sig_idx;
  sp.theta = theta_vectors(inst, theta_idx);
  AllocationResult full = solve_allocation(scn, theta_idx, sig_idx);
  sp.x = full.point;
  sp.x_index = full.index;
  if (scn.has_reg) sp.penalty = scn.reg.alpha * kl_divergence(sp.x, scn.reg.reference(sig_idx, -1));
  if (needs_sub_allocation(rule)) {
    const int n = inst.num_agents();
    sp.x_excl.resize(n);
    sp.x_excl_index.assign(n, -1);
    sp.penalty_excl.assign(n, 0.0);
    sp.sub_objective.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      AllocationResult sub = solve_allocation(scn, theta_idx, sig_idx, i);
      sp.x_excl[i] = sub.point;
      sp.x_excl_index[i] = sub.index;
      if (scn.has_reg) {
        sp.penalty_excl[i] =
            scn.reg.alpha * kl_divergence(sp.x_excl[i], scn.reg.reference(sig_idx, i));
        Vec post_excl = inst.posterior_excl(i, inst.sig_excl_flat(i, inst.sig_flat(sig_idx)));
        double welfare_excl = 0.0;
        for (int j = 0; j < n; ++j)
          if (j != i) welfare_excl += post_excl.dot(inst.payoff_over_states(j, sp.x_excl[i], sp.theta));
        sp.sub_objective[i] = welfare_excl - sp.penalty_excl[i];
      }
    }
  }
  return sp;
}

double realized_transfer(const Scenario& scn, const TransferRule& rule, const SolvedProfile& sp,
                         int i, const Vec& omega_hat) {
  const Instance& inst = scn.inst();
  const int n = inst.num_agents();
  switch (rule.kind) {
    case TransferRule::Kind::vcg: {
      // priced against the posterior at the *reported* signals
      Vec post = inst.posterior_full(inst.sig_flat(sp.sig_idx));
      double t = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) t += post.dot(inst.payoff_over_states(j, sp.x, sp.theta));
      if (rule.h_policy == TransferRule::HPolicy::pivot) {
        Vec post_excl = inst.posterior_excl(i, inst.sig_excl_flat(i, inst.sig_flat(sp.sig_idx)));
        for (int j = 0; j < n; ++j)
          if (j != i) t -= post_excl.dot(inst.payoff_over_states(j, sp.x_excl[i], sp.theta));
      }
      return t;
    }
    case TransferRule::Kind::generalized_vcg: {
      if (!scn.supports_generalized_vcg)
        throw UnsupportedScenario("generalized VCG is registered for the quadratic-loss scenario only");
      if (n != 2) throw UnsupportedScenario("generalized VCG form covers two agents");
      Vec post = inst.posterior_full(inst.sig_flat(sp.sig_idx));
      double mean = posterior_mean_scalar(inst, post);
      int j = 1 - i;
      return -(sp.theta[i](0) - sp.theta[j](0)) * mean;
    }
    case TransferRule::Kind::data_driven_vcg:
    case TransferRule::Kind::leave_one_out: {
      double t = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) t += inst.payoff(j, sp.x, omega_hat, sp.theta);
      if (rule.h_policy == TransferRule::HPolicy::pivot) {
        for (int j = 0; j < n; ++j)
          if (j != i) t -= inst.payoff(j, sp.x_excl[i], omega_hat, sp.theta);
      }
      return t;
    }
    case TransferRule::Kind::regularized_data_driven_vcg: {
      if (!scn.has_reg)
        throw UnsupportedScenario("regularized data-driven VCG needs a regularized scenario");
      double t = -sp.penalty;
      for (int j = 0; j < n; ++j)
        if (j != i) t += inst.payoff(j, sp.x, omega_hat, sp.theta);
      // Pivot offset: the sub-problem's maximized objective, charged as a
      // deterministic function of the other agents' reports. The expected
      // truthful ex-post transfer is then exactly the agent's marginal
      // contribution alpha [log Z - log Z_{-i}] - v_i.
      if (rule.h_policy == TransferRule::HPolicy::pivot) t -= sp.sub_objective[i];
      return t;
    }
    case TransferRule::Kind::per_click_pivot: {
      if (!scn.is_ctr) throw UnsupportedScenario("per-click payments need a CTR scenario");
      double xi = sp.x(i);
      if (xi == 0.0) return 0.0;
      return -max_other_theta(sp, i) * xi * omega_hat(scn.ctr_coordinate(i));
    }
    case TransferRule::Kind::per_impression: {
      if (!scn.is_ctr) throw UnsupportedScenario("per-impression payments need a CTR scenario");
      double xi = sp.x(i);
      if (xi == 0.0) return 0.0;
      Vec post = inst.posterior_full(inst.sig_flat(sp.sig_idx));
      double expected_ctr = 0.0;
      const int c = scn.ctr_coordinate(i);
      for (int w = 0; w < inst.states().size(); ++w)
        expected_ctr += post(w) * inst.states().points[w](c);
      return -max_other_theta(sp, i) * xi * expected_ctr;
    }
  }
  return 0.0;
}

double vcg_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                    const std::vector<int>& sig_idx, TransferRule::HPolicy h_policy) {
  TransferRule rule;
  rule.kind = TransferRule::Kind::vcg;
  rule.h_policy = h_policy;
  SolvedProfile sp = solve_profile(scn, rule, theta_idx, sig_idx);
  return realized_transfer(scn, rule, sp, i, Vec());
}

double generalized_vcg_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                                const std::vector<int>& sig_idx) {
  TransferRule rule;
  rule.kind = TransferRule::Kind::generalized_vcg;
  rule.h_policy = TransferRule::HPolicy::zero;
  SolvedProfile sp = solve_profile(scn, rule, theta_idx, sig_idx);
  return realized_transfer(scn, rule, sp, i, Vec());
}

double data_driven_vcg_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                                const std::vector<int>& sig_idx, const EstimateDraw& draw,
                                TransferRule::HPolicy h_policy) {
  TransferRule rule;
  rule.kind = TransferRule::Kind::data_driven_vcg;
  rule.h_policy = h_policy;
  SolvedProfile sp = solve_profile(scn, rule, theta_idx, sig_idx);
  return realized_transfer(scn, rule, sp, i, draw.value);
}

double regularized_data_driven_vcg_transfer(const Scenario& scn, int i,
                                            const std::vector<int>& theta_idx,
                                            const std::vector<int>& sig_idx,
                                            const EstimateDraw& draw,
                                            TransferRule::HPolicy h_policy) {
  TransferRule rule;
  rule.kind = TransferRule::Kind::regularized_data_driven_vcg;
  rule.h_policy = h_policy;
  SolvedProfile sp = solve_profile(scn, rule, theta_idx, sig_idx);
  return realized_transfer(scn, rule, sp, i, draw.value);
}

double per_click_pivot_price(const Scenario& scn, int i, const std::vector<int>& theta_idx) {
  if (!scn.is_ctr) throw UnsupportedScenario("per-click payments need a CTR scenario");
  const Instance& inst = scn.inst();
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < inst.num_agents(); ++j)
    if (j != i) best = std::max(best, inst.theta_grid(j)[theta_idx[j]](0));
  return best;
}

Vec leave_one_out_aggregate(const std::vector<Vec>& reports, int excl_agent) {
  Vec acc;
  int count = 0;
  for (size_t j = 0; j < reports.size(); ++j) {
    if (static_cast<int>(j) == excl_agent) continue;
    if (reports[j].size() == 0) throw MissingSecondStageReport("missing second-stage report");
    if (count == 0) acc = reports[j];
    else acc += reports[j];
    ++count;
  }
  if (count == 0) throw MissingSecondStageReport("no second-stage reports besides agent's own");
  return acc / static_cast<double>(count);
}

double leave_one_out_transfer(const Scenario& scn, int i, const std::vector<int>& theta_idx,
                              const std::vector<int>& sig_idx,
                              const std::vector<Vec>& second_stage_reports,
                              TransferRule::HPolicy h_policy) {
  if (second_stage_reports.size() != static_cast<size_t>(scn.inst().num_agents()))
    throw MissingSecondStageReport("need one second-stage slot per agent");
  TransferRule rule;
  rule.kind = TransferRule::Kind::leave_one_out;
  rule.h_policy = h_policy;
  SolvedProfile sp = solve_profile(scn, rule, theta_idx, sig_idx);
  Vec omega_hat = leave_one_out_aggregate(second_stage_reports, i);
  return realized_transfer(scn, rule, sp, i, omega_hat);
}

namespace {

// Exact finite-support law of the leave-one-out aggregate: each agent j != i
// draws independently from the estimator's law; the aggregate is the mean.
std::vector<SupportPoint> loo_law(const Estimator& est, const Vec& omega, int n, int excl) {
  std::vector<SupportPoint> law = est.conditional_law(omega);
  std::vector<SupportPoint> acc{SupportPoint{Vec::Zero(omega.size()), 1.0}};
  int sources = 0;
  for (int j = 0; j < n; ++j) {
    if (j == excl) continue;
    ++sources;
    std::vector<SupportPoint> next;
    next.reserve(acc.size() * law.size());
    for (const auto& a : acc)
      for (const auto& l : law)
        next.push_back(SupportPoint{a.value + l.value, a.mass * l.mass});
    acc = std::move(next);
    if (acc.size() > 200'000) throw BudgetExceeded("leave-one-out support too large");
  }
  for (auto& sp : acc) sp.value /= static_cast<double>(sources);
  return acc;
}

}  // namespace

ExpectedValue expected_transfer_given_state(const Scenario& scn, const TransferRule& rule,
                                            const Estimator& est, const SolvedProfile& sp, int i,
                                            int omega_index) {
  const Instance& inst = scn.inst();
  const Vec& omega = inst.states().points[omega_index];
  ExpectedValue out;
  if (is_message_driven(rule.kind)) {
    out.value = realized_transfer(scn, rule, sp, i, Vec());
    return out;
  }
  if (est.has_exact_law()) {
    std::vector<SupportPoint> law = rule.kind == TransferRule::Kind::leave_one_out
                                        ? loo_law(est, omega, inst.num_agents(), i)
                                        : est.conditional_law(omega);
    for (const auto& pt : law) out.value += pt.mass * realized_transfer(scn, rule, sp, i, pt.value);
    return out;
  }
  // Monte Carlo with a stream addressed by (reported profile, state, agent).
  // The sample size is deliberately left out of the address: sweeps over m
  // then reuse the same base draws (common random numbers), so measured
  // regret trends are not drowned by independent resampling noise.
  const int K = rule.mc_samples;
  std::uint64_t theta_key = 0;
  for (int t : sp.theta_idx) theta_key = theta_key * 1315423911ull + static_cast<std::uint64_t>(t + 1);
  auto rng = stream_rng(rule.seed,
                        {static_cast<std::uint64_t>(inst.sig_flat(sp.sig_idx)), theta_key,
                         static_cast<std::uint64_t>(omega_index), static_cast<std::uint64_t>(i)});
  double sum = 0.0, sumsq = 0.0;
  const int n = inst.num_agents();
  std::vector<Vec> reports(n);
  for (int k = 0; k < K; ++k) {
    double v;
    if (rule.kind == TransferRule::Kind::leave_one_out) {
      for (int j = 0; j < n; ++j) reports[j] = est.sample(omega, rng);
      v = realized_transfer(scn, rule, sp, i, leave_one_out_aggregate(reports, i));
    } else {
      v = realized_transfer(scn, rule, sp, i, est.sample(omega, rng));
    }
    sum += v;
    sumsq += v * v;
  }
  out.value = sum / K;
  double var = (sumsq - sum * sum / K) / std::max(1, K - 1);
  out.se = std::sqrt(std::max(0.0, var) / K);
  return out;
}

ExpectedValue expected_transfer(const Scenario& scn, const TransferRule& rule,
                                const Estimator& est, int i, const std::vector<int>& theta_rep,
                                const std::vector<int>& sig_rep, const std::vector<int>& sig_true) {
  const Instance& inst = scn.inst();
  SolvedProfile sp = solve_profile(scn, rule, theta_rep, sig_rep);
  if (is_message_driven(rule.kind)) {
    return ExpectedValue{realized_transfer(scn, rule, sp, i, Vec()), 0.0};
  }
  Vec post = inst.posterior_full(inst.sig_flat(sig_true));
  ExpectedValue out;
  double var = 0.0;
  for (int w = 0; w < inst.states().size(); ++w) {
    if (post(w) <= 0) continue;
    ExpectedValue inner = expected_transfer_given_state(scn, rule, est, sp, i, w);
    out.value += post(w) * inner.value;
    var += post(w) * post(w) * inner.se * inner.se;
  }
  out.se = std::sqrt(var);
  return out;
}

}  // namespace ddvcg
