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

#include "ddvcg/audit.hpp"

#include "ddvcg/index.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace ddvcg {

void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& fn) {
  if (workers <= 1 || count < 2) {
    for (std::int64_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t k = next.fetch_add(1);
        if (k >= count) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

ProfileSpace make_profile_space(const Instance& inst) {
  std::vector<int> tsizes(inst.num_agents()), ssizes(inst.num_agents());
  for (int i = 0; i < inst.num_agents(); ++i) {
    tsizes[i] = static_cast<int>(inst.theta_grid(i).size());
    ssizes[i] = static_cast<int>(inst.signal_grid(i).size());
  }
  return ProfileSpace(tsizes, ssizes);
}

}  // namespace

RegretReport posterior_regret(const Scenario& scn, const TransferRule& rule, const Estimator& est,
                              const AuditOptions& opts) {
  const Instance& inst = scn.inst();
  const int n = inst.num_agents();
  const int ns = inst.states().size();
  ProfileSpace ps = make_profile_space(inst);
  const int reps = ps.size();

  std::int64_t dev_per_agent_total = 0;
  for (int i = 0; i < n; ++i)
    dev_per_agent_total +=
        static_cast<std::int64_t>(inst.theta_grid(i).size()) * inst.signal_grid(i).size();
  std::int64_t total_evals = static_cast<std::int64_t>(reps) * dev_per_agent_total;
  if (total_evals > opts.budget)
    throw BudgetExceeded("deviation search needs " + std::to_string(total_evals) +
                         " evaluations, budget is " + std::to_string(opts.budget));

  const bool message = is_message_driven(rule.kind);
  const bool exact = message || est.has_exact_law();

  // Posterior snapshot per joint signal profile.
  const int nsig = ps.signal_space().size();
  std::vector<Vec> post(nsig);
  std::vector<bool> live(nsig, false);
  for (int f = 0; f < nsig; ++f) {
    if (inst.signal_mass(f) > 0) {
      post[f] = inst.posterior_full(f);
      live[f] = true;
    }
  }

  // Solve every reported profile once.
  std::vector<SolvedProfile> solved(reps);
  parallel_for(reps, opts.workers, [&](std::int64_t r) {
    solved[r] = solve_profile(scn, rule, ps.theta_idx(static_cast<int>(r)),
                              ps.sig_idx(static_cast<int>(r)));
  });

  // Expected transfer cores per (agent, reported profile, state).
  // Message-driven cores are state-independent.
  std::vector<double> core(static_cast<size_t>(n) * reps * (message ? 1 : ns), 0.0);
  std::vector<double> core_var;
  if (!exact) core_var.assign(core.size(), 0.0);
  auto core_at = [&](int i, int r, int w) -> size_t {
    return message ? (static_cast<size_t>(i) * reps + r)
                   : ((static_cast<size_t>(i) * reps + r) * ns + w);
  };
  parallel_for(static_cast<std::int64_t>(n) * reps, opts.workers, [&](std::int64_t cell) {
    int i = static_cast<int>(cell / reps);
    int r = static_cast<int>(cell % reps);
    if (message) {
      core[core_at(i, r, 0)] = realized_transfer(scn, rule, solved[r], i, Vec());
      return;
    }
    for (int w = 0; w < ns; ++w) {
      ExpectedValue ev = expected_transfer_given_state(scn, rule, est, solved[r], i, w);
      core[core_at(i, r, w)] = ev.value;
      if (!exact) core_var[core_at(i, r, w)] = ev.se * ev.se;
    }
  });

  auto expected_core = [&](int i, int r, const Vec& posterior) {
    if (message) return std::pair<double, double>(core[core_at(i, r, 0)], 0.0);
    double v = 0.0, var = 0.0;
    for (int w = 0; w < ns; ++w) {
      double p = posterior(w);
      if (p <= 0) continue;
      v += p * core[core_at(i, r, w)];
      if (!exact) var += p * p * core_var[core_at(i, r, w)];
    }
    return std::pair<double, double>(v, var);
  };

  // Deviation search per (agent, true profile).
  std::vector<DeviationRow> rows(static_cast<size_t>(n) * reps);
  std::vector<char> row_live(static_cast<size_t>(n) * reps, 0);
  parallel_for(static_cast<std::int64_t>(n) * reps, opts.workers, [&](std::int64_t cell) {
    const int i = static_cast<int>(cell / reps);
    const int truth = static_cast<int>(cell % reps);
    const int strue = ps.sig_flat(truth);
    if (!live[strue]) return;

    std::vector<Vec> theta_true = theta_vectors(inst, ps.theta_idx(truth));
    const Vec& posterior = post[strue];

    auto net_value = [&](int r) {
      double v = posterior.dot(inst.payoff_over_states(i, solved[r].x, theta_true));
      auto [t, var] = expected_core(i, r, posterior);
      return std::pair<double, double>(v + t, var);
    };

    auto [truth_value, truth_var] = net_value(truth);
    DeviationRow row;
    row.agent = i;
    row.theta_flat = ps.theta_flat(truth);
    row.sig_flat = strue;
    row.best_theta_dev = ps.theta_of(truth, i);
    row.best_sig_dev = ps.sig_of(truth, i);
    double best = -std::numeric_limits<double>::infinity();
    double best_var = 0.0;
    for (int tk = 0; tk < static_cast<int>(inst.theta_grid(i).size()); ++tk) {
      for (int sk = 0; sk < static_cast<int>(inst.signal_grid(i).size()); ++sk) {
        int r = ps.deviate(truth, i, tk, sk);
        double gain, var;
        if (r == truth) {
          gain = 0.0;  // the truthful report is its own deviation
          var = 0.0;
        } else {
          auto [value, v] = net_value(r);
          gain = value - truth_value;
          var = v + truth_var;
        }
        if (gain >= best) {
          best = gain;
          best_var = var;
          row.best_theta_dev = tk;
          row.best_sig_dev = sk;
        }
      }
    }
    row.gain = best;
    row.se = std::sqrt(best_var);
    rows[cell] = row;
    row_live[cell] = 1;
  });

  RegretReport report;
  report.exact_mode = exact;
  report.evaluations = total_evals;
  for (size_t k = 0; k < rows.size(); ++k) {
    if (!row_live[k]) continue;
    report.rows.push_back(rows[k]);
    if (rows[k].gain > report.epsilon) {
      report.epsilon = rows[k].gain;
      report.epsilon_se = rows[k].se;
    }
  }

  // Discretization contribution, reported separately from mechanism regret.
  if (scn.closed_form && scn.allocation.mode == AllocationRule::Mode::grid_argmax &&
      inst.outcomes().mode == OutcomeSpace::Mode::finite_list) {
    std::vector<double> worst(reps, 0.0);
    parallel_for(reps, opts.workers, [&](std::int64_t r) {
      if (!live[ps.sig_flat(static_cast<int>(r))]) return;
      worst[r] = std::abs(grid_vs_closed_form_gap(inst, scn.closed_form,
                                                  ps.theta_idx(static_cast<int>(r)),
                                                  ps.sig_idx(static_cast<int>(r))));
    });
    for (double g : worst) report.discretization_bound = std::max(report.discretization_bound, g);
  }
  return report;
}

double regret_upper_bound(const Scenario& scn, int agent, const Estimator& est) {
  const Instance& inst = scn.inst();
  double lips_sum = 0.0;
  for (int j = 0; j < inst.num_agents(); ++j) {
    if (j == agent) continue;
    lips_sum += inst.declared_lipschitz(j);
  }
  // E[ ||omega - omega_hat|| | s ] per state is estimator-exact.
  Vec per_state(inst.states().size());
  for (int w = 0; w < inst.states().size(); ++w)
    per_state(w) = est.mean_abs_error(inst.states().points[w]);
  double worst = 0.0;
  for (int f = 0; f < inst.signal_space().size(); ++f) {
    if (inst.signal_mass(f) <= 0) continue;
    worst = std::max(worst, inst.posterior_full(f).dot(per_state));
  }
  return 2.0 * lips_sum * worst;
}

RateSweep convergence_sweep(const Scenario& scn, const TransferRule& rule,
                            const Estimator& family, const std::vector<int>& ms,
                            const AuditOptions& opts) {
  for (size_t k = 1; k < ms.size(); ++k)
    if (ms[k] <= ms[k - 1])
      throw InvalidScenarioParameters("sweep sample sizes must be strictly increasing");
  RateSweep sweep;
  for (int m : ms) {
    Estimator est = family.with_m(m);
    RegretReport rep = posterior_regret(scn, rule, est, opts);
    RateRow row;
    row.m = m;
    row.epsilon = rep.epsilon;
    row.se = rep.epsilon_se;
    double bound = 0.0;
    for (int i = 0; i < scn.inst().num_agents(); ++i)
      bound = std::max(bound, regret_upper_bound(scn, i, est));
    row.bound = bound;
    row.rate = family.rate(m);
    row.rate_eps = row.rate * row.epsilon;
    sweep.rows.push_back(row);
  }
  std::vector<double> lx, ly;
  for (const auto& r : sweep.rows) {
    if (r.epsilon > opts.zero_tol) {
      lx.push_back(std::log(static_cast<double>(r.m)));
      ly.push_back(std::log(r.epsilon));
    }
  }
  if (lx.size() >= 2) {
    sweep.slope = fit_line(lx, ly).slope;
    sweep.slope_defined = true;
  }
  return sweep;
}

namespace {

// Posterior for explicit per-agent signal values: exact grid match when the
// values lie on the grids, the scenario's continuum kernel otherwise.
Vec posterior_at_values(const Scenario& scn, const std::vector<double>& values) {
  const Instance& inst = scn.inst();
  std::vector<int> idx(values.size());
  bool on_grid = true;
  for (size_t i = 0; i < values.size(); ++i) {
    idx[i] = -1;
    const auto& grid = inst.signal_grid(static_cast<int>(i));
    for (int k = 0; k < static_cast<int>(grid.size()); ++k)
      if (std::abs(grid[k](0) - values[i]) <= 1e-12) idx[i] = k;
    if (idx[i] < 0) on_grid = false;
  }
  if (on_grid) return inst.posterior_full(inst.sig_flat(idx));
  if (scn.continuous_posterior) return scn.continuous_posterior(values);
  throw PreconditionFails("signal values are off-grid and no continuum kernel is registered");
}

}  // namespace

ImpossibilityCertificate impossibility_certificate(const Scenario& scn, double s1, double s1_alt,
                                                   double s2, double theta1_a, double theta1_b,
                                                   double theta2) {
  const Instance& inst = scn.inst();
  if (inst.num_agents() != 2 || inst.states().dim() != 1)
    throw UnsupportedScenario("certificate needs a two-agent scalar-state instance");

  ImpossibilityCertificate cert;
  cert.s1 = s1;
  cert.s1_alt = s1_alt;
  cert.s2 = s2;
  cert.theta1_a = theta1_a;
  cert.theta1_b = theta1_b;
  cert.theta2 = theta2;

  Vec post = posterior_at_values(scn, {s1, s2});
  Vec post_alt = posterior_at_values(scn, {s1_alt, s2});
  cert.mean_s = posterior_mean_scalar(inst, post);
  cert.mean_alt = posterior_mean_scalar(inst, post_alt);
  cert.var_s = posterior_var_scalar(inst, post);
  cert.var_alt = posterior_var_scalar(inst, post_alt);
  cert.delta_mean = cert.mean_s - cert.mean_alt;
  if (std::abs(cert.delta_mean) <= 1e-9)
    throw ConditionStarFails("posterior means coincide across the two signal reports");

  auto rhs = [&](double theta1) {
    return cert.var_s - cert.var_alt - (theta1 - theta2) * cert.delta_mean;
  };
  cert.rhs_a = rhs(theta1_a);
  cert.rhs_b = rhs(theta1_b);
  cert.gap = std::abs(cert.rhs_a - cert.rhs_b);
  cert.product = std::abs(theta1_a - theta1_b) * std::abs(cert.delta_mean);
  cert.matched = std::abs(cert.gap - cert.product) <= 1e-9;
  return cert;
}

}  // namespace ddvcg
