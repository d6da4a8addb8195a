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

#include "ddvcg/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ddvcg {

namespace {

std::vector<Vec> scalar_points(const std::vector<double>& values) {
  std::vector<Vec> pts;
  pts.reserve(values.size());
  for (double v : values) {
    Vec p(1);
    p(0) = v;
    pts.push_back(p);
  }
  return pts;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z); }

// accuracy kernel on matching label grids: mass `acc` on the matching level,
// remainder split evenly
Mat accuracy_kernel(int levels, double acc) {
  Mat k(levels, levels);
  double off = levels > 1 ? (1.0 - acc) / (levels - 1) : 0.0;
  for (int w = 0; w < levels; ++w)
    for (int s = 0; s < levels; ++s) k(w, s) = (w == s) ? acc : off;
  return k;
}

int index_of_value(const std::vector<Vec>& grid, double value) {
  for (int k = 0; k < static_cast<int>(grid.size()); ++k)
    if (std::abs(grid[k](0) - value) <= 1e-12) return k;
  return -1;
}

}  // namespace

double posterior_mean_scalar(const Instance& inst, const Vec& posterior) {
  if (inst.states().dim() != 1) throw InvalidInstance("scalar state expected");
  double m = 0.0;
  for (int w = 0; w < inst.states().size(); ++w) m += posterior(w) * inst.states().points[w](0);
  return m;
}

double posterior_var_scalar(const Instance& inst, const Vec& posterior) {
  double m = posterior_mean_scalar(inst, posterior);
  double s2 = 0.0;
  for (int w = 0; w < inst.states().size(); ++w) {
    double d = inst.states().points[w](0) - m;
    s2 += posterior(w) * d * d;
  }
  return s2;
}

AllocationResult solve_allocation(const Scenario& scn, const std::vector<int>& theta_idx,
                                  const std::vector<int>& sig_idx, int excl_agent) {
  if (scn.allocation.mode == AllocationRule::Mode::closed_form) {
    AllocationResult res;
    if (excl_agent < 0) {
      if (!scn.closed_form) throw NoClosedForm("scenario registers no closed form");
      res.point = scn.closed_form(scn.inst(), theta_idx, sig_idx);
    } else {
      if (!scn.closed_form_excl) throw NoClosedForm("scenario registers no sub-problem closed form");
      res.point = scn.closed_form_excl(scn.inst(), excl_agent, theta_idx, sig_idx);
    }
    return res;
  }
  return efficient_allocation(scn.inst(), scn.allocation,
                              scn.closed_form ? &scn.closed_form : nullptr,
                              scn.has_reg ? &scn.reg : nullptr, theta_idx, sig_idx, excl_agent);
}

Scenario make_quadratic_loss(const QuadraticParams& p) {
  const int n = static_cast<int>(p.sigma_obs.size());
  if (n < 1 || p.sigma0 <= 0 || p.state_points < 3 || p.signal_points < 3 || p.theta_points < 1)
    throw InvalidScenarioParameters("bad quadratic-loss parameters");
  for (double s : p.sigma_obs)
    if (s <= 0) throw InvalidScenarioParameters("observation noise must be positive");

  StateGrid states;
  std::vector<double> omega_vals =
      linspace(p.mu0 - p.truncation * p.sigma0, p.mu0 + p.truncation * p.sigma0, p.state_points);
  states.points = scalar_points(omega_vals);

  Vec prior(p.state_points);
  for (int w = 0; w < p.state_points; ++w)
    prior(w) = normal_pdf((omega_vals[w] - p.mu0) / p.sigma0);
  prior /= prior.sum();

  const double sig_half = 4.0 * std::max(1.0, p.sigma0);
  std::vector<std::vector<Vec>> theta_grids(n), sig_grids(n);
  std::vector<Mat> kernels(n);
  for (int i = 0; i < n; ++i) {
    theta_grids[i] = scalar_points(linspace(p.theta_min, p.theta_max, p.theta_points));
    std::vector<double> svals = linspace(-sig_half, sig_half, p.signal_points);
    sig_grids[i] = scalar_points(svals);
    kernels[i].resize(p.state_points, p.signal_points);
    for (int w = 0; w < p.state_points; ++w) {
      for (int k = 0; k < p.signal_points; ++k)
        kernels[i](w, k) = normal_pdf((svals[k] - omega_vals[w]) / p.sigma_obs[i]);
      kernels[i].row(w) /= kernels[i].row(w).sum();
    }
  }

  OutcomeSpace out;
  out.mode = OutcomeSpace::Mode::finite_list;
  double xlo = p.theta_min + omega_vals.front() - p.x_margin;
  double xhi = p.theta_max + omega_vals.back() + p.x_margin;
  out.points = scalar_points(linspace(xlo, xhi, p.x_points));

  const double amax = std::max(std::abs(xlo), std::abs(xhi)) +
                      std::max(std::abs(p.theta_min), std::abs(p.theta_max)) +
                      std::max(std::abs(omega_vals.front()), std::abs(omega_vals.back()));
  UtilitySpec util;
  util.lipschitz_omega.assign(n, 2.0 * amax);
  util.sup_bound.assign(n, amax * amax);
  for (int i = 0; i < n; ++i) {
    util.payoff.push_back([i](const Vec& x, const Vec& omega, const std::vector<Vec>& theta) {
      double d = x(0) - theta[i](0) - omega(0);
      return -d * d;
    });
  }

  Scenario scn;
  scn.name = "quadratic_loss";
  scn.instance = std::make_shared<Instance>(std::move(states), std::move(theta_grids),
                                            std::move(sig_grids), std::move(prior),
                                            std::move(kernels), std::nullopt, std::vector<Vec>{},
                                            std::move(util), std::move(out), true);
  scn.allocation.mode = AllocationRule::Mode::grid_argmax;
  scn.default_transfer.kind = TransferRule::Kind::data_driven_vcg;
  scn.default_transfer.h_policy = TransferRule::HPolicy::pivot;
  scn.supports_generalized_vcg = true;

  scn.closed_form = [](const Instance& inst, const std::vector<int>& theta_idx,
                       const std::vector<int>& sig_idx) {
    double tbar = 0.0;
    for (int i = 0; i < inst.num_agents(); ++i) tbar += inst.theta_grid(i)[theta_idx[i]](0);
    tbar /= inst.num_agents();
    Vec post = inst.posterior_full(inst.sig_flat(sig_idx));
    Vec x(1);
    x(0) = tbar + posterior_mean_scalar(inst, post);
    return x;
  };
  scn.closed_form_excl = [](const Instance& inst, int excl, const std::vector<int>& theta_idx,
                            const std::vector<int>& sig_idx) {
    double tbar = 0.0;
    int count = 0;
    for (int j = 0; j < inst.num_agents(); ++j) {
      if (j == excl) continue;
      tbar += inst.theta_grid(j)[theta_idx[j]](0);
      ++count;
    }
    if (count == 0) {
      Vec x(1);
      x(0) = inst.outcomes().points.front()(0);
      return x;
    }
    tbar /= count;
    Vec post = inst.posterior_excl(excl, inst.sig_excl_flat(excl, inst.sig_flat(sig_idx)));
    Vec x(1);
    x(0) = tbar + posterior_mean_scalar(inst, post);
    return x;
  };

  // Kernel densities extend to the continuum, so the posterior is defined for
  // arbitrary signal values (used by the impossibility certificate and the
  // derivative cross-checks).
  std::vector<double> sigma_obs = p.sigma_obs;
  std::shared_ptr<const Instance> inst_ptr = scn.instance;
  scn.continuous_posterior = [inst_ptr, sigma_obs](const std::vector<double>& svals) {
    const Instance& inst = *inst_ptr;
    Vec post = inst.state_prior();
    for (size_t i = 0; i < svals.size(); ++i) {
      for (int w = 0; w < inst.states().size(); ++w)
        post(w) *= normal_pdf((svals[i] - inst.states().points[w](0)) / sigma_obs[i]);
    }
    double mass = post.sum();
    if (mass <= 0) throw ZeroMassEvent("conditioning event has zero density");
    return Vec(post / mass);
  };
  return scn;
}

Scenario make_ctr_common(const CtrCommonParams& p) {
  const int n = p.num_agents;
  const int L = static_cast<int>(p.ctr_levels.size());
  if (n < 1 || L < 2 || p.signal_accuracy <= 0 || p.signal_accuracy > 1)
    throw InvalidScenarioParameters("bad common-CTR parameters");
  for (double c : p.ctr_levels)
    if (c < 0 || c > 1) throw InvalidScenarioParameters("CTR levels must lie in [0,1]");

  StateGrid states;
  states.points = scalar_points(p.ctr_levels);
  Vec prior = Vec::Constant(L, 1.0 / L);

  std::vector<std::vector<Vec>> theta_grids(n), sig_grids(n);
  std::vector<Mat> kernels(n);
  for (int i = 0; i < n; ++i) {
    theta_grids[i] = scalar_points(p.theta_levels);
    sig_grids[i] = scalar_points(p.ctr_levels);
    kernels[i] = accuracy_kernel(L, p.signal_accuracy);
  }

  OutcomeSpace out;
  out.mode = OutcomeSpace::Mode::finite_list;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    out.points.push_back(e);
  }

  double tmax = *std::max_element(p.theta_levels.begin(), p.theta_levels.end());
  UtilitySpec util;
  util.lipschitz_omega.assign(n, tmax);
  util.sup_bound.assign(n, tmax);
  for (int i = 0; i < n; ++i) {
    util.payoff.push_back([i](const Vec& x, const Vec& omega, const std::vector<Vec>& theta) {
      return theta[i](0) * x(i) * omega(0);
    });
  }

  Scenario scn;
  scn.name = "ctr_common";
  scn.instance = std::make_shared<Instance>(std::move(states), std::move(theta_grids),
                                            std::move(sig_grids), std::move(prior),
                                            std::move(kernels), std::nullopt, std::vector<Vec>{},
                                            std::move(util), std::move(out), true);
  scn.allocation.mode = AllocationRule::Mode::grid_argmax;
  scn.default_transfer.kind = TransferRule::Kind::per_click_pivot;
  scn.is_ctr = true;
  scn.ctr_individual_states = false;

  // With a common rate the highest value per click wins; always on-grid.
  scn.closed_form = [](const Instance& inst, const std::vector<int>& theta_idx,
                       const std::vector<int>&) {
    int best = 0;
    for (int i = 1; i < inst.num_agents(); ++i)
      if (inst.theta_grid(i)[theta_idx[i]](0) > inst.theta_grid(best)[theta_idx[best]](0)) best = i;
    Vec x = Vec::Zero(inst.num_agents());
    x(best) = 1.0;
    return x;
  };
  scn.closed_form_excl = [](const Instance& inst, int excl, const std::vector<int>& theta_idx,
                            const std::vector<int>&) {
    int best = -1;
    for (int i = 0; i < inst.num_agents(); ++i) {
      if (i == excl) continue;
      if (best < 0 || inst.theta_grid(i)[theta_idx[i]](0) > inst.theta_grid(best)[theta_idx[best]](0))
        best = i;
    }
    Vec x = Vec::Zero(inst.num_agents());
    if (best >= 0) x(best) = 1.0;
    return x;
  };
  return scn;
}

Scenario make_ctr_individual(const CtrIndividualParams& p) {
  const int n = 2;
  const int L = static_cast<int>(p.ctr_levels.size());
  if (L < 2) throw InvalidScenarioParameters("bad individual-CTR parameters");
  for (double c : p.ctr_levels)
    if (c < 0 || c > 1) throw InvalidScenarioParameters("CTR levels must lie in [0,1]");

  // state = (omega_1, omega_2); each agent's signal reveals her own coordinate
  StateGrid states;
  for (double a : p.ctr_levels)
    for (double b : p.ctr_levels) {
      Vec w(2);
      w << a, b;
      states.points.push_back(w);
    }
  Vec prior = Vec::Constant(L * L, 1.0 / (L * L));

  std::vector<std::vector<Vec>> theta_grids(n), sig_grids(n);
  std::vector<Mat> kernels(n);
  for (int i = 0; i < n; ++i) {
    theta_grids[i] = scalar_points(p.theta_levels);
    sig_grids[i] = scalar_points(p.ctr_levels);
    kernels[i].setZero(L * L, L);
    for (int w = 0; w < L * L; ++w) {
      int own = (i == 0) ? w / L : w % L;
      kernels[i](w, own) = 1.0;
    }
  }

  OutcomeSpace out;
  out.mode = OutcomeSpace::Mode::finite_list;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    out.points.push_back(e);
  }

  double tmax = *std::max_element(p.theta_levels.begin(), p.theta_levels.end());
  UtilitySpec util;
  util.lipschitz_omega.assign(n, tmax);
  util.sup_bound.assign(n, tmax);
  for (int i = 0; i < n; ++i) {
    util.payoff.push_back([i](const Vec& x, const Vec& omega, const std::vector<Vec>& theta) {
      return theta[i](0) * x(i) * omega(i);
    });
  }

  Scenario scn;
  scn.name = "ctr_individual";
  scn.instance = std::make_shared<Instance>(std::move(states), std::move(theta_grids),
                                            std::move(sig_grids), std::move(prior),
                                            std::move(kernels), std::nullopt, std::vector<Vec>{},
                                            std::move(util), std::move(out), false);
  scn.allocation.mode = AllocationRule::Mode::grid_argmax;
  scn.default_transfer.kind = TransferRule::Kind::per_click_pivot;
  scn.is_ctr = true;
  scn.ctr_individual_states = true;
  return scn;
}

namespace {

std::vector<Mat> default_llm_rewards(int tokens, int omega_levels) {
  // two mildly opposed agents whose token preferences move with the state
  std::vector<Mat> r(2);
  r[0].resize(tokens, omega_levels);
  r[1].resize(tokens, omega_levels);
  for (int t = 0; t < tokens; ++t)
    for (int w = 0; w < omega_levels; ++w) {
      double u = omega_levels > 1 ? static_cast<double>(w) / (omega_levels - 1) : 0.0;
      r[0](t, w) = 0.9 - 0.35 * t + 0.5 * u * (t == 1);
      r[1](t, w) = 0.2 + 0.3 * t - 0.4 * u * (t == 0);
    }
  return r;
}

double interp_reward(const Mat& table, int token, const std::vector<double>& nodes, double w) {
  const int L = static_cast<int>(nodes.size());
  if (w <= nodes.front()) return table(token, 0);
  if (w >= nodes.back()) return table(token, L - 1);
  int k = 0;
  while (k + 1 < L && nodes[k + 1] < w) ++k;
  double f = (w - nodes[k]) / (nodes[k + 1] - nodes[k]);
  return (1 - f) * table(token, k) + f * table(token, k + 1);
}

}  // namespace

Scenario make_llm_kl(const LlmKlParams& p) {
  const int n = 2;
  const int L = static_cast<int>(p.omega_levels.size());
  if (p.tokens < 2 || p.alpha <= 0 || L < 2)
    throw InvalidScenarioParameters("bad LLM-KL parameters");

  std::vector<Mat> rewards = p.base_rewards.empty() ? default_llm_rewards(p.tokens, L) : p.base_rewards;
  if (static_cast<int>(rewards.size()) != n || rewards[0].rows() != p.tokens ||
      rewards[0].cols() != L)
    throw InvalidScenarioParameters("reward tables must be |T| x |Omega| per agent");

  StateGrid states;
  states.points = scalar_points(p.omega_levels);
  Vec prior = Vec::Constant(L, 1.0 / L);

  std::vector<std::vector<Vec>> theta_grids(n), sig_grids(n);
  std::vector<Mat> kernels(n);
  for (int i = 0; i < n; ++i) {
    theta_grids[i] = scalar_points(p.theta_levels);
    sig_grids[i] = scalar_points(p.omega_levels);
    kernels[i] = accuracy_kernel(L, p.signal_accuracy);
  }

  OutcomeSpace out;
  out.mode = OutcomeSpace::Mode::simplex;
  out.tokens = p.tokens;
  out.resolution = p.simplex_resolution;

  std::vector<double> nodes = p.omega_levels;
  double tmax = *std::max_element(p.theta_levels.begin(), p.theta_levels.end());
  double max_slope = 0.0, max_abs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < p.tokens; ++t)
      for (int w = 0; w + 1 < L; ++w) {
        max_slope = std::max(max_slope, std::abs(rewards[i](t, w + 1) - rewards[i](t, w)) /
                                            (nodes[w + 1] - nodes[w]));
        max_abs = std::max({max_abs, std::abs(rewards[i](t, w)), std::abs(rewards[i](t, w + 1))});
      }

  UtilitySpec util;
  util.lipschitz_omega.assign(n, tmax * max_slope);
  util.sup_bound.assign(n, tmax * max_abs);
  for (int i = 0; i < n; ++i) {
    Mat table = rewards[i];
    util.payoff.push_back(
        [i, table, nodes](const Vec& x, const Vec& omega, const std::vector<Vec>& theta) {
          double u = 0.0;
          for (int t = 0; t < x.size(); ++t)
            u += x(t) * interp_reward(table, t, nodes, omega(0));
          return theta[i](0) * u;
        });
  }

  Scenario scn;
  scn.name = "llm_kl";
  scn.instance = std::make_shared<Instance>(std::move(states), std::move(theta_grids),
                                            std::move(sig_grids), std::move(prior),
                                            std::move(kernels), std::nullopt, std::vector<Vec>{},
                                            std::move(util), std::move(out), true);
  scn.allocation.mode = AllocationRule::Mode::kl_closed_form;
  scn.default_transfer.kind = TransferRule::Kind::regularized_data_driven_vcg;
  scn.default_transfer.h_policy = TransferRule::HPolicy::pivot;
  scn.has_reg = true;
  scn.reg.alpha = p.alpha;
  Vec x0 = p.x0.size() == p.tokens ? p.x0 : Vec::Constant(p.tokens, 1.0 / p.tokens);
  if ((x0.array() <= 0).any()) throw InvalidScenarioParameters("reference must have full support");
  scn.reg.reference = [x0](const std::vector<int>&, int) { return x0; };
  return scn;
}

Scenario make_interdependent_counterexample(const InterdependentParams& p) {
  const int n = 2;
  if (p.accuracy <= 0 || p.accuracy > 1) throw InvalidScenarioParameters("bad accuracy");

  StateGrid states;
  states.points = scalar_points({0.0, 1.0});
  Vec prior = Vec::Constant(2, 0.5);

  std::vector<std::vector<Vec>> theta_grids(n), sig_grids(n);
  std::vector<Mat> kernels(n);
  for (int i = 0; i < n; ++i) {
    theta_grids[i] = scalar_points(p.theta_levels);
    sig_grids[i] = scalar_points({0.0, 1.0});
    kernels[i] = accuracy_kernel(2, p.accuracy);
  }

  OutcomeSpace out;
  out.mode = OutcomeSpace::Mode::finite_list;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    out.points.push_back(e);
  }

  double tmax = *std::max_element(p.theta_levels.begin(), p.theta_levels.end());
  UtilitySpec util;
  util.profile_dependent = true;
  util.lipschitz_omega = {tmax, 2 * tmax};
  util.sup_bound = {tmax, 2 * tmax};
  // u_1 = theta_1 x_1 omega; u_2 = (theta_2 - theta_1) x_2 omega: agent 1's
  // report enters agent 2's payoff directly.
  util.payoff.push_back([](const Vec& x, const Vec& omega, const std::vector<Vec>& theta) {
    return theta[0](0) * x(0) * omega(0);
  });
  util.payoff.push_back([](const Vec& x, const Vec& omega, const std::vector<Vec>& theta) {
    return (theta[1](0) - theta[0](0)) * x(1) * omega(0);
  });

  Scenario scn;
  scn.name = "interdependent_counterexample";
  scn.instance = std::make_shared<Instance>(std::move(states), std::move(theta_grids),
                                            std::move(sig_grids), std::move(prior),
                                            std::move(kernels), std::nullopt, std::vector<Vec>{},
                                            std::move(util), std::move(out), true);
  scn.allocation.mode = AllocationRule::Mode::grid_argmax;
  scn.default_transfer.kind = TransferRule::Kind::data_driven_vcg;
  // the sub-problem payoff of agent 2 is undefined without agent 1's type, so
  // the pivot offset is unavailable here
  scn.default_transfer.h_policy = TransferRule::HPolicy::zero;
  return scn;
}

std::vector<std::string> scenario_names() {
  return {"quadratic_loss", "ctr_common", "ctr_individual", "llm_kl",
          "interdependent_counterexample"};
}

ClickOutcome ctr_click_process(const Scenario& scn, int winner, const Vec& omega_true,
                               const std::vector<int>& theta_idx, int impressions,
                               std::uint64_t seed) {
  if (!scn.is_ctr) throw UnsupportedScenario("click process needs a CTR scenario");
  double ctr = omega_true(scn.ctr_coordinate(winner));
  if (ctr < 0 || ctr > 1) throw InvalidScenarioParameters("winner CTR outside [0,1]");
  ClickOutcome out;
  out.per_click_price = per_click_pivot_price(scn, winner, theta_idx);
  auto rng = stream_rng(seed, {static_cast<std::uint64_t>(winner),
                               static_cast<std::uint64_t>(impressions)});
  std::binomial_distribution<int> clicks(impressions, ctr);
  out.clicks = clicks(rng);
  out.sample_ctr = static_cast<double>(out.clicks) / impressions;
  out.payment = out.clicks * out.per_click_price;
  return out;
}

CtrManipulationDemo individual_ctr_manipulation_demo(const Scenario& scn,
                                                     const std::vector<int>& theta_idx,
                                                     const std::vector<int>& sig_idx) {
  if (!scn.ctr_individual_states)
    throw UnsupportedScenario("manipulation demo needs the individual-CTR scenario");
  const Instance& inst = scn.inst();
  CtrManipulationDemo d;
  d.theta1 = inst.theta_grid(0)[theta_idx[0]](0);
  d.theta2 = inst.theta_grid(1)[theta_idx[1]](0);
  d.s1 = inst.signal_grid(0)[sig_idx[0]](0);
  d.s2 = inst.signal_grid(1)[sig_idx[1]](0);
  if (!(d.theta1 * d.s1 < d.theta2 * d.s2 && d.theta1 >= d.theta2))
    throw PreconditionFails("demo needs theta1 s1 < theta2 s2 and theta1 >= theta2");
  d.corner_theta_idx = index_of_value(inst.theta_grid(0), 1.0);
  d.corner_sig_idx = index_of_value(inst.signal_grid(0), 1.0);
  if (d.corner_theta_idx < 0 || d.corner_sig_idx < 0)
    throw PreconditionFails("grids do not contain the (1,1) corner report");
  // truthful: the rival wins, agent 1 earns and pays nothing
  d.truthful_net = 0.0;
  // corner report wins the slot; expected clicks follow the true CTR s1
  d.deviation_net = (d.theta1 - d.theta2) * d.s1;
  d.gain = d.deviation_net - d.truthful_net;
  return d;
}

InterdependentDemo interdependent_counterexample_demo(const Scenario& scn,
                                                      const std::vector<int>& theta_idx,
                                                      const std::vector<int>& sig_idx) {
  if (scn.name != "interdependent_counterexample")
    throw UnsupportedScenario("demo needs the interdependent counterexample scenario");
  const Instance& inst = scn.inst();
  InterdependentDemo d;
  double theta1 = inst.theta_grid(0)[theta_idx[0]](0);
  double theta2 = inst.theta_grid(1)[theta_idx[1]](0);
  Vec post = inst.posterior_full(inst.sig_flat(sig_idx));
  d.posterior_mean = posterior_mean_scalar(inst, post);
  if (!(theta1 < theta2 && d.posterior_mean > 0))
    throw PreconditionFails("demo needs theta1 < theta2 and E[omega|s] > 0");
  d.best_theta_idx = index_of_value(inst.theta_grid(0), 0.0);
  if (d.best_theta_idx < 0) throw PreconditionFails("theta grid does not contain 0");

  // truthful net utility of agent 1 under h = 0
  std::vector<Vec> theta = theta_vectors(inst, theta_idx);
  AllocationResult truthful = solve_allocation(scn, theta_idx, sig_idx);
  double v1 = post.dot(inst.payoff_over_states(0, truthful.point, theta));
  double t1 = post.dot(inst.payoff_over_states(1, truthful.point, theta));
  d.truthful_net = v1 + t1;
  // reporting theta' = 0 hands the object to agent 2 and earns theta2 E[omega|s]
  d.deviation_net = theta2 * d.posterior_mean;
  d.gain = d.deviation_net - d.truthful_net;
  return d;
}

}  // namespace ddvcg
