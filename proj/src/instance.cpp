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

#include "ddvcg/rng.hpp"

#include <cmath>
#include <numeric>

namespace ddvcg {

bool all_points_distinct(const std::vector<Vec>& pts, double tol) {
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b)
      if ((pts[a] - pts[b]).lpNorm<Eigen::Infinity>() <= tol) return false;
  return true;
}

Instance::Instance(StateGrid states, std::vector<std::vector<Vec>> theta_grids,
                   std::vector<std::vector<Vec>> signal_grids, Vec state_prior,
                   std::vector<Mat> signal_kernels, std::optional<Mat> joint_signal_kernel,
                   std::vector<Vec> theta_priors, UtilitySpec utility, OutcomeSpace outcomes,
                   bool full_support)
    : n_(static_cast<int>(theta_grids.size())),
      states_(std::move(states)),
      theta_grids_(std::move(theta_grids)),
      signal_grids_(std::move(signal_grids)),
      state_prior_(std::move(state_prior)),
      signal_kernels_(std::move(signal_kernels)),
      theta_priors_(std::move(theta_priors)),
      utility_(std::move(utility)),
      outcomes_(std::move(outcomes)) {
  if (n_ <= 0) throw InvalidInstance("instance needs at least one agent");
  if (static_cast<int>(signal_grids_.size()) != n_)
    throw InvalidInstance("signal grid count does not match agent count");

  std::vector<int> sig_sizes(n_);
  for (int i = 0; i < n_; ++i) sig_sizes[i] = static_cast<int>(signal_grids_[i].size());
  sig_space_ = IndexProduct(sig_sizes);

  sig_excl_space_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    std::vector<int> rest;
    for (int j = 0; j < n_; ++j)
      if (j != i) rest.push_back(sig_sizes[j]);
    if (rest.empty()) rest.push_back(1);  // single-agent degenerate space
    sig_excl_space_[i] = IndexProduct(rest);
  }

  if (theta_priors_.empty()) {
    theta_priors_.resize(n_);
    for (int i = 0; i < n_; ++i)
      theta_priors_[i] = Vec::Constant(static_cast<int>(theta_grids_[i].size()),
                                       1.0 / static_cast<double>(theta_grids_[i].size()));
  }

  const int ns = states_.size();
  const int nsig = sig_space_.size();
  joint_ws_.resize(ns, nsig);
  if (joint_signal_kernel) {
    if (joint_signal_kernel->rows() != ns || joint_signal_kernel->cols() != nsig)
      throw InvalidInstance("joint signal kernel has wrong shape");
    for (int w = 0; w < ns; ++w)
      joint_ws_.row(w) = state_prior_(w) * joint_signal_kernel->row(w);
  } else {
    if (static_cast<int>(signal_kernels_.size()) != n_)
      throw InvalidInstance("need one signal kernel per agent");
    for (int w = 0; w < ns; ++w) {
      for (int f = 0; f < nsig; ++f) {
        double p = state_prior_(w);
        for (int i = 0; i < n_; ++i) p *= signal_kernels_[i](w, sig_space_.coordinate(f, i));
        joint_ws_(w, f) = p;
      }
    }
  }

  build_posteriors();
  validate(full_support);
}

void Instance::build_posteriors() {
  const int ns = states_.size();
  const int nsig = sig_space_.size();

  posterior_full_.setZero(nsig, ns);
  sig_mass_.resize(nsig);
  for (int f = 0; f < nsig; ++f) {
    double m = joint_ws_.col(f).sum();
    sig_mass_(f) = m;
    if (m > 0) posterior_full_.row(f) = joint_ws_.col(f).transpose() / m;
  }

  posterior_excl_.resize(n_);
  excl_mass_.resize(n_);
  posterior_single_.resize(n_);
  single_mass_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    const int nexcl = sig_excl_space_[i].size();
    posterior_excl_[i].setZero(nexcl, ns);
    excl_mass_[i] = Vec::Zero(nexcl);
    const int nown = static_cast<int>(signal_grids_[i].size());
    posterior_single_[i].setZero(nown, ns);
    single_mass_[i] = Vec::Zero(nown);
    for (int f = 0; f < nsig; ++f) {
      posterior_excl_[i].row(sig_excl_flat(i, f)) += joint_ws_.col(f).transpose();
      posterior_single_[i].row(sig_space_.coordinate(f, i)) += joint_ws_.col(f).transpose();
    }
    for (int e = 0; e < nexcl; ++e) {
      double m = posterior_excl_[i].row(e).sum();
      excl_mass_[i](e) = m;
      if (m > 0) posterior_excl_[i].row(e) /= m;
    }
    for (int k = 0; k < nown; ++k) {
      double m = posterior_single_[i].row(k).sum();
      single_mass_[i](k) = m;
      if (m > 0) posterior_single_[i].row(k) /= m;
    }
  }
}

int Instance::sig_excl_flat(int agent, int sig_flat) const {
  if (n_ == 1) return 0;
  int f = 0;
  for (int j = 0; j < n_; ++j) {
    if (j == agent) continue;
    f = f * static_cast<int>(signal_grids_[j].size()) + sig_space_.coordinate(sig_flat, j);
  }
  return f;
}

void Instance::validate(bool full_support) const {
  if (states_.size() == 0) throw InvalidInstance("empty state grid");
  if (!all_points_distinct(states_.points)) throw InvalidInstance("state grid points not distinct");
  for (int i = 0; i < n_; ++i) {
    if (theta_grids_[i].empty()) throw InvalidInstance("empty theta grid");
    if (signal_grids_[i].empty()) throw InvalidInstance("empty signal grid");
    if (!all_points_distinct(theta_grids_[i])) throw InvalidInstance("theta grid points not distinct");
    if (!all_points_distinct(signal_grids_[i])) throw InvalidInstance("signal grid points not distinct");
  }
  if (outcomes_.mode == OutcomeSpace::Mode::finite_list) {
    if (outcomes_.points.empty()) throw EmptyOutcomeSpace("outcome space has no points");
    if (!all_points_distinct(outcomes_.points))
      throw InvalidInstance("outcome points not distinct");
  } else {
    if (outcomes_.tokens <= 0) throw EmptyOutcomeSpace("simplex outcome space has no tokens");
    if (outcomes_.resolution < 2) throw InvalidInstance("simplex resolution must be >= 2");
  }
  if (static_cast<int>(utility_.payoff.size()) != n_)
    throw InvalidInstance("need one payoff function per agent");

  // Probability-table invariants.
  if ((state_prior_.array() < 0).any()) throw InvalidInstance("negative state prior mass");
  double theta_total = 1.0;
  for (int i = 0; i < n_; ++i) {
    if ((theta_priors_[i].array() < 0).any()) throw InvalidInstance("negative theta prior mass");
    theta_total *= theta_priors_[i].sum();
  }
  if ((joint_ws_.array() < 0).any()) throw InvalidInstance("negative joint mass");
  double total = joint_ws_.sum() * theta_total;
  if (std::abs(total - 1.0) > kProbTol)
    throw InvalidInstance("joint prior mass differs from 1 by more than 1e-12");
  if (full_support && (joint_ws_.array() <= 0).any())
    throw InvalidInstance("full_support declared but a joint cell has zero mass");

  // Signal sufficiency: P(omega | s_i, theta_i) = P(omega | s_i) for every cell
  // with positive marginal. Theta enters the table as an independent factor, so
  // conditioning on theta_i rescales P(omega, s_i) by P(theta_i).
  const int ns = states_.size();
  for (int i = 0; i < n_; ++i) {
    for (int k = 0; k < static_cast<int>(signal_grids_[i].size()); ++k) {
      if (single_mass_[i](k) <= 0) continue;
      for (int t = 0; t < static_cast<int>(theta_grids_[i].size()); ++t) {
        const double ptheta = theta_priors_[i](t);
        if (ptheta * single_mass_[i](k) <= 0) continue;
        Vec joint = ptheta * single_mass_[i](k) * posterior_single_[i].row(k).transpose();
        Vec cond = joint / joint.sum();
        double l1 = (cond - posterior_single_[i].row(k).transpose()).cwiseAbs().sum();
        if (l1 > kProbTol) throw InvalidInstance("signal sufficiency violated");
      }
    }
  }

  // Sampled finite-difference check of declared Lipschitz constants.
  if (!utility_.lipschitz_omega.empty()) {
    auto rng = stream_rng(0xd15c0u, {17});
    std::uniform_int_distribution<int> pick_w(0, ns - 1);
    std::vector<Vec> theta(n_);
    for (int i = 0; i < n_; ++i) theta[i] = theta_grids_[i].front();
    std::vector<Vec> probe_points;
    if (outcomes_.mode == OutcomeSpace::Mode::finite_list) {
      probe_points = outcomes_.points;
    } else {
      probe_points.push_back(Vec::Constant(outcomes_.tokens, 1.0 / outcomes_.tokens));
      probe_points.push_back(Vec::Unit(outcomes_.tokens, 0));
    }
    for (int i = 0; i < n_; ++i) {
      double li = utility_.lipschitz_omega[i];
      if (std::isnan(li)) continue;
      for (int trial = 0; trial < 64; ++trial) {
        const Vec& x = probe_points[trial % probe_points.size()];
        const Vec& wa = states_.points[pick_w(rng)];
        const Vec& wb = states_.points[pick_w(rng)];
        double dist = (wa - wb).norm();
        if (dist <= 0) continue;
        double diff = std::abs(payoff(i, x, wa, theta) - payoff(i, x, wb, theta));
        if (diff > li * dist + 1e-9)
          throw InvalidInstance("declared Lipschitz constant violated by sampled differences");
      }
    }
  }

  // Payoffs must evaluate finitely on the grids.
  std::vector<Vec> theta(n_);
  for (int i = 0; i < n_; ++i) theta[i] = theta_grids_[i].front();
  const Vec& w0 = states_.points.front();
  if (outcomes_.mode == OutcomeSpace::Mode::finite_list) {
    for (int i = 0; i < n_; ++i)
      for (const Vec& x : outcomes_.points)
        if (!std::isfinite(payoff(i, x, w0, theta)))
          throw InvalidInstance("payoff evaluates non-finitely on the grid");
  } else {
    Vec x = Vec::Constant(outcomes_.tokens, 1.0 / outcomes_.tokens);
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(payoff(i, x, w0, theta)))
        throw InvalidInstance("payoff evaluates non-finitely on the simplex");
  }
}

Vec Instance::posterior(const std::vector<SignalCondition>& given) const {
  const int ns = states_.size();
  Vec acc = Vec::Zero(ns);
  double mass = 0.0;
  for (int f = 0; f < sig_space_.size(); ++f) {
    bool match = true;
    for (const auto& c : given) {
      if (sig_space_.coordinate(f, c.agent) != c.index) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    acc += joint_ws_.col(f);
    mass += sig_mass_(f);
  }
  if (mass <= 0) throw ZeroMassEvent("conditioning event has prior mass zero");
  return acc / mass;
}

Vec Instance::posterior_values(const std::vector<std::pair<int, Vec>>& given) const {
  std::vector<SignalCondition> idx;
  idx.reserve(given.size());
  for (const auto& [agent, value] : given) {
    int match = -1;
    const auto& grid = signal_grids_[agent];
    for (int k = 0; k < static_cast<int>(grid.size()); ++k)
      if ((grid[k] - value).lpNorm<Eigen::Infinity>() <= 1e-12) match = k;
    if (match < 0) throw InvalidInstance("conditioning value is not on the signal grid");
    idx.push_back({agent, match});
  }
  return posterior(idx);
}

Vec Instance::posterior_full(int sig_flat) const {
  if (sig_mass_(sig_flat) <= 0) throw ZeroMassEvent("signal profile has prior mass zero");
  return posterior_full_.row(sig_flat).transpose();
}

Vec Instance::posterior_excl(int agent, int sig_excl_flat) const {
  if (excl_mass_[agent](sig_excl_flat) <= 0)
    throw ZeroMassEvent("leave-one-out signal profile has prior mass zero");
  return posterior_excl_[agent].row(sig_excl_flat).transpose();
}

Vec Instance::posterior_single(int agent, int sig_index) const {
  if (single_mass_[agent](sig_index) <= 0)
    throw ZeroMassEvent("signal value has prior mass zero");
  return posterior_single_[agent].row(sig_index).transpose();
}

Vec Instance::payoff_over_states(int i, const Vec& x, const std::vector<Vec>& theta) const {
  Vec out(states_.size());
  for (int w = 0; w < states_.size(); ++w) out(w) = payoff(i, x, states_.points[w], theta);
  return out;
}

double Instance::interim_payoff(int i, const Vec& x, const std::vector<Vec>& theta,
                                int sig_flat) const {
  if (sig_mass_(sig_flat) <= 0) throw ZeroMassEvent("signal profile has prior mass zero");
  double v = 0.0;
  for (int w = 0; w < states_.size(); ++w) {
    double p = posterior_full_(sig_flat, w);
    if (p > 0) v += p * payoff(i, x, states_.points[w], theta);
  }
  return v;
}

double Instance::interim_payoff(int i, const Vec& x, const std::vector<Vec>& theta,
                                const std::vector<int>& sig_idx) const {
  return interim_payoff(i, x, theta, sig_space_.flatten(sig_idx));
}

double Instance::declared_lipschitz(int i) const {
  if (utility_.lipschitz_omega.empty() || std::isnan(utility_.lipschitz_omega[i]))
    throw MissingLipschitzConstant("agent has no declared Lipschitz constant");
  return utility_.lipschitz_omega[i];
}

}  // namespace ddvcg
