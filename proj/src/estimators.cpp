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

#include "ddvcg/rng.hpp"

#include <cmath>

namespace ddvcg {

namespace {

double binom_pmf(int m, int k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == m ? 1.0 : 0.0;
  double lg = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
  return std::exp(lg + k * std::log(p) + (m - k) * std::log1p(-p));
}

// Mean of the chi distribution with d degrees of freedom (E||N(0, I_d)||).
double chi_mean(int d) {
  return std::sqrt(2.0) * std::exp(std::lgamma((d + 1) / 2.0) - std::lgamma(d / 2.0));
}

// cartesian product of per-coordinate supports
std::vector<SupportPoint> product_law(const std::vector<std::vector<std::pair<double, double>>>& per_coord) {
  std::vector<SupportPoint> out;
  size_t total = 1;
  for (const auto& c : per_coord) total *= c.size();
  if (total > 2'000'000) throw BudgetExceeded("estimator support too large to enumerate");
  out.reserve(total);
  const int d = static_cast<int>(per_coord.size());
  std::vector<size_t> idx(d, 0);
  for (;;) {
    SupportPoint sp;
    sp.value.resize(d);
    sp.mass = 1.0;
    for (int c = 0; c < d; ++c) {
      sp.value(c) = per_coord[c][idx[c]].first;
      sp.mass *= per_coord[c][idx[c]].second;
    }
    if (sp.mass > 0) out.push_back(std::move(sp));
    int c = d - 1;
    while (c >= 0 && ++idx[c] == per_coord[c].size()) idx[c--] = 0;
    if (c < 0) break;
  }
  return out;
}

}  // namespace

Estimator Estimator::ex_post() {
  Estimator e;
  e.kind_ = Kind::ex_post;
  return e;
}

Estimator Estimator::unbiased_noise(double h) {
  if (h <= 0) throw InvalidScenarioParameters("unbiased noise needs h > 0");
  Estimator e;
  e.kind_ = Kind::unbiased_noise;
  e.h_ = h;
  return e;
}

Estimator Estimator::sample_mean(int m, double sigma, double rate_kappa) {
  if (m <= 0 || sigma <= 0) throw InvalidScenarioParameters("sample_mean needs m > 0 and sigma > 0");
  Estimator e;
  e.kind_ = Kind::sample_mean;
  e.m_ = m;
  e.sigma_ = sigma;
  e.kappa_ = rate_kappa;
  return e;
}

Estimator Estimator::bernoulli_ctr(int m, double rate_kappa) {
  if (m <= 0) throw InvalidScenarioParameters("bernoulli_ctr needs m > 0");
  Estimator e;
  e.kind_ = Kind::bernoulli_ctr;
  e.m_ = m;
  e.kappa_ = rate_kappa;
  return e;
}

Estimator Estimator::with_m(int m) const {
  Estimator e = *this;
  if (kind_ == Kind::sample_mean || kind_ == Kind::bernoulli_ctr) e.m_ = m;
  return e;
}

double Estimator::rate(int m) const { return std::pow(static_cast<double>(m), kappa_); }

std::vector<SupportPoint> Estimator::conditional_law(const Vec& omega) const {
  const int d = static_cast<int>(omega.size());
  switch (kind_) {
    case Kind::ex_post: {
      return {SupportPoint{omega, 1.0}};
    }
    case Kind::unbiased_noise: {
      std::vector<std::vector<std::pair<double, double>>> per(d);
      for (int c = 0; c < d; ++c)
        per[c] = {{omega(c) - h_, 0.5}, {omega(c) + h_, 0.5}};
      return product_law(per);
    }
    case Kind::bernoulli_ctr: {
      std::vector<std::vector<std::pair<double, double>>> per(d);
      for (int c = 0; c < d; ++c) {
        per[c].reserve(m_ + 1);
        for (int k = 0; k <= m_; ++k)
          per[c].emplace_back(static_cast<double>(k) / m_, binom_pmf(m_, k, omega(c)));
      }
      return product_law(per);
    }
    case Kind::sample_mean:
      throw EstimatorUnavailable("sample_mean has no finite-support law; use the sampler");
  }
  return {};
}

Vec Estimator::sample(const Vec& omega, std::mt19937_64& rng) const {
  const int d = static_cast<int>(omega.size());
  Vec out(d);
  switch (kind_) {
    case Kind::ex_post:
      return omega;
    case Kind::unbiased_noise: {
      std::bernoulli_distribution coin(0.5);
      for (int c = 0; c < d; ++c) out(c) = omega(c) + (coin(rng) ? h_ : -h_);
      return out;
    }
    case Kind::sample_mean: {
      // The mean of m i.i.d. N(omega, sigma^2) draws is N(omega, sigma^2/m).
      std::normal_distribution<double> z(0.0, sigma_ / std::sqrt(static_cast<double>(m_)));
      for (int c = 0; c < d; ++c) out(c) = omega(c) + z(rng);
      return out;
    }
    case Kind::bernoulli_ctr: {
      for (int c = 0; c < d; ++c) {
        std::binomial_distribution<int> clicks(m_, omega(c));
        out(c) = static_cast<double>(clicks(rng)) / m_;
      }
      return out;
    }
  }
  return out;
}

double Estimator::mean_abs_error(const Vec& omega) const {
  const int d = static_cast<int>(omega.size());
  switch (kind_) {
    case Kind::ex_post:
      return 0.0;
    case Kind::unbiased_noise:
      // every support point deviates by exactly h per coordinate
      return h_ * std::sqrt(static_cast<double>(d));
    case Kind::sample_mean:
      return sigma_ / std::sqrt(static_cast<double>(m_)) * chi_mean(d);
    case Kind::bernoulli_ctr: {
      double acc = 0.0;
      for (const auto& sp : conditional_law(omega)) acc += sp.mass * (sp.value - omega).norm();
      return acc;
    }
  }
  return 0.0;
}

double Estimator::coordinate_mean(const Vec& omega, int k) const {
  switch (kind_) {
    case Kind::ex_post:
    case Kind::sample_mean:
      return omega(k);
    case Kind::unbiased_noise:
      return 0.5 * (omega(k) - h_) + 0.5 * (omega(k) + h_);
    case Kind::bernoulli_ctr: {
      double acc = 0.0;
      for (int j = 0; j <= m_; ++j)
        acc += binom_pmf(m_, j, omega(k)) * (static_cast<double>(j) / m_);
      return acc;
    }
  }
  return omega(k);
}

std::string to_string(Estimator::Kind kind) {
  switch (kind) {
    case Estimator::Kind::ex_post: return "ex_post";
    case Estimator::Kind::unbiased_noise: return "unbiased_noise";
    case Estimator::Kind::sample_mean: return "sample_mean";
    case Estimator::Kind::bernoulli_ctr: return "bernoulli_ctr";
  }
  return "?";
}

ConvergenceTable empirical_convergence(const Estimator& family, const Vec& omega,
                                       const std::vector<int>& ms, int replications,
                                       std::uint64_t seed) {
  ConvergenceTable table;
  for (int m : ms) {
    Estimator est = family.with_m(m);
    ConvergenceRow row;
    row.m = m;
    row.exact = est.mean_abs_error(omega);
    if (est.has_exact_law()) {
      row.mean_abs = row.exact;
      row.se = 0.0;
    } else {
      double sum = 0.0, sumsq = 0.0;
      for (int r = 0; r < replications; ++r) {
        auto rng = stream_rng(seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r)});
        double dev = (est.sample(omega, rng) - omega).norm();
        sum += dev;
        sumsq += dev * dev;
      }
      row.mean_abs = sum / replications;
      double var = (sumsq - sum * sum / replications) / std::max(1, replications - 1);
      row.se = std::sqrt(std::max(0.0, var) / replications);
    }
    table.rows.push_back(row);
  }

  std::vector<double> lx, ly;
  for (const auto& r : table.rows) {
    if (r.mean_abs > 1e-15) {
      lx.push_back(std::log(static_cast<double>(r.m)));
      ly.push_back(std::log(r.mean_abs));
    }
    table.sup_rate_scaled = std::max(table.sup_rate_scaled, family.rate(r.m) * r.mean_abs);
  }
  table.slope = fit_line(lx, ly).slope;
  for (size_t k = 1; k < table.rows.size(); ++k) {
    double slack = 3.0 * (table.rows[k - 1].se + table.rows[k].se);
    if (table.rows[k].mean_abs > table.rows[k - 1].mean_abs + slack) table.monotone = false;
  }
  return table;
}

}  // namespace ddvcg
