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

#include "ddvcg/audit.hpp"
#include "ddvcg/scenarios.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace ddvcg;
using namespace ddvcg::testing;

namespace {

Scenario small_quadratic(AllocationRule::Mode mode = AllocationRule::Mode::closed_form) {
  QuadraticParams p;
  p.state_points = 21;
  p.signal_points = 5;
  p.theta_points = 3;
  p.x_points = 121;
  Scenario scn = make_quadratic_loss(p);
  scn.allocation.mode = mode;
  return scn;
}

// Scenario wrapper for the 0.8-accuracy binary-state quadratic instance.
Scenario binary_quadratic() {
  Scenario scn;
  scn.name = "quadratic_loss";
  scn.instance = std::make_shared<Instance>(binary_accuracy_instance(
      0.8, {0.0, 1.0}, quadratic_util(2, 20.0), scalar_outcomes(-1.0, 3.0, 41)));
  scn.allocation.mode = AllocationRule::Mode::closed_form;
  scn.supports_generalized_vcg = true;
  scn.closed_form = [](const Instance& in, const std::vector<int>& ti, const std::vector<int>& si) {
    double tbar = 0.5 * (in.theta_grid(0)[ti[0]](0) + in.theta_grid(1)[ti[1]](0));
    Vec post = in.posterior_full(in.sig_flat(si));
    Vec x(1);
    x(0) = tbar + posterior_mean_scalar(in, post);
    return x;
  };
  scn.closed_form_excl = [](const Instance& in, int excl, const std::vector<int>& ti,
                            const std::vector<int>& si) {
    int j = 1 - excl;
    Vec post = in.posterior_single(j, si[j]);
    Vec x(1);
    x(0) = in.theta_grid(j)[ti[j]](0) + posterior_mean_scalar(in, post);
    return x;
  };
  return scn;
}

}  // namespace

TEST_CASE("message-driven VCG on quadratic loss") {
  Scenario scn = small_quadratic();
  const Instance& inst = scn.inst();

  SUBCASE("h = 0 form is minus squared bias minus posterior variance") {
    for (int t1 : {0, 1, 2})
      for (int t2 : {0, 2})
        for (int s1 : {0, 2, 4}) {
          std::vector<int> ti = {t1, t2}, si = {s1, 1};
          double th1 = inst.theta_grid(0)[t1](0), th2 = inst.theta_grid(1)[t2](0);
          Vec post = inst.posterior_full(inst.sig_flat(si));
          double expected = -0.25 * (th1 - th2) * (th1 - th2) - posterior_var_scalar(inst, post);
          CHECK(vcg_transfer(scn, 0, ti, si, TransferRule::HPolicy::zero) ==
                doctest::Approx(expected).epsilon(1e-12));
        }
  }

  SUBCASE("equal types pay only the variance") {
    std::vector<int> ti = {1, 1}, si = {3, 1};
    Vec post = inst.posterior_full(inst.sig_flat(si));
    CHECK(vcg_transfer(scn, 0, ti, si, TransferRule::HPolicy::zero) ==
          doctest::Approx(-posterior_var_scalar(inst, post)).epsilon(1e-12));
  }
}

TEST_CASE("single agent pays nothing under the pivot") {
  QuadraticParams p;
  p.sigma_obs = {1.0};
  p.state_points = 15;
  p.signal_points = 5;
  p.theta_points = 3;
  p.x_points = 61;
  Scenario scn = make_quadratic_loss(p);
  CHECK(vcg_transfer(scn, 0, {1}, {2}, TransferRule::HPolicy::pivot) == 0.0);
  EstimateDraw draw{scn.inst().states().points[7], 0};
  CHECK(data_driven_vcg_transfer(scn, 0, {1}, {2}, draw, TransferRule::HPolicy::pivot) == 0.0);
}

TEST_CASE("generalized VCG transfers") {
  SUBCASE("worked value on the binary instance") {
    Scenario scn = binary_quadratic();
    // theta = (1, 0), s = (1, 1): k - (theta1 - theta2) E[omega|s] = -16/17
    CHECK(generalized_vcg_transfer(scn, 0, {1, 0}, {1, 1}) ==
          doctest::Approx(-16.0 / 17.0).epsilon(1e-12));
    CHECK(generalized_vcg_transfer(scn, 0, {1, 1}, {1, 1}) == doctest::Approx(0.0));
  }

  SUBCASE("other scenarios are rejected") {
    Scenario ctr = make_ctr_common();
    CHECK_THROWS_AS(generalized_vcg_transfer(ctr, 0, {0, 0}, {0, 0}), UnsupportedScenario);
  }

  SUBCASE("quadrature of the sorting-condition integrand matches the closed form") {
    Scenario scn = small_quadratic();
    const Instance& inst = scn.inst();
    const double th1 = inst.theta_grid(0)[2](0), th2 = inst.theta_grid(1)[0](0);
    const double tbar = 0.5 * (th1 + th2);
    const double s1 = 1.0, s2 = 0.5;

    auto mean_at = [&](double v1) {
      return posterior_mean_scalar(inst, scn.continuous_posterior({v1, s2}));
    };
    // E_{omega|v,s2}[u_2(x, omega, theta2)] as a function of the allocation x
    auto eu2 = [&](double x, double v1) {
      Vec post = scn.continuous_posterior({v1, s2});
      double acc = 0.0;
      for (int w = 0; w < inst.states().size(); ++w) {
        double d = x - th2 - inst.states().points[w](0);
        acc -= post(w) * d * d;
      }
      return acc;
    };

    const double fd = 1e-4;
    auto integrand = [&](double v1) {
      double xstar = tbar + mean_at(v1);
      double du_dx = (eu2(xstar + fd, v1) - eu2(xstar - fd, v1)) / (2 * fd);
      double dx_dv = (tbar + mean_at(v1 + fd) - (tbar + mean_at(v1 - fd))) / (2 * fd);
      return du_dx * dx_dv;
    };

    const int steps = 500;
    double quad = 0.0;
    for (int k = 0; k < steps; ++k) {
      double a = s1 * k / steps, b = s1 * (k + 1) / steps;
      quad += 0.5 * (integrand(a) + integrand(b)) * (b - a);
    }
    double closed = -(th1 - th2) * (mean_at(s1) - mean_at(0.0));
    CHECK(std::abs(quad - closed) < 1e-6);
  }
}

TEST_CASE("data-driven VCG on quadratic loss") {
  Scenario scn = binary_quadratic();
  const Instance& inst = scn.inst();
  Estimator expost = Estimator::ex_post();
  TransferRule rule;
  rule.kind = TransferRule::Kind::data_driven_vcg;
  rule.h_policy = TransferRule::HPolicy::pivot;

  SUBCASE("truthful expected pivot transfer decomposes into accuracy and bias terms") {
    for (int t1 : {0, 1})
      for (int t2 : {0, 1})
        for (int f = 0; f < inst.signal_space().size(); ++f) {
          std::vector<int> ti = {t1, t2};
          std::vector<int> si = {inst.signal_space().coordinate(f, 0),
                                 inst.signal_space().coordinate(f, 1)};
          double th1 = inst.theta_grid(0)[t1](0), th2 = inst.theta_grid(1)[t2](0);
          double mean_full = posterior_mean_scalar(inst, inst.posterior_full(f));
          double mean_other = posterior_mean_scalar(inst, inst.posterior_single(1, si[1]));
          double expected = -0.25 * (th1 - th2) * (th1 - th2) +
                            (mean_full - mean_other) * (mean_full - mean_other);
          ExpectedValue t = expected_transfer(scn, rule, expost, 0, ti, si, si);
          CHECK(t.value == doctest::Approx(expected).epsilon(1e-11));
        }
  }

  SUBCASE("aligned preferences are paid for prediction accuracy") {
    // theta_1 = theta_2: transfer is (E[omega|s] - E[omega|s_j])^2 = (16/17 - 4/5)^2
    ExpectedValue t = expected_transfer(scn, rule, expost, 0, {1, 1}, {1, 1}, {1, 1});
    CHECK(t.value >= 0.0);
    CHECK(t.value == doctest::Approx(144.0 / 7225.0).epsilon(1e-12));  // 0.0199308...
  }
}

TEST_CASE("expected transfers across estimator laws") {
  SUBCASE("ex post reduces to the posterior average of realized transfers") {
    Scenario scn = binary_quadratic();
    TransferRule rule = scn.default_transfer;
    SolvedProfile sp = solve_profile(scn, rule, {1, 0}, {1, 0});
    Vec post = scn.inst().posterior_full(scn.inst().sig_flat({1, 0}));
    double direct = 0.0;
    for (int w = 0; w < 2; ++w)
      direct += post(w) * realized_transfer(scn, rule, sp, 0, scn.inst().states().points[w]);
    ExpectedValue t = expected_transfer(scn, rule, Estimator::ex_post(), 0, {1, 0}, {1, 0}, {1, 0});
    CHECK(t.value == doctest::Approx(direct).epsilon(1e-14));
    CHECK(t.se == 0.0);
  }

  SUBCASE("linear payoffs make unbiased noise equivalent to ex post") {
    Scenario scn = make_ctr_common();
    TransferRule rule;
    rule.kind = TransferRule::Kind::data_driven_vcg;
    rule.h_policy = TransferRule::HPolicy::pivot;
    Estimator noise = Estimator::unbiased_noise(0.07);
    Estimator expost = Estimator::ex_post();
    for (int t1 : {0, 2, 4})
      for (int s1 : {0, 1, 2}) {
        std::vector<int> ti = {t1, 3}, si = {s1, 2};
        ExpectedValue a = expected_transfer(scn, rule, noise, 0, ti, si, si);
        ExpectedValue b = expected_transfer(scn, rule, expost, 0, ti, si, si);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
      }
  }

  SUBCASE("squared loss shifts by the noise variance under h = 0") {
    Scenario scn = binary_quadratic();
    TransferRule rule;
    rule.kind = TransferRule::Kind::data_driven_vcg;
    rule.h_policy = TransferRule::HPolicy::zero;
    const double h = 0.25;
    ExpectedValue noisy =
        expected_transfer(scn, rule, Estimator::unbiased_noise(h), 0, {1, 0}, {1, 1}, {1, 1});
    ExpectedValue clean =
        expected_transfer(scn, rule, Estimator::ex_post(), 0, {1, 0}, {1, 1}, {1, 1});
    CHECK(noisy.value == doctest::Approx(clean.value - h * h).epsilon(1e-12));

    // under the pivot the variance term cancels between the two sub-sums
    TransferRule pivot = rule;
    pivot.h_policy = TransferRule::HPolicy::pivot;
    ExpectedValue pn =
        expected_transfer(scn, pivot, Estimator::unbiased_noise(h), 0, {1, 0}, {1, 1}, {1, 1});
    ExpectedValue pc =
        expected_transfer(scn, pivot, Estimator::ex_post(), 0, {1, 0}, {1, 1}, {1, 1});
    CHECK(pn.value == doctest::Approx(pc.value).epsilon(1e-12));
  }
}

TEST_CASE("regularized data-driven VCG") {
  Scenario scn = make_llm_kl();
  const Instance& inst = scn.inst();
  TransferRule rule = scn.default_transfer;
  Estimator expost = Estimator::ex_post();

  SUBCASE("ex-post truthful expected transfer is the marginal contribution") {
    for (int f = 0; f < inst.signal_space().size(); ++f) {
      std::vector<int> si = {inst.signal_space().coordinate(f, 0),
                             inst.signal_space().coordinate(f, 1)};
      for (int t1 : {0, 1})
        for (int i = 0; i < 2; ++i) {
          std::vector<int> ti = {t1, 1 - t1};
          Vec post = inst.posterior_full(f);
          Vec post_excl = inst.posterior_excl(i, inst.sig_excl_flat(i, f));
          std::vector<Vec> theta = theta_vectors(inst, ti);
          double logz = kl_log_partition(token_rewards(inst, theta, post),
                                         scn.reg.reference(si, -1), scn.reg.alpha);
          double logz_excl = kl_log_partition(token_rewards(inst, theta, post_excl, i),
                                              scn.reg.reference(si, i), scn.reg.alpha);
          AllocationResult xstar = solve_allocation(scn, ti, si);
          double vi = post.dot(inst.payoff_over_states(i, xstar.point, theta));
          double expected = scn.reg.alpha * (logz - logz_excl) - vi;
          ExpectedValue t = expected_transfer(scn, rule, expost, i, ti, si, si);
          CHECK(t.value == doctest::Approx(expected).epsilon(1e-10));
        }
    }
  }

  SUBCASE("rewards aligned with the reference cancel the divergence terms") {
    LlmKlParams p;
    p.base_rewards.assign(2, Mat::Constant(3, 3, 0.4));
    Scenario aligned = make_llm_kl(p);
    TransferRule r = aligned.default_transfer;
    SolvedProfile sp = solve_profile(aligned, r, {0, 0}, {0, 0});
    CHECK(sp.penalty == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(sp.penalty_excl[0] == doctest::Approx(0.0).epsilon(1e-13));
    CHECK((sp.x - aligned.reg.reference({0, 0}, -1)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("an agent with zero rewards is paid only for her prediction value") {
    LlmKlParams p;
    p.tokens = 2;
    Mat r1(2, 3);
    r1 << 1.0, 0.5, 0.0, 0.2, 0.6, 1.0;
    p.base_rewards = {r1, Mat::Zero(2, 3)};
    Scenario two = make_llm_kl(p);
    const Instance& in2 = two.inst();
    std::vector<int> ti = {1, 1}, si = {0, 2};
    std::vector<Vec> theta = theta_vectors(in2, ti);
    Vec post = in2.posterior_full(in2.sig_flat(si));
    Vec post_excl = in2.posterior_excl(1, in2.sig_excl_flat(1, in2.sig_flat(si)));
    double logz = kl_log_partition(token_rewards(in2, theta, post), two.reg.reference(si, -1),
                                   two.reg.alpha);
    double logz_excl = kl_log_partition(token_rewards(in2, theta, post_excl, 1),
                                        two.reg.reference(si, 1), two.reg.alpha);
    // v_2 = 0, so the marginal contribution is the partition-function difference
    ExpectedValue t = expected_transfer(two, two.default_transfer, expost, 1, ti, si, si);
    CHECK(t.value == doctest::Approx(two.reg.alpha * (logz - logz_excl)).epsilon(1e-10));
  }
}

TEST_CASE("per-click pivot prices") {
  Scenario scn = make_ctr_common();
  // theta grid {0.1,0.3,0.5,0.7,0.9}: price for agent 1 is the rival's theta
  CHECK(per_click_pivot_price(scn, 0, {2, 1}) == doctest::Approx(0.3));
  CHECK(per_click_pivot_price(scn, 1, {2, 1}) == doctest::Approx(0.5));

  CtrCommonParams p3;
  p3.num_agents = 3;
  p3.theta_levels = {0.4, 0.45, 0.5};
  Scenario three = make_ctr_common(p3);
  CHECK(per_click_pivot_price(three, 0, {2, 0, 1}) == doctest::Approx(0.45));
}

TEST_CASE("per-click and data-driven pivot payments coincide on common CTR") {
  Scenario scn = make_ctr_common();
  Estimator clicks = Estimator::bernoulli_ctr(8);
  TransferRule per_click;
  per_click.kind = TransferRule::Kind::per_click_pivot;
  TransferRule data_driven;
  data_driven.kind = TransferRule::Kind::data_driven_vcg;
  data_driven.h_policy = TransferRule::HPolicy::pivot;

  for (int t1 : {0, 2, 4})
    for (int s1 : {0, 1, 2})
      for (int strue : {0, 1, 2}) {
        std::vector<int> ti = {t1, 3}, si = {s1, 1}, st = {strue, 1};
        for (int i = 0; i < 2; ++i) {
          ExpectedValue a = expected_transfer(scn, per_click, clicks, i, ti, si, st);
          ExpectedValue b = expected_transfer(scn, data_driven, clicks, i, ti, si, st);
          CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
        }
      }
}

TEST_CASE("leave-one-out transfers") {
  Scenario scn = binary_quadratic();
  const Instance& inst = scn.inst();
  std::vector<int> ti = {1, 0}, si = {1, 0};

  SUBCASE("two agents: the estimate is the other report verbatim") {
    Vec rho2(1);
    rho2 << 0.37;
    Vec agg = leave_one_out_aggregate({Vec(), rho2}, 0);
    CHECK(agg(0) == 0.37);
  }

  SUBCASE("true-state reports reproduce the ex-post transfer") {
    for (int w = 0; w < 2; ++w) {
      const Vec& omega = inst.states().points[w];
      double loo = leave_one_out_transfer(scn, 0, ti, si, {omega, omega},
                                          TransferRule::HPolicy::pivot);
      EstimateDraw draw{omega, 0};
      double direct = data_driven_vcg_transfer(scn, 0, ti, si, draw, TransferRule::HPolicy::pivot);
      CHECK(loo == direct);
    }
  }

  SUBCASE("own second-stage report never moves the transfer") {
    Vec truth(1), weird(1);
    truth << 1.0;
    weird << -123.456;
    double base = leave_one_out_transfer(scn, 0, ti, si, {truth, truth},
                                         TransferRule::HPolicy::pivot);
    double perturbed = leave_one_out_transfer(scn, 0, ti, si, {weird, truth},
                                              TransferRule::HPolicy::pivot);
    CHECK(base == perturbed);  // bit-identical
  }

  SUBCASE("missing reports are rejected") {
    Vec truth(1);
    truth << 1.0;
    CHECK_THROWS_AS(leave_one_out_transfer(scn, 0, ti, si, {truth}, TransferRule::HPolicy::pivot),
                    MissingSecondStageReport);
    CHECK_THROWS_AS(leave_one_out_transfer(scn, 0, ti, si, {truth, Vec()},
                                           TransferRule::HPolicy::pivot),
                    MissingSecondStageReport);
  }
}

TEST_CASE("data-driven transfers reach signals only through the allocation") {
  Scenario scn = make_ctr_common();
  const Instance& inst = scn.inst();
  TransferRule rule;
  rule.kind = TransferRule::Kind::data_driven_vcg;
  rule.h_policy = TransferRule::HPolicy::pivot;
  // winner depends only on theta here, so any two signal reports allocate alike
  SolvedProfile a = solve_profile(scn, rule, {4, 1}, {0, 1});
  SolvedProfile b = solve_profile(scn, rule, {4, 1}, {2, 1});
  REQUIRE(a.x_index == b.x_index);
  for (int w = 0; w < inst.states().size(); ++w) {
    const Vec& omega = inst.states().points[w];
    CHECK(realized_transfer(scn, rule, a, 0, omega) == realized_transfer(scn, rule, b, 0, omega));
  }
}
