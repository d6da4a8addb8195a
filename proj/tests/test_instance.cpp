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

#include "helpers.hpp"

#include <doctest.h>

using namespace ddvcg;
using namespace ddvcg::testing;

namespace {

Instance accuracy08() {
  return binary_accuracy_instance(0.8, {0.0, 1.0, 2.0}, quadratic_util(2, 20.0),
                                  scalar_outcomes(-1.0, 3.0, 41));
}

}  // namespace

TEST_CASE("posterior matches the enumerated eight-cell Bayes table") {
  Instance inst = accuracy08();
  Vec post = inst.posterior({{0, 1}, {1, 1}});
  double oracle = oracle_binary_posterior(0.8, 1, 1);
  CHECK(post(1) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(post(1) == doctest::Approx(16.0 / 17.0).epsilon(1e-14));  // 0.64 / 0.68
  CHECK(post.sum() == doctest::Approx(1.0).epsilon(1e-13));

  // disagreeing signals wash out to the prior
  Vec mixed = inst.posterior({{0, 1}, {1, 0}});
  CHECK(mixed(1) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("empty conditioning returns the prior marginal") {
  Instance inst = accuracy08();
  Vec post = inst.posterior({});
  CHECK(post(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(post(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("perfectly revealing signal concentrates the posterior") {
  Instance inst = binary_accuracy_instance(1.0, {0.0}, quadratic_util(2, 20.0),
                                           scalar_outcomes(-1.0, 3.0, 11),
                                           /*full_support=*/false);
  Vec post = inst.posterior({{0, 1}});
  CHECK(post(1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(post(0) == doctest::Approx(0.0).epsilon(1e-14));

  // contradictory conditioning event has mass zero
  CHECK_THROWS_AS(inst.posterior({{0, 1}, {1, 0}}), ZeroMassEvent);
}

TEST_CASE("posterior composed over a signal partition reproduces the marginal") {
  Instance inst = accuracy08();
  Vec acc = Vec::Zero(2);
  for (int k = 0; k < 2; ++k) {
    // P(s_1 = k)
    double mass = 0.0;
    for (int f = 0; f < inst.signal_space().size(); ++f)
      if (inst.signal_space().coordinate(f, 0) == k) mass += inst.signal_mass(f);
    acc += mass * inst.posterior({{0, k}});
  }
  CHECK((acc - inst.posterior({})).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("interim payoff reproduces the worked examples") {
  Instance inst = accuracy08();
  std::vector<int> s_idx = {1, 1};
  double p1 = 16.0 / 17.0;

  SUBCASE("expectation of a constant payoff") {
    UtilitySpec util;
    util.payoff.assign(2, [](const Vec&, const Vec&, const std::vector<Vec>&) { return 3.25; });
    Instance c = binary_accuracy_instance(0.8, {0.0}, std::move(util), scalar_outcomes(0, 1, 3));
    std::vector<Vec> theta = {c.theta_grid(0)[0], c.theta_grid(1)[0]};
    for (int f = 0; f < c.signal_space().size(); ++f)
      CHECK(c.interim_payoff(0, c.outcomes().points[0], theta, f) == doctest::Approx(3.25));
  }

  SUBCASE("quadratic loss at x = theta") {
    // omega in {0,1} so omega^2 = omega and the value is -P(omega=1|s)
    std::vector<Vec> theta = {inst.theta_grid(0)[1], inst.theta_grid(1)[1]};  // theta = 1
    Vec x = theta[0];
    double v = inst.interim_payoff(0, x, theta, s_idx);
    CHECK(v == doctest::Approx(-p1).epsilon(1e-13));
  }

  SUBCASE("linear payoff passes through the posterior mean") {
    UtilitySpec util;
    for (int i = 0; i < 2; ++i)
      util.payoff.push_back([i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
        return th[i](0) * x(0) * w(0);
      });
    Instance lin = binary_accuracy_instance(0.8, {0.0, 1.0, 2.0}, std::move(util),
                                            scalar_outcomes(0, 1, 2));
    std::vector<Vec> theta = {lin.theta_grid(0)[2], lin.theta_grid(1)[0]};  // theta_1 = 2
    Vec x(1);
    x << 1.0;
    double v = lin.interim_payoff(0, x, theta, s_idx);
    CHECK(v == doctest::Approx(2.0 * p1).epsilon(1e-13));
    CHECK(v == doctest::Approx(1.8823529411764706).epsilon(1e-12));
  }
}

TEST_CASE("interim payoff is linear in the utility") {
  auto out = scalar_outcomes(-1.0, 3.0, 5);
  UtilitySpec uq = quadratic_util(2, 20.0);
  UtilitySpec ul;
  for (int i = 0; i < 2; ++i)
    ul.payoff.push_back([i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
      return th[i](0) * x(0) * w(0);
    });
  const double a = 2.5, b = -0.75;
  UtilitySpec mix;
  for (int i = 0; i < 2; ++i)
    mix.payoff.push_back([i, a, b](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
      double dq = x(0) - th[i](0) - w(0);
      return a * (-dq * dq) + b * (th[i](0) * x(0) * w(0));
    });
  Instance iq = binary_accuracy_instance(0.8, {0.0, 1.0}, std::move(uq), out);
  Instance il = binary_accuracy_instance(0.8, {0.0, 1.0}, std::move(ul), out);
  Instance im = binary_accuracy_instance(0.8, {0.0, 1.0}, std::move(mix), out);
  std::vector<Vec> theta = {iq.theta_grid(0)[1], iq.theta_grid(1)[0]};
  for (int f = 0; f < iq.signal_space().size(); ++f) {
    for (const Vec& x : iq.outcomes().points) {
      double lhs = im.interim_payoff(0, x, theta, f);
      double rhs = a * iq.interim_payoff(0, x, theta, f) + b * il.interim_payoff(0, x, theta, f);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("construction rejects bad tables") {
  SUBCASE("prior mass off by more than the tolerance") {
    StateGrid states;
    Vec p0(1), p1(1);
    p0 << 0.0;
    p1 << 1.0;
    states.points = {p0, p1};
    Vec prior(2);
    prior << 0.6, 0.6;
    std::vector<std::vector<Vec>> tg(1), sg(1);
    tg[0] = {p0};
    sg[0] = {p0, p1};
    std::vector<Mat> kernels(1);
    kernels[0].resize(2, 2);
    kernels[0] << 0.5, 0.5, 0.5, 0.5;
    UtilitySpec util;
    util.payoff.assign(1, [](const Vec&, const Vec&, const std::vector<Vec>&) { return 0.0; });
    CHECK_THROWS_AS(Instance(states, tg, sg, prior, kernels, std::nullopt, {}, util,
                             scalar_outcomes(0, 1, 2), false),
                    InvalidInstance);
  }
  SUBCASE("duplicate grid points") {
    UtilitySpec util = quadratic_util(2, 20.0);
    CHECK_THROWS_AS(binary_accuracy_instance(0.8, {1.0, 1.0}, std::move(util),
                                             scalar_outcomes(0, 1, 2)),
                    InvalidInstance);
  }
  SUBCASE("declared Lipschitz constant that is too small") {
    UtilitySpec util = quadratic_util(2, 0.01);
    CHECK_THROWS_AS(binary_accuracy_instance(0.8, {0.0, 1.0}, std::move(util),
                                             scalar_outcomes(-1, 3, 11)),
                    InvalidInstance);
  }
}

TEST_CASE("leave-one-out and single-signal posteriors agree with direct conditioning") {
  Instance inst = accuracy08();
  // P(omega | s_2 = 1) via the general conditioning path
  Vec direct = inst.posterior({{1, 1}});
  Vec cached = inst.posterior_single(1, 1);
  CHECK((direct - cached).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(direct(1) == doctest::Approx(0.8).epsilon(1e-14));

  // leave agent 1 out of the profile (1, 0): remaining signal is s_2 = 0
  int flat = inst.sig_flat({1, 0});
  Vec excl = inst.posterior_excl(0, inst.sig_excl_flat(0, flat));
  Vec single = inst.posterior_single(1, 0);
  CHECK((excl - single).cwiseAbs().maxCoeff() < 1e-14);
}
