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

#include "ddvcg/config.hpp"

#include "ddvcg/expression.hpp"

#include <fstream>
#include <sstream>

namespace ddvcg {

namespace {

using nlohmann::json;

double get_num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> get_list(const json& j, const std::string& key,
                             const std::vector<double>& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_array()) throw ConfigError("'" + key + "' must be an array");
  return j.at(key).get<std::vector<double>>();
}

std::vector<Vec> parse_points(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(what + " must be a nonempty array");
  std::vector<Vec> pts;
  for (const auto& row : arr) {
    if (!row.is_array() || row.empty()) throw ConfigError(what + " rows must be arrays");
    Vec p(row.size());
    for (size_t k = 0; k < row.size(); ++k) p(static_cast<int>(k)) = row[k].get<double>();
    pts.push_back(std::move(p));
  }
  return pts;
}

Mat parse_matrix(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(what + " must be a nonempty array");
  const size_t cols = arr[0].size();
  Mat m(arr.size(), cols);
  for (size_t r = 0; r < arr.size(); ++r) {
    if (arr[r].size() != cols) throw ConfigError(what + " rows must have equal length");
    for (size_t c = 0; c < cols; ++c) m(static_cast<int>(r), static_cast<int>(c)) = arr[r][c].get<double>();
  }
  return m;
}

}  // namespace

Instance load_instance_json(const nlohmann::json& j) {
  for (const char* key : {"agents", "state_grid", "type_grids", "signal_kernels", "utility",
                          "outcome_space"})
    if (!j.contains(key)) throw ConfigError(std::string("instance file misses section '") + key + "'");

  const int n = j.at("agents").get<int>();
  if (n < 1) throw ConfigError("agents must be >= 1");

  StateGrid states;
  states.points = parse_points(j.at("state_grid"), "state_grid");

  const auto& tg = j.at("type_grids");
  if (!tg.contains("theta") || !tg.contains("signal"))
    throw ConfigError("type_grids needs 'theta' and 'signal'");
  std::vector<std::vector<Vec>> theta_grids, sig_grids;
  for (const auto& g : tg.at("theta")) theta_grids.push_back(parse_points(g, "theta grid"));
  for (const auto& g : tg.at("signal")) sig_grids.push_back(parse_points(g, "signal grid"));
  if (static_cast<int>(theta_grids.size()) != n || static_cast<int>(sig_grids.size()) != n)
    throw ConfigError("type_grids must list one grid per agent");

  const auto& sk = j.at("signal_kernels");
  Vec prior;
  {
    auto pv = sk.at("state_prior").get<std::vector<double>>();
    prior = Eigen::Map<Vec>(pv.data(), static_cast<int>(pv.size()));
  }
  std::vector<Mat> kernels;
  std::optional<Mat> joint;
  if (sk.contains("joint")) {
    joint = parse_matrix(sk.at("joint"), "joint kernel");
  } else if (sk.contains("per_agent")) {
    for (const auto& k : sk.at("per_agent")) kernels.push_back(parse_matrix(k, "signal kernel"));
    if (static_cast<int>(kernels.size()) != n)
      throw ConfigError("signal_kernels.per_agent must list one kernel per agent");
  } else {
    throw ConfigError("signal_kernels needs 'per_agent' or 'joint'");
  }
  std::vector<Vec> theta_priors;
  if (sk.contains("theta_prior")) {
    for (const auto& tp : sk.at("theta_prior")) {
      auto pv = tp.get<std::vector<double>>();
      theta_priors.push_back(Eigen::Map<Vec>(pv.data(), static_cast<int>(pv.size())));
    }
  }

  const auto& ut = j.at("utility");
  UtilitySpec util;
  util.lipschitz_omega.assign(n, std::numeric_limits<double>::quiet_NaN());
  util.sup_bound.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (ut.contains("lipschitz"))
    util.lipschitz_omega = ut.at("lipschitz").get<std::vector<double>>();
  if (ut.contains("sup_bound")) util.sup_bound = ut.at("sup_bound").get<std::vector<double>>();
  if (ut.contains("builtin")) {
    std::string name = ut.at("builtin").get<std::string>();
    if (name == "quadratic_loss") {
      for (int i = 0; i < n; ++i)
        util.payoff.push_back([i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
          double d = x(0) - th[i](0) - w(0);
          return -d * d;
        });
    } else if (name == "linear_ctr_common") {
      for (int i = 0; i < n; ++i)
        util.payoff.push_back([i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
          return th[i](0) * x(i) * w(0);
        });
    } else if (name == "linear_ctr_individual") {
      for (int i = 0; i < n; ++i)
        util.payoff.push_back([i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
          return th[i](0) * x(i) * w(i);
        });
    } else if (name == "interdependent_pair") {
      if (n != 2) throw ConfigError("interdependent_pair needs exactly two agents");
      util.profile_dependent = true;
      util.payoff.push_back([](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
        return th[0](0) * x(0) * w(0);
      });
      util.payoff.push_back([](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
        return (th[1](0) - th[0](0)) * x(1) * w(0);
      });
    } else {
      throw ConfigError("unknown builtin utility '" + name + "'");
    }
  } else if (ut.contains("expr")) {
    const auto& exprs = ut.at("expr");
    if (static_cast<int>(exprs.size()) != n)
      throw ConfigError("utility.expr must list one expression per agent");
    for (int i = 0; i < n; ++i) {
      Expression e = Expression::parse(exprs[i].get<std::string>());
      util.payoff.push_back([e, i](const Vec& x, const Vec& w, const std::vector<Vec>& th) {
        return e.eval(x, w, th[i]);
      });
    }
  } else {
    throw ConfigError("utility needs 'builtin' or 'expr'");
  }

  const auto& os = j.at("outcome_space");
  OutcomeSpace out;
  std::string mode = os.at("mode").get<std::string>();
  if (mode == "finite_list") {
    out.mode = OutcomeSpace::Mode::finite_list;
    out.points = parse_points(os.at("points"), "outcome points");
  } else if (mode == "simplex") {
    out.mode = OutcomeSpace::Mode::simplex;
    out.tokens = os.at("tokens").get<int>();
    out.resolution = os.value("resolution", 1000);
  } else {
    throw ConfigError("outcome_space.mode must be finite_list or simplex");
  }

  bool full_support = j.value("full_support", false);
  try {
    return Instance(std::move(states), std::move(theta_grids), std::move(sig_grids),
                    std::move(prior), std::move(kernels), joint, std::move(theta_priors),
                    std::move(util), std::move(out), full_support);
  } catch (const InvalidInstance& e) {
    throw ConfigError(std::string("instance file invalid: ") + e.what());
  }
}

Scenario build_scenario(const nlohmann::json& spec) {
  if (!spec.contains("name")) throw ConfigError("scenario needs a 'name'");
  std::string name = spec.at("name").get<std::string>();
  try {
    if (name == "quadratic_loss") {
      QuadraticParams p;
      p.mu0 = get_num(spec, "mu0", p.mu0);
      p.sigma0 = get_num(spec, "sigma0", p.sigma0);
      p.sigma_obs = get_list(spec, "sigma_obs", p.sigma_obs);
      p.state_points = static_cast<int>(get_num(spec, "state_points", p.state_points));
      p.signal_points = static_cast<int>(get_num(spec, "signal_points", p.signal_points));
      p.theta_points = static_cast<int>(get_num(spec, "theta_points", p.theta_points));
      p.theta_min = get_num(spec, "theta_min", p.theta_min);
      p.theta_max = get_num(spec, "theta_max", p.theta_max);
      p.x_points = static_cast<int>(get_num(spec, "x_points", p.x_points));
      return make_quadratic_loss(p);
    }
    if (name == "ctr_common") {
      CtrCommonParams p;
      p.num_agents = static_cast<int>(get_num(spec, "num_agents", p.num_agents));
      p.ctr_levels = get_list(spec, "ctr_levels", p.ctr_levels);
      p.theta_levels = get_list(spec, "theta_levels", p.theta_levels);
      p.signal_accuracy = get_num(spec, "signal_accuracy", p.signal_accuracy);
      return make_ctr_common(p);
    }
    if (name == "ctr_individual") {
      CtrIndividualParams p;
      p.ctr_levels = get_list(spec, "ctr_levels", p.ctr_levels);
      p.theta_levels = get_list(spec, "theta_levels", p.theta_levels);
      return make_ctr_individual(p);
    }
    if (name == "llm_kl") {
      LlmKlParams p;
      p.tokens = static_cast<int>(get_num(spec, "tokens", p.tokens));
      p.alpha = get_num(spec, "alpha", p.alpha);
      p.omega_levels = get_list(spec, "omega_levels", p.omega_levels);
      p.theta_levels = get_list(spec, "theta_levels", p.theta_levels);
      p.signal_accuracy = get_num(spec, "signal_accuracy", p.signal_accuracy);
      p.simplex_resolution = static_cast<int>(get_num(spec, "simplex_resolution", p.simplex_resolution));
      if (spec.contains("x0")) {
        auto v = spec.at("x0").get<std::vector<double>>();
        p.x0 = Eigen::Map<Vec>(v.data(), static_cast<int>(v.size()));
      }
      return make_llm_kl(p);
    }
    if (name == "interdependent_counterexample") {
      InterdependentParams p;
      p.theta_levels = get_list(spec, "theta_levels", p.theta_levels);
      p.accuracy = get_num(spec, "accuracy", p.accuracy);
      return make_interdependent_counterexample(p);
    }
    if (name == "instance_file") {
      if (!spec.contains("path")) throw ConfigError("instance_file scenario needs a 'path'");
      std::ifstream in(spec.at("path").get<std::string>());
      if (!in) throw ConfigError("cannot open instance file");
      nlohmann::json inst_json;
      in >> inst_json;
      Scenario scn;
      scn.name = "instance_file";
      scn.instance = std::make_shared<Instance>(load_instance_json(inst_json));
      scn.allocation.mode = AllocationRule::Mode::grid_argmax;
      scn.default_transfer.kind = TransferRule::Kind::data_driven_vcg;
      return scn;
    }
  } catch (const InvalidScenarioParameters& e) {
    throw ConfigError(std::string("scenario parameters invalid: ") + e.what());
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

TransferRule parse_transfer(const nlohmann::json& spec) {
  TransferRule rule;
  std::string kind = spec.value("kind", std::string("data_driven_vcg"));
  if (kind == "vcg") rule.kind = TransferRule::Kind::vcg;
  else if (kind == "generalized_vcg") rule.kind = TransferRule::Kind::generalized_vcg;
  else if (kind == "data_driven_vcg") rule.kind = TransferRule::Kind::data_driven_vcg;
  else if (kind == "regularized_data_driven_vcg") rule.kind = TransferRule::Kind::regularized_data_driven_vcg;
  else if (kind == "per_click_pivot") rule.kind = TransferRule::Kind::per_click_pivot;
  else if (kind == "per_impression") rule.kind = TransferRule::Kind::per_impression;
  else if (kind == "leave_one_out") rule.kind = TransferRule::Kind::leave_one_out;
  else throw ConfigError("unknown transfer kind '" + kind + "'");

  std::string h = spec.value("h_policy", std::string("pivot"));
  if (h == "zero") rule.h_policy = TransferRule::HPolicy::zero;
  else if (h == "pivot") rule.h_policy = TransferRule::HPolicy::pivot;
  else throw ConfigError("unknown h_policy '" + h + "'");

  rule.mc_samples = static_cast<int>(get_num(spec, "mc_samples", rule.mc_samples));
  if (rule.mc_samples < 2) throw ConfigError("transfer.mc_samples must be >= 2");
  rule.seed = static_cast<std::uint64_t>(get_num(spec, "seed", 0));
  return rule;
}

Estimator parse_estimator(const nlohmann::json& spec) {
  std::string kind = spec.value("kind", std::string("ex_post"));
  int m = static_cast<int>(get_num(spec, "m", 1));
  double kappa = get_num(spec, "rate_kappa", 0.4);
  try {
    if (kind == "ex_post") return Estimator::ex_post();
    if (kind == "unbiased_noise") return Estimator::unbiased_noise(get_num(spec, "noise_h", 0.1));
    if (kind == "sample_mean")
      return Estimator::sample_mean(m, get_num(spec, "noise_sigma", 1.0), kappa);
    if (kind == "bernoulli_ctr") return Estimator::bernoulli_ctr(m, kappa);
  } catch (const InvalidScenarioParameters& e) {
    throw ConfigError(std::string("estimator parameters invalid: ") + e.what());
  }
  throw ConfigError("unknown estimator kind '" + kind + "'");
}

std::vector<int> parse_m_range(const std::string& text) {
  std::vector<int> ms;
  auto dots = text.find("..");
  if (dots != std::string::npos) {
    int lo = std::stoi(text.substr(0, dots));
    int hi = std::stoi(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw ConfigError("bad m range '" + text + "'");
    for (long long m = lo; m <= hi; m *= 4) ms.push_back(static_cast<int>(m));
    return ms;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) ms.push_back(std::stoi(item));
  if (ms.empty()) throw ConfigError("empty m list");
  return ms;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (!j.contains("scenario")) throw ConfigError("config needs a 'scenario' section");
  cfg.scenario = build_scenario(j.at("scenario"));
  cfg.seed = static_cast<std::uint64_t>(get_num(j, "seed", 0));
  cfg.rule = j.contains("transfer") ? parse_transfer(j.at("transfer")) : cfg.scenario.default_transfer;
  if (!j.contains("transfer") || !j.at("transfer").contains("seed")) cfg.rule.seed = cfg.seed;
  cfg.estimator = j.contains("estimator") ? parse_estimator(j.at("estimator")) : Estimator::ex_post();

  if (j.contains("sweep")) {
    const auto& sw = j.at("sweep");
    if (sw.contains("m")) {
      if (sw.at("m").is_string()) cfg.m_sweep = parse_m_range(sw.at("m").get<std::string>());
      else cfg.m_sweep = sw.at("m").get<std::vector<int>>();
    }
    for (size_t k = 1; k < cfg.m_sweep.size(); ++k)
      if (cfg.m_sweep[k] <= cfg.m_sweep[k - 1])
        throw ConfigError("sweep.m must be strictly increasing");
  }

  if (j.contains("audit")) {
    const auto& a = j.at("audit");
    cfg.audit.budget = static_cast<std::int64_t>(get_num(a, "budget", static_cast<double>(cfg.audit.budget)));
    if (cfg.audit.budget <= 0) throw ConfigError("audit.budget must be > 0");
    cfg.audit.workers = static_cast<int>(get_num(a, "workers", cfg.audit.workers));
    cfg.audit.zero_tol = get_num(a, "zero_tol", cfg.audit.zero_tol);
  }
  cfg.out_dir = j.value("out", std::string("out"));

  if (j.contains("certificate")) {
    const auto& c = j.at("certificate");
    CertificateRequest req;
    req.s1 = get_num(c, "s1", 1.0);
    req.s1_alt = get_num(c, "s1_alt", -1.0);
    req.s2 = get_num(c, "s2", 0.0);
    req.theta1_a = get_num(c, "theta1_a", -1.0);
    req.theta1_b = get_num(c, "theta1_b", 1.0);
    req.theta2 = get_num(c, "theta2", 0.0);
    cfg.certificate = req;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg = parse_config(j);
  // stable content hash for provenance
  std::string bytes = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  cfg.config_hash = buf;
  return cfg;
}

}  // namespace ddvcg
