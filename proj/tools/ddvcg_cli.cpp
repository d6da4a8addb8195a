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
#include "ddvcg/report.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace ddvcg;

struct CommonFlags {
  std::string config_path;
  std::string m_range;
  std::string out_override;
  std::int64_t seed_override = -1;
  int workers_override = 0;
};

ExperimentConfig load_with_overrides(const CommonFlags& flags) {
  ExperimentConfig cfg = load_config(flags.config_path);
  if (flags.seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(flags.seed_override);
    cfg.rule.seed = cfg.seed;
  }
  if (flags.workers_override > 0) cfg.audit.workers = flags.workers_override;
  if (!flags.out_override.empty()) cfg.out_dir = flags.out_override;
  if (!flags.m_range.empty()) cfg.m_sweep = parse_m_range(flags.m_range);
  return cfg;
}

Provenance provenance(const ExperimentConfig& cfg) {
  Provenance p;
  p.scenario = cfg.scenario.name;
  p.rule = to_string(cfg.rule.kind);
  p.estimator = to_string(cfg.estimator.kind());
  p.m = cfg.estimator.m();
  p.seed = cfg.seed;
  return p;
}

double bound_or_nan(const ExperimentConfig& cfg, const Estimator& est) {
  try {
    double bound = 0.0;
    for (int i = 0; i < cfg.scenario.inst().num_agents(); ++i)
      bound = std::max(bound, regret_upper_bound(cfg.scenario, i, est));
    return bound;
  } catch (const MissingLipschitzConstant&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Demo records for the documented parameterizations, attached when the grids
// carry them.
void attach_demos(const ExperimentConfig& cfg, nlohmann::ordered_json& summary) {
  const Instance& inst = cfg.scenario.inst();
  auto find = [&](const std::vector<Vec>& grid, double v) {
    for (int k = 0; k < static_cast<int>(grid.size()); ++k)
      if (std::abs(grid[k](0) - v) <= 1e-12) return k;
    return -1;
  };
  try {
    if (cfg.scenario.ctr_individual_states) {
      std::vector<int> ti = {find(inst.theta_grid(0), 0.5), find(inst.theta_grid(1), 0.4)};
      std::vector<int> si = {find(inst.signal_grid(0), 0.3), find(inst.signal_grid(1), 0.6)};
      if (ti[0] >= 0 && ti[1] >= 0 && si[0] >= 0 && si[1] >= 0) {
        CtrManipulationDemo d = individual_ctr_manipulation_demo(cfg.scenario, ti, si);
        summary["manipulation_demo"] = {{"theta", {d.theta1, d.theta2}},
                                        {"s", {d.s1, d.s2}},
                                        {"truthful_net", d.truthful_net},
                                        {"deviation_net", d.deviation_net},
                                        {"gain", d.gain}};
      }
    }
    if (cfg.scenario.name == "interdependent_counterexample") {
      std::vector<int> ti = {find(inst.theta_grid(0), 0.5), find(inst.theta_grid(1), 0.8)};
      std::vector<int> si = {0, 0};
      if (ti[0] >= 0 && ti[1] >= 0) {
        InterdependentDemo d = interdependent_counterexample_demo(cfg.scenario, ti, si);
        summary["counterexample_demo"] = {{"posterior_mean", d.posterior_mean},
                                          {"truthful_net", d.truthful_net},
                                          {"deviation_net", d.deviation_net},
                                          {"gain", d.gain}};
      }
    }
  } catch (const PreconditionFails&) {
    // documented parameterization not on these grids; nothing to attach
  }
}

int cmd_run(const CommonFlags& flags) {
  ExperimentConfig cfg = load_with_overrides(flags);
  RegretReport report = posterior_regret(cfg.scenario, cfg.rule, cfg.estimator, cfg.audit);

  RateSweep single;
  RateRow row;
  row.m = cfg.estimator.m();
  row.epsilon = report.epsilon;
  row.se = report.epsilon_se;
  row.bound = bound_or_nan(cfg, cfg.estimator);
  row.rate = cfg.estimator.rate();
  row.rate_eps = row.rate * row.epsilon;
  single.rows.push_back(row);

  ImpossibilityCertificate cert;
  bool has_cert = false;
  nlohmann::ordered_json summary;
  Provenance prov = provenance(cfg);
  if (cfg.certificate) {
    const auto& c = *cfg.certificate;
    cert = impossibility_certificate(cfg.scenario, c.s1, c.s1_alt, c.s2, c.theta1_a, c.theta1_b,
                                     c.theta2);
    has_cert = true;
  }
  summary = summary_json(prov, cfg.config_hash, &report, &single, has_cert ? &cert : nullptr);
  attach_demos(cfg, summary);

  write_file(cfg.out_dir + "/regret_report.csv", regret_csv(prov, report));
  write_file(cfg.out_dir + "/rate_sweep.csv", sweep_csv(prov, single));
  write_file(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << "epsilon = " << format_double(report.epsilon)
            << (report.exact_mode ? " (exact)" : " (monte carlo)") << ", reports in "
            << cfg.out_dir << "\n";
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  ExperimentConfig cfg = load_with_overrides(flags);
  if (cfg.m_sweep.empty()) throw ConfigError("sweep needs an m list (config sweep.m or --m)");
  RateSweep sweep = convergence_sweep(cfg.scenario, cfg.rule, cfg.estimator, cfg.m_sweep, cfg.audit);
  Provenance prov = provenance(cfg);
  nlohmann::ordered_json summary = summary_json(prov, cfg.config_hash, nullptr, &sweep, nullptr);
  write_file(cfg.out_dir + "/rate_sweep.csv", sweep_csv(prov, sweep));
  write_file(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << "sweep over " << sweep.rows.size() << " sample sizes, slope = "
            << (sweep.slope_defined ? format_double(sweep.slope) : std::string("exact"))
            << ", reports in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_certify(const CommonFlags& flags) {
  ExperimentConfig cfg = load_with_overrides(flags);
  if (!cfg.certificate) throw ConfigError("certify-impossibility needs a 'certificate' section");
  const auto& c = *cfg.certificate;
  Provenance prov = provenance(cfg);
  nlohmann::ordered_json summary;
  try {
    ImpossibilityCertificate cert = impossibility_certificate(cfg.scenario, c.s1, c.s1_alt, c.s2,
                                                              c.theta1_a, c.theta1_b, c.theta2);
    summary = summary_json(prov, cfg.config_hash, nullptr, nullptr, &cert);
    std::cout << "certificate issued: gap = " << format_double(cert.gap)
              << ", delta mean = " << format_double(cert.delta_mean) << "\n";
  } catch (const ConditionStarFails& e) {
    summary = summary_json(prov, cfg.config_hash, nullptr, nullptr, nullptr);
    summary["certificate"] = {{"condition_star_holds", false}, {"reason", e.what()}};
    std::cout << "condition (*) fails: " << e.what() << "\n";
  }
  write_file(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_list() {
  for (const auto& name : scenario_names()) std::cout << name << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ddvcg: data-driven VCG mechanisms with posterior-equilibrium audits"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub, bool with_m) {
    sub->add_option("--config", flags.config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", flags.seed_override, "override the master seed");
    sub->add_option("--workers", flags.workers_override, "worker threads (does not affect outputs)");
    sub->add_option("--out", flags.out_override, "output directory");
    if (with_m) sub->add_option("--m", flags.m_range, "sample sizes, e.g. 4..4096 or 4,16,64");
  };

  CLI::App* run = app.add_subcommand("run", "audit one scenario/rule/estimator triple");
  add_common(run, false);
  CLI::App* sweep = app.add_subcommand("sweep", "convergence sweep over sample sizes");
  add_common(sweep, true);
  CLI::App* certify =
      app.add_subcommand("certify-impossibility", "emit the message-driven impossibility witness");
  add_common(certify, false);
  app.add_subcommand("list-scenarios", "print registered scenario names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (certify->parsed()) return cmd_certify(flags);
    return cmd_list();
  } catch (const ddvcg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ddvcg::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
