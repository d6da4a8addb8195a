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

#include "ddvcg/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ddvcg {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string prov_prefix(const Provenance& p) {
  std::ostringstream os;
  os << p.scenario << ',' << p.rule << ',' << p.estimator << ',' << p.m << ',' << p.seed;
  return os.str();
}

}  // namespace

std::string regret_csv(const Provenance& prov, const RegretReport& report) {
  std::ostringstream os;
  os << "scenario,rule,estimator,m,seed,agent,theta_idx,s_idx,best_dev_theta,best_dev_s,gain,se\n";
  const std::string prefix = prov_prefix(prov);
  for (const auto& row : report.rows) {
    os << prefix << ',' << row.agent << ',' << row.theta_flat << ',' << row.sig_flat << ','
       << row.best_theta_dev << ',' << row.best_sig_dev << ',' << format_double(row.gain) << ','
       << format_double(row.se) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const Provenance& prov, const RateSweep& sweep) {
  std::ostringstream os;
  os << "scenario,rule,estimator,seed,m,epsilon,bound,r_m,r_eps,se\n";
  for (const auto& row : sweep.rows) {
    os << prov.scenario << ',' << prov.rule << ',' << prov.estimator << ',' << prov.seed << ','
       << row.m << ',' << format_double(row.epsilon) << ',' << format_double(row.bound) << ','
       << format_double(row.rate) << ',' << format_double(row.rate_eps) << ','
       << format_double(row.se) << '\n';
  }
  return os.str();
}

nlohmann::ordered_json certificate_json(const ImpossibilityCertificate& cert) {
  nlohmann::ordered_json c;
  c["condition_star_holds"] = true;
  c["s1"] = cert.s1;
  c["s1_alt"] = cert.s1_alt;
  c["s2"] = cert.s2;
  c["theta1_a"] = cert.theta1_a;
  c["theta1_b"] = cert.theta1_b;
  c["theta2"] = cert.theta2;
  c["posterior_mean"] = cert.mean_s;
  c["posterior_mean_alt"] = cert.mean_alt;
  c["posterior_var"] = cert.var_s;
  c["posterior_var_alt"] = cert.var_alt;
  c["delta_mean"] = cert.delta_mean;
  c["rhs_a"] = cert.rhs_a;
  c["rhs_b"] = cert.rhs_b;
  c["gap"] = cert.gap;
  c["product"] = cert.product;
  c["matched"] = cert.matched;
  return c;
}

nlohmann::ordered_json summary_json(const Provenance& prov, const std::string& config_hash,
                                    const RegretReport* report, const RateSweep* sweep,
                                    const ImpossibilityCertificate* cert) {
  nlohmann::ordered_json s;
  s["version"] = "0.1.0";
  s["scenario"] = prov.scenario;
  s["rule"] = prov.rule;
  s["estimator"] = prov.estimator;
  s["m"] = prov.m;
  s["seed"] = prov.seed;
  s["config_hash"] = config_hash;
  if (report) {
    s["epsilon"] = report->epsilon;
    s["epsilon_se"] = report->epsilon_se;
    s["discretization_bound"] = report->discretization_bound;
    s["exact_mode"] = report->exact_mode;
    s["evaluations"] = report->evaluations;
  }
  if (sweep) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : sweep->rows) {
      nlohmann::ordered_json row;
      row["m"] = r.m;
      row["epsilon"] = r.epsilon;
      row["bound"] = r.bound;
      row["r_m"] = r.rate;
      row["r_eps"] = r.rate_eps;
      row["se"] = r.se;
      rows.push_back(row);
    }
    s["sweep"] = rows;
    if (sweep->slope_defined) s["slope"] = sweep->slope;
    else s["slope"] = "exact";
  }
  if (cert) s["certificate"] = certificate_json(*cert);
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

}  // namespace ddvcg
