#pragma once
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

#include <json.hpp>

#include <optional>
#include <string>

namespace ddvcg {

struct CertificateRequest {
  double s1 = 0, s1_alt = 0, s2 = 0;
  double theta1_a = 0, theta1_b = 0, theta2 = 0;
};

struct ExperimentConfig {
  Scenario scenario;
  TransferRule rule;
  Estimator estimator = Estimator::ex_post();
  std::vector<int> m_sweep;
  AuditOptions audit;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::optional<CertificateRequest> certificate;
  std::string config_hash;
};

// Parses and fully validates an experiment config; throws ConfigError before
// any output is produced.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

Scenario build_scenario(const nlohmann::json& spec);
TransferRule parse_transfer(const nlohmann::json& spec);
Estimator parse_estimator(const nlohmann::json& spec);

// Instance definition file: sections `agents`, `state_grid`, `type_grids`,
// `signal_kernels`, `utility`, `outcome_space`.
Instance load_instance_json(const nlohmann::json& j);

std::vector<int> parse_m_range(const std::string& text);  // "4..4096" or "4,16,64"

}  // namespace ddvcg
