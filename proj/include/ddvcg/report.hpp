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

#include <string>

namespace ddvcg {

// Provenance tuple carried by every output row.
struct Provenance {
  std::string scenario;
  std::string rule;
  std::string estimator;
  int m = 1;
  std::uint64_t seed = 0;
};

std::string format_double(double v);  // shortest round-trip decimal

std::string regret_csv(const Provenance& prov, const RegretReport& report);
std::string sweep_csv(const Provenance& prov, const RateSweep& sweep);

nlohmann::ordered_json summary_json(const Provenance& prov, const std::string& config_hash,
                                    const RegretReport* report, const RateSweep* sweep,
                                    const ImpossibilityCertificate* cert);
nlohmann::ordered_json certificate_json(const ImpossibilityCertificate& cert);

void write_file(const std::string& path, const std::string& content);

}  // namespace ddvcg
