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

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace ddvcg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tolerance for exact probability-table arithmetic.
inline constexpr double kProbTol = 1e-12;
// Tolerance for "zero regret" claims in exact-law mode.
inline constexpr double kZeroTol = 1e-9;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroMassEvent : Error {
  using Error::Error;
};
struct EmptyOutcomeSpace : Error {
  using Error::Error;
};
struct NoClosedForm : Error {
  using Error::Error;
};
struct ZeroReferenceMass : Error {
  using Error::Error;
};
struct NonPositiveAlpha : Error {
  using Error::Error;
};
struct DivergenceUndefined : Error {
  using Error::Error;
};
struct UnsupportedScenario : Error {
  using Error::Error;
};
struct EstimatorUnavailable : Error {
  using Error::Error;
};
struct MissingSecondStageReport : Error {
  using Error::Error;
};
struct MissingLipschitzConstant : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};
struct ConditionStarFails : Error {
  using Error::Error;
};
struct PreconditionFails : Error {
  using Error::Error;
};
struct InvalidScenarioParameters : Error {
  using Error::Error;
};
struct InvalidInstance : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Ordinary least squares fit of y on x; returns {slope, intercept}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  int n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 2) return f;
  double mx = 0, my = 0;
  for (int k = 0; k < f.n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= f.n;
  my /= f.n;
  double sxx = 0, sxy = 0;
  for (int k = 0; k < f.n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace ddvcg
