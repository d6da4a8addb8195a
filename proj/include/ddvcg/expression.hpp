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

#include "ddvcg/common.hpp"

#include <memory>
#include <string>

namespace ddvcg {

// Compiled arithmetic expression over allocation, state and own-type
// coordinates. Variables: x0, x1, ... (allocation), w0, w1, ... (state),
// t0, t1, ... (own preference type). Operators: + - * / ^ and unary minus.
// Functions: exp, log, sqrt, abs, min(a,b), max(a,b).
class Expression {
 public:
  static Expression parse(const std::string& text);  // throws ConfigError on bad syntax

  double eval(const Vec& x, const Vec& omega, const Vec& theta) const;

  const std::string& text() const { return text_; }

  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;
  Expression(const Expression&);
  Expression& operator=(const Expression&);
  ~Expression();

  struct Node;  // exposed for the parser implementation

 private:
  Expression();
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace ddvcg
