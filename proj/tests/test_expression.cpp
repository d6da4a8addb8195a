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

#include "ddvcg/expression.hpp"

#include <doctest.h>

using namespace ddvcg;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("expression evaluation") {
  Vec x = vec1(2.0), w = vec1(0.5), t = vec1(1.5);

  CHECK(Expression::parse("x0 + w0 * t0").eval(x, w, t) == doctest::Approx(2.75));
  CHECK(Expression::parse("-(x0 - t0 - w0)^2").eval(x, w, t) == doctest::Approx(0.0));
  CHECK(Expression::parse("2^3^2").eval(x, w, t) == doctest::Approx(512.0));  // right assoc
  CHECK(Expression::parse("min(x0, t0) + max(w0, 0.75)").eval(x, w, t) == doctest::Approx(2.25));
  CHECK(Expression::parse("exp(0) + log(1) + sqrt(4) + abs(-3)").eval(x, w, t) ==
        doctest::Approx(6.0));
  CHECK(Expression::parse(" 1 - 2 - 3 ").eval(x, w, t) == doctest::Approx(-4.0));
  CHECK(Expression::parse("12 / 4 / 3").eval(x, w, t) == doctest::Approx(1.0));
}

TEST_CASE("expression errors") {
  CHECK_THROWS_AS(Expression::parse("x0 +"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(1)"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(1 + 2"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("1 2"), ConfigError);
  Vec x = vec1(1.0);
  CHECK_THROWS_AS(Expression::parse("w3").eval(x, x, x), ConfigError);
}
