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

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace ddvcg {

namespace {

enum class Op { constant, var_x, var_w, var_t, add, sub, mul, div, pow, neg, fexp, flog, fsqrt, fabs_, fmin, fmax };

}  // namespace

struct Expression::Node {
  Op op = Op::constant;
  double value = 0.0;
  int index = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ConfigError("expression: trailing input at '" + s_.substr(pos_) + "'");
    return e;
  }

 private:
  NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0, int idx = 0) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->value = v;
    n->index = idx;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) lhs = make(Op::add, lhs, term());
      else if (eat('-')) lhs = make(Op::sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (eat('*')) lhs = make(Op::mul, lhs, factor());
      else if (eat('/')) lhs = make(Op::div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    if (eat('-')) return make(Op::neg, factor());
    NodePtr base = atom();
    if (eat('^')) return make(Op::pow, base, factor());  // right associative
    return base;
  }

  NodePtr atom() {
    skip_ws();
    if (eat('(')) {
      NodePtr e = expr();
      if (!eat(')')) throw ConfigError("expression: expected ')'");
      return e;
    }
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ConfigError(std::string("expression: unexpected character '") + c + "'");
  }

  NodePtr number() {
    skip_ws();
    const char* start = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(start, &end);
    if (end == start) throw ConfigError("expression: bad number");
    pos_ += static_cast<size_t>(end - start);
    return make(Op::constant, nullptr, nullptr, v);
  }

  NodePtr identifier() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name == "exp") return make(Op::fexp, paren_arg());
    if (name == "log") return make(Op::flog, paren_arg());
    if (name == "sqrt") return make(Op::fsqrt, paren_arg());
    if (name == "abs") return make(Op::fabs_, paren_arg());
    if (name == "min" || name == "max") {
      if (!eat('(')) throw ConfigError("expression: expected '(' after " + name);
      NodePtr a = expr();
      if (!eat(',')) throw ConfigError("expression: expected ',' in " + name);
      NodePtr b = expr();
      if (!eat(')')) throw ConfigError("expression: expected ')' in " + name);
      return make(name == "min" ? Op::fmin : Op::fmax, a, b);
    }
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'w' || name[0] == 't')) {
      bool digits = true;
      for (size_t k = 1; k < name.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(name[k]))) digits = false;
      if (digits) {
        int idx = std::atoi(name.c_str() + 1);
        Op op = name[0] == 'x' ? Op::var_x : (name[0] == 'w' ? Op::var_w : Op::var_t);
        return make(op, nullptr, nullptr, 0.0, idx);
      }
    }
    throw ConfigError("expression: unknown identifier '" + name + "'");
  }

  NodePtr paren_arg() {
    if (!eat('(')) throw ConfigError("expression: expected '('");
    NodePtr e = expr();
    if (!eat(')')) throw ConfigError("expression: expected ')'");
    return e;
  }

  const std::string& s_;
  size_t pos_ = 0;
};

double eval_node(const Expression::Node& n, const Vec& x, const Vec& w, const Vec& t) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_x:
      if (n.index >= x.size()) throw ConfigError("expression: allocation index out of range");
      return x(n.index);
    case Op::var_w:
      if (n.index >= w.size()) throw ConfigError("expression: state index out of range");
      return w(n.index);
    case Op::var_t:
      if (n.index >= t.size()) throw ConfigError("expression: type index out of range");
      return t(n.index);
    case Op::add: return eval_node(*n.a, x, w, t) + eval_node(*n.b, x, w, t);
    case Op::sub: return eval_node(*n.a, x, w, t) - eval_node(*n.b, x, w, t);
    case Op::mul: return eval_node(*n.a, x, w, t) * eval_node(*n.b, x, w, t);
    case Op::div: return eval_node(*n.a, x, w, t) / eval_node(*n.b, x, w, t);
    case Op::pow: return std::pow(eval_node(*n.a, x, w, t), eval_node(*n.b, x, w, t));
    case Op::neg: return -eval_node(*n.a, x, w, t);
    case Op::fexp: return std::exp(eval_node(*n.a, x, w, t));
    case Op::flog: return std::log(eval_node(*n.a, x, w, t));
    case Op::fsqrt: return std::sqrt(eval_node(*n.a, x, w, t));
    case Op::fabs_: return std::abs(eval_node(*n.a, x, w, t));
    case Op::fmin: return std::min(eval_node(*n.a, x, w, t), eval_node(*n.b, x, w, t));
    case Op::fmax: return std::max(eval_node(*n.a, x, w, t), eval_node(*n.b, x, w, t));
  }
  return 0.0;
}

}  // namespace

Expression::Expression() = default;
Expression::~Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).run();
  return e;
}

double Expression::eval(const Vec& x, const Vec& omega, const Vec& theta) const {
  return eval_node(*root_, x, omega, theta);
}

}  // namespace ddvcg
