#pragma once
// Closed-form scalar expressions over named real coordinates: parsing with
// line/column diagnostics, symbolic differentiation and jet evaluation.
// Grammar: sums/differences, products/quotients, unary minus, `^` with an
// integer exponent, parentheses, numbers, coordinate names, the constants `i`
// and `pi`, and the functions sin cos tan sec exp log atan sqrt powi(e, n).

#include <cctype>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nullcong/jet.hpp"

namespace nullcong {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
        line(l),
        col(c) {}
};

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, Tan, Sec, Exp, Log, Atan, Sqrt, PowI };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::Const;
  cplx value{};
  int var = -1;
  int power = 0;
  ExprPtr a, b;
};

namespace ex {

inline ExprPtr constant(cplx v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Const;
  e->value = v;
  return e;
}
inline ExprPtr variable(int idx) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Var;
  e->var = idx;
  return e;
}
inline bool is_const(const ExprPtr& e, cplx v) { return e->op == Op::Const && e->value == v; }
inline bool is_const(const ExprPtr& e) { return e->op == Op::Const; }

inline ExprPtr node(Op op, ExprPtr a, ExprPtr b = nullptr, int power = 0) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->a = std::move(a);
  e->b = std::move(b);
  e->power = power;
  return e;
}

inline ExprPtr add(ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value + b->value);
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return node(Op::Add, a, b);
}
inline ExprPtr neg(ExprPtr a) {
  if (is_const(a)) return constant(-a->value);
  if (a->op == Op::Neg) return a->a;
  return node(Op::Neg, a);
}
inline ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value - b->value);
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(b);
  return node(Op::Sub, a, b);
}
inline ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (is_const(a) && is_const(b)) return constant(a->value * b->value);
  if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return node(Op::Mul, a, b);
}
inline ExprPtr div(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant(0.0);
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b) && b->value != cplx(0.0)) return constant(a->value / b->value);
  return node(Op::Div, a, b);
}
inline ExprPtr powi(ExprPtr a, int n) {
  if (n == 0) return constant(1.0);
  if (n == 1) return a;
  if (is_const(a) && (n > 0 || a->value != cplx(0.0))) return constant(std::pow(a->value, n));
  return node(Op::PowI, a, nullptr, n);
}
inline ExprPtr func(Op op, ExprPtr a) { return node(op, std::move(a)); }
inline ExprPtr scale(double s, ExprPtr a) { return mul(constant(s), std::move(a)); }

// d e / d x_var
inline ExprPtr diff(const ExprPtr& e, int var) {
  using namespace ex;
  switch (e->op) {
    case Op::Const:
      return constant(0.0);
    case Op::Var:
      return constant(e->var == var ? 1.0 : 0.0);
    case Op::Add:
      return add(diff(e->a, var), diff(e->b, var));
    case Op::Sub:
      return sub(diff(e->a, var), diff(e->b, var));
    case Op::Neg:
      return neg(diff(e->a, var));
    case Op::Mul:
      return add(mul(diff(e->a, var), e->b), mul(e->a, diff(e->b, var)));
    case Op::Div: {
      // (a/b)' = a'/b - a b'/b^2
      ExprPtr da = diff(e->a, var), db = diff(e->b, var);
      return sub(div(da, e->b), div(mul(e->a, db), powi(e->b, 2)));
    }
    case Op::PowI:
      return mul(mul(constant(static_cast<double>(e->power)), powi(e->a, e->power - 1)), diff(e->a, var));
    case Op::Sin:
      return mul(func(Op::Cos, e->a), diff(e->a, var));
    case Op::Cos:
      return neg(mul(func(Op::Sin, e->a), diff(e->a, var)));
    case Op::Tan:
      return mul(powi(func(Op::Sec, e->a), 2), diff(e->a, var));
    case Op::Sec:
      return mul(mul(func(Op::Sec, e->a), func(Op::Tan, e->a)), diff(e->a, var));
    case Op::Exp:
      return mul(func(Op::Exp, e->a), diff(e->a, var));
    case Op::Log:
      return div(diff(e->a, var), e->a);
    case Op::Atan:
      return div(diff(e->a, var), add(constant(1.0), powi(e->a, 2)));
    case Op::Sqrt:
      return div(diff(e->a, var), mul(constant(2.0), func(Op::Sqrt, e->a)));
  }
  throw std::logic_error("diff: unknown node");
}

}  // namespace ex

// Evaluate on jets (or plain complex numbers via order-0 jets).
template <int K>
Jet<cplx, K> evaluate(const ExprPtr& e, const std::vector<Jet<cplx, K>>& x) {
  using J = Jet<cplx, K>;
  switch (e->op) {
    case Op::Const: {
      J c(e->value);
      if (!x.empty()) c.set_dim(x[0].dim());
      return c;
    }
    case Op::Var:
      if (e->var < 0 || e->var >= static_cast<int>(x.size())) throw EvalError("expression variable out of range");
      return x[e->var];
    case Op::Add:
      return evaluate(e->a, x) + evaluate(e->b, x);
    case Op::Sub:
      return evaluate(e->a, x) - evaluate(e->b, x);
    case Op::Mul:
      return evaluate(e->a, x) * evaluate(e->b, x);
    case Op::Div:
      return evaluate(e->a, x) / evaluate(e->b, x);
    case Op::Neg:
      return -evaluate(e->a, x);
    case Op::PowI:
      return nullcong::powi(evaluate(e->a, x), e->power);
    case Op::Sin:
      return nullcong::sin(evaluate(e->a, x));
    case Op::Cos:
      return nullcong::cos(evaluate(e->a, x));
    case Op::Tan:
      return nullcong::tan(evaluate(e->a, x));
    case Op::Sec:
      return nullcong::sec(evaluate(e->a, x));
    case Op::Exp:
      return nullcong::exp(evaluate(e->a, x));
    case Op::Log:
      return nullcong::log(evaluate(e->a, x));
    case Op::Atan:
      return nullcong::atan(evaluate(e->a, x));
    case Op::Sqrt:
      return nullcong::sqrt(evaluate(e->a, x));
  }
  throw std::logic_error("evaluate: unknown node");
}

inline cplx evaluate_value(const ExprPtr& e, const std::vector<double>& x) {
  std::vector<Jet<cplx, 0>> xs;
  for (double v : x) xs.emplace_back(cplx(v));
  return evaluate<0>(e, xs).value();
}

inline std::string to_string(const ExprPtr& e, const std::vector<std::string>& names) {
  auto fn = [](Op op) -> const char* {
    switch (op) {
      case Op::Sin: return "sin";
      case Op::Cos: return "cos";
      case Op::Tan: return "tan";
      case Op::Sec: return "sec";
      case Op::Exp: return "exp";
      case Op::Log: return "log";
      case Op::Atan: return "atan";
      case Op::Sqrt: return "sqrt";
      default: return "?";
    }
  };
  std::ostringstream os;
  os.precision(17);
  switch (e->op) {
    case Op::Const:
      if (e->value.imag() == 0)
        os << e->value.real();
      else
        os << "(" << e->value.real() << "+" << e->value.imag() << "*i)";
      break;
    case Op::Var:
      os << names.at(e->var);
      break;
    case Op::Add: os << "(" << to_string(e->a, names) << " + " << to_string(e->b, names) << ")"; break;
    case Op::Sub: os << "(" << to_string(e->a, names) << " - " << to_string(e->b, names) << ")"; break;
    case Op::Mul: os << "(" << to_string(e->a, names) << " * " << to_string(e->b, names) << ")"; break;
    case Op::Div: os << "(" << to_string(e->a, names) << " / " << to_string(e->b, names) << ")"; break;
    case Op::Neg: os << "(-" << to_string(e->a, names) << ")"; break;
    case Op::PowI: os << "(" << to_string(e->a, names) << ")^" << e->power; break;
    default: os << fn(e->op) << "(" << to_string(e->a, names) << ")";
  }
  return os.str();
}

// Recursive-descent parser. `line`/`col0` locate the text inside a larger file.
class ExprParser {
 public:
  ExprParser(std::string text, const std::vector<std::string>& vars, int line = 1, int col0 = 1)
      : s_(std::move(text)), vars_(vars), line_(line), col0_(col0) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip();
    if (p_ != s_.size()) fail("unexpected '" + std::string(1, s_[p_]) + "'");
    return e;
  }

 private:
  std::string s_;
  std::vector<std::string> vars_;
  int line_, col0_;
  std::size_t p_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col0_ + static_cast<int>(p_)); }
  void skip() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool accept(char c) {
    skip();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (accept('+'))
        e = ex::add(e, term());
      else if (accept('-'))
        e = ex::sub(e, term());
      else
        return e;
    }
  }
  ExprPtr term() {
    ExprPtr e = unary();
    for (;;) {
      if (accept('*'))
        e = ex::mul(e, unary());
      else if (accept('/'))
        e = ex::div(e, unary());
      else
        return e;
    }
  }
  ExprPtr unary() {
    if (accept('-')) return ex::neg(unary());
    if (accept('+')) return unary();
    return power();
  }
  int integer() {
    skip();
    bool negative = false;
    if (p_ < s_.size() && (s_[p_] == '-' || s_[p_] == '+')) negative = s_[p_++] == '-';
    skip();
    if (p_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[p_]))) fail("expected an integer exponent");
    long v = 0;
    while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) {
      v = v * 10 + (s_[p_++] - '0');
      if (v > 64) fail("exponent too large");
    }
    if (p_ < s_.size() && s_[p_] == '.') fail("exponent must be an integer");
    return negative ? -static_cast<int>(v) : static_cast<int>(v);
  }
  ExprPtr power() {
    ExprPtr base = primary();
    if (accept('^')) {
      if (accept('(')) {
        const int n = integer();
        expect(')');
        return ex::powi(base, n);
      }
      return ex::powi(base, integer());
    }
    return base;
  }
  ExprPtr primary() {
    skip();
    if (p_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[p_];
    if (c == '(') {
      ++p_;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = p_;
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s_.substr(start), &used);
      } catch (...) {
        fail("malformed number");
      }
      p_ = start + used;
      return ex::constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = p_;
      while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
      const std::string id = s_.substr(start, p_ - start);
      static const std::map<std::string, Op> funcs = {{"sin", Op::Sin}, {"cos", Op::Cos},   {"tan", Op::Tan},
                                                      {"sec", Op::Sec}, {"exp", Op::Exp},   {"log", Op::Log},
                                                      {"atan", Op::Atan}, {"sqrt", Op::Sqrt}};
      for (std::size_t k = 0; k < vars_.size(); ++k)
        if (vars_[k] == id) return ex::variable(static_cast<int>(k));
      if (id == "i") return ex::constant(cplx(0, 1));
      if (id == "pi") return ex::constant(M_PI);
      if (id == "powi") {
        expect('(');
        ExprPtr a = expr();
        expect(',');
        const int n = integer();
        expect(')');
        return ex::powi(a, n);
      }
      auto it = funcs.find(id);
      if (it == funcs.end()) {
        p_ = start;
        fail("unknown identifier '" + id + "'");
      }
      expect('(');
      ExprPtr a = expr();
      expect(')');
      return ex::func(it->second, a);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

inline ExprPtr parse_expression(const std::string& text, const std::vector<std::string>& vars, int line = 1,
                                int col0 = 1) {
  return ExprParser(text, vars, line, col0).parse();
}

}  // namespace nullcong
