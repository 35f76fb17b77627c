// Closed-form scalar expressions over x1, x2: parser, evaluator, and
// symbolic differentiation. This is the representation behind every
// closed-form coefficient field; grammar matches the config file format:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')* power
//   power  := atom ('^' factor)?
//   atom   := number | 'x1' | 'x2' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := 'exp' | 'sin' | 'cos'
#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "ddf/core.hpp"

namespace ddf {

namespace expr_detail {

enum class Op {
  kConst,
  kVar,  // index 0 -> x1, 1 -> x2
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSin,
  kCos,
  kExp,
  kPow
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // kConst
  int var = 0;         // kVar
  NodePtr a, b;
};

inline NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

inline NodePtr make_var(int i) {
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->var = i;
  return n;
}

inline NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline bool is_const(const NodePtr& n, double v) {
  return n->op == Op::kConst && n->value == v;
}

// Light simplifications so symbolic derivatives stay small.
inline NodePtr simplify(Op op, NodePtr a, NodePtr b) {
  const bool ac = a && a->op == Op::kConst;
  const bool bc = b && b->op == Op::kConst;
  switch (op) {
    case Op::kAdd:
      if (ac && bc) return make_const(a->value + b->value);
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::kSub:
      if (ac && bc) return make_const(a->value - b->value);
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make(Op::kNeg, b);
      break;
    case Op::kMul:
      if (ac && bc) return make_const(a->value * b->value);
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::kDiv:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      if (ac && bc && b->value != 0.0) return make_const(a->value / b->value);
      break;
    case Op::kNeg:
      if (ac) return make_const(-a->value);
      break;
    case Op::kPow:
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return make_const(1.0);
      if (ac && bc) return make_const(std::pow(a->value, b->value));
      break;
    default:
      break;
  }
  return make(op, std::move(a), std::move(b));
}

inline double eval(const Node* n, double x1, double x2) {
  switch (n->op) {
    case Op::kConst: return n->value;
    case Op::kVar: return n->var == 0 ? x1 : x2;
    case Op::kAdd: return eval(n->a.get(), x1, x2) + eval(n->b.get(), x1, x2);
    case Op::kSub: return eval(n->a.get(), x1, x2) - eval(n->b.get(), x1, x2);
    case Op::kMul: return eval(n->a.get(), x1, x2) * eval(n->b.get(), x1, x2);
    case Op::kDiv: return eval(n->a.get(), x1, x2) / eval(n->b.get(), x1, x2);
    case Op::kNeg: return -eval(n->a.get(), x1, x2);
    case Op::kSin: return std::sin(eval(n->a.get(), x1, x2));
    case Op::kCos: return std::cos(eval(n->a.get(), x1, x2));
    case Op::kExp: return std::exp(eval(n->a.get(), x1, x2));
    case Op::kPow:
      return std::pow(eval(n->a.get(), x1, x2), eval(n->b.get(), x1, x2));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline NodePtr diff(const NodePtr& n, int var);

inline NodePtr diff_pow(const NodePtr& n, int var) {
  // Constant exponents only: d(a^c) = c * a^(c-1) * a'. General exponents
  // would need log, which the expression language does not include.
  if (n->b->op != Op::kConst)
    throw validation_error(
        "expr: derivative of '^' requires a constant exponent");
  const double c = n->b->value;
  NodePtr base_pow = simplify(Op::kPow, n->a, make_const(c - 1.0));
  NodePtr outer = simplify(Op::kMul, make_const(c), std::move(base_pow));
  return simplify(Op::kMul, std::move(outer), diff(n->a, var));
}

inline NodePtr diff(const NodePtr& n, int var) {
  switch (n->op) {
    case Op::kConst: return make_const(0.0);
    case Op::kVar: return make_const(n->var == var ? 1.0 : 0.0);
    case Op::kAdd: return simplify(Op::kAdd, diff(n->a, var), diff(n->b, var));
    case Op::kSub: return simplify(Op::kSub, diff(n->a, var), diff(n->b, var));
    case Op::kMul: {
      NodePtr l = simplify(Op::kMul, diff(n->a, var), n->b);
      NodePtr r = simplify(Op::kMul, n->a, diff(n->b, var));
      return simplify(Op::kAdd, std::move(l), std::move(r));
    }
    case Op::kDiv: {
      NodePtr num = simplify(Op::kSub, simplify(Op::kMul, diff(n->a, var), n->b),
                             simplify(Op::kMul, n->a, diff(n->b, var)));
      NodePtr den = simplify(Op::kMul, n->b, n->b);
      return simplify(Op::kDiv, std::move(num), std::move(den));
    }
    case Op::kNeg: return simplify(Op::kNeg, diff(n->a, var), nullptr);
    case Op::kSin:
      return simplify(Op::kMul, make(Op::kCos, n->a), diff(n->a, var));
    case Op::kCos:
      return simplify(Op::kNeg,
                      simplify(Op::kMul, make(Op::kSin, n->a), diff(n->a, var)),
                      nullptr);
    case Op::kExp:
      return simplify(Op::kMul, make(Op::kExp, n->a), diff(n->a, var));
    case Op::kPow: return diff_pow(n, var);
  }
  return make_const(0.0);
}

inline void print(const Node* n, std::string& out);

inline void print_binary(const Node* n, const char* sym, std::string& out) {
  out += '(';
  print(n->a.get(), out);
  out += sym;
  print(n->b.get(), out);
  out += ')';
}

inline void print(const Node* n, std::string& out) {
  switch (n->op) {
    case Op::kConst: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", n->value);
      out += buf;
      return;
    }
    case Op::kVar: out += (n->var == 0 ? "x1" : "x2"); return;
    case Op::kAdd: print_binary(n, "+", out); return;
    case Op::kSub: print_binary(n, "-", out); return;
    case Op::kMul: print_binary(n, "*", out); return;
    case Op::kDiv: print_binary(n, "/", out); return;
    case Op::kPow: print_binary(n, "^", out); return;
    case Op::kNeg:
      out += "(-";
      print(n->a.get(), out);
      out += ')';
      return;
    case Op::kSin: out += "sin("; break;
    case Op::kCos: out += "cos("; break;
    case Op::kExp: out += "exp("; break;
  }
  print(n->a.get(), out);
  out += ')';
}

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw validation_error("expr: " + what + " at position " +
                           std::to_string(pos_) + " in \"" +
                           std::string(src_) + "\"");
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr e = parse_term();
    for (;;) {
      if (consume('+'))
        e = simplify(Op::kAdd, std::move(e), parse_term());
      else if (consume('-'))
        e = simplify(Op::kSub, std::move(e), parse_term());
      else
        return e;
    }
  }

  NodePtr parse_term() {
    NodePtr e = parse_factor();
    for (;;) {
      if (consume('*'))
        e = simplify(Op::kMul, std::move(e), parse_factor());
      else if (consume('/'))
        e = simplify(Op::kDiv, std::move(e), parse_factor());
      else
        return e;
    }
  }

  NodePtr parse_factor() {
    if (consume('-'))
      return simplify(Op::kNeg, parse_factor(), nullptr);
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (consume('^')) return simplify(Op::kPow, std::move(base), parse_factor());
    return base;
  }

  std::string parse_ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(std::string(src_.substr(pos_)), &used);
      } catch (const std::exception&) {
        fail("bad numeric literal");
      }
      pos_ += used;
      return make_const(v);
    }
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::string id = parse_ident();
      if (id == "x1") return make_var(0);
      if (id == "x2") return make_var(1);
      if (id == "pi") return make_const(pi);
      Op op;
      if (id == "sin")
        op = Op::kSin;
      else if (id == "cos")
        op = Op::kCos;
      else if (id == "exp")
        op = Op::kExp;
      else
        fail("unknown identifier '" + id + "'");
      if (!consume('(')) fail("expected '(' after function name");
      NodePtr arg = parse_expr();
      if (!consume(')')) fail("missing ')'");
      return make(op, std::move(arg));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace expr_detail

// Immutable expression; cheap to copy (shared tree).
class Expr {
public:
  Expr() : node_(expr_detail::make_const(0.0)) {}

  static Expr constant(double v) { return Expr(expr_detail::make_const(v)); }
  static Expr var(int i) {
    if (i != 0 && i != 1) throw validation_error("expr: variable index must be 0 or 1");
    return Expr(expr_detail::make_var(i));
  }
  static Expr parse(std::string_view src) {
    return Expr(expr_detail::Parser(src).parse());
  }

  double operator()(double x1, double x2 = 0.0) const {
    return expr_detail::eval(node_.get(), x1, x2);
  }
  double operator()(const Vec2& x) const { return (*this)(x.x, x.y); }

  Expr diff(int var) const { return Expr(expr_detail::diff(node_, var)); }

  bool is_constant() const { return node_->op == expr_detail::Op::kConst; }
  double constant_value() const { return node_->value; }

  std::string str() const {
    std::string out;
    expr_detail::print(node_.get(), out);
    return out;
  }

  friend Expr operator+(const Expr& a, const Expr& b) {
    return Expr(expr_detail::simplify(expr_detail::Op::kAdd, a.node_, b.node_));
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return Expr(expr_detail::simplify(expr_detail::Op::kSub, a.node_, b.node_));
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    return Expr(expr_detail::simplify(expr_detail::Op::kMul, a.node_, b.node_));
  }
  friend Expr operator/(const Expr& a, const Expr& b) {
    return Expr(expr_detail::simplify(expr_detail::Op::kDiv, a.node_, b.node_));
  }

private:
  explicit Expr(expr_detail::NodePtr n) : node_(std::move(n)) {}
  expr_detail::NodePtr node_;
};

}  // namespace ddf
