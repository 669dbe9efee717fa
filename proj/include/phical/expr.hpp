#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <utility>

#include "ratexpr.hpp"

namespace phical {

// Parse tree over the alphabet variables, q, rational constants and + - * / ^integer.
struct ExprAST {
  enum Kind { Num, Var, Q, Neg, Add, Sub, Mul, Div, Pow };
  Kind kind = Num;
  Rational value = 0;
  std::string name;
  int exponent = 0;
  size_t offset = 0;
  std::shared_ptr<ExprAST> lhs, rhs;

  RationalExpr eval() const {
    switch (kind) {
      case Num: return RationalExpr::constant(Scalar(value));
      case Var: return RationalExpr::variable(name);
      case Q: return RationalExpr::constant(Scalar::q());
      case Neg: return -lhs->eval();
      case Add: return lhs->eval() + rhs->eval();
      case Sub: return lhs->eval() - rhs->eval();
      case Mul: return lhs->eval() * rhs->eval();
      case Div: {
        RationalExpr d = rhs->eval();
        if (d.is_zero()) throw ParseError("division by zero", offset);
        return lhs->eval() / d;
      }
      case Pow: {
        RationalExpr b = lhs->eval();
        if (exponent < 0 && b.is_zero()) throw ParseError("negative power of zero", offset);
        return b.pow(exponent);
      }
    }
    return {};
  }

  static int prec(Kind k) {
    switch (k) {
      case Add:
      case Sub: return 1;
      case Mul:
      case Div: return 2;
      case Neg: return 3;
      case Pow: return 4;
      default: return 5;
    }
  }

  std::string str() const {
    auto wrap = [&](const ExprAST& c, int p) { return prec(c.kind) < p ? "(" + c.str() + ")" : c.str(); };
    switch (kind) {
      case Num: return value.get_str();
      case Var: return name;
      case Q: return "q";
      case Neg: return "-" + wrap(*lhs, 4);
      case Add: return wrap(*lhs, 1) + " + " + wrap(*rhs, 2);
      case Sub: return wrap(*lhs, 1) + " - " + wrap(*rhs, 2);
      case Mul: return wrap(*lhs, 2) + "*" + wrap(*rhs, 3);
      case Div: return wrap(*lhs, 2) + "/" + wrap(*rhs, 3);
      case Pow: return wrap(*lhs, 5) + "^" + std::to_string(exponent);
    }
    return {};
  }
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  std::shared_ptr<ExprAST> parse() {
    skip();
    if (i_ >= s_.size()) throw ParseError("empty expression", i_);
    auto e = expr();
    skip();
    if (i_ < s_.size()) throw ParseError(std::string("unexpected '") + s_[i_] + "'", i_);
    return e;
  }

 private:
  const std::string& s_;
  size_t i_ = 0;

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool accept(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  static std::shared_ptr<ExprAST> node(ExprAST::Kind k, size_t off, std::shared_ptr<ExprAST> l = nullptr,
                                       std::shared_ptr<ExprAST> r = nullptr) {
    auto n = std::make_shared<ExprAST>();
    n->kind = k;
    n->offset = off;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  std::shared_ptr<ExprAST> expr() {
    auto l = term();
    for (;;) {
      skip();
      size_t off = i_;
      if (accept('+')) {
        l = node(ExprAST::Add, off, l, term());
      } else if (accept('-')) {
        l = node(ExprAST::Sub, off, l, term());
      } else {
        return l;
      }
    }
  }
  std::shared_ptr<ExprAST> term() {
    auto l = unary();
    for (;;) {
      skip();
      size_t off = i_;
      if (accept('*')) {
        l = node(ExprAST::Mul, off, l, unary());
      } else if (accept('/')) {
        l = node(ExprAST::Div, off, l, unary());
      } else {
        return l;
      }
    }
  }
  std::shared_ptr<ExprAST> unary() {
    skip();
    size_t off = i_;
    if (accept('-')) return node(ExprAST::Neg, off, unary());
    if (accept('+')) return unary();
    return power();
  }
  std::shared_ptr<ExprAST> power() {
    auto b = atom();
    skip();
    size_t off = i_;
    if (!accept('^')) return b;
    skip();
    bool neg = false;
    if (accept('-')) {
      neg = true;
    } else {
      accept('+');
    }
    skip();
    size_t st = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (st == i_) throw ParseError(i_ < s_.size() ? "expected integer exponent" : "unexpected end of input", i_);
    auto n = node(ExprAST::Pow, off, b);
    n->exponent = std::stoi(s_.substr(st, i_ - st)) * (neg ? -1 : 1);
    return n;
  }
  std::shared_ptr<ExprAST> atom() {
    skip();
    size_t off = i_;
    if (i_ >= s_.size()) throw ParseError("unexpected end of input", i_);
    char c = s_[i_];
    if (c == '(') {
      ++i_;
      auto e = expr();
      if (!accept(')')) throw ParseError("expected ')'", i_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      auto n = node(ExprAST::Num, off);
      n->value = Rational(s_.substr(off, i_ - off));
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
      std::string name = s_.substr(off, i_ - off);
      if (name == "q") return node(ExprAST::Q, off);
      if (var_index(name) < 0) throw ParseError("unknown identifier '" + name + "'", off);
      auto n = node(ExprAST::Var, off);
      n->name = name;
      return n;
    }
    throw ParseError(std::string("unexpected '") + c + "'", i_);
  }
};

}  // namespace detail

// Parse and check that every division is by a nonzero expression.
inline std::shared_ptr<ExprAST> parse_expr(const std::string& text) {
  auto ast = detail::ExprParser(text).parse();
  ast->eval();
  return ast;
}

inline RationalExpr parse_rational_expr(const std::string& text) { return parse_expr(text)->eval(); }

}  // namespace phical
