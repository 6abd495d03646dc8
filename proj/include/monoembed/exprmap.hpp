#pragma once

// Arithmetic expressions over x1..xk for user-defined maps:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right-associative)
//   primary := number | 'x' digits | func '(' expr ')' | '(' expr ')'
//   func    := exp | ln | sqrt

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monoembed/embedding.hpp"
#include "monoembed/errors.hpp"
#include "monoembed/poset.hpp"

namespace monoembed {

/// Syntax or name error, with the byte offset where parsing stopped.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : InvalidArgument("at offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// ln of a nonpositive number, division by zero, overflow, ...
class ExprDomainError : public EvaluationError {
 public:
  ExprDomainError(const std::string& message, std::size_t offset, std::vector<double> point)
      : EvaluationError(message + " (subexpression at offset " + std::to_string(offset) + ")",
                        std::move(point)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace expr {

enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Exp, Ln, Sqrt };

struct Node {
  Kind kind;
  std::size_t offset = 0;
  double value = 0.0;     // Number
  std::size_t index = 0;  // Variable, 0-based
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make(Kind k, std::size_t off, NodePtr l = nullptr, NodePtr r = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->offset = off;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

/// Structural equality, ignoring source offsets.
inline bool same(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  if (a->kind == Kind::Number) return a->value == b->value;
  if (a->kind == Kind::Variable) return a->index == b->index;
  return same(a->lhs, b->lhs) && same(a->rhs, b->rhs);
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t arity) : s_(text), k_(arity) {}

  NodePtr run() {
    NodePtr e = expression();
    skip();
    if (pos_ != s_.size()) fail("expected operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make(Kind::Add, at, lhs, term());
      } else if (accept('-')) {
        lhs = make(Kind::Sub, at, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make(Kind::Mul, at, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Kind::Div, at, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    skip();
    const std::size_t at = pos_;
    if (accept('-')) return make(Kind::Negate, at, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip();
    const std::size_t at = pos_;
    if (accept('^')) return make(Kind::Pow, at, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    const std::size_t at = pos_;
    if (pos_ >= s_.size()) fail("expected operand, found end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string_view id = s_.substr(pos_, end - pos_);
      if (id == "exp" || id == "ln" || id == "sqrt") {
        pos_ = end;
        if (!accept('(')) fail("expected '(' after " + std::string(id));
        NodePtr arg = expression();
        if (!accept(')')) fail("expected ')'");
        const Kind k = id == "exp" ? Kind::Exp : id == "ln" ? Kind::Ln : Kind::Sqrt;
        return make(k, at, arg);
      }
      if (id.size() >= 2 && id[0] == 'x' &&
          id.find_first_not_of("0123456789", 1) == std::string_view::npos && id[1] != '0') {
        std::size_t idx = 0;
        std::from_chars(id.data() + 1, id.data() + id.size(), idx);
        if (idx < 1 || idx > k_) {
          fail("variable " + std::string(id) + " exceeds arity " + std::to_string(k_));
        }
        pos_ = end;
        auto n = make(Kind::Variable, at);
        std::const_pointer_cast<Node>(n)->index = idx - 1;
        return n;
      }
      fail("unknown identifier '" + std::string(id) + "'");
    }
    if (accept('(')) {
      NodePtr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    fail(std::string("expected operand, found '") + c + "'");
  }

  NodePtr number() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    };
    digits();
    if (end < s_.size() && s_[end] == '.') {
      ++end;
      digits();
    }
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < s_.size() && (s_[e] == '+' || s_[e] == '-')) ++e;
      if (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) {
        end = e;
        digits();
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + at, s_.data() + end, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + end || !std::isfinite(v)) {
      fail("malformed or out-of-range number");
    }
    pos_ = end;
    auto n = make(Kind::Number, at);
    std::const_pointer_cast<Node>(n)->value = v;
    return n;
  }

  std::string_view s_;
  std::size_t k_;
  std::size_t pos_ = 0;
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string print(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Number: return format_number(n->value);
    case Kind::Variable: return "x" + std::to_string(n->index + 1);
    case Kind::Negate: return "(-" + print(n->lhs) + ")";
    case Kind::Add: return "(" + print(n->lhs) + " + " + print(n->rhs) + ")";
    case Kind::Sub: return "(" + print(n->lhs) + " - " + print(n->rhs) + ")";
    case Kind::Mul: return "(" + print(n->lhs) + " * " + print(n->rhs) + ")";
    case Kind::Div: return "(" + print(n->lhs) + " / " + print(n->rhs) + ")";
    case Kind::Pow: return "(" + print(n->lhs) + " ^ " + print(n->rhs) + ")";
    case Kind::Exp: return "exp(" + print(n->lhs) + ")";
    case Kind::Ln: return "ln(" + print(n->lhs) + ")";
    case Kind::Sqrt: return "sqrt(" + print(n->lhs) + ")";
  }
  return {};
}

inline double eval(const Node& n, std::span<const double> x) {
  auto bad = [&](const char* what) -> double {
    throw ExprDomainError(what, n.offset, std::vector<double>(x.begin(), x.end()));
  };
  double v = 0.0;
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::Variable: return x[n.index];
    case Kind::Negate: return -eval(*n.lhs, x);
    case Kind::Add: v = eval(*n.lhs, x) + eval(*n.rhs, x); break;
    case Kind::Sub: v = eval(*n.lhs, x) - eval(*n.rhs, x); break;
    case Kind::Mul: v = eval(*n.lhs, x) * eval(*n.rhs, x); break;
    case Kind::Div: {
      const double num = eval(*n.lhs, x);
      const double den = eval(*n.rhs, x);
      if (den == 0.0) return bad("division by zero");
      v = num / den;
      break;
    }
    case Kind::Pow: {
      const double base = eval(*n.lhs, x);
      const double ex = eval(*n.rhs, x);
      if (ex != std::trunc(ex) && !(base > 0.0)) {
        return bad("non-integer power of a nonpositive base");
      }
      v = std::pow(base, ex);
      break;
    }
    case Kind::Exp: v = std::exp(eval(*n.lhs, x)); break;
    case Kind::Ln: {
      const double a = eval(*n.lhs, x);
      if (!(a > 0.0)) return bad("ln of a nonpositive number");
      v = std::log(a);
      break;
    }
    case Kind::Sqrt: {
      const double a = eval(*n.lhs, x);
      if (a < 0.0) return bad("sqrt of a negative number");
      v = std::sqrt(a);
      break;
    }
  }
  if (!std::isfinite(v)) return bad("non-finite value");
  return v;
}

}  // namespace expr

/// An immutable parsed expression of fixed arity.
class Expression {
 public:
  static Expression parse(std::string_view text, std::size_t arity) {
    if (arity == 0) throw InvalidArgument("expression arity must be >= 1");
    return Expression(expr::Parser(text, arity).run(), arity, std::string(text));
  }

  std::size_t arity() const noexcept { return arity_; }
  const std::string& source() const noexcept { return source_; }
  const expr::NodePtr& root() const noexcept { return root_; }

  double evaluate(std::span<const double> x) const {
    if (x.size() != arity_) throw InvalidArgument("expression evaluated with wrong point length");
    return expr::eval(*root_, x);
  }

  double operator()(std::span<const double> x) const { return evaluate(x); }

  /// Fully parenthesized, numbers printed with 17 significant digits.
  std::string to_string() const { return expr::print(root_); }

  friend bool operator==(const Expression& a, const Expression& b) {
    return a.arity_ == b.arity_ && expr::same(a.root_, b.root_);
  }

 private:
  Expression(expr::NodePtr root, std::size_t arity, std::string source)
      : root_(std::move(root)), arity_(arity), source_(std::move(source)) {}

  expr::NodePtr root_;
  std::size_t arity_;
  std::string source_;
};

inline MapSpec expression_map(const Expression& e, MonotonicityPattern tau,
                              Domain domain = Domain::orthant()) {
  if (tau.size() != e.arity()) throw InvalidArgument("pattern length differs from arity");
  return MapSpec([e](std::span<const double> x) { return e.evaluate(x); }, std::move(tau), domain,
                 e.source());
}

struct PatternInference {
  std::optional<MonotonicityPattern> pattern;  // set when every argument has one sign
  std::vector<std::size_t> constant_arguments;  // 1-based, no change seen; declared +
  struct Witness {
    std::size_t argument;  // 1-based
    Point up_at;           // increment raised F here
    Point down_at;         // and lowered it here
  };
  std::optional<Witness> witness;
  std::size_t samples = 0;

  static constexpr const char* kLabel = "sampled";
};

/// Samples single-coordinate increments inside [lo, hi]^k and records the sign of
/// the change in F. Evidence, not proof.
inline PatternInference infer_pattern(const Expression& e, Interval region, std::size_t samples,
                                      std::uint64_t seed) {
  if (samples < 100) throw InvalidArgument("infer_pattern: samples must be >= 100");
  if (!region.valid()) throw InvalidArgument("infer_pattern: empty region");
  const std::size_t k = e.arity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(region.lo, region.hi);
  PatternInference out;
  out.samples = samples;
  std::vector<int> signs;
  for (std::size_t i = 0; i < k; ++i) {
    std::optional<Point> up;
    std::optional<Point> down;
    for (std::size_t s = 0; s < samples; ++s) {
      Point x(k);
      for (double& v : x) v = u(rng);
      double a = u(rng);
      double b = u(rng);
      if (a > b) std::swap(a, b);
      if (a == b) continue;
      x[i] = a;
      Point y = x;
      y[i] = b;
      const double d = e.evaluate(y) - e.evaluate(x);
      if (d > 0.0 && !up) up = x;
      if (d < 0.0 && !down) down = x;
      if (up && down) break;
    }
    if (up && down) {
      out.witness = PatternInference::Witness{i + 1, *up, *down};
      return out;
    }
    if (!up && !down) out.constant_arguments.push_back(i + 1);
    signs.push_back(down ? -1 : 1);
  }
  out.pattern = MonotonicityPattern(std::move(signs));
  return out;
}

}  // namespace monoembed
