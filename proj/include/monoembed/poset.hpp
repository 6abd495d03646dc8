#pragma once

// Pattern-indexed partial orders on V^k and the product order on V^k x V^k.

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monoembed/errors.hpp"

namespace monoembed {

using Point = std::vector<double>;

/// Sign vector recording the direction of monotonicity of each argument.
/// Entry +1 means "increasing in that slot", -1 means "decreasing".
class MonotonicityPattern {
 public:
  MonotonicityPattern() = default;

  explicit MonotonicityPattern(std::vector<int> signs) : signs_(std::move(signs)) {
    if (signs_.empty()) throw InvalidArgument("monotonicity pattern must have length >= 1");
    for (int s : signs_) {
      if (s != 1 && s != -1) throw InvalidArgument("monotonicity pattern entries must be +1 or -1");
    }
  }

  MonotonicityPattern(std::initializer_list<int> signs)
      : MonotonicityPattern(std::vector<int>(signs)) {}

  /// Parses "+,+,-", "++-", "(+1,-1)" and similar spellings.
  static MonotonicityPattern parse(std::string_view text) {
    std::vector<int> signs;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '+' || c == '-') {
        signs.push_back(c == '+' ? 1 : -1);
        if (i + 1 < text.size() && text[i + 1] == '1') ++i;
      } else if (c == ',' || c == ' ' || c == '(' || c == ')' || c == '\t') {
        continue;
      } else {
        throw InvalidArgument("cannot parse monotonicity pattern '" + std::string(text) + "'");
      }
    }
    return MonotonicityPattern(std::move(signs));
  }

  static MonotonicityPattern uniform(std::size_t k, int sign) {
    return MonotonicityPattern(std::vector<int>(k, sign));
  }

  std::size_t size() const noexcept { return signs_.size(); }
  int operator[](std::size_t i) const { return signs_[i]; }
  const std::vector<int>& signs() const noexcept { return signs_; }

  MonotonicityPattern dual() const {
    std::vector<int> flipped(signs_);
    for (int& s : flipped) s = -s;
    return MonotonicityPattern(std::move(flipped));
  }

  /// tau followed by its dual: the pattern of the product order on V^k x V^k.
  MonotonicityPattern doubled() const {
    std::vector<int> out(signs_);
    for (int s : signs_) out.push_back(-s);
    return MonotonicityPattern(std::move(out));
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < signs_.size(); ++i) {
      if (i) out += ',';
      out += signs_[i] > 0 ? '+' : '-';
    }
    return out;
  }

  friend bool operator==(const MonotonicityPattern&, const MonotonicityPattern&) = default;

 private:
  std::vector<int> signs_;
};

inline MonotonicityPattern dual(const MonotonicityPattern& tau) { return tau.dual(); }

enum class OrderRelation { LessEq, GreaterEq, Equal, Incomparable };

inline std::string_view to_string(OrderRelation r) {
  switch (r) {
    case OrderRelation::LessEq: return "LessEq";
    case OrderRelation::GreaterEq: return "GreaterEq";
    case OrderRelation::Equal: return "Equal";
    case OrderRelation::Incomparable: return "Incomparable";
  }
  return "?";
}

/// A state of the embedded system: (X, U) in V^k x V^k.
struct PairedPoint {
  Point first;
  Point second;

  std::size_t half_size() const noexcept { return first.size(); }

  /// (U, X): the transpose, which swaps the two halves.
  PairedPoint transposed() const { return {second, first}; }

  /// Flattened (x_1..x_k, u_1..u_k).
  Point flat() const {
    Point out(first);
    out.insert(out.end(), second.begin(), second.end());
    return out;
  }

  static PairedPoint from_flat(std::span<const double> v) {
    const std::size_t k = v.size() / 2;
    return {Point(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k)),
            Point(v.begin() + static_cast<std::ptrdiff_t>(k), v.end())};
  }

  static PairedPoint diagonal(const Point& x) { return {x, x}; }

  friend bool operator==(const PairedPoint&, const PairedPoint&) = default;
};

/// Exact comparison under <=_tau. No tolerance: order axioms must hold bit-for-bit.
inline OrderRelation compare_tau(std::span<const double> x, std::span<const double> y,
                                 const MonotonicityPattern& tau) {
  if (x.size() != tau.size() || y.size() != tau.size()) {
    throw InvalidArgument("compare_tau: dimension mismatch");
  }
  bool le = true;
  bool ge = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = tau[i] > 0 ? x[i] : y[i];
    const double hi = tau[i] > 0 ? y[i] : x[i];
    if (lo != lo || hi != hi) return OrderRelation::Incomparable;
    if (lo > hi) le = false;
    if (lo < hi) ge = false;
  }
  if (le && ge) return OrderRelation::Equal;
  if (le) return OrderRelation::LessEq;
  if (ge) return OrderRelation::GreaterEq;
  return OrderRelation::Incomparable;
}

/// X <=_tau Y (including equality).
inline bool leq_tau(std::span<const double> x, std::span<const double> y,
                    const MonotonicityPattern& tau) {
  const auto r = compare_tau(x, y, tau);
  return r == OrderRelation::LessEq || r == OrderRelation::Equal;
}

/// Product order tau x dual(tau): first halves ordered by tau, second halves reversed.
inline OrderRelation compare_lambda(const PairedPoint& xi, const PairedPoint& eta,
                                    const MonotonicityPattern& tau) {
  if (xi.first.size() != tau.size() || xi.second.size() != tau.size() ||
      eta.first.size() != tau.size() || eta.second.size() != tau.size()) {
    throw InvalidArgument("compare_lambda: dimension mismatch");
  }
  const auto a = compare_tau(xi.first, eta.first, tau);
  const auto b = compare_tau(eta.second, xi.second, tau);
  if (a == OrderRelation::Incomparable || b == OrderRelation::Incomparable) {
    return OrderRelation::Incomparable;
  }
  if (a == OrderRelation::Equal) return b;
  if (b == OrderRelation::Equal) return a;
  return a == b ? a : OrderRelation::Incomparable;
}

inline bool leq_lambda(const PairedPoint& xi, const PairedPoint& eta,
                       const MonotonicityPattern& tau) {
  const auto r = compare_lambda(xi, eta, tau);
  return r == OrderRelation::LessEq || r == OrderRelation::Equal;
}

/// Max-norm distance between two points of equal length.
inline double max_norm_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (!(e <= d)) d = e;  // propagates NaN
  }
  return d;
}

inline double max_norm_distance(const PairedPoint& a, const PairedPoint& b) {
  return std::max(max_norm_distance(a.first, b.first), max_norm_distance(a.second, b.second));
}

}  // namespace monoembed
