#pragma once

// Vector form T of a delay recursion, the diagonal extension G_tau, and corner points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monoembed/errors.hpp"
#include "monoembed/poset.hpp"

namespace monoembed {

/// Admissible state space V^k: the nonnegative orthant or a cube [lo, hi]^k.
struct Domain {
  enum class Kind { Orthant, Box };

  Kind kind = Kind::Orthant;
  double lo = 0.0;
  double hi = INFINITY;

  static Domain orthant() { return {}; }
  static Domain box(double lo, double hi) {
    if (!(lo < hi)) throw InvalidArgument("box domain requires lo < hi");
    return {Kind::Box, lo, hi};
  }

  bool is_box() const noexcept { return kind == Kind::Box; }

  bool contains(double v) const noexcept { return std::isfinite(v) && v >= lo && v <= hi; }

  bool contains(std::span<const double> x) const noexcept {
    for (double v : x) {
      if (!contains(v)) return false;
    }
    return true;
  }
};

/// Closed interval used for sampling regions and scan windows.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool valid() const noexcept { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; }
};

/// A k-argument map F: V^k -> V with a declared monotonicity pattern.
///
/// The evaluator must be pure. Calls are checked: the argument must lie in the
/// domain and the result must be finite, otherwise EvaluationError is thrown
/// carrying the offending point.
class MapSpec {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  MapSpec() = default;

  MapSpec(Evaluator f, MonotonicityPattern pattern, Domain domain = Domain::orthant(),
          std::string name = {})
      : f_(std::move(f)), pattern_(std::move(pattern)), domain_(domain), name_(std::move(name)) {
    if (!f_) throw InvalidArgument("MapSpec requires an evaluator");
  }

  std::size_t arity() const noexcept { return pattern_.size(); }
  const MonotonicityPattern& pattern() const noexcept { return pattern_; }
  const Domain& domain() const noexcept { return domain_; }
  const std::string& name() const noexcept { return name_; }

  /// Same evaluator, different declared pattern.
  MapSpec with_pattern(MonotonicityPattern pattern) const {
    MapSpec copy(*this);
    if (pattern.size() != arity()) throw InvalidArgument("with_pattern: arity mismatch");
    copy.pattern_ = std::move(pattern);
    return copy;
  }

  double operator()(std::span<const double> x) const {
    if (x.size() != arity()) {
      throw InvalidArgument("map evaluated with " + std::to_string(x.size()) +
                            " arguments, arity is " + std::to_string(arity()));
    }
    if (!domain_.contains(x)) {
      throw EvaluationError("argument outside the map's domain", Point(x.begin(), x.end()));
    }
    const double v = f_(x);
    if (!std::isfinite(v)) {
      throw EvaluationError("map value is not finite", Point(x.begin(), x.end()));
    }
    return v;
  }

  /// Unchecked evaluation (no domain or finiteness test).
  double raw(std::span<const double> x) const { return f_(x); }

 private:
  Evaluator f_;
  MonotonicityPattern pattern_;
  Domain domain_;
  std::string name_;
};

/// T(X) = (F(X), x_1, ..., x_{k-1}).
inline Point vector_map_T(const MapSpec& f, std::span<const double> x) {
  Point out(x.size());
  out[0] = f(x);
  for (std::size_t i = 1; i < x.size(); ++i) out[i] = x[i - 1];
  return out;
}

/// The point with x in the increasing slots and y in the decreasing ones.
/// corner_point_P(y, x, tau) is its transpose.
inline Point corner_point_P(double x, double y, const MonotonicityPattern& tau) {
  Point p(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) p[i] = tau[i] > 0 ? x : y;
  return p;
}

/// Corner pair (P_tau(x,y), P_tau^t(x,y)) as a state of the embedded system.
inline PairedPoint corner_pair(double x, double y, const MonotonicityPattern& tau) {
  return {corner_point_P(x, y, tau), corner_point_P(y, x, tau)};
}

/// Where one output coordinate of G_tau comes from.
struct WiringSlot {
  enum class Source { FOfFirst, FOfSecond, CopyFirst, CopySecond };

  Source source;
  std::size_t index = 0;  // source coordinate for the copy kinds

  friend bool operator==(const WiringSlot&, const WiringSlot&) = default;
};

/// Output wiring of G_tau over 2k slots, computed once from tau.
inline std::vector<WiringSlot> extension_wiring(const MonotonicityPattern& tau) {
  using S = WiringSlot::Source;
  const std::size_t k = tau.size();
  std::vector<WiringSlot> table(2 * k);
  const bool up = tau[0] > 0;
  table[0] = {up ? S::FOfFirst : S::FOfSecond, 0};
  table[k] = {up ? S::FOfSecond : S::FOfFirst, 0};
  for (std::size_t i = 1; i < k; ++i) {
    // Switch blocks whenever the monotonicity flips between neighbouring slots.
    const bool same = tau[i - 1] * tau[i] > 0;
    table[i] = {same ? S::CopyFirst : S::CopySecond, i - 1};
    table[k + i] = {same ? S::CopySecond : S::CopyFirst, i - 1};
  }
  return table;
}

/// The diagonal extension G_tau: V^k x V^k -> V^k x V^k of a mixed-monotone map.
/// Order-preserving for tau x dual(tau) whenever F is increasing with respect to tau,
/// and equal to (T, T) on the diagonal.
class DiagonalExtension {
 public:
  explicit DiagonalExtension(MapSpec f)
      : f_(std::move(f)), wiring_(extension_wiring(f_.pattern())) {}

  const MapSpec& map() const noexcept { return f_; }
  const MonotonicityPattern& pattern() const noexcept { return f_.pattern(); }
  const std::vector<WiringSlot>& wiring() const noexcept { return wiring_; }
  std::size_t half_size() const noexcept { return f_.arity(); }

  PairedPoint operator()(const PairedPoint& xi) const {
    const std::size_t k = f_.arity();
    if (xi.first.size() != k || xi.second.size() != k) {
      throw InvalidArgument("G evaluated on a point of the wrong dimension");
    }
    const double fx = f_(xi.first);
    const double fu = f_(xi.second);
    PairedPoint out{Point(k), Point(k)};
    for (std::size_t j = 0; j < 2 * k; ++j) {
      double& dst = j < k ? out.first[j] : out.second[j - k];
      const WiringSlot& s = wiring_[j];
      switch (s.source) {
        case WiringSlot::Source::FOfFirst: dst = fx; break;
        case WiringSlot::Source::FOfSecond: dst = fu; break;
        case WiringSlot::Source::CopyFirst: dst = xi.first[s.index]; break;
        case WiringSlot::Source::CopySecond: dst = xi.second[s.index]; break;
      }
    }
    return out;
  }

  /// Human-readable wiring, e.g. "(F(X), u1, F(U), x1)".
  std::string describe() const {
    std::string out = "(";
    for (std::size_t j = 0; j < wiring_.size(); ++j) {
      if (j) out += ", ";
      const WiringSlot& s = wiring_[j];
      switch (s.source) {
        case WiringSlot::Source::FOfFirst: out += "F(X)"; break;
        case WiringSlot::Source::FOfSecond: out += "F(U)"; break;
        case WiringSlot::Source::CopyFirst: out += "x" + std::to_string(s.index + 1); break;
        case WiringSlot::Source::CopySecond: out += "u" + std::to_string(s.index + 1); break;
      }
    }
    return out + ")";
  }

 private:
  MapSpec f_;
  std::vector<WiringSlot> wiring_;
};

inline DiagonalExtension diagonal_extension_G(const MapSpec& f) { return DiagonalExtension(f); }

/// Draws a pair X <=_tau Y inside [lo, hi]^k: a base point plus a tau-aligned
/// nonnegative perturbation, both endpoints uniform in the cube.
template <class Rng>
std::pair<Point, Point> sample_ordered_pair(const MonotonicityPattern& tau, Interval region,
                                            Rng& rng) {
  std::uniform_real_distribution<double> u(region.lo, region.hi);
  Point x(tau.size());
  Point y(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double a = u(rng);
    const double b = u(rng);
    const double base = std::min(a, b);
    const double step = std::max(a, b) - base;
    x[i] = tau[i] > 0 ? base : base + step;
    y[i] = tau[i] > 0 ? base + step : base;
  }
  return {std::move(x), std::move(y)};
}

struct PatternReport {
  std::size_t samples = 0;
  /// Pairs with X <=_tau Y but F(X) > F(Y).
  std::vector<std::pair<Point, Point>> violations;

  bool consistent() const noexcept { return violations.empty(); }
};

/// Empirical check of "X <=_tau Y implies F(X) <= F(Y)" on random ordered pairs.
inline PatternReport verify_pattern(const MapSpec& f, std::size_t samples, std::uint64_t seed,
                                    Interval region) {
  if (samples == 0) throw InvalidArgument("verify_pattern: samples must be >= 1");
  if (!region.valid()) throw InvalidArgument("verify_pattern: empty region");
  std::mt19937_64 rng(seed);
  PatternReport report;
  report.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    auto [x, y] = sample_ordered_pair(f.pattern(), region, rng);
    if (f(x) > f(y)) report.violations.emplace_back(std::move(x), std::move(y));
  }
  return report;
}

}  // namespace monoembed
