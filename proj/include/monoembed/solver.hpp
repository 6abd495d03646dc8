#pragma once

// Fixed points of G_tau through the reduced two-variable system, pseudo-fixed-point
// enumeration, and trapping-box verification and search.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "monoembed/embedding.hpp"
#include "monoembed/newton.hpp"
#include "monoembed/poset.hpp"

namespace monoembed {

struct FixedPair {
  enum class Kind { Genuine, Pseudo };

  double x = 0.0;
  double y = 0.0;
  Kind kind = Kind::Genuine;
  double residual_norm = 0.0;

  bool genuine() const noexcept { return kind == Kind::Genuine; }
};

/// Zeros of this residual are exactly the fixed points (P_tau(x,y), P_tau^t(x,y)) of G_tau.
/// The same form holds for either sign of tau(1): when it is -1 the wiring sends F(X)
/// to the U block, whose first slot holds x. For F(t) = 2 - t the pairs (x, 2 - x) are
/// fixed by G and solve F(P) = x, F(P^t) = y, but not F(P) = y, F(P^t) = x.
inline std::array<double, 2> reduced_residual(const MapSpec& f, double x, double y) {
  const MonotonicityPattern& tau = f.pattern();
  return {f(corner_point_P(x, y, tau)) - x, f(corner_point_P(y, x, tau)) - y};
}

struct Rectangle {
  Interval x;
  Interval y;

  static Rectangle square(double lo, double hi) { return {{lo, hi}, {lo, hi}}; }
};

struct EnumerationOptions {
  std::size_t grid = 64;       // cells per axis
  double dedup_tol = 1e-7;     // max-norm distance below which two roots are one
  double symmetry_tol = 1e-8;  // |x - y| at or below this is a genuine pair
  NewtonOptions newton{};
};

struct EnumerationResult {
  std::vector<FixedPair> pairs;  // sorted by x, then y
  Rectangle region;
  std::size_t candidates = 0;
  std::size_t dropped = 0;  // refinements that failed to converge inside the region

  std::vector<FixedPair> genuine() const {
    std::vector<FixedPair> out;
    for (const auto& p : pairs) if (p.genuine()) out.push_back(p);
    return out;
  }
  std::vector<FixedPair> pseudo() const {
    std::vector<FixedPair> out;
    for (const auto& p : pairs) if (!p.genuine()) out.push_back(p);
    return out;
  }
};

namespace detail {

inline bool straddles_zero(double a, double b, double c, double d) {
  const double lo = std::min(std::min(a, b), std::min(c, d));
  const double hi = std::max(std::max(a, b), std::max(c, d));
  return lo <= 0.0 && hi >= 0.0;
}

}  // namespace detail

/// Scans the (x, y) rectangle for sign-structure changes and residual minima,
/// refines each candidate with damped Newton, and classifies the distinct roots.
inline EnumerationResult enumerate_fixed_pairs(const MapSpec& f, Rectangle region,
                                               const EnumerationOptions& opt = {}) {
  if (!region.x.valid() || !region.y.valid()) {
    throw InvalidArgument("enumerate_fixed_pairs: empty region");
  }
  if (opt.grid < 16) throw InvalidArgument("enumerate_fixed_pairs: grid must be >= 16");

  const std::size_t n = opt.grid;
  const std::size_t nodes = n + 1;
  auto node_x = [&](std::size_t i) { return region.x.lo + region.x.width() * double(i) / double(n); };
  auto node_y = [&](std::size_t j) { return region.y.lo + region.y.width() * double(j) / double(n); };

  std::vector<std::optional<std::array<double, 2>>> val(nodes * nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = 0; j < nodes; ++j) {
      try {
        val[i * nodes + j] = reduced_residual(f, node_x(i), node_y(j));
      } catch (const EvaluationError&) {
      }
    }
  }
  auto norm_at = [&](std::size_t i, std::size_t j) {
    const auto& v = val[i * nodes + j];
    return v ? std::max(std::abs((*v)[0]), std::abs((*v)[1])) : INFINITY;
  };

  std::vector<std::array<double, 2>> starts;
  std::set<std::size_t> start_nodes;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& a = val[i * nodes + j];
      const auto& b = val[(i + 1) * nodes + j];
      const auto& c = val[i * nodes + j + 1];
      const auto& d = val[(i + 1) * nodes + j + 1];
      if (!a || !b || !c || !d) continue;
      if (detail::straddles_zero((*a)[0], (*b)[0], (*c)[0], (*d)[0]) &&
          detail::straddles_zero((*a)[1], (*b)[1], (*c)[1], (*d)[1])) {
        starts.push_back({0.5 * (node_x(i) + node_x(i + 1)), 0.5 * (node_y(j) + node_y(j + 1))});
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) start_nodes.insert((i + di) * nodes + j + dj);
      }
    }
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    for (std::size_t j = 0; j < nodes; ++j) {
      const double c = norm_at(i, j);
      if (!std::isfinite(c)) continue;
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          const auto ii = static_cast<std::ptrdiff_t>(i) + di;
          const auto jj = static_cast<std::ptrdiff_t>(j) + dj;
          if (ii < 0 || jj < 0 || ii >= std::ptrdiff_t(nodes) || jj >= std::ptrdiff_t(nodes)) continue;
          if (norm_at(std::size_t(ii), std::size_t(jj)) < c) {
            minimum = false;
            break;
          }
        }
      }
      if (minimum) start_nodes.insert(i * nodes + j);
    }
  }
  for (std::size_t id : start_nodes) starts.push_back({node_x(id / nodes), node_y(id % nodes)});

  EnumerationResult out;
  out.region = region;
  out.candidates = starts.size();

  auto residual = [&](std::span<const double> z) {
    const auto r = reduced_residual(f, z[0], z[1]);
    return Point{r[0], r[1]};
  };
  const double slack_x = 1e-9 * region.x.width();
  const double slack_y = 1e-9 * region.y.width();
  auto inside = [&](double x, double y) {
    return x >= region.x.lo - slack_x && x <= region.x.hi + slack_x &&
           y >= region.y.lo - slack_y && y <= region.y.hi + slack_y;
  };
  auto insert = [&](double x, double y, double rn) {
    for (auto& p : out.pairs) {
      if (std::max(std::abs(p.x - x), std::abs(p.y - y)) <= opt.dedup_tol) {
        if (rn < p.residual_norm) {
          p.x = x;
          p.y = y;
          p.residual_norm = rn;
        }
        return;
      }
    }
    out.pairs.push_back({x, y, FixedPair::Kind::Genuine, rn});
  };

  for (const auto& s : starts) {
    const NewtonResult nr = solve_damped_newton(residual, Point{s[0], s[1]}, opt.newton);
    if (!nr.converged || !inside(nr.x[0], nr.x[1])) {
      ++out.dropped;
      continue;
    }
    insert(nr.x[0], nr.x[1], nr.residual_norm);
  }

  // The reduced system is symmetric under (x, y) -> (y, x): complete transposed couples.
  const std::size_t found = out.pairs.size();
  for (std::size_t i = 0; i < found; ++i) {
    const FixedPair p = out.pairs[i];
    if (std::abs(p.x - p.y) <= opt.symmetry_tol || !inside(p.y, p.x)) continue;
    const NewtonResult nr = solve_damped_newton(residual, Point{p.y, p.x}, opt.newton);
    if (nr.converged && inside(nr.x[0], nr.x[1])) insert(nr.x[0], nr.x[1], nr.residual_norm);
  }

  for (auto& p : out.pairs) {
    p.kind = std::abs(p.x - p.y) <= opt.symmetry_tol ? FixedPair::Kind::Genuine
                                                     : FixedPair::Kind::Pseudo;
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const FixedPair& a, const FixedPair& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return out;
}

/// A pair P <=_lambda Q with P <=_lambda G(P) and G(Q) <=_lambda Q.
/// Only obtainable through TrappingBox::verified, so the invariant always holds.
class TrappingBox {
 public:
  template <class Map>
  static std::optional<TrappingBox> verified(const Map& g, PairedPoint lower, PairedPoint upper,
                                             const MonotonicityPattern& tau) {
    if (!leq_lambda(lower, upper, tau)) return std::nullopt;
    if (!leq_lambda(lower, g(lower), tau)) return std::nullopt;
    if (!leq_lambda(g(upper), upper, tau)) return std::nullopt;
    return TrappingBox(std::move(lower), std::move(upper));
  }

  const PairedPoint& lower() const noexcept { return lower_; }
  const PairedPoint& upper() const noexcept { return upper_; }

  /// Scalars (a, b) when the box was built from corner points; NaN otherwise.
  double a = NAN;
  double b = NAN;

  /// Whether (x, x) lies between the corners in the lambda order.
  bool contains_diagonal(const Point& x, const MonotonicityPattern& tau) const {
    const PairedPoint d = PairedPoint::diagonal(x);
    return leq_lambda(lower_, d, tau) && leq_lambda(d, upper_, tau);
  }

 private:
  TrappingBox(PairedPoint lower, PairedPoint upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {}

  PairedPoint lower_;
  PairedPoint upper_;
};

/// Exact check of P <=_lambda Q, P <=_lambda G(P) and G(Q) <=_lambda Q.
template <class Map>
bool verify_trapping_box(const Map& g, const PairedPoint& p, const PairedPoint& q,
                         const MonotonicityPattern& tau) {
  return TrappingBox::verified(g, p, q, tau).has_value();
}

struct BoxSearchConfig {
  std::size_t max_steps = 40;          // candidate values per scalar
  std::optional<double> equilibrium;   // widens [a, b] to contain it when known
};

namespace detail {

/// Candidate lower scalars below m: m/2, 3m/4, m/4, 7m/8, m/8, ...
inline std::vector<double> lower_candidates(double m, std::size_t steps, double floor) {
  std::vector<double> out;
  if (m <= floor) {
    out.push_back(floor);
    return out;
  }
  for (std::size_t j = 1; j <= steps; ++j) {
    const double t = std::ldexp(1.0, -int(j));
    if (m > 0.0) {
      out.push_back(m * (1.0 - t));
      if (j > 1) out.push_back(m * t);
    } else {
      out.push_back(m - std::ldexp(1.0, int(j) - 1));
    }
  }
  for (double& v : out) v = std::max(v, floor);
  return out;
}

/// Candidate upper scalars above big: 2M, 3M/2, 4M, 5M/4, 8M, ...
inline std::vector<double> upper_candidates(double big, std::size_t steps, double ceil) {
  std::vector<double> out;
  const double base = big > 0.0 ? big : 1.0;
  for (std::size_t j = 1; j <= steps; ++j) {
    out.push_back(base * std::ldexp(1.0, int(j)));
    if (j > 1) out.push_back(base * (1.0 + std::ldexp(1.0, -int(j - 1))));
  }
  for (double& v : out) v = std::min(v, ceil);
  return out;
}

}  // namespace detail

/// Searches corner boxes (P_tau(a,b), P_tau^t(a,b)) .. (P_tau^t, P_tau) around x0 that
/// the increasing map g traps. On box domains the extreme corners are tried first.
template <class Map>
std::optional<TrappingBox> find_corner_box(const Map& g, const MonotonicityPattern& tau,
                                           const Domain& domain, const Point& x0,
                                           const BoxSearchConfig& cfg = {}) {
  auto attempt = [&](double a, double b) -> std::optional<TrappingBox> {
    if (!(a < b)) return std::nullopt;
    try {
      auto box = TrappingBox::verified(g, corner_pair(a, b, tau), corner_pair(b, a, tau), tau);
      if (box && box->contains_diagonal(x0, tau)) {
        box->a = a;
        box->b = b;
        return box;
      }
    } catch (const EvaluationError&) {
    }
    return std::nullopt;
  };
  if (domain.is_box()) {
    if (auto box = attempt(domain.lo, domain.hi)) return box;
  }
  double m = *std::min_element(x0.begin(), x0.end());
  double big = *std::max_element(x0.begin(), x0.end());
  if (cfg.equilibrium) {
    m = std::min(m, *cfg.equilibrium);
    big = std::max(big, *cfg.equilibrium);
  }
  const double floor = std::isfinite(domain.lo) ? domain.lo : -INFINITY;
  const double ceil = domain.hi;
  for (double a : detail::lower_candidates(m, cfg.max_steps, floor)) {
    for (double b : detail::upper_candidates(big, cfg.max_steps, ceil)) {
      if (auto box = attempt(a, b)) return box;
    }
  }
  return std::nullopt;
}

/// Trapping box for G_tau of f containing the diagonal point (x0, x0), or nullopt.
inline std::optional<TrappingBox> find_trapping_box(const MapSpec& f, const Point& x0,
                                                    const BoxSearchConfig& cfg = {}) {
  if (x0.size() != f.arity()) throw InvalidArgument("find_trapping_box: X0 has wrong length");
  const DiagonalExtension g(f);
  return find_corner_box(g, f.pattern(), f.domain(), x0, cfg);
}

}  // namespace monoembed
