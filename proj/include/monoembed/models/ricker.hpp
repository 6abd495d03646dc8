#pragma once

// Delayed Ricker map with constant stocking:
//   x_{n+1} = x_n exp(r - x_{n-k}) + h,
// its equilibrium, closed-form stability thresholds, the linearized stability
// boundary for each delay, and the pseudo-pair onset.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "monoembed/dynamics.hpp"
#include "monoembed/embedding.hpp"
#include "monoembed/errors.hpp"
#include "monoembed/solver.hpp"

namespace monoembed {

struct RickerModel {
  double r = 0.5;
  double h = 1.0;
  std::size_t delay = 1;  // k; the system has k + 1 arguments

  RickerModel() = default;
  RickerModel(double r_, double h_, std::size_t delay_) : r(r_), h(h_), delay(delay_) {
    validate();
  }

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("ricker: r must be > 0");
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("ricker: h must be > 0");
  }

  std::size_t arity() const noexcept { return delay + 1; }

  /// (+, ..., +, -). Delay 0 gives the one-argument map x e^{r-x} + h, which is
  /// not monotone; its declared "+" fails verify_pattern.
  MonotonicityPattern pattern() const {
    std::vector<int> s(arity(), 1);
    if (delay > 0) s.back() = -1;
    return MonotonicityPattern(std::move(s));
  }

  double operator()(std::span<const double> x) const {
    return x[0] * std::exp(r - x[delay]) + h;
  }

  MapSpec map_spec() const {
    validate();
    const RickerModel m = *this;
    return MapSpec([m](std::span<const double> x) { return m(x); }, pattern(), Domain::orthant(),
                   "ricker");
  }
};

/// The unique root above h of x = x e^{r-x} + h. h = 0 returns r.
/// g(x) = x(1 - e^{r-x}) - h is negative up to max(r, h) and positive at r + h + 1
/// (since u e^{-u} < 1), so the root is bracketed there.
inline double ricker_equilibrium(double r, double h) {
  if (!(r > 0.0)) throw InvalidArgument("ricker_equilibrium: r must be > 0");
  if (h < 0.0) throw InvalidArgument("ricker_equilibrium: h must be >= 0");
  if (h == 0.0) return r;
  auto g = [r, h](double x) { return x * -std::expm1(r - x) - h; };
  std::uintmax_t it = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      g, std::max(r, h), r + h + 1.0, boost::math::tools::eps_tolerance<double>(), it);
  return 0.5 * (lo + hi);
}

inline double ricker_equilibrium(const RickerModel& m) { return ricker_equilibrium(m.r, m.h); }

struct RickerThresholds {
  double r0;     // delay 0 local stability
  double r1;     // delay 1 local stability
  double r_inf;  // no pseudo pairs below this, for every delay
};

/// Closed forms, written with log1p to avoid cancellation at small h.
inline RickerThresholds ricker_thresholds(double h) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidArgument("ricker_thresholds: h must be >= 0");
  if (h == 0.0) return {2.0, 1.0, 0.0};
  const double xs = (2.0 + h + std::sqrt(h * h + 4.0)) / 2.0;
  const double big_r = (h + std::sqrt(h * h + 4.0 * h)) / 2.0;
  return {xs + std::log1p(-h / xs), h + 1.0 - std::log1p(h), big_r + std::log1p(-h / big_r)};
}

/// Spectral radius of t^{k+1} - a t^k + c, the characteristic polynomial of the
/// linearization at the equilibrium.
inline double ricker_spectral_radius(double r, double h, std::size_t k) {
  const double x = ricker_equilibrium(r, h);
  const double a = 1.0 - h / x;
  const double c = x - h;
  if (k == 0) return std::abs(a - c);
  const Eigen::Index n = static_cast<Eigen::Index>(k + 1);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  // Companion matrix: first row holds -coefficients, subdiagonal ones.
  comp(0, 0) = a;
  comp(0, n - 1) = -c;
  for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  const Eigen::VectorXcd ev = comp.eigenvalues();
  double rho = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) rho = std::max(rho, std::abs(ev[i]));
  return rho;
}

struct LocalBoundary {
  std::optional<double> r;  // smallest r with spectral radius >= 1
  std::string note;         // set when the scan found no crossing
};

/// Scan in r followed by bisection on the spectral radius.
inline LocalBoundary ricker_local_boundary(double h, std::size_t k, double tol = 1e-12) {
  if (!(h >= 0.0)) throw InvalidArgument("ricker_local_boundary: h must be >= 0");
  const double r_max = 2.0 * ricker_thresholds(h).r0 + 5.0;
  const double step = 1e-3 * r_max;
  double prev = std::min(1e-6, step);
  if (ricker_spectral_radius(prev, h, k) >= 1.0) return {prev, "unstable at the smallest r scanned"};
  for (double r = prev + step; r <= r_max; prev = r, r += step) {
    if (ricker_spectral_radius(r, h, k) < 1.0) continue;
    double lo = prev;
    double hi = r;
    while (hi - lo > tol * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      (ricker_spectral_radius(mid, h, k) >= 1.0 ? hi : lo) = mid;
    }
    return {0.5 * (lo + hi), {}};
  }
  return {std::nullopt, "no stability loss for r up to " + std::to_string(r_max)};
}

/// Delay-2 boundary condition m(x) = x(1 - (x-h)^2) - (x-h)^2, which vanishes at
/// the equilibrium exactly on the delay-2 local boundary.
inline double ricker_delay2_condition(double x, double h) {
  const double d = x - h;
  return x * (1.0 - d * d) - d * d;
}

/// Default square scan region [0, U]^2 for Ricker enumeration and sampling.
inline Rectangle ricker_scan_region(const RickerModel& m) {
  return Rectangle::square(0.0, std::max(10.0, 3.0 * (m.r + m.h) + 5.0));
}

/// Whether the reduced system has a pseudo pair: a fine scan of half-width `radius`
/// around the equilibrium (where pairs are born) and a coarser one of the whole
/// default region (where they drift as r grows, y -> infinity as r -> h).
inline bool ricker_has_pseudo_pairs_near(double r, double h, double radius = 1.0,
                                         std::size_t grid = 256) {
  const RickerModel m(r, h, 1);
  const double x = ricker_equilibrium(r, h);
  EnumerationOptions opt;
  opt.grid = grid;
  const Rectangle win{{std::max(0.0, x - radius), x + radius},
                      {std::max(0.0, x - radius), x + radius}};
  if (!enumerate_fixed_pairs(m.map_spec(), win, opt).pseudo().empty()) return true;
  return !enumerate_fixed_pairs(m.map_spec(), ricker_scan_region(m), opt).pseudo().empty();
}

/// Bisection in r for the onset of pseudo pairs at stocking level h.
inline double ricker_pseudo_onset(double h, double r_lo, double r_hi, double tol = 1e-5) {
  if (ricker_has_pseudo_pairs_near(r_lo, h)) {
    throw InvalidArgument("ricker_pseudo_onset: pseudo pairs already present at r_lo");
  }
  if (!ricker_has_pseudo_pairs_near(r_hi, h)) {
    throw InvalidArgument("ricker_pseudo_onset: no pseudo pairs at r_hi");
  }
  while (r_hi - r_lo > tol) {
    const double mid = 0.5 * (r_lo + r_hi);
    (ricker_has_pseudo_pairs_near(mid, h) ? r_hi : r_lo) = mid;
  }
  return 0.5 * (r_lo + r_hi);
}

/// Global-attractor certification. Below r_inf the generic pipeline runs; at or
/// above it the verdict comes from pseudo-pair enumeration alone.
inline Verdict ricker_certify(const RickerModel& m, std::size_t samples,
                              const CertifyConfig& cfg = {},
                              std::optional<Rectangle> scan = std::nullopt) {
  m.validate();
  Verdict v;
  if (m.delay == 0) {
    v.stage = "pattern";
    v.reason = "delay 0 is not monotone in its argument";
    return v;
  }
  const MapSpec f = m.map_spec();
  const Rectangle region = scan ? *scan : ricker_scan_region(m);
  if (m.r < ricker_thresholds(m.h).r_inf) return certify_global_attractor(f, region, samples, cfg);

  const auto en = enumerate_fixed_pairs(f, region, cfg.enumeration);
  v.fixed_pairs = en.pairs;
  v.pseudo_pairs = en.pseudo();
  v.stage = "enumeration";
  if (!v.pseudo_pairs.empty()) {
    v.kind = Verdict::Kind::PseudoPairsFound;
    v.reason = std::to_string(v.pseudo_pairs.size()) + " pseudo fixed pairs in the scan region";
  } else {
    v.reason = "r is not below r_inf(h)";
  }
  return v;
}

}  // namespace monoembed
