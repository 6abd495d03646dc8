#pragma once

// Orbit iteration, squeeze iteration between trapping-box corners, and the
// global-attractor certification pipeline.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "monoembed/embedding.hpp"
#include "monoembed/parallel.hpp"
#include "monoembed/poset.hpp"
#include "monoembed/solver.hpp"

namespace monoembed {

/// Scalar orbit x_1..x_n of x_{n+1} = F(x_n, ..., x_{n-k+1}) from X0 = (x_0, ..., x_{1-k}).
inline std::vector<double> iterate_orbit(const MapSpec& f, const Point& x0, std::size_t n) {
  if (x0.size() != f.arity()) throw InvalidArgument("iterate_orbit: X0 has wrong length");
  if (n == 0) throw InvalidArgument("iterate_orbit: n must be >= 1");
  std::vector<double> out;
  out.reserve(n);
  Point x = x0;
  for (std::size_t step = 1; step <= n; ++step) {
    try {
      x = vector_map_T(f, x);
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " at step " + std::to_string(step), e.point());
    }
    out.push_back(x[0]);
  }
  return out;
}

struct ConvergenceReport {
  enum class Status { ConvergedTo, TrappedBetween, BudgetExhausted, TwoCycle };

  Status status = Status::BudgetExhausted;
  Point point;  // converged point (ConvergedTo) or the last middle iterate
  Point lower;  // final lower envelope, flattened
  Point upper;  // final upper envelope, flattened
  std::size_t iterations = 0;
  double final_envelope_diameter = INFINITY;

  bool converged() const noexcept { return status == Status::ConvergedTo; }
};

inline std::string_view to_string(ConvergenceReport::Status s) {
  switch (s) {
    case ConvergenceReport::Status::ConvergedTo: return "converged";
    case ConvergenceReport::Status::TrappedBetween: return "trapped-between";
    case ConvergenceReport::Status::BudgetExhausted: return "budget-exhausted";
    case ConvergenceReport::Status::TwoCycle: return "two-cycle";
  }
  return "?";
}

struct SqueezeOptions {
  double tol = 1e-10;
  std::size_t max_iter = 0;  // 0: 10^6 for k < 4, 10^5 otherwise

  /// Called once per step with (n, G^n(P), G^n(X0,X0), G^n(Q)).
  std::function<void(std::size_t, const PairedPoint&, const PairedPoint&, const PairedPoint&)>
      observer;

  std::size_t budget_for(std::size_t k) const {
    if (max_iter) return max_iter;
    return k < 4 ? 1'000'000 : 100'000;
  }
};

/// Iterates an order-preserving map g on the box corners and on (X0, X0) at once.
/// The sandwich G^n(P) <= G^n(X0,X0) <= G^n(Q) and the monotone progression of
/// both envelopes are asserted exactly at every step.
template <class Map>
ConvergenceReport squeeze_iterate(const Map& g, const MonotonicityPattern& tau,
                                  const TrappingBox& box, const Point& x0,
                                  const SqueezeOptions& opt = {}) {
  if (x0.size() != tau.size()) throw InvalidArgument("squeeze_iterate: X0 has wrong length");
  if (!box.contains_diagonal(x0, tau)) {
    throw InvalidArgument("squeeze_iterate: (X0, X0) is not inside the trapping box");
  }
  const std::size_t budget = opt.budget_for(tau.size());
  PairedPoint lo = box.lower();
  PairedPoint hi = box.upper();
  PairedPoint mid = PairedPoint::diagonal(x0);

  ConvergenceReport rep;
  for (std::size_t n = 0;; ++n) {
    if (opt.observer) opt.observer(n, lo, mid, hi);
    if (!leq_lambda(lo, mid, tau) || !leq_lambda(mid, hi, tau)) {
      throw InvariantViolation("sandwich G^n(P) <= G^n(X0,X0) <= G^n(Q) violated", n);
    }
    rep.iterations = n;
    rep.final_envelope_diameter = max_norm_distance(lo, hi);
    rep.point = mid.first;
    rep.lower = lo.flat();
    rep.upper = hi.flat();
    if (rep.final_envelope_diameter <= opt.tol) {
      rep.status = ConvergenceReport::Status::ConvergedTo;
      return rep;
    }
    if (n >= budget) break;

    PairedPoint next_lo = g(lo);
    PairedPoint next_hi = g(hi);
    if (!leq_lambda(lo, next_lo, tau)) {
      throw InvariantViolation("lower envelope is not nondecreasing", n);
    }
    if (!leq_lambda(next_hi, hi, tau)) {
      throw InvariantViolation("upper envelope is not nonincreasing", n);
    }
    // Exact monotone float sequences are eventually constant; a zero step means
    // both envelopes have reached their floating-point limits.
    const bool stalled = max_norm_distance(lo, next_lo) == 0.0 && max_norm_distance(hi, next_hi) == 0.0;
    mid = g(mid);
    lo = std::move(next_lo);
    hi = std::move(next_hi);
    if (stalled) {
      rep.iterations = n + 1;
      rep.final_envelope_diameter = max_norm_distance(lo, hi);
      rep.point = mid.first;
      rep.lower = lo.flat();
      rep.upper = hi.flat();
      rep.status = rep.final_envelope_diameter <= opt.tol ? ConvergenceReport::Status::ConvergedTo
                                                          : ConvergenceReport::Status::TrappedBetween;
      return rep;
    }
  }
  rep.status = ConvergenceReport::Status::BudgetExhausted;
  return rep;
}

/// Squeeze iteration of G_tau for a mixed-monotone map.
inline ConvergenceReport squeeze_iterate(const MapSpec& f, const TrappingBox& box, const Point& x0,
                                         const SqueezeOptions& opt = {}) {
  return squeeze_iterate(DiagonalExtension(f), f.pattern(), box, x0, opt);
}

/// Squeeze iteration for a map g: V^k -> V^k that reverses <=_tau.
/// Tracks the even and odd subsequences of both corners; persistent disagreement
/// between the even and odd limits of a corner is reported as TwoCycle.
template <class Map>
ConvergenceReport squeeze_iterate_antitone(const Map& g, const MonotonicityPattern& tau,
                                           const Point& p, const Point& q, const Point& x0,
                                           const SqueezeOptions& opt = {}) {
  if (!leq_tau(p, x0, tau) || !leq_tau(x0, q, tau)) {
    throw InvalidArgument("squeeze_iterate_antitone: X0 is not between p and q");
  }
  if (!leq_tau(p, g(p), tau) || !leq_tau(g(q), q, tau)) {
    throw InvalidArgument("squeeze_iterate_antitone: p <= G(p) and G(q) <= q required");
  }
  const std::size_t budget = opt.budget_for(tau.size());
  // history[0] is the current iterate, history[1] and history[2] the two before.
  std::vector<Point> ps{p}, qs{q};
  Point x = x0;

  ConvergenceReport rep;
  for (std::size_t n = 0;; ++n) {
    const Point& pn = ps.back();
    const Point& qn = qs.back();
    const bool even = n % 2 == 0;
    const Point& below = even ? pn : qn;
    const Point& above = even ? qn : pn;
    if (!leq_tau(below, x, tau) || !leq_tau(x, above, tau)) {
      throw InvariantViolation("antitone sandwich violated", n);
    }
    if (n >= 2) {
      const Point& p2 = ps[ps.size() - 3];
      const Point& q2 = qs[qs.size() - 3];
      const bool ok = even ? leq_tau(p2, pn, tau) && leq_tau(qn, q2, tau)
                           : leq_tau(pn, p2, tau) && leq_tau(q2, qn, tau);
      if (!ok) throw InvariantViolation("even/odd corner subsequences are not monotone", n);
    }
    rep.iterations = n;
    rep.point = x;
    rep.lower = below;
    rep.upper = above;
    rep.final_envelope_diameter = max_norm_distance(pn, qn);
    if (rep.final_envelope_diameter <= opt.tol) {
      rep.status = ConvergenceReport::Status::ConvergedTo;
      return rep;
    }
    if (n >= 2) {
      const Point& p2 = ps[ps.size() - 3];
      const Point& q2 = qs[qs.size() - 3];
      if (max_norm_distance(pn, p2) == 0.0 && max_norm_distance(qn, q2) == 0.0) {
        const Point& p1 = ps[ps.size() - 2];
        const Point& q1 = qs[qs.size() - 2];
        const bool corner_cycles =
            max_norm_distance(pn, p1) > opt.tol || max_norm_distance(qn, q1) > opt.tol;
        rep.status = corner_cycles ? ConvergenceReport::Status::TwoCycle
                                   : ConvergenceReport::Status::TrappedBetween;
        return rep;
      }
    }
    if (n >= budget) break;
    Point np = g(pn);
    Point nq = g(qn);
    ps.push_back(std::move(np));
    qs.push_back(std::move(nq));
    if (ps.size() > 3) {
      ps.erase(ps.begin());
      qs.erase(qs.begin());
    }
    x = g(x);
  }
  rep.status = ConvergenceReport::Status::BudgetExhausted;
  return rep;
}

/// Outcome of a certification run. "Certified" is numerical evidence at the
/// stated tolerances, not a computer-assisted proof.
struct Verdict {
  enum class Kind { Certified, PseudoPairsFound, PseudoCyclesFound, Inconclusive };

  static constexpr const char* kLabel = "numerical certification";

  Kind kind = Kind::Inconclusive;
  std::optional<double> attractor;      // equilibrium value when Certified
  std::vector<double> cycle;            // attracting cycle values (periodic systems)
  std::vector<FixedPair> fixed_pairs;   // every pair found by the scan
  std::vector<FixedPair> pseudo_pairs;  // the pseudo ones
  std::string stage;                    // failing stage when Inconclusive
  std::string reason;
  std::size_t pattern_violations = 0;
  std::size_t samples = 0;
  std::size_t samples_converged = 0;
  double max_deviation = 0.0;
  std::size_t max_iterations = 0;

  bool certified() const noexcept { return kind == Kind::Certified; }
};

inline std::string_view to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Certified: return "certified";
    case Verdict::Kind::PseudoPairsFound: return "pseudo-pairs-found";
    case Verdict::Kind::PseudoCyclesFound: return "pseudo-cycles-found";
    case Verdict::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct CertifyConfig {
  EnumerationOptions enumeration{};
  SqueezeOptions squeeze{};
  BoxSearchConfig box{};
  std::size_t pattern_samples = 10'000;
  std::uint64_t seed = 42;
  double agreement_tol = 1e-6;
  std::size_t warmup_max = 4096;  // orbit steps allowed before a box must be found
  std::size_t jobs = 1;           // 0 = all cores
};

/// Per-coordinate log-uniform sampling on [lo, hi]; a zero lower bound is lifted
/// to min(1e-3, hi * 1e-3) so near-zero initial data is still covered.
template <class Rng>
Point sample_log_uniform(std::size_t k, Interval range, Rng& rng) {
  const double lo = range.lo > 0.0 ? range.lo : std::min(1e-3, range.hi * 1e-3);
  std::uniform_real_distribution<double> u(std::log(lo), std::log(range.hi));
  Point x(k);
  for (double& v : x) v = std::exp(u(rng));
  return x;
}

/// One certification sample: advance the orbit until a trapping box around its
/// current state exists, then squeeze. Returns the report and the warm-up length.
struct SampleOutcome {
  std::optional<ConvergenceReport> report;
  std::size_t warmup = 0;
  std::string failure;  // empty on success
};

namespace detail {

template <class BoxFinder, class Advance, class Squeeze>
SampleOutcome run_sample(Point x, std::size_t warmup_max, std::size_t stride,
                         const BoxFinder& find_box, const Advance& advance,
                         const Squeeze& squeeze) {
  SampleOutcome out;
  std::size_t next_check = 0;
  try {
    for (std::size_t steps = 0; steps <= warmup_max; steps += stride) {
      if (steps == next_check) {
        if (auto box = find_box(x)) {
          out.warmup = steps;
          out.report = squeeze(*box, x);
          if (!out.report->converged()) {
            out.failure = "squeeze ended " + std::string(to_string(out.report->status));
          }
          return out;
        }
        next_check = next_check ? 2 * next_check : stride;
      }
      x = advance(x);
    }
    out.failure = "no trapping box found along the orbit";
  } catch (const InvariantViolation& e) {
    out.failure = std::string("invariant violated: ") + e.what();
  } catch (const EvaluationError& e) {
    out.failure = std::string("evaluation failed: ") + e.what();
  }
  return out;
}

}  // namespace detail

/// Pattern check, pseudo-pair enumeration, then trapping-box squeeze from random
/// initial data. Every failure is a Verdict value.
inline Verdict certify_global_attractor(const MapSpec& f, Rectangle scan_region,
                                        std::size_t initial_samples, const CertifyConfig& cfg = {}) {
  Verdict v;
  const std::size_t k = f.arity();
  Interval sample_range{std::max(scan_region.x.lo, scan_region.y.lo),
                        std::min(scan_region.x.hi, scan_region.y.hi)};
  if (f.domain().is_box()) sample_range = {f.domain().lo, f.domain().hi};

  try {
    const auto pr = verify_pattern(f, cfg.pattern_samples, cfg.seed, sample_range);
    v.pattern_violations = pr.violations.size();
  } catch (const std::exception& e) {
    v.stage = "pattern";
    v.reason = e.what();
    return v;
  }
  if (v.pattern_violations) {
    v.stage = "pattern";
    v.reason = std::to_string(v.pattern_violations) + " sampled pairs violate the declared pattern";
    return v;
  }

  EnumerationResult en;
  try {
    en = enumerate_fixed_pairs(f, scan_region, cfg.enumeration);
  } catch (const std::exception& e) {
    v.stage = "enumeration";
    v.reason = e.what();
    return v;
  }
  v.fixed_pairs = en.pairs;
  v.pseudo_pairs = en.pseudo();
  if (!v.pseudo_pairs.empty()) {
    v.kind = Verdict::Kind::PseudoPairsFound;
    v.stage = "enumeration";
    v.reason = std::to_string(v.pseudo_pairs.size()) + " pseudo fixed pairs in the scan region";
    return v;
  }
  const auto genuine = en.genuine();
  if (genuine.size() != 1) {
    v.stage = "enumeration";
    v.reason = genuine.empty() ? "no equilibrium in the scan region"
                               : std::to_string(genuine.size()) + " equilibria in the scan region";
    return v;
  }
  const double eq = genuine.front().x;

  std::mt19937_64 rng(cfg.seed);
  std::vector<Point> starts;
  for (std::size_t s = 0; s < initial_samples; ++s) {
    starts.push_back(sample_log_uniform(k, sample_range, rng));
  }
  BoxSearchConfig box_cfg = cfg.box;
  box_cfg.equilibrium = eq;
  const DiagonalExtension g(f);
  std::vector<SampleOutcome> outcomes(starts.size());
  parallel_for(starts.size(), cfg.jobs, [&](std::size_t i) {
    outcomes[i] = detail::run_sample(
        starts[i], cfg.warmup_max, 1,
        [&](const Point& x) { return find_corner_box(g, f.pattern(), f.domain(), x, box_cfg); },
        [&](const Point& x) { return vector_map_T(f, x); },
        [&](const TrappingBox& box, const Point& x) {
          return squeeze_iterate(g, f.pattern(), box, x, cfg.squeeze);
        });
  });

  v.samples = starts.size();
  std::string first_failure;
  for (const auto& o : outcomes) {
    if (o.report) v.max_iterations = std::max(v.max_iterations, o.report->iterations);
    if (!o.failure.empty()) {
      if (first_failure.empty()) first_failure = o.failure;
      continue;
    }
    ++v.samples_converged;
    for (double c : o.report->point) {
      v.max_deviation = std::max(v.max_deviation, std::abs(c - eq));
    }
  }
  if (v.samples_converged != v.samples) {
    v.stage = "squeeze";
    v.reason = std::to_string(v.samples - v.samples_converged) + " of " +
               std::to_string(v.samples) + " samples failed: " + first_failure;
    return v;
  }
  if (v.max_deviation > cfg.agreement_tol) {
    v.stage = "agreement";
    v.reason = "squeeze limits disagree with the equilibrium by " + std::to_string(v.max_deviation);
    return v;
  }
  v.kind = Verdict::Kind::Certified;
  v.attractor = eq;
  return v;
}

}  // namespace monoembed
