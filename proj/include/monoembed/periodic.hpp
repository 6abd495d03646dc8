#pragma once

// p-periodic systems [F_0, ..., F_{p-1}]: the monodromy Phi = G_{p-1} o ... o G_0,
// cycle enumeration and classification, and periodic attractor certification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "monoembed/dynamics.hpp"
#include "monoembed/embedding.hpp"
#include "monoembed/newton.hpp"
#include "monoembed/poset.hpp"
#include "monoembed/solver.hpp"

namespace monoembed {

class PeriodicSystem {
 public:
  explicit PeriodicSystem(std::vector<MapSpec> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw InvalidArgument("periodic system needs at least one map");
    for (const auto& m : maps_) {
      if (m.pattern() != maps_.front().pattern()) {
        throw InvalidArgument("all maps of a periodic system must share arity and pattern");
      }
      extensions_.emplace_back(m);
    }
  }

  std::size_t period() const noexcept { return maps_.size(); }
  std::size_t arity() const noexcept { return maps_.front().arity(); }
  const MonotonicityPattern& pattern() const noexcept { return maps_.front().pattern(); }
  const MapSpec& map(std::size_t j) const { return maps_.at(j % maps_.size()); }
  const DiagonalExtension& extension(std::size_t j) const {
    return extensions_.at(j % extensions_.size());
  }
  const std::vector<MapSpec>& maps() const noexcept { return maps_; }

 private:
  std::vector<MapSpec> maps_;
  std::vector<DiagonalExtension> extensions_;
};

/// Phi_{i,j} = G_j o ... o G_i.
class Composition {
 public:
  Composition(const PeriodicSystem& s, std::size_t i, std::size_t j) : s_(&s), i_(i), j_(j) {
    if (i > j || j >= s.period()) throw InvalidArgument("compose_phi requires 0 <= i <= j < p");
  }

  PairedPoint operator()(const PairedPoint& xi) const {
    PairedPoint out = xi;
    for (std::size_t n = i_; n <= j_; ++n) {
      try {
        out = s_->extension(n)(out);
      } catch (const EvaluationError& e) {
        throw EvaluationError(std::string(e.what()) + " in stage " + std::to_string(n), e.point());
      }
    }
    return out;
  }

  /// T_{i,j} = T_j o ... o T_i on V^k.
  Point on_base(const Point& x) const {
    Point out = x;
    for (std::size_t n = i_; n <= j_; ++n) out = vector_map_T(s_->map(n), out);
    return out;
  }

 private:
  const PeriodicSystem* s_;
  std::size_t i_;
  std::size_t j_;
};

inline Composition compose_phi(const PeriodicSystem& s, std::size_t i, std::size_t j) {
  return Composition(s, i, j);
}

inline Composition monodromy(const PeriodicSystem& s) { return Composition(s, 0, s.period() - 1); }

// A Composition keeps a pointer to its system; temporaries would dangle.
Composition compose_phi(PeriodicSystem&&, std::size_t, std::size_t) = delete;
Composition monodromy(PeriodicSystem&&) = delete;

struct CycleRecord {
  enum class Kind { Genuine, Pseudo };

  std::vector<PairedPoint> points;  // xi_0 .. xi_{q-1}, xi_{n+1} = G_n(xi_n)
  std::size_t q = 0;
  Kind kind = Kind::Genuine;
  double residual = 0.0;       // max-norm of Phi(xi_0) - xi_0
  std::optional<std::size_t> twin;  // index of the transposed cycle (pseudo only)

  bool genuine() const noexcept { return kind == Kind::Genuine; }

  /// First coordinate of each point's first half: the scalar cycle for genuine records.
  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.first[0]);
    return v;
  }
};

struct CycleSearchOptions {
  std::size_t starts = 200;
  std::uint64_t seed = 7;
  double tol = 1e-8;            // diagonal membership, cycle closure, deduplication
  std::size_t orbit_seeds = 8;  // scalar orbits iterated for diagonal seeding
  std::size_t orbit_length = 2000;
  NewtonOptions newton{};
};

struct CycleSearchResult {
  std::vector<CycleRecord> cycles;
  std::size_t attempts = 0;
  std::size_t failed = 0;  // starts whose refinement did not converge

  std::size_t count(CycleRecord::Kind k) const {
    return static_cast<std::size_t>(std::count_if(
        cycles.begin(), cycles.end(), [k](const CycleRecord& c) { return c.kind == k; }));
  }
};

namespace detail {

inline double cycle_distance(const std::vector<PairedPoint>& a, const std::vector<PairedPoint>& b,
                             std::size_t shift) {
  double d = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    d = std::max(d, max_norm_distance(a[n], b[(n + shift) % b.size()]));
  }
  return d;
}

/// Same cycle up to cyclic rotation.
inline bool same_cycle(const std::vector<PairedPoint>& a, const std::vector<PairedPoint>& b,
                       double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (cycle_distance(a, b, s) <= tol) return true;
  }
  return false;
}

inline std::vector<PairedPoint> transposed(const std::vector<PairedPoint>& pts) {
  std::vector<PairedPoint> out;
  for (const auto& p : pts) out.push_back(p.transposed());
  return out;
}

}  // namespace detail

/// Multistart root search for Phi_{0,p-1}(xi) = xi in [lo, hi]^{2k}. Diagonal
/// starts come from fixed points of T_{0,p-1} and from scalar orbit tails.
inline CycleSearchResult find_cycles(const PeriodicSystem& s, Interval region,
                                     const CycleSearchOptions& opt = {}) {
  if (opt.starts == 0) throw InvalidArgument("find_cycles: starts must be >= 1");
  if (!region.valid()) throw InvalidArgument("find_cycles: empty region");
  const std::size_t k = s.arity();
  const std::size_t p = s.period();
  const Composition phi = monodromy(s);

  auto residual = [&](std::span<const double> z) {
    const PairedPoint xi = PairedPoint::from_flat(z);
    Point out = phi(xi).flat();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= z[i];
    return out;
  };
  auto base_residual = [&](std::span<const double> z) {
    Point x(z.begin(), z.end());
    Point out = phi.on_base(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= z[i];
    return out;
  };

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(region.lo, region.hi);
  std::vector<Point> starts;

  // Diagonal seeds: fixed points of T_{0,p-1}, and tails of scalar orbits.
  for (std::size_t n = 0; n < opt.orbit_seeds; ++n) {
    Point x(k);
    for (double& v : x) v = u(rng);
    auto base = solve_damped_newton(base_residual, x, opt.newton);
    if (base.converged) starts.push_back(PairedPoint::diagonal(base.x).flat());
    try {
      for (std::size_t t = 0; t < opt.orbit_length; ++t) x = phi.on_base(x);
      starts.push_back(PairedPoint::diagonal(x).flat());
    } catch (const EvaluationError&) {
    }
  }
  for (std::size_t n = 0; n < opt.starts; ++n) {
    Point z(2 * k);
    for (double& v : z) v = u(rng);
    starts.push_back(std::move(z));
  }

  CycleSearchResult out;
  std::vector<std::vector<PairedPoint>> found;
  std::vector<double> residuals;
  const double slack = 1e-9 * region.width();
  for (const auto& z0 : starts) {
    ++out.attempts;
    auto res = solve_damped_newton(residual, z0, opt.newton);
    if (!res.converged) {
      ++out.failed;
      continue;
    }
    if (std::any_of(res.x.begin(), res.x.end(),
                    [&](double v) { return v < region.lo - slack || v > region.hi + slack; })) {
      ++out.failed;
      continue;
    }
    // Unroll the cycle and find its minimal period among the divisors of p.
    std::vector<PairedPoint> orbit{PairedPoint::from_flat(res.x)};
    for (std::size_t n = 0; n < p; ++n) orbit.push_back(s.extension(n)(orbit.back()));
    std::size_t q = p;
    for (std::size_t d = 1; d < p; ++d) {
      if (p % d == 0 && max_norm_distance(orbit[d], orbit[0]) <= opt.tol) {
        q = d;
        break;
      }
    }
    orbit.resize(q);
    bool dup = false;
    for (std::size_t c = 0; c < found.size(); ++c) {
      if (detail::same_cycle(found[c], orbit, opt.tol)) {
        dup = true;
        if (res.residual_norm < residuals[c]) {
          found[c] = orbit;
          residuals[c] = res.residual_norm;
        }
        break;
      }
    }
    if (!dup) {
      found.push_back(std::move(orbit));
      residuals.push_back(res.residual_norm);
    }
  }

  for (std::size_t c = 0; c < found.size(); ++c) {
    CycleRecord rec;
    rec.points = found[c];
    rec.q = rec.points.size();
    rec.residual = residuals[c];
    const bool diagonal = std::all_of(rec.points.begin(), rec.points.end(), [&](const auto& pt) {
      return max_norm_distance(pt.first, pt.second) <= opt.tol;
    });
    rec.kind = diagonal ? CycleRecord::Kind::Genuine : CycleRecord::Kind::Pseudo;
    out.cycles.push_back(std::move(rec));
  }
  std::sort(out.cycles.begin(), out.cycles.end(), [](const CycleRecord& a, const CycleRecord& b) {
    if (a.kind != b.kind) return a.kind == CycleRecord::Kind::Genuine;
    return a.points.front().flat() < b.points.front().flat();
  });
  for (std::size_t c = 0; c < out.cycles.size(); ++c) {
    auto& rec = out.cycles[c];
    if (rec.genuine()) continue;
    const auto t = detail::transposed(rec.points);
    for (std::size_t d = 0; d < out.cycles.size(); ++d) {
      if (detail::same_cycle(out.cycles[d].points, t, opt.tol)) {
        rec.twin = d;
        break;
      }
    }
  }
  return out;
}

struct PeriodicCertifyConfig {
  CertifyConfig base{};
  CycleSearchOptions cycles{};
};

/// Cycle search, then a trapping box for every sample (first from the per-map corner
/// inequalities, then directly against Phi) and squeeze iteration of Phi.
/// `known` reuses an earlier find_cycles result for the same system and region.
inline Verdict certify_periodic_attractor(const PeriodicSystem& s, Interval region,
                                          std::size_t samples,
                                          const PeriodicCertifyConfig& cfg = {},
                                          const CycleSearchResult* known = nullptr) {
  if (s.period() == 1) {
    return certify_global_attractor(s.map(0), Rectangle{region, region}, samples, cfg.base);
  }
  Verdict v;
  for (std::size_t j = 0; j < s.period(); ++j) {
    try {
      const auto pr = verify_pattern(s.map(j), cfg.base.pattern_samples, cfg.base.seed + j, region);
      v.pattern_violations += pr.violations.size();
    } catch (const std::exception& e) {
      v.stage = "pattern";
      v.reason = e.what();
      return v;
    }
  }
  if (v.pattern_violations) {
    v.stage = "pattern";
    v.reason = std::to_string(v.pattern_violations) + " sampled pairs violate the declared pattern";
    return v;
  }

  const CycleSearchResult found = known ? *known : find_cycles(s, region, cfg.cycles);
  const std::size_t pseudo = found.count(CycleRecord::Kind::Pseudo);
  if (pseudo) {
    v.kind = Verdict::Kind::PseudoCyclesFound;
    v.stage = "cycles";
    v.reason = std::to_string(pseudo) + " pseudo cycles in the search region";
    return v;
  }
  if (found.count(CycleRecord::Kind::Genuine) != 1) {
    v.stage = "cycles";
    v.reason = found.cycles.empty() ? "no cycle found in the search region"
                                    : std::to_string(found.cycles.size()) + " genuine cycles found";
    return v;
  }
  const CycleRecord& cycle = found.cycles.front();
  const Point& target = cycle.points.front().first;

  const MonotonicityPattern& tau = s.pattern();
  const Composition phi = monodromy(s);
  // A corner box trapped by every G_j is trapped by their composition.
  struct AllStages {
    const PeriodicSystem* s;
    std::size_t j;
    PairedPoint operator()(const PairedPoint& xi) const { return s->extension(j)(xi); }
  };
  BoxSearchConfig box_cfg = cfg.base.box;
  box_cfg.equilibrium.reset();
  auto find_box = [&](const Point& x) -> std::optional<TrappingBox> {
    std::optional<TrappingBox> box = find_corner_box(AllStages{&s, 0}, tau, s.map(0).domain(), x,
                                                     box_cfg);
    for (std::size_t j = 1; box && j < s.period(); ++j) {
      if (!verify_trapping_box(AllStages{&s, j}, box->lower(), box->upper(), tau)) box.reset();
    }
    if (box) {
      auto joint = TrappingBox::verified(phi, box->lower(), box->upper(), tau);
      if (joint) return joint;
    }
    return find_corner_box(phi, tau, s.map(0).domain(), x, box_cfg);
  };

  std::mt19937_64 rng(cfg.base.seed);
  v.samples = samples;
  std::string first_failure;
  for (std::size_t n = 0; n < samples; ++n) {
    const Point x0 = sample_log_uniform(s.arity(), region, rng);
    const auto o = detail::run_sample(
        x0, cfg.base.warmup_max, 1, find_box, [&](const Point& x) { return phi.on_base(x); },
        [&](const TrappingBox& box, const Point& x) {
          return squeeze_iterate(phi, tau, box, x, cfg.base.squeeze);
        });
    if (o.report) v.max_iterations = std::max(v.max_iterations, o.report->iterations);
    if (!o.failure.empty()) {
      first_failure = o.failure;
      break;
    }
    ++v.samples_converged;
    v.max_deviation = std::max(v.max_deviation, max_norm_distance(o.report->point, target));
  }
  if (v.samples_converged != v.samples) {
    v.stage = "squeeze";
    v.reason = "sample " + std::to_string(v.samples_converged + 1) + " failed: " + first_failure;
    return v;
  }
  if (v.max_deviation > cfg.base.agreement_tol) {
    v.stage = "agreement";
    v.reason = "squeeze limits disagree with the cycle by " + std::to_string(v.max_deviation);
    return v;
  }
  v.kind = Verdict::Kind::Certified;
  v.cycle = cycle.values();
  return v;
}

}  // namespace monoembed
