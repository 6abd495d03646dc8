#pragma once

// Rational delay equations
//   x_{n+1} = (1 + sum a_j x_{n-j+1}) / (1 + sum b_j x_{n-j+1}),  j = 1..k,
// with their monotonicity classification, equilibrium, pseudo-pair case analysis
// and certification.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "monoembed/dynamics.hpp"
#include "monoembed/embedding.hpp"
#include "monoembed/errors.hpp"
#include "monoembed/solver.hpp"

namespace monoembed {

class RationalModel {
 public:
  /// a and b include the constant terms a_0 = b_0 = 1.
  RationalModel(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.size() != b_.size() || a_.size() < 2) {
      throw InvalidArgument("rational: a and b need equal length k + 1 >= 2");
    }
    if (a_[0] != 1.0 || b_[0] != 1.0) throw InvalidArgument("rational: a_0 = b_0 = 1 required");
    bool any = false;
    for (std::size_t j = 0; j < a_.size(); ++j) {
      if (!(a_[j] >= 0.0) || !(b_[j] >= 0.0) || !std::isfinite(a_[j]) || !std::isfinite(b_[j])) {
        throw InvalidArgument("rational: coefficients must be finite and nonnegative");
      }
      if (j > 0 && (a_[j] != 0.0 || b_[j] != 0.0)) any = true;
    }
    if (!any) throw InvalidArgument("rational: all a_j, b_j (j >= 1) are zero");
  }

  std::size_t arity() const noexcept { return a_.size() - 1; }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& b() const noexcept { return b_; }

  double A() const {
    double s = 0.0;
    for (std::size_t j = 1; j < a_.size(); ++j) s += a_[j];
    return s;
  }
  double B() const {
    double s = 0.0;
    for (std::size_t j = 1; j < b_.size(); ++j) s += b_[j];
    return s;
  }

  /// D_{i,j} = a_i b_j - b_i a_j, for i, j in 0..k (index 0 is the constant term).
  double D(std::size_t i, std::size_t j) const { return a_.at(i) * b_.at(j) - b_.at(i) * a_.at(j); }

  double operator()(std::span<const double> x) const {
    double num = a_[0];
    double den = b_[0];
    for (std::size_t j = 1; j < a_.size(); ++j) {
      num += a_[j] * x[j - 1];
      den += b_[j] * x[j - 1];
    }
    return num / den;
  }

  MapSpec map_spec(const MonotonicityPattern& tau) const {
    if (tau.size() != arity()) throw InvalidArgument("rational: pattern length differs from k");
    const RationalModel m = *this;
    return MapSpec([m](std::span<const double> x) { return m(x); }, tau, Domain::orthant(),
                   "rational");
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

/// An argument whose D row has both signs.
struct MixedSignWitness {
  std::size_t argument;  // 1-based
  std::size_t j_positive;
  std::size_t j_negative;
};

struct Classification {
  std::optional<MonotonicityPattern> pattern;
  std::optional<MixedSignWitness> witness;
  std::vector<std::size_t> constant_rows;  // arguments with an all-zero D row (declared +)

  bool ok() const noexcept { return pattern.has_value(); }
};

/// Argument i is increasing if D_{i,j} >= 0 for every j != i (including the
/// constant column j = 0), decreasing if every D_{i,j} <= 0. Zeros fit either sign.
inline Classification rational_classify(const RationalModel& m) {
  Classification c;
  std::vector<int> signs;
  const std::size_t k = m.arity();
  for (std::size_t i = 1; i <= k; ++i) {
    std::optional<std::size_t> pos;
    std::optional<std::size_t> neg;
    for (std::size_t j = 0; j <= k; ++j) {
      if (j == i) continue;
      const double d = m.D(i, j);
      if (d > 0.0 && !pos) pos = j;
      if (d < 0.0 && !neg) neg = j;
    }
    if (pos && neg) {
      c.witness = MixedSignWitness{i, *pos, *neg};
      return c;
    }
    if (!pos && !neg) c.constant_rows.push_back(i);
    signs.push_back(neg ? -1 : 1);
  }
  c.pattern = MonotonicityPattern(std::move(signs));
  return c;
}

/// Positive root of 1 + (A-1)x - Bx^2.
inline double rational_equilibrium(const RationalModel& m) {
  const double A = m.A();
  const double B = m.B();
  if (B == 0.0) throw UnsupportedModel("rational: the linear case B = 0 is not supported");
  const double s = std::sqrt((A - 1.0) * (A - 1.0) + 4.0 * B);
  if (A - 1.0 >= 0.0) return (A - 1.0 + s) / (2.0 * B);
  return 2.0 / (s - (A - 1.0));  // same root, no cancellation when A < 1
}

struct RationalAnalysis {
  enum class Case { SingleMonotone, I_i, I_ii, I_iii, II };

  Classification classification;
  std::vector<std::size_t> gamma0;  // increasing arguments (1-based)
  std::vector<std::size_t> gamma1;  // decreasing arguments
  double A = 0, B = 0, A0 = 0, A1 = 0, B0 = 0, B1 = 0;
  double A_hat = NAN, B_tilde = NAN, beta = NAN, B_star = NAN, Delta = NAN;
  double y_bar = NAN;
  Case kind = Case::SingleMonotone;
  std::optional<std::pair<double, double>> pseudo_pair;  // (t0, t1) in case II
  bool facts_applicable = false;  // both Gamma sets nonempty and B0 B1 != 0

  bool unique_fixed_point() const noexcept { return kind != Case::II; }
};

inline std::string_view to_string(RationalAnalysis::Case c) {
  switch (c) {
    case RationalAnalysis::Case::SingleMonotone: return "monotone";
    case RationalAnalysis::Case::I_i: return "I.i";
    case RationalAnalysis::Case::I_ii: return "I.ii";
    case RationalAnalysis::Case::I_iii: return "I.iii";
    case RationalAnalysis::Case::II: return "II";
  }
  return "?";
}

inline RationalAnalysis rational_analyze(const RationalModel& m) {
  RationalAnalysis an;
  an.classification = rational_classify(m);
  if (!an.classification.ok()) {
    throw InvalidArgument("rational_analyze: argument " +
                          std::to_string(an.classification.witness->argument) +
                          " is not monotone");
  }
  an.y_bar = rational_equilibrium(m);
  an.A = m.A();
  an.B = m.B();
  const auto& tau = *an.classification.pattern;
  for (std::size_t i = 1; i <= m.arity(); ++i) {
    if (tau[i - 1] > 0) {
      an.gamma0.push_back(i);
      an.A0 += m.a()[i];
      an.B0 += m.b()[i];
    } else {
      an.gamma1.push_back(i);
      an.A1 += m.a()[i];
      an.B1 += m.b()[i];
    }
  }
  an.Delta = an.A0 * an.B1 - an.A1 * an.B0;
  if (an.gamma0.empty() || an.gamma1.empty()) {
    an.kind = RationalAnalysis::Case::SingleMonotone;
    return an;
  }
  an.facts_applicable = an.B0 * an.B1 != 0.0;
  an.A_hat = an.A0 - an.A1 - 1.0;
  an.B_tilde = an.B0 - an.B1;
  if (an.B0 != 0.0) an.beta = an.A_hat / (2.0 * an.B0);
  if (an.A_hat != 0.0) {
    an.B_star = an.B0 * (4.0 * an.B0 + 4.0 * an.A1 * an.A_hat + an.A_hat * an.A_hat) /
                (an.A_hat * an.A_hat);
  }
  if (an.B1 <= an.B0) {
    an.kind = RationalAnalysis::Case::I_i;
  } else if (an.A_hat <= 0.0) {
    an.kind = RationalAnalysis::Case::I_ii;
  } else if (an.B1 <= an.B_star) {
    an.kind = RationalAnalysis::Case::I_iii;
  } else {
    an.kind = RationalAnalysis::Case::II;
    const double s = std::sqrt(
        (an.B_tilde * an.beta * an.beta + 2.0 * an.beta * an.A1 + 1.0) / an.B_tilde);
    an.pseudo_pair = std::make_pair(an.beta - s, an.beta + s);
  }
  return an;
}

struct SimpleFacts {
  bool skipped = true;
  std::string note;
  bool ratios_ordered = false;      // A0/B0 >= A/B >= A1/B1
  bool delta_nonnegative = false;   // Delta >= 0
  bool coefficient_bounds = false;  // A0 >= B0 and A1 <= B1
  bool equilibrium_above = false;   // y_bar > A1/B1

  bool all_pass() const noexcept {
    return !skipped && ratios_ordered && delta_nonnegative && coefficient_bounds &&
           equilibrium_above;
  }
};

inline SimpleFacts rational_simple_facts(const RationalAnalysis& an) {
  SimpleFacts f;
  if (an.gamma0.empty() || an.gamma1.empty()) {
    f.note = "one of the monotonicity classes is empty";
    return f;
  }
  if (!an.facts_applicable) {
    f.note = "B0 * B1 = 0";
    return f;
  }
  f.skipped = false;
  f.ratios_ordered = an.A0 / an.B0 >= an.A / an.B && an.A / an.B >= an.A1 / an.B1;
  f.delta_nonnegative = an.Delta >= 0.0;
  f.coefficient_bounds = an.A0 >= an.B0 && an.A1 <= an.B1;
  f.equilibrium_above = an.y_bar > an.A1 / an.B1;
  return f;
}

/// q2(t) = (B0 t^2 + (1 - A0) t - 1) / (A1 - B1 t).
inline double rational_q2(const RationalAnalysis& an, double t) {
  const double den = an.A1 - an.B1 * t;
  if (den == 0.0) throw InvalidArgument("rational_q2: pole at t = A1/B1");
  return (an.B0 * t * t + (1.0 - an.A0) * t - 1.0) / den;
}

/// Runs the generic pipeline with the classified pattern on [0, hi]^2.
inline Verdict rational_certify(const RationalModel& m, std::size_t samples,
                                const CertifyConfig& cfg = {}, double region_hi = 10.0) {
  const auto an = rational_analyze(m);
  const MapSpec f = m.map_spec(*an.classification.pattern);
  Verdict v = certify_global_attractor(f, Rectangle::square(0.0, region_hi), samples, cfg);
  if (v.kind == Verdict::Kind::Certified && an.kind == RationalAnalysis::Case::II) {
    v.kind = Verdict::Kind::Inconclusive;
    v.stage = "enumeration";
    v.reason = "closed-form pseudo pair not found by the scan";
  }
  return v;
}

}  // namespace monoembed
