#pragma once

// Damped Newton iteration with finite-difference Jacobians, shared by the
// fixed-pair solver and the periodic cycle search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "monoembed/errors.hpp"
#include "monoembed/poset.hpp"

namespace monoembed {

struct NewtonOptions {
  std::size_t max_iter = 100;
  double residual_tol = 1e-12;  // max-norm of the residual at acceptance
  double fd_rel = 1e-7;         // central-difference step: max(fd_abs, fd_rel * |x_j|)
  double fd_abs = 1e-7;
  double min_damping = 1.0 / (1 << 30);
};

struct NewtonResult {
  Point x;
  double residual_norm = INFINITY;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double inf_norm(std::span<const double> v) {
  double n = 0.0;
  for (double e : v) {
    if (!std::isfinite(e)) return INFINITY;
    n = std::max(n, std::abs(e));
  }
  return n;
}

template <class Residual>
std::optional<Point> try_eval(Residual& r, const Point& x) {
  try {
    Point v = r(std::span<const double>(x));
    if (!std::isfinite(inf_norm(v))) return std::nullopt;
    return v;
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Solves r(x) = 0 from x0. The residual may throw EvaluationError outside its
/// domain; such points are treated as rejected trial steps.
template <class Residual>
NewtonResult solve_damped_newton(Residual&& r, Point x0, const NewtonOptions& opt = {}) {
  NewtonResult res;
  res.x = std::move(x0);
  auto f = detail::try_eval(r, res.x);
  if (!f) return res;
  const std::size_t n = res.x.size();
  if (f->size() != n) throw InvalidArgument("newton: residual dimension differs from unknowns");
  res.residual_norm = detail::inf_norm(*f);

  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd rhs(n);
  for (; res.iterations < opt.max_iter; ++res.iterations) {
    if (res.residual_norm <= opt.residual_tol) break;

    for (std::size_t j = 0; j < n; ++j) {
      const double h = std::max(opt.fd_abs, opt.fd_rel * std::abs(res.x[j]));
      Point xp = res.x;
      Point xm = res.x;
      xp[j] += h;
      xm[j] -= h;
      auto fp = detail::try_eval(r, xp);
      auto fm = detail::try_eval(r, xm);
      for (std::size_t i = 0; i < n; ++i) {
        if (fp && fm) {
          jac(i, j) = ((*fp)[i] - (*fm)[i]) / (2 * h);
        } else if (fp) {
          jac(i, j) = ((*fp)[i] - (*f)[i]) / h;
        } else if (fm) {
          jac(i, j) = ((*f)[i] - (*fm)[i]) / h;
        } else {
          return res;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -(*f)[i];
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(rhs);
    if (!step.allFinite()) return res;

    double damping = 1.0;
    bool accepted = false;
    while (damping >= opt.min_damping) {
      Point trial = res.x;
      for (std::size_t i = 0; i < n; ++i) trial[i] += damping * step[i];
      auto ft = detail::try_eval(r, trial);
      if (ft) {
        const double tn = detail::inf_norm(*ft);
        if (tn < res.residual_norm) {
          res.x = std::move(trial);
          f = std::move(ft);
          res.residual_norm = tn;
          accepted = true;
          break;
        }
      }
      damping *= 0.5;
    }
    if (!accepted) break;
  }
  res.converged = res.residual_norm <= opt.residual_tol;
  return res;
}

}  // namespace monoembed
