// Copyright 2026 The qpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpt/stiefel_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpt {

namespace {

constexpr double kDriftGuard = 1e-10;

CMatrix small_solve(const CMatrix& m, const CMatrix& rhs) {
  Eigen::FullPivLU<CMatrix> lu(m);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw NumericError("Cayley step too large: singular inner system");
  }
  return lu.solve(rhs);
}

// Enforces the drift guard; returns true when re-orthonormalised.
bool guard_feasibility(CMatrix& x) {
  if (stiefel_defect(x) <= kDriftGuard) return false;
  x = orthonormalize_columns(x);
  return true;
}

double riemannian_norm(const LowRankSkew& w) { return w.norm() / std::sqrt(2.0); }

}  // namespace

void OptimizerOptions::validate() const {
  if (!(tau0 > 0.0)) throw ConfigError("optimizer: tau0 must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("optimizer: shrink must lie in (0, 1)");
  if (!(armijo_c1 > 0.0 && armijo_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
    throw ConfigError("optimizer: need 0 < c1 < c2 < 1");
  }
  if (max_iters < 0) throw ConfigError("optimizer: max_iters must be >= 0");
  if (restarts < 1) throw ConfigError("optimizer: restarts must be >= 1");
  if (!(tau_probe > 0.0)) throw ConfigError("optimizer: tau_probe must be positive");
  if (patience < 1) throw ConfigError("optimizer: patience must be >= 1");
}

double OptReport::feasibility_max() const {
  double m = 0.0;
  for (double v : feasibility_history) m = std::max(m, v);
  return m;
}

double LowRankSkew::norm() const {
  const cplx t = ((u.adjoint() * u) * (v.adjoint() * v)).trace();
  return std::sqrt(std::max(0.0, t.real()));
}

LowRankSkew search_direction(const CMatrix& xi, const CMatrix& g) {
  if (xi.rows() != g.rows() || xi.cols() != g.cols()) {
    throw DimensionError("search_direction: shape mismatch");
  }
  const Eigen::Index p = xi.cols();
  LowRankSkew w{CMatrix(xi.rows(), 2 * p), CMatrix(xi.rows(), 2 * p)};
  w.u << g, xi;
  w.v << xi, -g;
  return w;
}

CMatrix cayley_retract(const CMatrix& xi, const LowRankSkew& w, double tau) {
  if (tau < 0.0) throw ConfigError("cayley_retract: tau must be >= 0");
  if (tau == 0.0) return xi;
  const Eigen::Index r = w.u.cols();
  const CMatrix inner = CMatrix::Identity(r, r) + (0.5 * tau) * (w.v.adjoint() * w.u);
  return xi - tau * (w.u * small_solve(inner, w.v.adjoint() * xi));
}

CMatrix cayley_retract_dense(const CMatrix& xi, const CMatrix& w, double tau) {
  const CMatrix id = CMatrix::Identity(w.rows(), w.cols());
  return (id + 0.5 * tau * w).fullPivLu().solve((id - 0.5 * tau * w) * xi);
}

CMatrix cayley_velocity(const CMatrix& xi, const CMatrix& y, const LowRankSkew& w, double tau) {
  const Eigen::Index r = w.u.cols();
  const CMatrix inner = CMatrix::Identity(r, r) + (0.5 * tau) * (w.v.adjoint() * w.u);
  return -w.u * small_solve(inner, 0.5 * (w.v.adjoint() * (xi + y)));
}

double curve_derivative(const CMatrix& grad_at_y, const CMatrix& xi, const CMatrix& y,
                        const LowRankSkew& w, double tau) {
  return grad_at_y.cwiseProduct(cayley_velocity(xi, y, w, tau).conjugate()).sum().real();
}

LineSearchResult line_search(const ObjectiveEvaluator& obj, const CMatrix& xi, double f0,
                             const CMatrix& g0, const LowRankSkew& w,
                             const OptimizerOptions& opts, double tau_init) {
  (void)g0;
  LineSearchResult out;
  const double w_norm = w.norm();
  const double d0 = -0.5 * w_norm * w_norm;
  if (!(d0 < 0.0)) return out;

  double tau = tau_init > 0.0 ? tau_init : opts.tau0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  LineSearchResult armijo_only;
  for (int trial = 0; trial < opts.max_line_search; ++trial) {
    CMatrix y;
    try {
      y = cayley_retract(xi, w, tau);
    } catch (const NumericError&) {
      hi = tau;
      tau = lo > 0.0 ? 0.5 * (lo + hi) : tau * opts.shrink;
      continue;
    }
    const double fy = obj.value(y);
    ++out.evaluations;
    if (!std::isfinite(fy) || fy > f0 + opts.armijo_c1 * tau * d0 || !(fy < f0)) {
      hi = tau;
      tau = lo > 0.0 ? 0.5 * (lo + hi) : tau * opts.shrink;
      continue;
    }
    CMatrix gy = obj.euclidean_gradient(y);
    const double dy = curve_derivative(gy, xi, y, w, tau);
    if (dy >= opts.wolfe_c2 * d0) {
      out.ok = true;
      out.tau = tau;
      out.point = std::move(y);
      out.value = fy;
      out.gradient = std::move(gy);
      return out;
    }
    if (!armijo_only.ok || fy < armijo_only.value) {
      armijo_only.ok = true;
      armijo_only.tau = tau;
      armijo_only.point = y;
      armijo_only.value = fy;
      armijo_only.gradient = gy;
    }
    lo = tau;
    tau = std::isinf(hi) ? tau / opts.shrink : 0.5 * (lo + hi);
  }
  if (armijo_only.ok) {
    armijo_only.evaluations = out.evaluations;
    return armijo_only;
  }
  return out;
}

OptReport minimize(const ObjectiveEvaluator& obj, const CMatrix& xi0,
                   const OptimizerOptions& opts) {
  opts.validate();
  if (!obj.has_gradient()) throw ConfigError("minimize: objective has no gradient");
  OptReport rep;
  CMatrix x = xi0;
  if (guard_feasibility(x)) ++rep.reorthonormalizations;
  double f = obj.value(x);
  CMatrix g = obj.euclidean_gradient(x);
  rep.evaluations = 1;
  rep.value_history.push_back(f);
  rep.feasibility_history.push_back(stiefel_defect(x));

  CMatrix prev_x, prev_rgrad;
  double tau_prev = opts.tau0;
  for (;;) {
    const LowRankSkew w = search_direction(x, g);
    const double gn = riemannian_norm(w);
    rep.grad_norm_history.push_back(gn);
    if (gn < opts.grad_tol) {
      rep.converged = true;
      rep.message = "gradient tolerance reached";
      break;
    }
    if (rep.iterations >= opts.max_iters) {
      rep.message = "iteration limit";
      break;
    }
    const CMatrix rgrad = w.u * (w.v.adjoint() * x);
    double tau_init = rep.iterations == 0 ? opts.tau0 : tau_prev;
    if (opts.bb_initial_step && rep.iterations > 0) {
      const CMatrix s = x - prev_x;
      const CMatrix dy = rgrad - prev_rgrad;
      const double sy = std::abs(s.cwiseProduct(dy.conjugate()).sum().real());
      const double ss = s.squaredNorm();
      const double yy = dy.squaredNorm();
      if (sy > 0.0) {
        const double bb = rep.iterations % 2 == 1 ? ss / sy : sy / yy;
        if (std::isfinite(bb) && bb > 0.0) tau_init = std::clamp(bb, 1e-20, 1e20);
      }
    }
    const LineSearchResult ls = line_search(obj, x, f, g, w, opts, tau_init);
    rep.evaluations += ls.evaluations;
    if (!ls.ok) {
      rep.line_search_failed = true;
      rep.message = "line search failed";
      break;
    }
    prev_x = x;
    prev_rgrad = rgrad;
    tau_prev = ls.tau;
    const double decrease = f - ls.value;
    x = ls.point;
    f = ls.value;
    g = ls.gradient;
    if (guard_feasibility(x)) {
      ++rep.reorthonormalizations;
      f = obj.value(x);
      g = obj.euclidean_gradient(x);
      ++rep.evaluations;
    }
    ++rep.iterations;
    rep.value_history.push_back(f);
    rep.feasibility_history.push_back(stiefel_defect(x));
    if (decrease <= opts.value_rtol * std::max(1.0, std::abs(f))) {
      rep.converged = true;
      rep.message = "objective stalled at working precision";
      break;
    }
  }
  rep.point = std::move(x);
  rep.final_value = f;
  return rep;
}

CMatrix random_tangent(const CMatrix& xi, Rng& rng) {
  const Eigen::Index n = xi.cols();
  const CMatrix g = complex_gaussian(n, n, rng);
  const CMatrix b = 0.5 * (g - g.adjoint());
  CMatrix z = xi * b;
  if (xi.rows() > n) {
    const CMatrix perp = orthonormal_complement(xi);
    z += perp * complex_gaussian(perp.cols(), n, rng);
  }
  return z;
}

OptReport stochastic_minimize(const std::function<double(const CMatrix&)>& value,
                              const CMatrix& xi0, const OptimizerOptions& opts) {
  opts.validate();
  Rng rng = make_rng(opts.rng_seed, 0);
  OptReport rep;
  CMatrix x = xi0;
  if (guard_feasibility(x)) ++rep.reorthonormalizations;
  double f = value(x);
  rep.evaluations = 1;
  rep.value_history.push_back(f);
  rep.feasibility_history.push_back(stiefel_defect(x));

  int failures = 0;
  auto try_point = [&](const LowRankSkew& w, double tau, CMatrix& y, double& fy) {
    try {
      y = cayley_retract(x, w, tau);
    } catch (const NumericError&) {
      return false;
    }
    fy = value(y);
    ++rep.evaluations;
    return std::isfinite(fy) && fy < f;
  };

  while (rep.iterations < opts.max_iters) {
    CMatrix z = random_tangent(x, rng);
    z /= z.norm();
    LowRankSkew w = search_direction(x, z);
    CMatrix probe;
    double f_probe = 0.0;
    bool improved = try_point(w, opts.tau_probe, probe, f_probe);
    if (!improved) {
      w = search_direction(x, -z);
      improved = try_point(w, opts.tau_probe, probe, f_probe);
    }
    if (!improved) {
      if (++failures >= opts.patience) {
        rep.converged = true;
        rep.message = "no improving direction within patience";
        break;
      }
      continue;
    }
    failures = 0;
    CMatrix best = std::move(probe);
    double f_best = f_probe;
    for (double tau = opts.tau0; tau > opts.tau_probe; tau *= opts.shrink) {
      CMatrix y;
      double fy = 0.0;
      if (try_point(w, tau, y, fy)) {
        if (fy < f_best) {
          best = std::move(y);
          f_best = fy;
        }
        break;
      }
    }
    x = std::move(best);
    f = f_best;
    if (guard_feasibility(x)) {
      ++rep.reorthonormalizations;
      f = value(x);
      ++rep.evaluations;
    }
    ++rep.iterations;
    rep.value_history.push_back(f);
    rep.feasibility_history.push_back(stiefel_defect(x));
  }
  if (rep.message.empty()) rep.message = "iteration limit";
  rep.point = std::move(x);
  rep.final_value = f;
  return rep;
}

}  // namespace qpt
