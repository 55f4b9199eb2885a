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

#pragma once

// Feasible optimisation on the complex Stiefel manifold V_N(C^{kN}) along
// Cayley-transform curves
//
//   Y(tau) = (I + tau/2 W)^{-1} (I - tau/2 W) xi,   W = G xi^H - xi G^H,
//
// evaluated through the rank-2N Woodbury identity. Every iterate stays on
// the manifold, so channels built from it remain CPTP along the path.
//
// Gradient convention: G = dF/dRe(xi) + i dF/dIm(xi), so that
// dF = Re Tr(G^H dxi).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qpt/types.hpp"

namespace qpt {

struct ObjectiveEvaluator {
  std::function<double(const CMatrix&)> value;
  std::function<CMatrix(const CMatrix&)> euclidean_gradient;  // may be empty

  bool has_gradient() const { return static_cast<bool>(euclidean_gradient); }
};

struct OptimizerOptions {
  double tau0 = 1.0;
  double shrink = 0.5;
  double armijo_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_iters = 500;
  double grad_tol = 1e-8;
  double feas_tol = 1e-8;
  // Stop when one step lowers F by less than value_rtol * max(1, |F|).
  double value_rtol = 1e-15;
  int max_line_search = 80;
  bool bb_initial_step = true;  // Barzilai-Borwein guess for tau after the first iterate
  int restarts = 1;
  std::uint64_t rng_seed = 0;
  // Stochastic (value-only) mode.
  double tau_probe = 1e-3;
  int patience = 50;

  void validate() const;
};

struct OptReport {
  CMatrix point;
  double final_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> value_history;
  std::vector<double> grad_norm_history;
  std::vector<double> feasibility_history;
  int reorthonormalizations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::string message;

  double feasibility_max() const;
};

// W = U V^H with U = [G, xi], V = [xi, -G]; never densified.
struct LowRankSkew {
  CMatrix u;
  CMatrix v;

  CMatrix dense() const { return u * v.adjoint(); }
  // ||W||_F without forming W.
  double norm() const;
};

LowRankSkew search_direction(const CMatrix& xi, const CMatrix& g);

// Throws NumericError when I + tau/2 V^H U is singular.
CMatrix cayley_retract(const CMatrix& xi, const LowRankSkew& w, double tau);

// Reference implementation with the dense (kN) x (kN) inverse.
CMatrix cayley_retract_dense(const CMatrix& xi, const CMatrix& w, double tau);

// dY/dtau at tau for the curve through xi; y is Y(tau).
CMatrix cayley_velocity(const CMatrix& xi, const CMatrix& y, const LowRankSkew& w, double tau);

// d/dtau F(Y(tau)) = Re Tr(G(Y)^H Y'(tau)).
double curve_derivative(const CMatrix& grad_at_y, const CMatrix& xi, const CMatrix& y,
                        const LowRankSkew& w, double tau);

struct LineSearchResult {
  bool ok = false;
  double tau = 0.0;
  CMatrix point;
  double value = 0.0;
  CMatrix gradient;
  int evaluations = 0;
};

// Armijo-Wolfe search starting at tau_init (opts.tau0 when <= 0). Shrinks on
// insufficient decrease, expands when the curvature condition fails.
LineSearchResult line_search(const ObjectiveEvaluator& obj, const CMatrix& xi, double f0,
                             const CMatrix& g0, const LowRankSkew& w,
                             const OptimizerOptions& opts, double tau_init = -1.0);

OptReport minimize(const ObjectiveEvaluator& obj, const CMatrix& xi0,
                   const OptimizerOptions& opts = {});

// Z = xi B + xi_perp C with B skew-Hermitian and C complex Gaussian.
CMatrix random_tangent(const CMatrix& xi, Rng& rng);

// Derivative-free search: random tangent directions, probed at +/- tau_probe,
// followed by value-only backtracking from tau0.
OptReport stochastic_minimize(const std::function<double(const CMatrix&)>& value,
                              const CMatrix& xi0, const OptimizerOptions& opts = {});

}  // namespace qpt
