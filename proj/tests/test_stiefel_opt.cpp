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

#include <cmath>

#include <gtest/gtest.h>

#include "qpt/stiefel_opt.hpp"
#include "test_support.hpp"

namespace qpt {
namespace {

using testing::max_abs;

CMatrix random_point(int rows, int cols, Rng& rng) {
  return orthonormalize_columns(complex_gaussian(rows, cols, rng));
}

// F(xi) = Re Tr(xi^H A xi); minimum over orthonormal frames is the sum of
// the smallest eigenvalues of A.
ObjectiveEvaluator quadratic(const CMatrix& a) {
  return {[a](const CMatrix& x) { return (x.adjoint() * a * x).trace().real(); },
          [a](const CMatrix& x) -> CMatrix { return 2.0 * a * x; }};
}

double smallest_sum(const CMatrix& a, int count) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().head(count).sum();
}

TEST(Cayley, WoodburyMatchesDenseInverse) {
  Rng rng(1);
  for (int rows : {2, 4, 8, 16}) {
    for (int cols : {1, 2}) {
      if (cols > rows) continue;
      const CMatrix xi = random_point(rows, cols, rng);
      const CMatrix g = complex_gaussian(rows, cols, rng);
      const LowRankSkew w = search_direction(xi, g);
      for (double tau : {1e-3, 0.3, 2.0}) {
        const CMatrix a = cayley_retract(xi, w, tau);
        const CMatrix b = cayley_retract_dense(xi, w.dense(), tau);
        EXPECT_LT(max_abs(a - b), 1e-10);
        EXPECT_LT(stiefel_defect(a), 1e-12);
      }
    }
  }
}

TEST(Cayley, DirectionIsSkewHermitian) {
  Rng rng(2);
  const CMatrix xi = random_point(6, 2, rng);
  const LowRankSkew w = search_direction(xi, complex_gaussian(6, 2, rng));
  const CMatrix d = w.dense();
  EXPECT_LT(max_abs(d + d.adjoint()), 1e-14);
  EXPECT_NEAR(w.norm(), d.norm(), 1e-12);
}

TEST(Cayley, ZeroStepIsIdentity) {
  Rng rng(3);
  const CMatrix xi = random_point(4, 2, rng);
  const LowRankSkew w = search_direction(xi, complex_gaussian(4, 2, rng));
  EXPECT_LT(max_abs(cayley_retract(xi, w, 0.0) - xi), 1e-15);
}

TEST(Cayley, VelocityMatchesFiniteDifference) {
  Rng rng(4);
  const CMatrix xi = random_point(8, 2, rng);
  const LowRankSkew w = search_direction(xi, complex_gaussian(8, 2, rng));
  for (double tau : {1e-4, 0.2, 1.1}) {
    const double h = 1e-6;
    const CMatrix fd = (cayley_retract(xi, w, tau + h) - cayley_retract(xi, w, tau - h)) / (2 * h);
    const CMatrix v = cayley_velocity(xi, cayley_retract(xi, w, tau), w, tau);
    EXPECT_LT(max_abs(v - fd), 1e-7);
  }
}

TEST(Cayley, CurveDerivativeMatchesFiniteDifferenceAndDescends) {
  Rng rng(5);
  const CMatrix a = testing::random_hermitian_psd(8, rng);
  const auto obj = quadratic(a);
  const CMatrix xi = random_point(8, 2, rng);
  const CMatrix g = obj.euclidean_gradient(xi);
  const LowRankSkew w = search_direction(xi, g);
  EXPECT_LT(curve_derivative(g, xi, xi, w, 0.0), 0.0);
  for (double tau : {1e-4, 0.05, 0.4}) {
    const double h = 1e-6;
    const double fd =
        (obj.value(cayley_retract(xi, w, tau + h)) - obj.value(cayley_retract(xi, w, tau - h))) /
        (2 * h);
    const CMatrix y = cayley_retract(xi, w, tau);
    const double d = curve_derivative(obj.euclidean_gradient(y), xi, y, w, tau);
    EXPECT_NEAR(d, fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(LineSearch, SatisfiesArmijo) {
  Rng rng(6);
  const CMatrix a = testing::random_hermitian_psd(6, rng);
  const auto obj = quadratic(a);
  const CMatrix xi = random_point(6, 2, rng);
  const CMatrix g = obj.euclidean_gradient(xi);
  const LowRankSkew w = search_direction(xi, g);
  const double f0 = obj.value(xi);
  const OptimizerOptions opts;
  const auto r = line_search(obj, xi, f0, g, w, opts);
  ASSERT_TRUE(r.ok);
  const double slope = curve_derivative(g, xi, xi, w, 0.0);
  EXPECT_LE(r.value, f0 + opts.armijo_c1 * r.tau * slope + 1e-12);
}

TEST(Minimize, QuadraticReachesEigenvalueSum) {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const int rows = 4 + 2 * trial;
    const CMatrix a = testing::random_hermitian_psd(rows, rng);
    OptimizerOptions opts;
    opts.max_iters = 2000;
    const auto rep = minimize(quadratic(a), random_point(rows, 2, rng), opts);
    EXPECT_NEAR(rep.final_value, smallest_sum(a, 2), 1e-7 * std::max(1.0, a.norm()));
    EXPECT_LT(rep.feasibility_max(), 1e-8);
    for (std::size_t i = 1; i < rep.value_history.size(); ++i) {
      EXPECT_LE(rep.value_history[i], rep.value_history[i - 1] + 1e-12);
    }
  }
}

TEST(Minimize, DiagonalBrockettFindsBottomSubspace) {
  CMatrix a = CMatrix::Zero(4, 4);
  a.diagonal() << 4.0, 1.0, 3.0, 2.0;
  Rng rng(8);
  const auto rep = minimize(quadratic(a), random_point(4, 2, rng));
  EXPECT_NEAR(rep.final_value, 3.0, 1e-8);
  // Rows 1 and 3 carry all the weight.
  EXPECT_NEAR(rep.point.row(1).squaredNorm() + rep.point.row(3).squaredNorm(), 2.0, 1e-6);
}

TEST(Minimize, ConstantObjectiveStopsImmediately) {
  Rng rng(9);
  const CMatrix xi = random_point(4, 2, rng);
  ObjectiveEvaluator obj{[](const CMatrix&) { return 1.5; },
                         [](const CMatrix& x) -> CMatrix { return CMatrix::Zero(x.rows(), x.cols()); }};
  const auto rep = minimize(obj, xi);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.final_value, 1.5);
  EXPECT_LT(max_abs(rep.point - xi), 1e-15);
}

TEST(Minimize, RequiresGradient) {
  Rng rng(10);
  ObjectiveEvaluator obj{[](const CMatrix&) { return 0.0; }, {}};
  EXPECT_FALSE(obj.has_gradient());
  EXPECT_THROW(minimize(obj, random_point(4, 2, rng)), ConfigError);
}

TEST(Minimize, OptionsValidated) {
  OptimizerOptions opts;
  opts.shrink = 1.5;
  EXPECT_THROW(opts.validate(), ConfigError);
  opts = {};
  opts.max_iters = -1;
  EXPECT_THROW(opts.validate(), ConfigError);
}

TEST(RandomTangent, IsTangent) {
  Rng rng(12);
  const CMatrix xi = random_point(6, 2, rng);
  const CMatrix z = random_tangent(xi, rng);
  // xi^H Z + Z^H xi = 0 on the tangent space.
  EXPECT_LT(max_abs(xi.adjoint() * z + z.adjoint() * xi), 1e-12);
}

TEST(StochasticMinimize, ImprovesQuadraticAndStaysFeasible) {
  Rng rng(13);
  const CMatrix a = testing::random_hermitian_psd(4, rng);
  const auto obj = quadratic(a);
  const CMatrix xi0 = random_point(4, 2, rng);
  OptimizerOptions opts;
  opts.max_iters = 3000;
  opts.rng_seed = 14;
  const auto rep = stochastic_minimize(obj.value, xi0, opts);
  EXPECT_LT(rep.final_value, obj.value(xi0));
  EXPECT_NEAR(rep.final_value, smallest_sum(a, 2), 1e-3 * std::max(1.0, a.norm()));
  EXPECT_LT(rep.feasibility_max(), 1e-8);
  for (std::size_t i = 1; i < rep.value_history.size(); ++i) {
    EXPECT_LE(rep.value_history[i], rep.value_history[i - 1] + 1e-12);
  }
}

TEST(StochasticMinimize, DeterministicForSeed) {
  Rng rng(15);
  const CMatrix a = testing::random_hermitian_psd(4, rng);
  const auto obj = quadratic(a);
  const CMatrix xi0 = random_point(4, 2, rng);
  OptimizerOptions opts;
  opts.max_iters = 200;
  opts.rng_seed = 3;
  EXPECT_EQ(stochastic_minimize(obj.value, xi0, opts).point,
            stochastic_minimize(obj.value, xi0, opts).point);
}

}  // namespace
}  // namespace qpt
