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
#include <complex>

#include <gtest/gtest.h>

#include "qpt/channel_reps.hpp"
#include "qpt/frame_bingham.hpp"
#include "test_support.hpp"

namespace qpt {
namespace {

using testing::max_abs;
using testing::random_cptp;

const cplx kI(0.0, 1.0);

CMatrix dephasing_kraus(double theta) {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = std::exp(kI * theta);
  a(1, 1) = std::exp(-kI * theta);
  return a;
}

// Independent partial trace over the fast index.
CMatrix trace_fast_index(const CMatrix& choi, int n) {
  CMatrix out = CMatrix::Zero(n, n);
  for (int c = 0; c < n; ++c)
    for (int cp = 0; cp < n; ++cp)
      for (int r = 0; r < n; ++r) out(c, cp) += choi(c * n + r, cp * n + r);
  return out;
}

// Removes the phase of the first entry with magnitude above 1e-6.
CMatrix fix_phase(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (std::abs(m.data()[i]) > 1e-6) return m * std::conj(m.data()[i]) / std::abs(m.data()[i]);
  }
  return m;
}

TEST(Vectorize, IdentityAndDephasingKraus) {
  const CVector v = vectorize(CMatrix::Identity(2, 2));
  EXPECT_EQ(v, (CVector(4) << 1, 0, 0, 1).finished());
  const double t = 0.37;
  const CVector w = vectorize(dephasing_kraus(t));
  EXPECT_LT(std::abs(w(0) - std::exp(kI * t)), 1e-15);
  EXPECT_EQ(w(1), cplx(0.0));
  EXPECT_EQ(w(2), cplx(0.0));
  EXPECT_LT(std::abs(w(3) - std::exp(-kI * t)), 1e-15);
}

TEST(Vectorize, RoundTripAndColumnStacking) {
  Rng rng(1);
  const CMatrix m = complex_gaussian(3, 3, rng);
  EXPECT_EQ(unvectorize(vectorize(m)), m);
  EXPECT_EQ(vectorize(m)(1 * 3 + 2), m(2, 1));
  EXPECT_THROW(unvectorize(CVector::Zero(5)), DimensionError);
}

TEST(StiefelToChoi, IdentityChannel) {
  const StiefelPoint xi = kraus_to_stiefel(KrausSet{2, {CMatrix::Identity(2, 2)}});
  const CMatrix lam = stiefel_to_choi(xi).matrix();
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 0) = expected(0, 3) = expected(3, 0) = expected(3, 3) = 1.0;
  EXPECT_LT(max_abs(lam - expected), 1e-15);
}

TEST(StiefelToChoi, DephasingCornerEntry) {
  const double t = 0.3;
  const CMatrix lam = stiefel_to_choi(kraus_to_stiefel(KrausSet{2, {dephasing_kraus(t)}})).matrix();
  EXPECT_LT(std::abs(lam(0, 3) - std::exp(2.0 * kI * t)), 1e-15);
  EXPECT_LT(std::abs(lam(3, 0) - std::exp(-2.0 * kI * t)), 1e-15);
  EXPECT_NEAR(lam(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(lam(3, 3).real(), 1.0, 1e-15);
  EXPECT_LT(std::abs(lam(1, 1)) + std::abs(lam(2, 2)) + std::abs(lam(1, 2)), 1e-15);
}

TEST(StiefelToChoi, RandomPointsAreTracePreserving) {
  Rng rng(2);
  for (int dim : {2, 3}) {
    for (int rep = 0; rep < 20; ++rep) {
      const StiefelPoint xi = sample_uniform(dim, dim * dim, rng);
      const CMatrix lam = stiefel_to_choi(xi).matrix();
      EXPECT_LT(max_abs(trace_fast_index(lam, dim) - CMatrix::Identity(dim, dim)), 1e-12);
      EXPECT_NO_THROW(ChoiMatrix(lam, 1e-10));
    }
  }
}

TEST(StiefelToChoi, GramIdentity) {
  Rng rng(3);
  const StiefelPoint xi = sample_uniform(3, 4, rng);
  const CMatrix s = factor_from_stiefel(xi.matrix(), 3);
  const CMatrix lam = stiefel_to_choi(xi).matrix();
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) EXPECT_LT(std::abs(lam(i, j) - s.col(i).dot(s.col(j))), 1e-13);
}

TEST(ChoiToStiefel, IdentityRankOne) {
  const StiefelPoint xi = choi_to_stiefel(identity_channel(2), 1);
  const CMatrix packed = stiefel_from_factor(vectorize(CMatrix::Identity(2, 2)).transpose(), 2);
  EXPECT_LT(max_abs(fix_phase(xi.matrix()) - fix_phase(packed)), 1e-12);
}

TEST(ChoiToStiefel, DepolarizingRoundTripAndRankError) {
  const ChoiMatrix dp = depolarizing_channel(0.9999);
  const StiefelPoint xi = choi_to_stiefel(dp, 4);
  EXPECT_LT(max_abs(stiefel_to_choi(xi).matrix() - dp.matrix()), 1e-10);
  EXPECT_THROW(choi_to_stiefel(dp, 1), RankDeficiencyError);
}

TEST(ChoiToStiefel, RandomRoundTrips) {
  Rng rng(4);
  for (int dim : {2, 3}) {
    for (int rep = 0; rep < 50; ++rep) {
      const ChoiMatrix lam = random_cptp(dim, dim * dim, rng);
      EXPECT_LT(max_abs(stiefel_to_choi(choi_to_stiefel(lam, dim * dim)).matrix() - lam.matrix()),
                1e-10);
      EXPECT_LT(max_abs(kraus_to_choi(choi_to_kraus(lam, dim * dim)).matrix() - lam.matrix()),
                1e-10);
    }
  }
}

TEST(ChoiToStiefel, RejectsNonPositive) {
  CMatrix m = identity_channel(2).matrix();
  m(0, 0) = 1.1;
  m(1, 1) = -0.1;
  EXPECT_THROW(ChoiMatrix{m}, NotCompletelyPositiveError);
  EXPECT_THROW(choi_to_stiefel(ChoiMatrix::unchecked(m), 4), NotCompletelyPositiveError);
}

TEST(ChoiToKraus, DephasingSingleOperator) {
  const double t = 0.3;
  const ChoiMatrix lam = kraus_to_choi(KrausSet{2, {dephasing_kraus(t)}});
  const KrausSet ks = choi_to_kraus(lam, 1);
  ASSERT_EQ(ks.operators.size(), 1u);
  EXPECT_LT(max_abs(fix_phase(ks.operators[0]) - fix_phase(dephasing_kraus(t))), 1e-12);
  EXPECT_LT(max_abs(kraus_to_choi(KrausSet{2, {CMatrix::Identity(2, 2)}}).matrix() -
                    identity_channel(2).matrix()),
            1e-15);
}

TEST(StackedKraus, IdentityCase) {
  const StiefelPoint xi = kraus_to_stiefel(KrausSet{2, {CMatrix::Identity(2, 2)}});
  EXPECT_LT(max_abs(stiefel_to_stacked_kraus(xi) - CMatrix::Identity(2, 2)), 1e-15);
  const auto p = stacking_permutation(2, 1);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(p.indices()(i), i);
}

TEST(StackedKraus, PermutationIsFixedAndPreservesGram) {
  Rng rng(5);
  const auto p = stacking_permutation(3, 4);
  for (int rep = 0; rep < 2; ++rep) {
    const StiefelPoint xi = sample_uniform(3, 4, rng);
    const CMatrix stacked = stiefel_to_stacked_kraus(xi);
    EXPECT_LT(max_abs(stacked - p * xi.matrix().conjugate()), 1e-15);
    EXPECT_LT(stiefel_defect(stacked), 1e-12);
    const ChoiMatrix via_kraus = kraus_to_choi(unstack_kraus(stacked, 3));
    EXPECT_LT(max_abs(via_kraus.matrix() - stiefel_to_choi(xi).matrix()), 1e-12);
  }
}

TEST(ApplyChannel, Examples) {
  Rng rng(6);
  const CMatrix g = complex_gaussian(2, 2, rng);
  CMatrix r = g * g.adjoint();
  r /= r.trace();
  const DensityMatrix rho(r);
  EXPECT_LT(max_abs(apply_channel(identity_channel(2), rho).matrix() - r), 1e-15);

  const double t = 0.3;
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const ChoiMatrix lam = kraus_to_choi(KrausSet{2, {dephasing_kraus(t)}});
  const CMatrix out = apply_channel(lam, DensityMatrix::pure(plus)).matrix();
  EXPECT_NEAR(plus.dot(out * plus).real(), 0.5 + 0.5 * std::cos(2 * t), 1e-14);

  const double f = 0.97;
  CVector zero(2);
  zero << 1.0, 0.0;
  const CMatrix o2 = apply_channel(depolarizing_channel(f), DensityMatrix::pure(zero)).matrix();
  EXPECT_NEAR(o2(0, 0).real(), f + (1 - f) / 3, 1e-14);
}

TEST(ProcessFidelity, Examples) {
  const CMatrix id = CMatrix::Identity(2, 2);
  EXPECT_NEAR(process_fidelity(identity_channel(2), id), 1.0, 1e-15);
  EXPECT_NEAR(process_fidelity(depolarizing_channel(0.93), id), 0.93, 1e-14);
  const double t = 0.3;
  EXPECT_NEAR(process_fidelity(kraus_to_choi(KrausSet{2, {dephasing_kraus(t)}}), id),
              0.5 + 0.5 * std::cos(2 * t), 1e-14);
  EXPECT_THROW(process_fidelity(identity_channel(2), 2.0 * id), InvariantError);
}

TEST(ProcessFidelity, RangeAndEqualityCase) {
  Rng rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const CMatrix u = random_unitary(2, rng);
    const ChoiMatrix lam = random_cptp(2, 1 + rep % 4, rng);
    const double f = process_fidelity(lam, u);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_LT(f, 1.0 - 1e-6);
    EXPECT_NEAR(process_fidelity(unitary_channel(u), u), 1.0, 1e-12);
  }
}

TEST(Ptm, Examples) {
  EXPECT_LT((choi_to_ptm(identity_channel(2)).entries - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(),
            1e-15);
  const double t = 0.3;
  const PauliTransferMatrix r = choi_to_ptm(kraus_to_choi(KrausSet{2, {dephasing_kraus(t)}}));
  Eigen::Matrix3d rot;
  rot << std::cos(2 * t), -std::sin(2 * t), 0, std::sin(2 * t), std::cos(2 * t), 0, 0, 0, 1;
  // A rotation by 2 theta about z; orientation depends on the sign of theta.
  const double err = std::min((r.unital_block() - rot).cwiseAbs().maxCoeff(),
                              (r.unital_block() - rot.transpose()).cwiseAbs().maxCoeff());
  EXPECT_LT(err, 1e-14);
  EXPECT_LT(r.nonunital_vector().norm(), 1e-15);

  const double f = 0.95;
  const PauliTransferMatrix d = choi_to_ptm(depolarizing_channel(f));
  EXPECT_LT((d.unital_block() - (4 * f - 1) / 3 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(),
            1e-14);
  EXPECT_LT(d.nonunital_vector().norm(), 1e-15);
}

TEST(Ptm, FirstRowForRandomChannels) {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Matrix4d r = choi_to_ptm(random_cptp(2, 4, rng)).entries;
    EXPECT_NEAR(r(0, 0), 1.0, 1e-10);
    EXPECT_LT(r.row(0).tail<3>().cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_THROW(choi_to_ptm(identity_channel(3)), DimensionError);
}

// Unitary pair oracle: the diamond distance is 2 sqrt(1 - d^2), d the
// distance from 0 to the convex hull of the eigenvalues of U^H V.
double unitary_pair_diamond(const CMatrix& u, const CMatrix& v) {
  Eigen::ComplexEigenSolver<CMatrix> es(u.adjoint() * v);
  const cplx a = es.eigenvalues()(0);
  const cplx b = es.eigenvalues()(1);
  const cplx ab = b - a;
  const double t = std::clamp(-(std::conj(ab) * a).real() / std::norm(ab), 0.0, 1.0);
  const double d = std::abs(a + t * ab);
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - d * d));
}

TEST(Diamond, SelfDistanceIsZero) {
  Rng rng(9);
  const ChoiMatrix lam = random_cptp(2, 4, rng);
  EXPECT_LT(diamond_distance(lam, lam).value, 1e-14);
}

TEST(Diamond, DephasingAgainstIdentity) {
  for (double t : {0.1, 0.3}) {
    const ChoiMatrix lam = kraus_to_choi(KrausSet{2, {dephasing_kraus(t)}});
    const DiamondResult r = diamond_distance(identity_channel(2), lam);
    EXPECT_NEAR(r.value, 2.0 * std::abs(std::sin(t)), 1e-9);
    EXPECT_NEAR(unitary_pair_diamond(CMatrix::Identity(2, 2), dephasing_kraus(t)),
                2.0 * std::abs(std::sin(t)), 1e-12);
    EXPECT_TRUE(r.converged);
  }
}

TEST(Diamond, RandomUnitaryPairs) {
  Rng rng(10);
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix u = random_unitary(2, rng);
    const CMatrix v = random_unitary(2, rng);
    const double d = diamond_distance(unitary_channel(u), unitary_channel(v)).value;
    EXPECT_NEAR(d, unitary_pair_diamond(u, v), 1e-8);
  }
}

TEST(Diamond, DominatesEveryFixedInput) {
  Rng rng(11);
  const ChoiMatrix a = random_cptp(2, 4, rng);
  const ChoiMatrix b = random_cptp(2, 2, rng);
  const double d = diamond_distance(a, b).value;
  const CMatrix delta = a.matrix() - b.matrix();
  for (int rep = 0; rep < 200; ++rep) {
    CVector psi = complex_gaussian(4, 1, rng).col(0);
    psi.normalize();
    EXPECT_LE(output_trace_distance(delta, psi), d + 1e-12);
  }
}

TEST(Validation, DensityMatrixAndKraus) {
  EXPECT_THROW(DensityMatrix(CMatrix::Identity(2, 2)), InvariantError);
  KrausSet bad{2, {0.5 * CMatrix::Identity(2, 2)}};
  EXPECT_THROW(bad.validate(), InvariantError);
  EXPECT_THROW(StiefelPoint(CMatrix::Ones(4, 2), 2), InvariantError);
}

}  // namespace
}  // namespace qpt
