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

// Representations of quantum channels on C^N and conversions between them.
//
// Index conventions (used everywhere in the library):
//  * vectorize() stacks columns: M(r, c) lands at index c * N + r.
//  * A Choi matrix is Lambda = sum_m |K_m>><<K_m|, so
//    Lambda(c * N + r, c' * N + r') = sum_m K_m(r, c) conj(K_m(r', c')).
//    The input index c is slow, the output index r fast, and trace
//    preservation reads Tr_B Lambda = I_N with B the fast factor.
//  * Lambda = S^H S with S of size k x N^2. The Stiefel point xi is S
//    reshaped column-major to (k N) x N:
//    xi(r * k + m, c) = S(m, c * N + r).
//    Column c of xi therefore stacks the S columns c*N ... c*N + N - 1.

#include <array>
#include <cstdint>
#include <vector>

#include "qpt/types.hpp"

namespace qpt {

struct Tolerances {
  double psd_tol = 1e-10;   // most negative eigenvalue tolerated
  double rank_tol = 1e-8;   // eigenvalue mass that may be discarded
  double check_tol = 1e-8;  // Hermiticity / trace / partial-trace checks
};

class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix rho, double tol = 1e-8);

  static DensityMatrix pure(const CVector& psi);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const { return rho_; }

 private:
  CMatrix rho_;
};

class ChoiMatrix {
 public:
  // Validates Hermiticity, positivity and Tr_B = I.
  explicit ChoiMatrix(CMatrix m, double tol = 1e-8);

  // Wraps without validation. For matrices that are valid by construction.
  static ChoiMatrix unchecked(CMatrix m);

  int dim() const { return dim_; }
  const CMatrix& matrix() const { return m_; }

 private:
  ChoiMatrix() = default;
  int dim_ = 0;
  CMatrix m_;
};

// (k N) x N complex matrix with orthonormal columns.
class StiefelPoint {
 public:
  StiefelPoint(CMatrix xi, int dim, double tol = 1e-8);

  static StiefelPoint unchecked(CMatrix xi, int dim);

  int dim() const { return dim_; }
  int kraus_rank() const { return static_cast<int>(xi_.rows()) / dim_; }
  const CMatrix& matrix() const { return xi_; }

 private:
  StiefelPoint() = default;
  int dim_ = 0;
  CMatrix xi_;
};

struct KrausSet {
  int dim = 0;
  std::vector<CMatrix> operators;

  // Checks sum K^H K = I.
  void validate(double tol = 1e-8) const;
};

struct PauliTransferMatrix {
  Eigen::Matrix4d entries;

  Eigen::Matrix3d unital_block() const { return entries.bottomRightCorner<3, 3>(); }
  Eigen::Vector3d nonunital_vector() const { return entries.bottomLeftCorner<3, 1>(); }
};

//----------------------------------------------------------------------------
// Vectorisation and factor packing
//----------------------------------------------------------------------------

CVector vectorize(const CMatrix& m);
CMatrix unvectorize(const CVector& v);

// Partial trace over the fast (output) factor of an N^2 x N^2 matrix.
CMatrix partial_trace_output(const CMatrix& choi, int dim);

// xi <-> S, both directions are pure reshapes.
CMatrix factor_from_stiefel(const CMatrix& xi, int dim);
CMatrix stiefel_from_factor(const CMatrix& s, int dim);

// S^H S for the S packed in xi. No validation.
CMatrix choi_matrix_from_stiefel(const CMatrix& xi, int dim);

//----------------------------------------------------------------------------
// Conversions
//----------------------------------------------------------------------------

ChoiMatrix stiefel_to_choi(const StiefelPoint& xi);

// Eigen-factorisation Lambda = V D V^H, truncated to the top k eigenpairs.
StiefelPoint choi_to_stiefel(const ChoiMatrix& choi, int kraus_rank,
                             const Tolerances& tol = {});

KrausSet choi_to_kraus(const ChoiMatrix& choi, int kraus_rank, const Tolerances& tol = {});
ChoiMatrix kraus_to_choi(const KrausSet& kraus);

// Vertical stack [K_1; ...; K_k]. Equals P * conj(xi) with P from
// stacking_permutation(); the conjugate appears because Lambda = S^H S.
CMatrix stiefel_to_stacked_kraus(const StiefelPoint& xi);
Eigen::PermutationMatrix<Eigen::Dynamic> stacking_permutation(int dim, int kraus_rank);
KrausSet unstack_kraus(const CMatrix& stacked, int dim);
StiefelPoint kraus_to_stiefel(const KrausSet& kraus);

//----------------------------------------------------------------------------
// Action and metrics
//----------------------------------------------------------------------------

// Linear extension of the channel to arbitrary N x N operators.
CMatrix apply_choi(const CMatrix& choi, const CMatrix& op);

DensityMatrix apply_channel(const ChoiMatrix& choi, const DensityMatrix& rho);

// <<U|Lambda|U>> / N^2.
double process_fidelity(const ChoiMatrix& choi, const CMatrix& unitary);

// N = 2 only.
PauliTransferMatrix choi_to_ptm(const ChoiMatrix& choi);

struct DiamondOptions {
  int restarts = 20;
  int max_iters = 1000;
  double step_tol = 1e-13;       // relative improvement that ends an ascent
  double agreement_tol = 1e-6;   // restarts within this of the best "agree"
  std::uint64_t seed = 0x5eed;
};

struct DiamondResult {
  double value = 0.0;          // certified lower bound
  int restarts = 0;
  int agreeing_restarts = 0;
  bool converged = false;      // best value reached by at least two restarts
};

// max over pure |psi> in C^{N^2} of || (Delta (x) id)(|psi><psi|) ||_1 by
// multi-start alternating ascent (sign matrix <-> top eigenvector).
DiamondResult diamond_distance(const ChoiMatrix& a, const ChoiMatrix& b,
                               const DiamondOptions& opts = {});

// || (Delta (x) id)(|psi><psi|) ||_1 for one input, psi indexed c * N + a.
double output_trace_distance(const CMatrix& delta_choi, const CVector& psi);

double trace_norm_hermitian(const CMatrix& h);

//----------------------------------------------------------------------------
// Reference channels
//----------------------------------------------------------------------------

// I, X, Y, Z.
std::array<CMatrix, 4> pauli_matrices();

ChoiMatrix identity_channel(int dim);
ChoiMatrix unitary_channel(const CMatrix& unitary);

// Single-qubit uniform depolarising channel with process fidelity f.
ChoiMatrix depolarizing_channel(double fidelity);

}  // namespace qpt
