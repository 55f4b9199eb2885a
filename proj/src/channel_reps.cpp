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

#include "qpt/channel_reps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qpt {

namespace {

int checked_root(Eigen::Index n2, const char* what) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n2))));
  if (static_cast<Eigen::Index>(n) * n != n2 || n < 1) {
    throw DimensionError(std::string(what) + ": size is not a perfect square");
  }
  return n;
}

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": matrix must be square and nonempty");
  }
}

double hermitian_defect(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

// Eigenpairs of a Hermitian matrix, eigenvalues descending, each eigenvector
// phased so its first non-negligible component is real positive.
struct Eigenpairs {
  RVector values;
  CMatrix vectors;
};

Eigenpairs sorted_eigenpairs(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Eigen::Index n = h.rows();
  Eigenpairs out{es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
  for (Eigen::Index j = 0; j < n; ++j) {
    auto v = out.vectors.col(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = std::abs(v(i));
      if (a > 1e-12) {
        v *= std::conj(v(i)) / a;
        break;
      }
    }
  }
  return out;
}

// Rows of S = D^{1/2} V^H for the top k eigenpairs.
CMatrix truncated_factor(const CMatrix& choi, int k, const Tolerances& tol) {
  const Eigen::Index n2 = choi.rows();
  if (k < 1 || k > n2) throw DimensionError("kraus rank must lie in [1, N^2]");
  const Eigenpairs ep = sorted_eigenpairs(choi);
  if (ep.values(n2 - 1) < -tol.psd_tol) {
    throw NotCompletelyPositiveError("Choi matrix has eigenvalue " +
                                     std::to_string(ep.values(n2 - 1)));
  }
  double discarded = 0.0;
  for (Eigen::Index j = k; j < n2; ++j) discarded += std::max(0.0, ep.values(j));
  if (discarded > tol.rank_tol) {
    throw RankDeficiencyError("kraus rank " + std::to_string(k) +
                              " discards eigenvalue mass " + std::to_string(discarded));
  }
  CMatrix s(k, n2);
  for (int m = 0; m < k; ++m) {
    s.row(m) = std::sqrt(std::max(0.0, ep.values(m))) * ep.vectors.col(m).adjoint();
  }
  return s;
}

}  // namespace

//----------------------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix rho, double tol) : rho_(std::move(rho)) {
  require_square(rho_, "DensityMatrix");
  if (hermitian_defect(rho_) > tol) throw InvariantError("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - 1.0) > tol) throw InvariantError("density matrix trace != 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -tol) throw InvariantError("density matrix is not PSD");
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  const CVector u = psi.normalized();
  return DensityMatrix(u * u.adjoint());
}

ChoiMatrix::ChoiMatrix(CMatrix m, double tol) : m_(std::move(m)) {
  require_square(m_, "ChoiMatrix");
  dim_ = checked_root(m_.rows(), "ChoiMatrix");
  if (hermitian_defect(m_) > tol) throw InvariantError("Choi matrix is not Hermitian");
  const CMatrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -tol) {
    throw NotCompletelyPositiveError("Choi matrix has eigenvalue " +
                                     std::to_string(es.eigenvalues()(0)));
  }
  const CMatrix tb = partial_trace_output(m_, dim_);
  if ((tb - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > tol) {
    throw InvariantError("Choi matrix is not trace preserving");
  }
}

ChoiMatrix ChoiMatrix::unchecked(CMatrix m) {
  require_square(m, "ChoiMatrix");
  ChoiMatrix out;
  out.dim_ = checked_root(m.rows(), "ChoiMatrix");
  out.m_ = std::move(m);
  return out;
}

StiefelPoint::StiefelPoint(CMatrix xi, int dim, double tol) : dim_(dim), xi_(std::move(xi)) {
  if (dim_ < 1 || xi_.cols() != dim_ || xi_.rows() % dim_ != 0) {
    throw DimensionError("Stiefel point must be (k N) x N");
  }
  const int k = kraus_rank();
  if (k < 1 || k > dim_ * dim_) throw DimensionError("kraus rank must lie in [1, N^2]");
  if (stiefel_defect(xi_) > tol) throw InvariantError("Stiefel point columns are not orthonormal");
}

StiefelPoint StiefelPoint::unchecked(CMatrix xi, int dim) {
  if (dim < 1 || xi.cols() != dim || xi.rows() % dim != 0) {
    throw DimensionError("Stiefel point must be (k N) x N");
  }
  StiefelPoint out;
  out.dim_ = dim;
  out.xi_ = std::move(xi);
  return out;
}

void KrausSet::validate(double tol) const {
  if (operators.empty()) throw InvariantError("empty Kraus set");
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const auto& k : operators) {
    if (k.rows() != dim || k.cols() != dim) throw DimensionError("Kraus operator shape");
    sum += k.adjoint() * k;
  }
  if ((sum - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > tol) {
    throw InvariantError("Kraus operators are not trace preserving");
  }
}

//----------------------------------------------------------------------------

CVector vectorize(const CMatrix& m) {
  require_square(m, "vectorize");
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvectorize(const CVector& v) {
  const int n = checked_root(v.size(), "unvectorize");
  return Eigen::Map<const CMatrix>(v.data(), n, n);
}

CMatrix partial_trace_output(const CMatrix& choi, int dim) {
  if (choi.rows() != dim * dim || choi.cols() != dim * dim) {
    throw DimensionError("partial_trace_output: shape mismatch");
  }
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int cp = 0; cp < dim; ++cp) {
      cplx acc = 0.0;
      for (int r = 0; r < dim; ++r) acc += choi(c * dim + r, cp * dim + r);
      out(c, cp) = acc;
    }
  }
  return out;
}

CMatrix factor_from_stiefel(const CMatrix& xi, int dim) {
  const Eigen::Index k = xi.rows() / dim;
  return Eigen::Map<const CMatrix>(xi.data(), k, static_cast<Eigen::Index>(dim) * dim);
}

CMatrix stiefel_from_factor(const CMatrix& s, int dim) {
  if (s.cols() != static_cast<Eigen::Index>(dim) * dim) {
    throw DimensionError("stiefel_from_factor: factor must have N^2 columns");
  }
  return Eigen::Map<const CMatrix>(s.data(), s.rows() * dim, dim);
}

CMatrix choi_matrix_from_stiefel(const CMatrix& xi, int dim) {
  const Eigen::Index k = xi.rows() / dim;
  Eigen::Map<const CMatrix> s(xi.data(), k, static_cast<Eigen::Index>(dim) * dim);
  return s.adjoint() * s;
}

ChoiMatrix stiefel_to_choi(const StiefelPoint& xi) {
  return ChoiMatrix::unchecked(choi_matrix_from_stiefel(xi.matrix(), xi.dim()));
}

StiefelPoint choi_to_stiefel(const ChoiMatrix& choi, int kraus_rank, const Tolerances& tol) {
  const CMatrix s = truncated_factor(choi.matrix(), kraus_rank, tol);
  return StiefelPoint::unchecked(stiefel_from_factor(s, choi.dim()), choi.dim());
}

KrausSet choi_to_kraus(const ChoiMatrix& choi, int kraus_rank, const Tolerances& tol) {
  const CMatrix s = truncated_factor(choi.matrix(), kraus_rank, tol);
  KrausSet out{choi.dim(), {}};
  out.operators.reserve(kraus_rank);
  for (int m = 0; m < kraus_rank; ++m) {
    out.operators.push_back(unvectorize(s.row(m).adjoint()));
  }
  return out;
}

ChoiMatrix kraus_to_choi(const KrausSet& kraus) {
  const int n = kraus.dim;
  CMatrix out = CMatrix::Zero(n * n, n * n);
  for (const auto& k : kraus.operators) {
    if (k.rows() != n || k.cols() != n) throw DimensionError("Kraus operator shape");
    const CVector v = vectorize(k);
    out.noalias() += v * v.adjoint();
  }
  return ChoiMatrix::unchecked(std::move(out));
}

Eigen::PermutationMatrix<Eigen::Dynamic> stacking_permutation(int dim, int kraus_rank) {
  // Row r * k + m of xi becomes row m * N + r of the stack.
  Eigen::PermutationMatrix<Eigen::Dynamic> p(dim * kraus_rank);
  for (int r = 0; r < dim; ++r) {
    for (int m = 0; m < kraus_rank; ++m) p.indices()(r * kraus_rank + m) = m * dim + r;
  }
  return p;
}

CMatrix stiefel_to_stacked_kraus(const StiefelPoint& xi) {
  return stacking_permutation(xi.dim(), xi.kraus_rank()) * xi.matrix().conjugate();
}

KrausSet unstack_kraus(const CMatrix& stacked, int dim) {
  if (stacked.cols() != dim || stacked.rows() % dim != 0) {
    throw DimensionError("unstack_kraus: stack must be (k N) x N");
  }
  KrausSet out{dim, {}};
  for (Eigen::Index m = 0; m < stacked.rows() / dim; ++m) {
    out.operators.push_back(stacked.middleRows(m * dim, dim));
  }
  return out;
}

StiefelPoint kraus_to_stiefel(const KrausSet& kraus) {
  const int n = kraus.dim;
  const int k = static_cast<int>(kraus.operators.size());
  CMatrix stacked(static_cast<Eigen::Index>(k) * n, n);
  for (int m = 0; m < k; ++m) stacked.middleRows(m * n, n) = kraus.operators[m];
  CMatrix xi = (stacking_permutation(n, k).transpose() * stacked).conjugate();
  return StiefelPoint(std::move(xi), n);
}

//----------------------------------------------------------------------------

CMatrix apply_choi(const CMatrix& choi, const CMatrix& op) {
  const int n = checked_root(choi.rows(), "apply_choi");
  if (op.rows() != n || op.cols() != n) throw DimensionError("apply_choi: dimension mismatch");
  CMatrix out = CMatrix::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    for (int cp = 0; cp < n; ++cp) {
      const cplx w = op(c, cp);
      if (w == cplx(0.0)) continue;
      out.noalias() += w * choi.block(c * n, cp * n, n, n);
    }
  }
  return out;
}

DensityMatrix apply_channel(const ChoiMatrix& choi, const DensityMatrix& rho) {
  if (choi.dim() != rho.dim()) throw DimensionError("apply_channel: dimension mismatch");
  CMatrix out = apply_choi(choi.matrix(), rho.matrix());
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out));
}

double process_fidelity(const ChoiMatrix& choi, const CMatrix& unitary) {
  const int n = choi.dim();
  if (unitary.rows() != n || unitary.cols() != n) {
    throw DimensionError("process_fidelity: dimension mismatch");
  }
  if ((unitary.adjoint() * unitary - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8) {
    throw InvariantError("process_fidelity: target is not unitary");
  }
  const CVector u = vectorize(unitary);
  const double f = (u.adjoint() * choi.matrix() * u)(0).real() / (n * n);
  return std::clamp(f, 0.0, 1.0);
}

std::array<CMatrix, 4> pauli_matrices() {
  const cplx i(0.0, 1.0);
  CMatrix id = CMatrix::Identity(2, 2);
  CMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  y << 0.0, -i, i, 0.0;
  z << 1.0, 0.0, 0.0, -1.0;
  return {id, x, y, z};
}

PauliTransferMatrix choi_to_ptm(const ChoiMatrix& choi) {
  if (choi.dim() != 2) throw DimensionError("choi_to_ptm: only defined for N = 2");
  const auto p = pauli_matrices();
  PauliTransferMatrix out;
  for (int j = 0; j < 4; ++j) {
    const CMatrix image = apply_choi(choi.matrix(), p[j]);
    for (int i = 0; i < 4; ++i) out.entries(i, j) = 0.5 * (p[i] * image).trace().real();
  }
  return out;
}

//----------------------------------------------------------------------------

double trace_norm_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

namespace {

// (Delta (x) id)(|psi><psi|), output index r * N + a.
CMatrix extended_output(const CMatrix& delta, const CVector& psi, int n) {
  const int n2 = n * n;
  CMatrix out = CMatrix::Zero(n2, n2);
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < n; ++a) {
      const cplx x = psi(c * n + a);
      for (int cp = 0; cp < n; ++cp) {
        for (int ap = 0; ap < n; ++ap) {
          const cplx w = x * std::conj(psi(cp * n + ap));
          for (int r = 0; r < n; ++r) {
            for (int rp = 0; rp < n; ++rp) {
              out(r * n + a, rp * n + ap) += w * delta(c * n + r, cp * n + rp);
            }
          }
        }
      }
    }
  }
  return out;
}

// Hermitian form M with psi^H M psi = Tr(Y (Delta (x) id)(|psi><psi|)).
CMatrix linear_form(const CMatrix& delta, const CMatrix& y, int n) {
  const int n2 = n * n;
  CMatrix m = CMatrix::Zero(n2, n2);
  for (int cp = 0; cp < n; ++cp) {
    for (int ap = 0; ap < n; ++ap) {
      for (int c = 0; c < n; ++c) {
        for (int a = 0; a < n; ++a) {
          cplx acc = 0.0;
          for (int r = 0; r < n; ++r) {
            for (int rp = 0; rp < n; ++rp) {
              acc += delta(c * n + r, cp * n + rp) * y(rp * n + ap, r * n + a);
            }
          }
          m(cp * n + ap, c * n + a) = acc;
        }
      }
    }
  }
  return 0.5 * (m + m.adjoint());
}

CMatrix sign_matrix(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector s = es.eigenvalues().unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double output_trace_distance(const CMatrix& delta_choi, const CVector& psi) {
  const int n = checked_root(delta_choi.rows(), "output_trace_distance");
  return trace_norm_hermitian(extended_output(delta_choi, psi.normalized(), n));
}

DiamondResult diamond_distance(const ChoiMatrix& a, const ChoiMatrix& b,
                               const DiamondOptions& opts) {
  if (a.dim() != b.dim()) throw DimensionError("diamond_distance: dimension mismatch");
  if (opts.restarts < 1) throw ConfigError("diamond_distance: restarts must be >= 1");
  const int n = a.dim();
  const CMatrix delta = a.matrix() - b.matrix();
  DiamondResult result;
  result.restarts = opts.restarts;
  if (delta.cwiseAbs().maxCoeff() == 0.0) {
    result.agreeing_restarts = opts.restarts;
    result.converged = true;
    return result;
  }

  std::vector<double> values(opts.restarts, 0.0);
  for (int start = 0; start < opts.restarts; ++start) {
    Rng rng = make_rng(opts.seed, static_cast<std::uint64_t>(start));
    CVector psi = complex_gaussian(n * n, 1, rng).col(0).normalized();
    CMatrix out = extended_output(delta, psi, n);
    double value = trace_norm_hermitian(out);
    for (int it = 0; it < opts.max_iters; ++it) {
      const CMatrix form = linear_form(delta, sign_matrix(out), n);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(form);
      psi = es.eigenvectors().col(n * n - 1);
      out = extended_output(delta, psi, n);
      const double next = trace_norm_hermitian(out);
      const bool stalled = next - value <= opts.step_tol * std::max(1.0, value);
      value = std::max(value, next);
      if (stalled) break;
    }
    values[start] = value;
  }
  result.value = *std::max_element(values.begin(), values.end());
  result.agreeing_restarts = static_cast<int>(
      std::count_if(values.begin(), values.end(),
                    [&](double v) { return result.value - v <= opts.agreement_tol; }));
  result.converged = result.agreeing_restarts >= std::min(2, opts.restarts);
  return result;
}

//----------------------------------------------------------------------------

ChoiMatrix identity_channel(int dim) {
  return unitary_channel(CMatrix::Identity(dim, dim));
}

ChoiMatrix unitary_channel(const CMatrix& unitary) {
  require_square(unitary, "unitary_channel");
  const CVector u = vectorize(unitary);
  return ChoiMatrix::unchecked(u * u.adjoint());
}

ChoiMatrix depolarizing_channel(double fidelity) {
  if (fidelity < 0.0 || fidelity > 1.0) throw ConfigError("depolarizing fidelity outside [0, 1]");
  const auto p = pauli_matrices();
  CMatrix out = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const CVector v = vectorize(p[i]);
    const double w = i == 0 ? fidelity : (1.0 - fidelity) / 3.0;
    out.noalias() += w * v * v.adjoint();
  }
  return ChoiMatrix::unchecked(std::move(out));
}

}  // namespace qpt
