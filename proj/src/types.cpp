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

#include "qpt/types.hpp"

#include <cmath>

namespace qpt {

CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cplx(re, im);
    }
  }
  return out;
}

CMatrix random_unitary(Eigen::Index n, Rng& rng) {
  return orthonormalize_columns(complex_gaussian(n, n, rng));
}

CMatrix orthonormalize_columns(const CMatrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (n > m) throw DimensionError("orthonormalize_columns: more columns than rows");
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(m, n);
  const CMatrix& r = qr.matrixQR();
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    const double ad = std::abs(d);
    if (ad <= 1e-13 * scale) throw NumericError("orthonormalize_columns: rank loss");
    q.col(j) *= d / ad;
  }
  return q;
}

CMatrix orthonormal_complement(const CMatrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (n > m) throw DimensionError("orthonormal_complement: more columns than rows");
  if (n == 0) return CMatrix::Identity(m, m);
  Eigen::HouseholderQR<CMatrix> qr(a);
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(qr.matrixQR()(j, j)) <= 1e-13 * scale) {
      throw NumericError("orthonormal_complement: rank loss in input columns");
    }
  }
  CMatrix q = qr.householderQ();
  return q.rightCols(m - n);
}

double stiefel_defect(const CMatrix& a) {
  return (a.adjoint() * a - CMatrix::Identity(a.cols(), a.cols())).norm();
}

}  // namespace qpt
