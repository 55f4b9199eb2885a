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

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

using Rng = std::mt19937_64;

//----------------------------------------------------------------------------
// Errors
//----------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or dimensions that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A matrix that should be a valid channel/state/parameter is not.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class NotCompletelyPositiveError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: singular solves, underflow, ill-conditioning.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

//----------------------------------------------------------------------------
// Seeds
//----------------------------------------------------------------------------

// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for stream `index` under `master`. Independent of scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

// Standard complex Gaussian matrix: real and imaginary parts N(0, 1/2).
CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng);

// Haar-random unitary of size n.
CMatrix random_unitary(Eigen::Index n, Rng& rng);

// Orthonormalise the columns of `a` by Householder QR with the diagonal of R
// made real positive. Throws NumericError on rank loss.
CMatrix orthonormalize_columns(const CMatrix& a);

// Orthonormal basis of the orthogonal complement of span(a) (a has
// orthonormal columns). Result is rows x (rows - cols).
CMatrix orthonormal_complement(const CMatrix& a);

// Frobenius norm of a^H a - I.
double stiefel_defect(const CMatrix& a);

}  // namespace qpt
