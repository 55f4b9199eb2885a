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

// Exponential family on the Stiefel manifold whose sufficient statistic is
// the Choi matrix:
//
//   p(xi; Theta) ~ exp(Tr(Theta^H Lambda(xi)))
//
// relative to the uniform (Haar) measure on V_N(C^{kN}). Theta is Hermitian
// PSD with its smallest eigenvalue shifted to zero.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qpt/channel_reps.hpp"

namespace qpt {

class NaturalParameter {
 public:
  // Validates Hermitian PSD (up to tol) and shifts the spectrum so the
  // smallest eigenvalue is exactly zero.
  explicit NaturalParameter(const CMatrix& theta, double tol = 1e-8);

  static NaturalParameter zero(int dim);

  int dim() const { return dim_; }
  const CMatrix& matrix() const { return theta_; }
  bool is_zero() const { return theta_.cwiseAbs().maxCoeff() == 0.0; }

 private:
  int dim_ = 0;
  CMatrix theta_;
};

// Cross-column couplings A_ij = B_ij (x) I_k acting on columns of xi.
// B_ij(a, b) = conj(Theta(i N + a, j N + b)), so that
//   sum_ij xi_i^H A_ij xi_j = Tr(Theta^H Lambda(xi)).
class BlockCoupling {
 public:
  BlockCoupling(const NaturalParameter& theta, int kraus_rank);

  int dim() const { return dim_; }
  int kraus_rank() const { return k_; }
  const CMatrix& block(int i, int j) const { return blocks_[i * dim_ + j]; }
  // Full (kN) x (kN) coupling A_ij.
  const CMatrix& coupling(int i, int j) const { return couplings_[i * dim_ + j]; }
  bool is_zero() const { return zero_; }

 private:
  int dim_;
  int k_;
  bool zero_;
  std::vector<CMatrix> blocks_;
  std::vector<CMatrix> couplings_;
};

enum class InitPolicy { Uniform, Identity, Given };

struct ChainConfig {
  int samples = 1000;
  int burn_in = 500;
  int thinning = 5;
  std::uint64_t seed = 0;
  InitPolicy init = InitPolicy::Uniform;
  std::optional<StiefelPoint> initial;  // used with InitPolicy::Given
  int pair_passes = 2;                  // Gibbs passes per column update
  // Joint Metropolis moves per sweep: xi -> Cayley(W) xi with W a random
  // skew-Hermitian generator. Column-wise Gibbs alone mixes slowly when the
  // columns are strongly coupled through orthogonality.
  int joint_moves = 4;

  void validate() const;
};

// Parameters at or above this scale are refused by the sampler.
inline constexpr double kMaxThetaScale = 1e6;

double sufficient_stat(const StiefelPoint& xi, const NaturalParameter& theta);

// Same quantity through the block form sum_ij xi_i^H (B_ij (x) I_k) xi_j.
double sufficient_stat_blocks(const StiefelPoint& xi, const BlockCoupling& blocks);

// Normaliser and carrier measure omitted.
double log_density_unnormalized(const StiefelPoint& xi, const NaturalParameter& theta);

// Haar-uniform point: complex Gaussian, then QR with positive real diag(R).
StiefelPoint sample_uniform(int dim, int kraus_rank, Rng& rng);

// Resamples column j given the others. The column is written as N_j z with
// N_j spanning the complement of the other columns; z is moved by exact
// coordinate-pair Gibbs updates of its conditional
//   exp(z^H (N_j^H A_jj N_j) z + 2 Re(b^H z)),  b = N_j^H sum_{i != j} A_ji xi_i.
// Metropolis step along a random Haar-symmetric left rotation of scale
// `step`. Returns true when accepted.
bool joint_rotation_move(CMatrix& xi, const NaturalParameter& theta, double step, Rng& rng);

StiefelPoint gibbs_column_update(const StiefelPoint& xi, int column, const BlockCoupling& blocks,
                                 Rng& rng, int pair_passes = 2);
void gibbs_column_update_inplace(CMatrix& xi, int column, const BlockCoupling& blocks, Rng& rng,
                                 int pair_passes);

std::vector<StiefelPoint> sample_chain(const NaturalParameter& theta, int kraus_rank,
                                       const ChainConfig& cfg);

// Independent chains; chain c uses derive_seed(cfg.seed, c). Results are
// ordered by chain index regardless of scheduling.
std::vector<std::vector<StiefelPoint>> sample_chains(const NaturalParameter& theta, int kraus_rank,
                                                     const ChainConfig& cfg, int chains);

// (Weighted) arithmetic mean of the sample Choi matrices.
CMatrix mean_choi(std::span<const StiefelPoint> samples,
                  std::optional<std::span<const double>> weights = std::nullopt);

// Theta = theta |I>><<I|.
NaturalParameter depolarizing_parameter(double theta, int dim);

// Process fidelity with the identity for every sample.
std::vector<double> sample_fidelities(std::span<const StiefelPoint> samples);

struct CalibrationResult {
  NaturalParameter theta;
  RVector eigenvalues;       // of Theta in the target eigenbasis
  double residual = 0.0;     // max |eig(mean) - eig(target)| achieved
  bool converged = false;
  int evaluations = 0;
};

// Fixes Theta's eigenvectors to the target's and searches the eigenvalues
// (the one paired with the target's smallest eigenvalue pinned at zero) by
// coordinate-wise bisection with common random numbers.
CalibrationResult calibrate(const ChoiMatrix& target_mean, int kraus_rank,
                            const ChainConfig& budget, double tol, int max_evaluations = 200);

struct ScalarCalibration {
  double theta = 0.0;
  double achieved_fidelity = 0.0;
  double residual = 0.0;
  bool converged = false;
  int evaluations = 0;
};

// Bisection on log(theta) for Theta = theta |I>><<I| so that the mean
// sampled process fidelity hits the target.
ScalarCalibration calibrate_depolarizing(double target_fidelity, int dim, int kraus_rank,
                                         const ChainConfig& budget, double tol,
                                         int max_evaluations = 40);

}  // namespace qpt
