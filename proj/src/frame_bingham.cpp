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

#include "qpt/frame_bingham.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qpt/parallel.hpp"
#include "qpt/sphere_sampler.hpp"

namespace qpt {

namespace {

int dim_of(const CMatrix& theta) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(theta.rows()))));
  if (theta.rows() != theta.cols() || n * n != theta.rows() || n < 1) {
    throw DimensionError("natural parameter must be N^2 x N^2");
  }
  return n;
}

void check_scale(const NaturalParameter& theta) {
  if (theta.matrix().cwiseAbs().maxCoeff() >= kMaxThetaScale) {
    throw NumericError("natural parameter scale >= 1e6 is too ill-conditioned to sample");
  }
}

StiefelPoint identity_point(int dim, int k) {
  CMatrix xi = CMatrix::Zero(static_cast<Eigen::Index>(k) * dim, dim);
  for (int r = 0; r < dim; ++r) xi(r * k, r) = 1.0;
  return StiefelPoint::unchecked(std::move(xi), dim);
}

double identity_fidelity(const CMatrix& choi, int dim) {
  double acc = 0.0;
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) acc += choi(a * dim + a, b * dim + b).real();
  }
  return acc / (dim * dim);
}

}  // namespace

NaturalParameter::NaturalParameter(const CMatrix& theta, double tol) : dim_(dim_of(theta)) {
  if ((theta - theta.adjoint()).cwiseAbs().maxCoeff() > tol * std::max(1.0, theta.norm())) {
    throw InvariantError("natural parameter is not Hermitian");
  }
  theta_ = 0.5 * (theta + theta.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(theta_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  if (lo < -tol * std::max(1.0, theta.norm())) {
    throw InvariantError("natural parameter is not positive semidefinite");
  }
  if (lo != 0.0) theta_.diagonal().array() -= lo;
}

NaturalParameter NaturalParameter::zero(int dim) {
  return NaturalParameter(CMatrix::Zero(dim * dim, dim * dim));
}

BlockCoupling::BlockCoupling(const NaturalParameter& theta, int kraus_rank)
    : dim_(theta.dim()), k_(kraus_rank), zero_(theta.is_zero()) {
  if (k_ < 1 || k_ > dim_ * dim_) throw DimensionError("kraus rank must lie in [1, N^2]");
  const CMatrix& t = theta.matrix();
  const CMatrix id_k = CMatrix::Identity(k_, k_);
  blocks_.reserve(dim_ * dim_);
  couplings_.reserve(dim_ * dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      CMatrix b = t.block(i * dim_, j * dim_, dim_, dim_).conjugate();
      couplings_.push_back(Eigen::kroneckerProduct(b, id_k).eval());
      blocks_.push_back(std::move(b));
    }
  }
}

void ChainConfig::validate() const {
  if (samples < 1) throw ConfigError("chain: samples must be >= 1");
  if (burn_in < 0) throw ConfigError("chain: burn_in must be >= 0");
  if (thinning < 1) throw ConfigError("chain: thinning must be >= 1");
  if (pair_passes < 1) throw ConfigError("chain: pair_passes must be >= 1");
  if (joint_moves < 0) throw ConfigError("chain: joint_moves must be >= 0");
  if (init == InitPolicy::Given && !initial) throw ConfigError("chain: missing initial point");
}

double sufficient_stat(const StiefelPoint& xi, const NaturalParameter& theta) {
  if (xi.dim() != theta.dim()) throw DimensionError("sufficient_stat: dimension mismatch");
  const CMatrix choi = choi_matrix_from_stiefel(xi.matrix(), xi.dim());
  const cplx value = (theta.matrix().adjoint() * choi).trace();
  if (std::abs(value.imag()) > 1e-12 * std::max(1.0, std::abs(value.real()))) {
    throw InvariantError("sufficient_stat: complex value; Hermitian invariant broken");
  }
  return value.real();
}

double sufficient_stat_blocks(const StiefelPoint& xi, const BlockCoupling& blocks) {
  if (xi.dim() != blocks.dim() || xi.kraus_rank() != blocks.kraus_rank()) {
    throw DimensionError("sufficient_stat_blocks: shape mismatch");
  }
  const CMatrix& m = xi.matrix();
  cplx acc = 0.0;
  for (int i = 0; i < blocks.dim(); ++i) {
    for (int j = 0; j < blocks.dim(); ++j) {
      acc += m.col(i).dot(blocks.coupling(i, j) * m.col(j));
    }
  }
  return acc.real();
}

double log_density_unnormalized(const StiefelPoint& xi, const NaturalParameter& theta) {
  return sufficient_stat(xi, theta);
}

StiefelPoint sample_uniform(int dim, int kraus_rank, Rng& rng) {
  if (dim < 1 || kraus_rank < 1 || kraus_rank > dim * dim) {
    throw DimensionError("sample_uniform: need 1 <= k <= N^2");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(kraus_rank) * dim;
  return StiefelPoint::unchecked(orthonormalize_columns(complex_gaussian(rows, dim, rng)), dim);
}

void gibbs_column_update_inplace(CMatrix& xi, int column, const BlockCoupling& blocks, Rng& rng,
                                 int pair_passes) {
  const int n = blocks.dim();
  const Eigen::Index rows = xi.rows();
  CMatrix others(rows, n - 1);
  for (int i = 0, o = 0; i < n; ++i) {
    if (i != column) others.col(o++) = xi.col(i);
  }
  const CMatrix basis = orthonormal_complement(others);
  const CVector z = basis.adjoint() * xi.col(column);

  CMatrix quad;
  CVector lin;
  if (blocks.is_zero()) {
    quad = CMatrix::Zero(basis.cols(), basis.cols());
    lin = CVector::Zero(basis.cols());
  } else {
    quad = basis.adjoint() * blocks.coupling(column, column) * basis;
    quad = 0.5 * (quad + quad.adjoint()).eval();
    CVector acc = CVector::Zero(rows);
    for (int i = 0; i < n; ++i) {
      if (i != column) acc.noalias() += blocks.coupling(column, i) * xi.col(i);
    }
    lin = basis.adjoint() * acc;
  }
  const CVector next = complex_sphere_gibbs(quad, lin, z / z.norm(), pair_passes, rng);
  xi.col(column) = basis * next;
}

bool joint_rotation_move(CMatrix& xi, const NaturalParameter& theta, double step, Rng& rng) {
  const int n = theta.dim();
  const Eigen::Index rows = xi.rows();
  const CMatrix g = complex_gaussian(rows, rows, rng);
  const CMatrix w = step * (g - g.adjoint()) / std::sqrt(2.0 * static_cast<double>(rows));
  const CMatrix id = CMatrix::Identity(rows, rows);
  const CMatrix proposal = (id + 0.5 * w).partialPivLu().solve((id - 0.5 * w) * xi);
  const auto stat = [&](const CMatrix& m) {
    return (theta.matrix().adjoint() * choi_matrix_from_stiefel(m, n)).trace().real();
  };
  const double log_ratio = stat(proposal) - stat(xi);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (log_ratio >= 0.0 || std::log(unif(rng)) < log_ratio) {
    xi = proposal;
    return true;
  }
  return false;
}

StiefelPoint gibbs_column_update(const StiefelPoint& xi, int column, const BlockCoupling& blocks,
                                 Rng& rng, int pair_passes) {
  if (column < 0 || column >= xi.dim()) throw DimensionError("gibbs_column_update: bad column");
  if (xi.dim() != blocks.dim() || xi.kraus_rank() != blocks.kraus_rank()) {
    throw DimensionError("gibbs_column_update: shape mismatch");
  }
  CMatrix m = xi.matrix();
  gibbs_column_update_inplace(m, column, blocks, rng, pair_passes);
  return StiefelPoint::unchecked(std::move(m), xi.dim());
}

std::vector<StiefelPoint> sample_chain(const NaturalParameter& theta, int kraus_rank,
                                       const ChainConfig& cfg) {
  cfg.validate();
  check_scale(theta);
  const int n = theta.dim();
  const BlockCoupling blocks(theta, kraus_rank);
  Rng rng = make_rng(cfg.seed, 0);

  CMatrix xi;
  switch (cfg.init) {
    case InitPolicy::Uniform:
      xi = sample_uniform(n, kraus_rank, rng).matrix();
      break;
    case InitPolicy::Identity:
      xi = identity_point(n, kraus_rank).matrix();
      break;
    case InitPolicy::Given:
      if (cfg.initial->dim() != n || cfg.initial->kraus_rank() != kraus_rank) {
        throw DimensionError("sample_chain: initial point shape mismatch");
      }
      xi = cfg.initial->matrix();
      break;
  }

  // Joint-move scale, adapted towards ~30% acceptance during burn-in only.
  double log_step = -0.5 * std::log1p(theta.matrix().cwiseAbs().maxCoeff());
  auto sweep = [&](bool adapt, int iteration) {
    for (int j = 0; j < n; ++j) gibbs_column_update_inplace(xi, j, blocks, rng, cfg.pair_passes);
    if (!blocks.is_zero()) {
      for (int m = 0; m < cfg.joint_moves; ++m) {
        const bool accepted = joint_rotation_move(xi, theta, std::exp(log_step), rng);
        if (adapt) log_step += ((accepted ? 1.0 : 0.0) - 0.3) / std::sqrt(1.0 + iteration);
      }
    }
    if (stiefel_defect(xi) > 1e-10) xi = orthonormalize_columns(xi);
  };
  for (int s = 0; s < cfg.burn_in; ++s) sweep(true, s);
  std::vector<StiefelPoint> out;
  out.reserve(cfg.samples);
  while (static_cast<int>(out.size()) < cfg.samples) {
    for (int t = 0; t < cfg.thinning; ++t) sweep(false, 0);
    out.push_back(StiefelPoint::unchecked(xi, n));
  }
  return out;
}

std::vector<std::vector<StiefelPoint>> sample_chains(const NaturalParameter& theta, int kraus_rank,
                                                     const ChainConfig& cfg, int chains) {
  if (chains < 1) throw ConfigError("sample_chains: need at least one chain");
  std::vector<std::vector<StiefelPoint>> out(chains);
  parallel_for(static_cast<std::size_t>(chains), [&](std::size_t c) {
    ChainConfig local = cfg;
    local.seed = derive_seed(cfg.seed, c);
    out[c] = sample_chain(theta, kraus_rank, local);
  });
  return out;
}

CMatrix mean_choi(std::span<const StiefelPoint> samples,
                  std::optional<std::span<const double>> weights) {
  if (samples.empty()) throw Error("mean_choi: empty sample set");
  const int n = samples.front().dim();
  if (weights && weights->size() != samples.size()) {
    throw DimensionError("mean_choi: weight count mismatch");
  }
  CMatrix acc = CMatrix::Zero(n * n, n * n);
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    if (w < 0.0) throw InvariantError("mean_choi: negative weight");
    if (w == 0.0) continue;
    acc.noalias() += w * choi_matrix_from_stiefel(samples[i].matrix(), n);
    total += w;
  }
  if (!(total > 0.0)) throw InvariantError("mean_choi: weights sum to zero");
  acc /= total;
  return 0.5 * (acc + acc.adjoint());
}

NaturalParameter depolarizing_parameter(double theta, int dim) {
  if (!(theta >= 0.0)) throw ConfigError("depolarizing_parameter: theta must be >= 0");
  const CVector v = vectorize(CMatrix::Identity(dim, dim));
  return NaturalParameter(theta * v * v.adjoint());
}

std::vector<double> sample_fidelities(std::span<const StiefelPoint> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(identity_fidelity(choi_matrix_from_stiefel(s.matrix(), s.dim()), s.dim()));
  }
  return out;
}

//----------------------------------------------------------------------------
// Calibration
//----------------------------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

ScalarCalibration calibrate_depolarizing(double target_fidelity, int dim, int kraus_rank,
                                         const ChainConfig& budget, double tol,
                                         int max_evaluations) {
  if (!(target_fidelity > 0.0 && target_fidelity < 1.0)) {
    throw ConfigError("calibrate_depolarizing: target fidelity must lie in (0, 1)");
  }
  ScalarCalibration best;
  best.residual = std::numeric_limits<double>::infinity();
  // Every candidate reuses budget.seed (common random numbers).
  auto eval = [&](double theta) {
    const auto samples = sample_chain(depolarizing_parameter(theta, dim), kraus_rank, budget);
    const double f = mean_of(sample_fidelities(samples));
    ++best.evaluations;
    const double res = std::abs(f - target_fidelity);
    if (res < best.residual) {
      best.theta = theta;
      best.achieved_fidelity = f;
      best.residual = res;
    }
    return f;
  };

  double lo = 0.0;
  double hi = 0.999 * kMaxThetaScale;
  if (eval(lo) >= target_fidelity || eval(hi) <= target_fidelity) {
    best.converged = best.residual <= tol;
    return best;
  }
  double log_lo = std::log(1e-3);
  double log_hi = std::log(hi);
  while (best.evaluations < max_evaluations && best.residual > tol) {
    const double mid = 0.5 * (log_lo + log_hi);
    (eval(std::exp(mid)) < target_fidelity ? log_lo : log_hi) = mid;
    if (log_hi - log_lo < 1e-6) break;
  }
  best.converged = best.residual <= tol;
  return best;
}

CalibrationResult calibrate(const ChoiMatrix& target_mean, int kraus_rank,
                            const ChainConfig& budget, double tol, int max_evaluations) {
  const int n = target_mean.dim();
  const Eigen::Index n2 = static_cast<Eigen::Index>(n) * n;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(target_mean.matrix());
  const CMatrix basis = es.eigenvectors();      // ascending eigenvalues
  const RVector target = es.eigenvalues();
  const Eigen::Index pinned = 0;                // smallest target eigenvalue

  RVector t = RVector::Zero(n2);
  CalibrationResult best{NaturalParameter::zero(n), t, std::numeric_limits<double>::infinity(),
                         false, 0};

  auto theta_of = [&](const RVector& ev) {
    return NaturalParameter(basis * ev.cast<cplx>().asDiagonal() * basis.adjoint());
  };
  auto eval = [&](const RVector& ev) {
    const auto samples = sample_chain(theta_of(ev), kraus_rank, budget);
    const CMatrix mean = mean_choi(samples);
    RVector got(n2);
    for (Eigen::Index i = 0; i < n2; ++i) got(i) = basis.col(i).dot(mean * basis.col(i)).real();
    ++best.evaluations;
    const double res = (got - target).cwiseAbs().maxCoeff();
    if (res < best.residual) {
      best.residual = res;
      best.eigenvalues = ev;
      best.theta = theta_of(ev);
    }
    return got;
  };

  RVector got = eval(t);
  const double cap = 0.999 * kMaxThetaScale / static_cast<double>(n);
  while (best.residual > tol && best.evaluations < max_evaluations) {
    bool moved = false;
    for (Eigen::Index i = 0; i < n2 && best.evaluations < max_evaluations; ++i) {
      if (i == pinned || std::abs(got(i) - target(i)) <= tol) continue;
      double lo = 0.0, hi = t(i);
      if (got(i) < target(i)) {
        lo = t(i);
        hi = std::max(1.0, 4.0 * t(i));
        for (;;) {
          RVector trial = t;
          trial(i) = hi;
          const RVector g = eval(trial);
          if (g(i) >= target(i) || hi >= cap || best.evaluations >= max_evaluations) break;
          lo = hi;
          hi = std::min(cap, 4.0 * hi);
        }
      }
      for (int step = 0; step < 12 && best.evaluations < max_evaluations; ++step) {
        RVector trial = t;
        trial(i) = 0.5 * (lo + hi);
        const RVector g = eval(trial);
        (g(i) < target(i) ? lo : hi) = trial(i);
        if (std::abs(g(i) - target(i)) <= tol) break;
      }
      const double updated = 0.5 * (lo + hi);
      moved = moved || updated != t(i);
      t(i) = updated;
      got = eval(t);
    }
    if (!moved) break;
  }
  best.converged = best.residual <= tol;
  return best;
}

}  // namespace qpt
