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

#include "qpt/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include <unsupported/Eigen/KroneckerProduct>

namespace qpt {

namespace {

struct NamedState {
  const char* name;
  CVector ket;
};

std::vector<NamedState> pauli_states(bool with_y) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  std::vector<NamedState> out;
  auto ket = [](cplx a, cplx b) {
    CVector v(2);
    v << a, b;
    return v;
  };
  out.push_back({"0", ket(1.0, 0.0)});
  out.push_back({"1", ket(0.0, 1.0)});
  out.push_back({"+", ket(s, s)});
  out.push_back({"-", ket(s, -s)});
  if (with_y) {
    out.push_back({"+i", ket(s, s * i)});
    out.push_back({"-i", ket(s, -s * i)});
  }
  return out;
}

ExperimentDesign product_design(const std::string& name, bool with_y) {
  const auto states = pauli_states(with_y);
  std::vector<MeasurementSetting> settings;
  for (const auto& prep : states) {
    for (const auto& eff : states) {
      settings.push_back({std::string(prep.name) + "->" + eff.name,
                          prep.ket * prep.ket.adjoint(), eff.ket * eff.ket.adjoint()});
    }
  }
  return ExperimentDesign(name, 2, std::move(settings));
}

double clamp_probability(double p, int& clamped) {
  if (p < kProbabilityClamp) {
    ++clamped;
    return kProbabilityClamp;
  }
  if (p > 1.0 - kProbabilityClamp) {
    ++clamped;
    return 1.0 - kProbabilityClamp;
  }
  return p;
}

// p = Re(D |Lambda>>) with Lambda = S^H S.
RVector probabilities_from_xi(const CMatrix& xi, const ExperimentDesign& design) {
  const CMatrix s = factor_from_stiefel(xi, design.dim());
  const CMatrix lambda = s.adjoint() * s;
  const Eigen::Map<const CVector> vec(lambda.data(), lambda.size());
  return (design.design_matrix() * vec).real();
}

void check_data(const CountData& data, const ExperimentDesign& design) {
  data.validate(design.size());
}

}  // namespace

ExperimentDesign::ExperimentDesign(std::string name, int dim,
                                   std::vector<MeasurementSetting> settings)
    : name_(std::move(name)), dim_(dim), settings_(std::move(settings)) {
  if (dim_ < 2) throw DimensionError("design dimension must be at least 2");
  if (settings_.empty()) throw ConfigError("design has no settings");
  const int n2 = dim_ * dim_;
  design_.resize(static_cast<Eigen::Index>(settings_.size()), n2 * n2);
  for (std::size_t i = 0; i < settings_.size(); ++i) {
    const auto& st = settings_[i];
    if (st.preparation.rows() != dim_ || st.preparation.cols() != dim_ ||
        st.effect.rows() != dim_ || st.effect.cols() != dim_) {
      throw DimensionError("setting " + st.label + " has wrong dimension");
    }
    CMatrix op = Eigen::kroneckerProduct(st.preparation.transpose(), st.effect).eval();
    design_.row(static_cast<Eigen::Index>(i)) = vectorize(op).adjoint();
    operators_.push_back(std::move(op));
  }
}

RVector ExperimentDesign::probabilities(const CMatrix& choi) const {
  const int n2 = dim_ * dim_;
  if (choi.rows() != n2 || choi.cols() != n2) throw DimensionError("Choi size does not match design");
  const Eigen::Map<const CVector> vec(choi.data(), choi.size());
  return (design_ * vec).real();
}

int ExperimentDesign::real_rank() const {
  // Hermitian basis: E_aa, (E_ab + E_ba), i(E_ab - E_ba) for a < b.
  const int n2 = dim_ * dim_;
  RMatrix real_map(size(), n2 * n2);
  int col = 0;
  const cplx i(0.0, 1.0);
  for (int a = 0; a < n2; ++a) {
    for (int b = a; b < n2; ++b) {
      for (int part = 0; part < (a == b ? 1 : 2); ++part) {
        CMatrix h = CMatrix::Zero(n2, n2);
        if (a == b) {
          h(a, a) = 1.0;
        } else if (part == 0) {
          h(a, b) = 1.0;
          h(b, a) = 1.0;
        } else {
          h(a, b) = i;
          h(b, a) = -i;
        }
        real_map.col(col++) = probabilities(h);
      }
    }
  }
  Eigen::JacobiSVD<RMatrix> svd(real_map);
  const RVector sv = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  return static_cast<int>((sv.array() > cut).count());
}

bool ExperimentDesign::informationally_complete() const {
  return real_rank() == dim_ * dim_ * dim_ * dim_;
}

ExperimentDesign design_pauli4() { return product_design("pauli4", false); }
ExperimentDesign design_pauli6() { return product_design("pauli6", true); }

ExperimentDesign design_by_name(const std::string& name) {
  if (name == "pauli4") return design_pauli4();
  if (name == "pauli6") return design_pauli6();
  throw ConfigError("unknown design '" + name + "' (expected pauli4 or pauli6)");
}

void CountData::validate(int settings) const {
  if (static_cast<int>(successes.size()) != settings || static_cast<int>(trials.size()) != settings) {
    throw ConfigError("count data has " + std::to_string(successes.size()) +
                      " entries, design expects " + std::to_string(settings));
  }
  for (int i = 0; i < settings; ++i) {
    const double x = successes[i];
    const double n = trials[i];
    if (!std::isfinite(x) || !std::isfinite(n) || n <= 0.0 || x < 0.0 || x > n) {
      throw ConfigError("count entry " + std::to_string(i) + " out of range");
    }
  }
}

double outcome_probability(const ChoiMatrix& choi, const DensityMatrix& rho, const CMatrix& effect) {
  if (rho.dim() != choi.dim() || effect.rows() != choi.dim()) {
    throw DimensionError("state / effect dimension does not match channel");
  }
  const CMatrix op = Eigen::kroneckerProduct(rho.matrix().transpose(), effect).eval();
  return vectorize(op).dot(vectorize(choi.matrix())).real();
}

double outcome_probability_operational(const ChoiMatrix& choi, const DensityMatrix& rho,
                                       const CMatrix& effect) {
  if (rho.dim() != choi.dim() || effect.rows() != choi.dim()) {
    throw DimensionError("state / effect dimension does not match channel");
  }
  return (effect * apply_choi(choi.matrix(), rho.matrix())).trace().real();
}

CountData simulate_counts(const ChoiMatrix& truth, const ExperimentDesign& design,
                          int n_per_setting, Rng& rng) {
  if (n_per_setting <= 0) throw ConfigError("shots per setting must be positive");
  const RVector p = design.probabilities(truth.matrix());
  CountData data;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::binomial_distribution<int> draw(n_per_setting, std::clamp(p(i), 0.0, 1.0));
    data.successes.push_back(draw(rng));
    data.trials.push_back(n_per_setting);
  }
  return data;
}

CountData expected_counts(const ChoiMatrix& truth, const ExperimentDesign& design,
                          double n_per_setting) {
  if (!(n_per_setting > 0.0)) throw ConfigError("shots per setting must be positive");
  const RVector p = design.probabilities(truth.matrix());
  CountData data;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    data.successes.push_back(n_per_setting * std::clamp(p(i), 0.0, 1.0));
    data.trials.push_back(n_per_setting);
  }
  return data;
}

LikelihoodTerms neg_log_likelihood_terms(const CMatrix& xi, const CountData& data,
                                         const ExperimentDesign& design) {
  check_data(data, design);
  const RVector p = probabilities_from_xi(xi, design);
  LikelihoodTerms out;
  for (int i = 0; i < data.size(); ++i) {
    const double q = clamp_probability(p(i), out.clamped);
    const double x = data.successes[i];
    const double f = data.trials[i] - x;
    if (x > 0.0) out.value -= x * std::log(q);
    if (f > 0.0) out.value -= f * std::log1p(-q);
  }
  return out;
}

double neg_log_likelihood(const CMatrix& xi, const CountData& data, const ExperimentDesign& design) {
  return neg_log_likelihood_terms(xi, data, design).value;
}

CMatrix nll_gradient(const CMatrix& xi, const CountData& data, const ExperimentDesign& design) {
  check_data(data, design);
  const int n = design.dim();
  const CMatrix s = factor_from_stiefel(xi, n);
  const CMatrix lambda = s.adjoint() * s;
  const Eigen::Map<const CVector> vec(lambda.data(), lambda.size());
  const RVector p = (design.design_matrix() * vec).real();
  // dF/dp_i, then dF = Re Tr((2 S M)^H dS) with M = sum_i w_i M_i.
  CMatrix m = CMatrix::Zero(n * n, n * n);
  int clamped = 0;
  for (int i = 0; i < data.size(); ++i) {
    const double q = clamp_probability(p(i), clamped);
    const double x = data.successes[i];
    const double w = -x / q + (data.trials[i] - x) / (1.0 - q);
    m += w * design.operators()[i];
  }
  return stiefel_from_factor(2.0 * s * m, n);
}

ObjectiveEvaluator tomography_objective(const CountData& data, const ExperimentDesign& design,
                                        const NaturalParameter* theta) {
  check_data(data, design);
  ObjectiveEvaluator obj;
  if (theta == nullptr) {
    obj.value = [&data, &design](const CMatrix& xi) { return neg_log_likelihood(xi, data, design); };
    obj.euclidean_gradient = [&data, &design](const CMatrix& xi) {
      return nll_gradient(xi, data, design);
    };
    return obj;
  }
  const int n = design.dim();
  if (theta->dim() != n) throw DimensionError("natural parameter does not match design dimension");
  obj.value = [&data, &design, theta, n](const CMatrix& xi) {
    const CMatrix lambda = choi_matrix_from_stiefel(xi, n);
    const double prior = (theta->matrix().adjoint() * lambda).trace().real();
    return neg_log_likelihood(xi, data, design) - prior;
  };
  obj.euclidean_gradient = [&data, &design, theta, n](const CMatrix& xi) {
    const CMatrix s = factor_from_stiefel(xi, n);
    return CMatrix(nll_gradient(xi, data, design) -
                   stiefel_from_factor(2.0 * s * theta->matrix(), n));
  };
  return obj;
}

std::vector<CMatrix> initial_points(int dim, int kraus_rank, int count, double perturbation,
                                    std::uint64_t seed) {
  if (count < 1) throw ConfigError("at least one start is required");
  std::vector<CMatrix> starts;
  // Identity channel: S = e_0 <<I|, so Lambda = |I>><<I|.
  CMatrix s0 = CMatrix::Zero(kraus_rank, dim * dim);
  s0.row(0) = vectorize(CMatrix::Identity(dim, dim)).transpose();
  const CMatrix base = stiefel_from_factor(s0, dim);
  if (perturbation > 0.0) {
    Rng rng = make_rng(seed, 0);
    const LowRankSkew w = search_direction(base, random_tangent(base, rng));
    const double scale = w.norm();
    starts.push_back(scale > 0.0 ? cayley_retract(base, w, perturbation / scale) : base);
  } else {
    starts.push_back(base);
  }
  for (int s = 1; s < count; ++s) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(s));
    starts.push_back(sample_uniform(dim, kraus_rank, rng).matrix());
  }
  return starts;
}

namespace {

EstimationResult run_estimation(const CountData& data, const ExperimentDesign& design,
                                const NaturalParameter* theta, const EstimationOptions& opts,
                                EstimationMode mode) {
  opts.optimizer.validate();
  check_data(data, design);
  const int n = design.dim();
  const int k = opts.kraus_rank > 0 ? opts.kraus_rank : n * n;
  if (k > n * n) throw ConfigError("Kraus rank exceeds N^2");
  const ObjectiveEvaluator obj = tomography_objective(data, design, theta);
  const auto starts =
      initial_points(n, k, opts.optimizer.restarts, opts.init_perturbation, opts.optimizer.rng_seed);

  std::optional<OptReport> best;
  int best_index = 0;
  std::vector<double> values;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    OptimizerOptions local = opts.optimizer;
    local.restarts = 1;
    local.rng_seed = derive_seed(opts.optimizer.rng_seed, 1000 + s);
    OptReport rep = opts.stochastic ? stochastic_minimize(obj.value, starts[s], local)
                                    : minimize(obj, starts[s], local);
    values.push_back(rep.final_value);
    if (!best || rep.final_value < best->final_value) {
      best = std::move(rep);
      best_index = static_cast<int>(s);
    }
  }
  const int clamped = neg_log_likelihood_terms(best->point, data, design).clamped;
  StiefelPoint point = StiefelPoint::unchecked(best->point, n);
  ChoiMatrix estimate = ChoiMatrix::unchecked(choi_matrix_from_stiefel(best->point, n));
  const double value = best->final_value;
  return EstimationResult{std::move(estimate),
                          std::move(point),
                          value,
                          std::move(*best),
                          mode,
                          !design.informationally_complete(),
                          clamped,
                          best_index,
                          std::move(values)};
}

}  // namespace

EstimationResult mle(const CountData& data, const ExperimentDesign& design,
                     const EstimationOptions& opts) {
  return run_estimation(data, design, nullptr, opts, EstimationMode::Mle);
}

EstimationResult map_estimate(const CountData& data, const ExperimentDesign& design,
                              const NaturalParameter& theta, const EstimationOptions& opts) {
  // A zero parameter contributes nothing; route through the likelihood-only
  // objective so the result is bit-identical to mle().
  if (theta.is_zero()) {
    if (theta.dim() != design.dim()) throw DimensionError("natural parameter does not match design");
    return run_estimation(data, design, nullptr, opts, EstimationMode::Map);
  }
  return run_estimation(data, design, &theta, opts, EstimationMode::Map);
}

}  // namespace qpt
