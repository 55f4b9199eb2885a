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

// Binomial process-tomography model and MLE / MAP estimation on the
// Stiefel manifold.
//
// Setting i prepares rho_i and measures the projector E_i once per shot;
// the success probability is p_i = A_i^H |Lambda>> with
// A_i = vec(rho_i^T (x) E_i), i.e. p_i = Tr((rho_i^T (x) E_i) Lambda).

#include <optional>
#include <string>
#include <vector>

#include "qpt/channel_reps.hpp"
#include "qpt/frame_bingham.hpp"
#include "qpt/stiefel_opt.hpp"

namespace qpt {

struct MeasurementSetting {
  std::string label;  // "prep->effect"
  CMatrix preparation;
  CMatrix effect;
};

class ExperimentDesign {
 public:
  ExperimentDesign(std::string name, int dim, std::vector<MeasurementSetting> settings);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(settings_.size()); }
  const std::vector<MeasurementSetting>& settings() const { return settings_; }
  // rho_i^T (x) E_i, Hermitian.
  const std::vector<CMatrix>& operators() const { return operators_; }
  // Row i is A_i^H (m x N^4).
  const CMatrix& design_matrix() const { return design_; }

  RVector probabilities(const CMatrix& choi) const;

  // Rank of Lambda -> p over the real space of Hermitian N^2 x N^2 matrices.
  int real_rank() const;
  bool informationally_complete() const;

 private:
  std::string name_;
  int dim_;
  std::vector<MeasurementSetting> settings_;
  std::vector<CMatrix> operators_;
  CMatrix design_;
};

// Preparations and effects from {|0>, |1>, |+>, |->}: 16 settings.
ExperimentDesign design_pauli4();
// Adds |+i>, |-i>: 36 settings, informationally complete.
ExperimentDesign design_pauli6();
ExperimentDesign design_by_name(const std::string& name);

struct CountData {
  std::vector<double> successes;  // x_i
  std::vector<double> trials;     // n_i

  int size() const { return static_cast<int>(successes.size()); }
  void validate(int settings) const;
};

// A_i^H |Lambda>>.
double outcome_probability(const ChoiMatrix& choi, const DensityMatrix& rho, const CMatrix& effect);
// Tr(E Phi(rho)).
double outcome_probability_operational(const ChoiMatrix& choi, const DensityMatrix& rho,
                                       const CMatrix& effect);

// x_i ~ Binomial(n, p_i).
CountData simulate_counts(const ChoiMatrix& truth, const ExperimentDesign& design,
                          int n_per_setting, Rng& rng);
// x_i = n p_i exactly (noise-free data, non-integer counts).
CountData expected_counts(const ChoiMatrix& truth, const ExperimentDesign& design,
                          double n_per_setting);

inline constexpr double kProbabilityClamp = 1e-12;

struct LikelihoodTerms {
  double value = 0.0;
  int clamped = 0;
};

// -sum_i [x_i log p_i + (n_i - x_i) log(1 - p_i)], p_i clamped to
// [eps, 1 - eps]; binomial coefficients dropped.
LikelihoodTerms neg_log_likelihood_terms(const CMatrix& xi, const CountData& data,
                                         const ExperimentDesign& design);
double neg_log_likelihood(const CMatrix& xi, const CountData& data, const ExperimentDesign& design);
CMatrix nll_gradient(const CMatrix& xi, const CountData& data, const ExperimentDesign& design);

// Objective for the optimiser: NLL minus Tr(Theta^H Lambda) when theta set.
ObjectiveEvaluator tomography_objective(const CountData& data, const ExperimentDesign& design,
                                        const NaturalParameter* theta);

enum class EstimationMode { Mle, Map };

struct EstimationOptions {
  int kraus_rank = 0;              // 0 means N^2
  OptimizerOptions optimizer{};    // optimizer.restarts starts in total
  double init_perturbation = 1e-2;
  bool stochastic = false;         // value-only line search

  EstimationOptions() { optimizer.restarts = 5; }
};

struct EstimationResult {
  ChoiMatrix estimate;
  StiefelPoint point;
  double objective = 0.0;
  OptReport report;
  EstimationMode mode = EstimationMode::Mle;
  bool incomplete_design = false;
  int clamp_events = 0;
  int best_start = 0;
  std::vector<double> start_values;
};

EstimationResult mle(const CountData& data, const ExperimentDesign& design,
                     const EstimationOptions& opts = {});

// Maximises log-likelihood + Tr(Theta^H Lambda). With Theta = 0 this runs
// the identical computation as mle().
EstimationResult map_estimate(const CountData& data, const ExperimentDesign& design,
                              const NaturalParameter& theta, const EstimationOptions& opts = {});

// Identity channel point perturbed along a random tangent, then uniform
// starts; start s draws from derive_seed(seed, s).
std::vector<CMatrix> initial_points(int dim, int kraus_rank, int count, double perturbation,
                                    std::uint64_t seed);

}  // namespace qpt
