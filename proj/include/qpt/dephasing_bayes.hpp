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

// Bayesian inference for the single-parameter dephasing channel
//
//   Lambda_theta = |I>><<I| with the (0,3) corner replaced by e^{2 i theta},
//
// on a uniform grid over the half-period (-pi/2, pi/2]. Priors are given on
// theta; the von Mises prior lives on the doubled angle phi = 2 theta.

#include <functional>
#include <vector>

#include "qpt/channel_reps.hpp"

namespace qpt {

ChoiMatrix dephasing_choi(double theta);

// e^{-x} I_0(x) and e^{-x} I_1(x) for x >= 0. Power series up to
// kBesselSeriesLimit, asymptotic expansion above.
inline constexpr double kBesselSeriesLimit = 15.0;
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);
double bessel_i0_scaled_series(double x);
double bessel_i1_scaled_series(double x);
double bessel_i0_scaled_asymptotic(double x);
double bessel_i1_scaled_asymptotic(double x);
// I_1(x) / I_0(x), increasing from 0 to 1.
double bessel_ratio(double x);

// Solves I_1(kappa) / I_0(kappa) = 2 F - 1 for F in (1/2, 1).
double kappa_from_fidelity(double fidelity);

// Log-density on theta, up to an additive constant.
using LogAngleDensity = std::function<double(double)>;

struct VonMisesPrior {
  double mean_direction = 0.0;  // mu, on phi = 2 theta
  double concentration = 0.0;   // kappa

  // Normalised log-density of phi on (-pi, pi].
  double log_density_phi(double phi) const;
  // Induced log-density of theta on (-pi/2, pi/2] (Jacobian 2).
  double log_density_theta(double theta) const;
  LogAngleDensity as_theta_density() const;
};

// 2 n gamma (1 - cos 2 theta) ~ chi^2_n, pushed back to theta.
struct Chi2DerivedPrior {
  double concentration = 0.0;  // kappa, documentation only
  int replications = 1;        // n_rep
  double gamma = 1.0;

  double log_density_theta(double theta) const;
  LogAngleDensity as_theta_density() const;
};

// gamma defaults to kappa.
Chi2DerivedPrior chi2_prior_density(double kappa, int n_rep, double gamma = 0.0);

struct PosteriorSummary {
  double mode = 0.0;
  double circular_mean_2theta = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double circular_variance = 0.0;  // 1 - |E e^{2 i theta}|
  // Same for 2|theta|: the spread of one branch, since data fix theta only
  // up to sign.
  double folded_circular_variance = 0.0;
};

struct AngleGrid {
  std::vector<double> theta;
  // Each normalised to unit trapezoid integral over the grid.
  std::vector<double> prior;
  std::vector<double> likelihood;
  std::vector<double> posterior;
  double spacing = 0.0;
  PosteriorSummary summary;
};

inline constexpr int kDefaultGridSize = 4096;

// theta_g = -pi/2 + (g + 1) pi / G, g = 0..G-1.
std::vector<double> angle_grid(int size);

// Binomial likelihood with p(theta) = cos^2 theta.
AngleGrid grid_posterior(const LogAngleDensity& log_prior, int successes, int trials,
                         int grid_size = kDefaultGridSize);

// Summaries of a density on the grid.
PosteriorSummary summarize_density(const std::vector<double>& theta,
                                   const std::vector<double>& density, double spacing);

// Normalise exp(log_values) on the grid; throws NumericError when nothing
// survives the max-shift.
std::vector<double> normalize_log_density(const std::vector<double>& log_values, double spacing);

// Mean and standard deviation of the process fidelity 1/2 + 1/2 cos 2 theta.
struct FidelityMoments {
  double mean = 0.0;
  double stddev = 0.0;
};
FidelityMoments fidelity_moments(const std::vector<double>& theta,
                                 const std::vector<double>& density, double spacing);

}  // namespace qpt
