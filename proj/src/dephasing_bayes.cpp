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

#include "qpt/dephasing_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qpt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// sum_k (x/2)^{2k+nu} / (k! (k+nu)!) times e^{-x}, nu in {0, 1}.
double bessel_series_scaled(int nu, double x) {
  const double q = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * (k + nu));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum * std::exp(-x);
}

// (2 pi x)^{-1/2} sum_k (-1)^k a_k(nu) / x^k, stopped at the smallest term.
double bessel_asymptotic_scaled(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * kPi * x);
}

void check_bessel_argument(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("Bessel argument must be finite and >= 0");
}

}  // namespace

ChoiMatrix dephasing_choi(double theta) {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = 1.0;
  m(3, 3) = 1.0;
  m(0, 3) = std::polar(1.0, 2.0 * theta);
  m(3, 0) = std::polar(1.0, -2.0 * theta);
  return ChoiMatrix::unchecked(std::move(m));
}

double bessel_i0_scaled_series(double x) {
  check_bessel_argument(x);
  return bessel_series_scaled(0, x);
}
double bessel_i1_scaled_series(double x) {
  check_bessel_argument(x);
  return bessel_series_scaled(1, x);
}
double bessel_i0_scaled_asymptotic(double x) {
  check_bessel_argument(x);
  if (x == 0.0) throw ConfigError("asymptotic Bessel expansion needs x > 0");
  return bessel_asymptotic_scaled(0, x);
}
double bessel_i1_scaled_asymptotic(double x) {
  check_bessel_argument(x);
  if (x == 0.0) throw ConfigError("asymptotic Bessel expansion needs x > 0");
  return bessel_asymptotic_scaled(1, x);
}

double bessel_i0_scaled(double x) {
  return x <= kBesselSeriesLimit ? bessel_i0_scaled_series(x) : bessel_i0_scaled_asymptotic(x);
}
double bessel_i1_scaled(double x) {
  return x <= kBesselSeriesLimit ? bessel_i1_scaled_series(x) : bessel_i1_scaled_asymptotic(x);
}

double bessel_ratio(double x) { return bessel_i1_scaled(x) / bessel_i0_scaled(x); }

double kappa_from_fidelity(double fidelity) {
  if (!(fidelity > 0.5 && fidelity < 1.0)) {
    throw ConfigError("prior fidelity must lie in (1/2, 1), got " + std::to_string(fidelity));
  }
  const double target = 2.0 * fidelity - 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (bessel_ratio(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) throw NumericError("concentration bracket overflow");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bessel_ratio(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double VonMisesPrior::log_density_phi(double phi) const {
  const double k = concentration;
  return k * std::cos(phi - mean_direction) - std::log(2.0 * kPi) - k -
         std::log(bessel_i0_scaled(k));
}

double VonMisesPrior::log_density_theta(double theta) const {
  return std::log(2.0) + log_density_phi(2.0 * theta);
}

LogAngleDensity VonMisesPrior::as_theta_density() const {
  if (!(concentration >= 0.0)) throw ConfigError("von Mises concentration must be >= 0");
  const VonMisesPrior copy = *this;
  return [copy](double theta) { return copy.log_density_theta(theta); };
}

double Chi2DerivedPrior::log_density_theta(double theta) const {
  const double n = replications;
  const double scale = 4.0 * n * gamma;
  const double s = std::sin(theta);
  // u = 2 n gamma (1 - cos 2 theta) = 4 n gamma sin^2 theta.
  const double u = scale * s * s;
  if (u == 0.0) {
    // n = 1 keeps a finite limit: 2 sqrt(n gamma) / sqrt(2 pi).
    if (replications == 1) return std::log(2.0 * std::sqrt(n * gamma) / std::sqrt(2.0 * kPi));
    return kNegInf;
  }
  const double jac = scale * std::abs(std::sin(2.0 * theta));
  if (jac == 0.0) return kNegInf;
  const double log_chi2 = (0.5 * n - 1.0) * std::log(u) - 0.5 * u - 0.5 * n * std::log(2.0) -
                          std::lgamma(0.5 * n);
  // Half the mass on each of the branches +theta and -theta.
  return std::log(0.5) + log_chi2 + std::log(jac);
}

LogAngleDensity Chi2DerivedPrior::as_theta_density() const {
  const Chi2DerivedPrior copy = *this;
  return [copy](double theta) { return copy.log_density_theta(theta); };
}

Chi2DerivedPrior chi2_prior_density(double kappa, int n_rep, double gamma) {
  if (!(kappa > 0.0)) throw ConfigError("chi-squared prior needs kappa > 0");
  if (n_rep < 1) throw ConfigError("chi-squared prior needs n_rep >= 1");
  if (gamma == 0.0) gamma = kappa;
  if (!(gamma > 0.0)) throw ConfigError("chi-squared prior needs gamma > 0");
  return Chi2DerivedPrior{kappa, n_rep, gamma};
}

std::vector<double> angle_grid(int size) {
  if (size < 512) throw ConfigError("grid size must be at least 512");
  std::vector<double> theta(size);
  for (int g = 0; g < size; ++g) theta[g] = -0.5 * kPi + (g + 1) * kPi / size;
  return theta;
}

std::vector<double> normalize_log_density(const std::vector<double>& log_values, double spacing) {
  double top = kNegInf;
  for (double v : log_values) {
    if (std::isnan(v)) throw NumericError("NaN in log density");
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) throw NumericError("density vanishes on the whole grid");
  std::vector<double> out(log_values.size());
  double total = 0.0;
  for (std::size_t g = 0; g < out.size(); ++g) {
    out[g] = std::exp(log_values[g] - top);
    total += out[g];
  }
  // Periodic trapezoid rule: every node has weight spacing.
  total *= spacing;
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericError("density is not normalisable");
  for (double& v : out) v /= total;
  return out;
}

PosteriorSummary summarize_density(const std::vector<double>& theta,
                                   const std::vector<double>& density, double spacing) {
  if (theta.size() != density.size() || theta.empty()) throw DimensionError("grid size mismatch");
  PosteriorSummary s;
  // The likelihood only sees cos^2 theta, so posteriors come in mirror
  // pairs; near-ties go to the non-negative branch.
  std::size_t best = 0;
  for (std::size_t g = 1; g < density.size(); ++g) {
    if (density[g] >= density[best] * (1.0 - 1e-12)) {
      if (density[g] > density[best] || theta[g] >= 0.0) best = g;
    }
  }
  s.mode = theta[best];
  double c = 0.0;
  double sn = 0.0;
  double folded_sn = 0.0;
  for (std::size_t g = 0; g < theta.size(); ++g) {
    c += density[g] * std::cos(2.0 * theta[g]);
    sn += density[g] * std::sin(2.0 * theta[g]);
    folded_sn += density[g] * std::abs(std::sin(2.0 * theta[g]));
  }
  c *= spacing;
  sn *= spacing;
  folded_sn *= spacing;
  s.circular_mean_2theta = std::atan2(sn, c);
  s.circular_variance = 1.0 - std::hypot(c, sn);
  s.folded_circular_variance = 1.0 - std::hypot(c, folded_sn);

  auto quantile = [&](double q) {
    double cum = 0.0;
    for (std::size_t g = 0; g < theta.size(); ++g) {
      const double next = cum + density[g] * spacing;
      if (next >= q) {
        const double frac = density[g] > 0.0 ? (q - cum) / (density[g] * spacing) : 0.0;
        return theta[g] - spacing + frac * spacing;
      }
      cum = next;
    }
    return theta.back();
  };
  s.ci_low = quantile(0.025);
  s.ci_high = quantile(0.975);
  return s;
}

AngleGrid grid_posterior(const LogAngleDensity& log_prior, int successes, int trials,
                         int grid_size) {
  if (trials < 0 || successes < 0 || successes > trials) {
    throw ConfigError("need 0 <= x <= n for the binomial likelihood");
  }
  if (!log_prior) throw ConfigError("prior density is empty");
  AngleGrid grid;
  grid.theta = angle_grid(grid_size);
  grid.spacing = kPi / grid_size;
  const double x = successes;
  const double f = trials - successes;
  std::vector<double> lp(grid_size);
  std::vector<double> ll(grid_size);
  std::vector<double> lpost(grid_size);
  for (int g = 0; g < grid_size; ++g) {
    const double t = grid.theta[g];
    lp[g] = log_prior(t);
    // p = cos^2 theta, 1 - p = sin^2 theta.
    double v = 0.0;
    if (x > 0.0) v += 2.0 * x * std::log(std::abs(std::cos(t)));
    if (f > 0.0) v += 2.0 * f * std::log(std::abs(std::sin(t)));
    ll[g] = v;
    lpost[g] = lp[g] + ll[g];
  }
  grid.prior = normalize_log_density(lp, grid.spacing);
  grid.likelihood = normalize_log_density(ll, grid.spacing);
  grid.posterior = normalize_log_density(lpost, grid.spacing);
  grid.summary = summarize_density(grid.theta, grid.posterior, grid.spacing);
  return grid;
}

FidelityMoments fidelity_moments(const std::vector<double>& theta,
                                 const std::vector<double>& density, double spacing) {
  if (theta.size() != density.size()) throw DimensionError("grid size mismatch");
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t g = 0; g < theta.size(); ++g) {
    const double fid = 0.5 + 0.5 * std::cos(2.0 * theta[g]);
    m1 += density[g] * fid;
    m2 += density[g] * fid * fid;
  }
  m1 *= spacing;
  m2 *= spacing;
  return {m1, std::sqrt(std::max(0.0, m2 - m1 * m1))};
}

}  // namespace qpt
