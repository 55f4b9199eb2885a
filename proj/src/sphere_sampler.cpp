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

#include "qpt/sphere_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

namespace qpt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTruncation = 40.0;
constexpr int kCellsPerWindow = 128;

struct Trig2 {
  double a2, a1c, a1s;
  double value(double phi) const {
    return a2 * std::cos(2.0 * phi) + a1c * std::cos(phi) + a1s * std::sin(phi);
  }
  double slope(double phi) const {
    return -2.0 * a2 * std::sin(2.0 * phi) - a1c * std::sin(phi) + a1s * std::cos(phi);
  }
  double curvature(double phi) const {
    return -4.0 * a2 * std::cos(2.0 * phi) - a1c * std::cos(phi) - a1s * std::sin(phi);
  }
};

double wrap(double phi) {
  phi = std::fmod(phi, kTwoPi);
  return phi < 0.0 ? phi + kTwoPi : phi;
}

// Roots of the exponent's derivative. With t = exp(i phi) the derivative
// times 2i t^2 is the quartic
//   -2 a2 t^4 + (-a1c + i a1s) t^3 + (a1c + i a1s) t + 2 a2.
std::vector<double> critical_points(const Trig2& h) {
  std::vector<cplx> coeffs = {cplx(2.0 * h.a2), cplx(h.a1c, h.a1s), cplx(0.0),
                              cplx(-h.a1c, h.a1s), cplx(-2.0 * h.a2)};  // ascending
  const double scale = std::max({std::abs(h.a2), std::abs(h.a1c), std::abs(h.a1s)});
  while (coeffs.size() > 1 && std::abs(coeffs.back()) <= 1e-12 * scale) coeffs.pop_back();
  std::vector<double> out;
  const auto degree = static_cast<Eigen::Index>(coeffs.size()) - 1;
  if (degree >= 1) {
    CMatrix companion = CMatrix::Zero(degree, degree);
    for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < degree; ++i) companion(i, degree - 1) = -coeffs[i] / coeffs[degree];
    Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
    for (Eigen::Index i = 0; i < degree; ++i) {
      const cplx t = es.eigenvalues()(i);
      if (std::abs(std::abs(t) - 1.0) < 1e-3) out.push_back(wrap(std::arg(t)));
    }
  }
  // Newton polish on the real angle.
  for (double& phi : out) {
    for (int it = 0; it < 4; ++it) {
      const double c = h.curvature(phi);
      if (c == 0.0) break;
      const double step = h.slope(phi) / c;
      if (std::abs(step) > 1e-2) break;
      phi = wrap(phi - step);
    }
  }
  if (out.size() < 2) {
    // Degenerate polynomial; locate sign changes on a fine grid instead.
    out.clear();
    constexpr int kGrid = 2048;
    double prev = h.slope(0.0);
    for (int i = 1; i <= kGrid; ++i) {
      const double phi = kTwoPi * i / kGrid;
      const double cur = h.slope(phi);
      if ((prev > 0.0) != (cur > 0.0)) out.push_back(wrap(phi - 0.5 * kTwoPi / kGrid));
      prev = cur;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-12; }),
            out.end());
  return out;
}

struct Cell {
  double start, width, log_left, log_right, mass;
};

double cell_mass(double width, double l0, double l1) {
  const double d = l1 - l0;
  if (std::abs(d) < 1e-10) return width * std::exp(0.5 * (l0 + l1));
  return width * std::exp(l0) * std::expm1(d) / d;
}

// Position inside a cell whose log density is linear from l0 to l1.
double cell_inverse(const Cell& c, double u) {
  const double d = c.log_right - c.log_left;
  if (std::abs(d) < 1e-10) return c.start + u * c.width;
  const double frac = std::log1p(u * std::expm1(d)) / d;
  return c.start + std::clamp(frac, 0.0, 1.0) * c.width;
}

}  // namespace

double sample_circle(double a2, double a1c, double a1s, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Trig2 h{a2, a1c, a1s};
  const double amplitude = 4.0 * std::abs(a2) + std::abs(a1c) + std::abs(a1s);
  if (amplitude < 1e-12) return kTwoPi * unif(rng);

  std::vector<double> crit = critical_points(h);
  double top = -std::numeric_limits<double>::infinity();
  for (double phi : crit) top = std::max(top, h.value(phi));
  const double floor = top - kTruncation;

  std::vector<Cell> cells;
  cells.reserve(4 * kCellsPerWindow);
  const auto n = crit.size();
  for (std::size_t s = 0; s < n; ++s) {
    const double a = crit[s];
    const double b = s + 1 < n ? crit[s + 1] : crit[0] + kTwoPi;
    const double ha = h.value(a);
    const double hb = h.value(b);
    if (std::max(ha, hb) < floor) continue;
    double lo = a, hi = b;
    if (std::min(ha, hb) < floor) {
      // h is monotone on [a, b]; bisect for the truncation level.
      const bool rising = hb > ha;
      double x0 = a, x1 = b;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (x0 + x1);
        ((h.value(mid) < floor) == rising ? x0 : x1) = mid;
      }
      (rising ? lo : hi) = 0.5 * (x0 + x1);
    }
    const double width = (hi - lo) / kCellsPerWindow;
    if (!(width > 0.0)) continue;
    double left = h.value(lo) - top;
    for (int i = 0; i < kCellsPerWindow; ++i) {
      const double start = lo + i * width;
      const double right = h.value(start + width) - top;
      cells.push_back({start, width, left, right, cell_mass(width, left, right)});
      left = right;
    }
  }
  if (cells.empty()) return kTwoPi * unif(rng);

  double total = 0.0;
  for (const auto& c : cells) total += c.mass;
  double target = unif(rng) * total;
  std::size_t pick = 0;
  for (; pick + 1 < cells.size(); ++pick) {
    if (target < cells[pick].mass) break;
    target -= cells[pick].mass;
  }
  return wrap(cell_inverse(cells[pick], unif(rng)));
}

RVector real_sphere_gibbs(const RMatrix& a, const RVector& c, RVector y, int passes, Rng& rng) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m || c.size() != m || y.size() != m) {
    throw DimensionError("real_sphere_gibbs: shape mismatch");
  }
  if (m < 2) return y;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (a + a.transpose()));
  const RVector& lambda = es.eigenvalues();
  const RMatrix& basis = es.eigenvectors();
  const RVector lin = basis.transpose() * c;
  RVector u = basis.transpose() * y;

  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  for (int pass = 0; pass < passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index i = 0; i + 1 < m; i += 2) {
      const Eigen::Index p = order[i];
      const Eigen::Index q = order[i + 1];
      const double r2 = u(p) * u(p) + u(q) * u(q);
      if (r2 <= 0.0) continue;
      const double r = std::sqrt(r2);
      const double phi = sample_circle(0.5 * r2 * (lambda(p) - lambda(q)), 2.0 * r * lin(p),
                                       2.0 * r * lin(q), rng);
      u(p) = r * std::cos(phi);
      u(q) = r * std::sin(phi);
    }
    // Odd dimension: pair the leftover coordinate with a random partner.
    if (m % 2 == 1) {
      const Eigen::Index p = order[m - 1];
      const Eigen::Index q = order[0];
      const double r2 = u(p) * u(p) + u(q) * u(q);
      if (r2 > 0.0) {
        const double r = std::sqrt(r2);
        const double phi = sample_circle(0.5 * r2 * (lambda(p) - lambda(q)), 2.0 * r * lin(p),
                                         2.0 * r * lin(q), rng);
        u(p) = r * std::cos(phi);
        u(q) = r * std::sin(phi);
      }
    }
  }
  RVector out = basis * u;
  return out / out.norm();
}

CVector complex_sphere_gibbs(const CMatrix& a, const CVector& b, const CVector& z, int passes,
                             Rng& rng) {
  const Eigen::Index d = a.rows();
  RMatrix ar(2 * d, 2 * d);
  ar << a.real(), -a.imag(), a.imag(), a.real();
  RVector br(2 * d), y(2 * d);
  br << b.real(), b.imag();
  y << z.real(), z.imag();
  const RVector out = real_sphere_gibbs(ar, br, std::move(y), passes, rng);
  CVector res(d);
  res.real() = out.head(d);
  res.imag() = out.tail(d);
  return res;
}

RVector real_sphere_rejection(const RMatrix& a, const RVector& c, Rng& rng, long max_proposals) {
  const Eigen::Index m = a.rows();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const double bound = es.eigenvalues()(m - 1) + 2.0 * c.norm();
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long it = 0; it < max_proposals; ++it) {
    RVector y(m);
    for (Eigen::Index i = 0; i < m; ++i) y(i) = normal(rng);
    y.normalize();
    const double f = y.dot(a * y) + 2.0 * c.dot(y);
    if (std::log(unif(rng)) <= f - bound) return y;
  }
  throw NumericError("real_sphere_rejection: proposal budget exhausted");
}

}  // namespace qpt
