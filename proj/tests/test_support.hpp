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

// Shared oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "qpt/channel_reps.hpp"
#include "qpt/frame_bingham.hpp"

namespace qpt::testing {

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline ChoiMatrix random_cptp(int dim, int k, Rng& rng) {
  return stiefel_to_choi(sample_uniform(dim, k, rng));
}

inline CMatrix random_hermitian_psd(int n, Rng& rng) {
  const CMatrix g = complex_gaussian(n, n, rng);
  return g * g.adjoint();
}

// Upper tail probability of a chi-squared statistic.
inline double chi2_pvalue(double stat, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Two-sample chi-squared homogeneity test on shared bins; bins with fewer
// than 5 expected counts are merged into their right neighbour.
inline double two_sample_chi2_pvalue(const std::vector<double>& a, const std::vector<double>& b,
                                     int bins) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<double> edges;
  for (int i = 1; i < bins; ++i) edges.push_back(all[all.size() * i / bins]);
  auto count = [&](const std::vector<double>& v) {
    std::vector<double> c(bins, 0.0);
    for (double x : v) {
      const auto it = std::upper_bound(edges.begin(), edges.end(), x);
      c[static_cast<std::size_t>(it - edges.begin())] += 1.0;
    }
    return c;
  };
  const auto ca = count(a);
  const auto cb = count(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double stat = 0.0;
  int used = 0;
  double pa = 0.0, pb = 0.0;
  for (int i = 0; i < bins; ++i) {
    pa += ca[i];
    pb += cb[i];
    const double tot = pa + pb;
    if (tot * std::min(na, nb) / (na + nb) < 5.0 && i + 1 < bins) continue;
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    stat += (pa - ea) * (pa - ea) / ea + (pb - eb) * (pb - eb) / eb;
    ++used;
    pa = pb = 0.0;
  }
  return chi2_pvalue(stat, std::max(1, used - 1));
}

}  // namespace qpt::testing
