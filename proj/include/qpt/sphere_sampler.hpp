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

// Samplers for Bingham-von Mises-Fisher densities on spheres,
//   p(y) ~ exp(y^T A y + 2 c^T y),  |y| = 1,
// used as the column conditional of the frame-Bingham Gibbs sampler.

#include "qpt/types.hpp"

namespace qpt {

// Draws phi in [0, 2 pi) with density ~ exp(a2 cos 2phi + a1c cos phi + a1s sin phi).
// The density is located through the critical points of the exponent and
// sampled by inverse CDF on a log-linear interpolant of each monotone piece
// (truncated 40 nats below the maximum).
double sample_circle(double a2, double a1c, double a1s, Rng& rng);

// One or more Gibbs passes over random coordinate pairs in the eigenbasis
// of `a`, starting from `y` (unit norm). Leaves the density invariant.
RVector real_sphere_gibbs(const RMatrix& a, const RVector& c, RVector y, int passes, Rng& rng);

// Complex version: density ~ exp(z^H A z + 2 Re(b^H z)) on the unit sphere
// of C^d; handled by stacking real and imaginary parts.
CVector complex_sphere_gibbs(const CMatrix& a, const CVector& b, const CVector& z, int passes,
                             Rng& rng);

// Exact but slow reference sampler: uniform proposals accepted with
// probability exp(f(y) - bound), bound = lambda_max(A) + 2 |c|.
RVector real_sphere_rejection(const RMatrix& a, const RVector& c, Rng& rng,
                              long max_proposals = 50'000'000);

}  // namespace qpt
