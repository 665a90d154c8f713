// Copyright 2026 The acnfa Authors
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

/// \file special_functions.hpp
///
/// Gamma-family kernels used by the Gaussian NFA. Everything here is built on
/// <cmath> elementary functions only (exp, log, log1p, sqrt) so the tail
/// computation can be audited end to end.

namespace acnfa {

/// Natural log of the Gamma function for a > 0.
///
/// Uses a Taylor expansion of ln Gamma(2 + z) on [1.5, 2.5), the shift
/// recurrence below that range and the Stirling series from 10 upward.
double ln_gamma(double a);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
///
/// Power series for x < a + 1, modified Lentz continued fraction otherwise.
/// Both loops stop at a relative increment below 1e-15 or after
/// 500 + 20 * sqrt(a) iterations.
double reg_upper_gamma_q(double a, double x);

/// ln Q(a, x). Stays finite where Q itself underflows (Q < 1e-308), which is
/// what the NFA maps consume.
double log_reg_upper_gamma_q(double a, double x);

/// Complementary error function for finite x. Independent of the incomplete
/// gamma code: positive erf series below 1.5, Laplace continued fraction above.
double erfc(double x);

/// Chi-square survival function, Q(dof / 2, t / 2).
double chi2_sf(double dof, double t);

double log_chi2_sf(double dof, double t);

}  // namespace acnfa
