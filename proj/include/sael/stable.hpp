// Copyright 2026 The sael Authors
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.

#ifndef SAEL_STABLE_HPP
#define SAEL_STABLE_HPP

#include <Eigen/Core>

#include "sael/rng.hpp"

namespace sael {

/**
 * Law of a symmetric alpha-stable innovation.
 *
 * The characteristic function is E exp{i xi Z} = exp{-scale |xi|^alpha}, so
 * `scale` is the alpha-th power of the usual scale c of the S(alpha, 0, c, 0)
 * parameterization: c = scale^(1/alpha). At alpha = 2 the law is N(0, 2 scale).
 */
struct StableParams {
    double alpha = 1.5;
    double scale = 1.0;

    /// Requires 0 < alpha <= 2 and scale > 0; throws ParameterError.
    void validate() const;

    /// Additionally requires alpha in [1, 2), the range the inference results cover.
    void validate_inference() const;

    /// c = scale^(1/alpha).
    double standard_scale() const;
};

/// One unit draw (cf exp{-|xi|^alpha}) by Chambers-Mallows-Stuck. No validation.
double sample_sas_unit(double alpha, Rng& rng);

/// n i.i.d. draws from the SaS law described by params.
Eigen::VectorXd sample_sas(const StableParams& params, Eigen::Index n, Rng& rng);

/**
 * Totally right-skewed stable draw with index alpha_half in (0, 1).
 *
 * Unit scale in the S(a, 1, 1, 0) parameterization, i.e. Laplace transform
 * E exp{-u S} = exp{-u^a / cos(pi a / 2)}. At a = 1/2 this is the Levy law
 * with P(S <= x) = 2(1 - Phi(1/sqrt(x))). Always strictly positive.
 */
double sample_positive_stable(double alpha_half, Rng& rng);

/**
 * Tail constant C_a with P(|X| > x) ~ C_a sigma x^{-a} for a stable law with
 * cf exp{-sigma |xi|^a}. C_a = (1 - a) / (Gamma(2 - a) cos(pi a / 2)), 2/pi at a = 1.
 */
double stable_tail_constant(double a);

} // namespace sael

#endif // SAEL_STABLE_HPP
