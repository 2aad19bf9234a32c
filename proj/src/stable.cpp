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

#include "sael/stable.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sael/errors.hpp"

namespace sael {

void StableParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw ParameterError("alpha must lie in (0, 2], got " + std::to_string(alpha));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ParameterError("scale must be positive and finite, got " + std::to_string(scale));
}

void StableParams::validate_inference() const {
    validate();
    if (!(alpha >= 1.0 && alpha < 2.0))
        throw ParameterError("inference requires alpha in [1, 2), got " + std::to_string(alpha));
}

double StableParams::standard_scale() const { return std::pow(scale, 1.0 / alpha); }

double sample_sas_unit(double alpha, Rng& rng) {
    const double v = rng.uniform_angle();
    if (alpha == 1.0) return std::tan(v);
    const double w = rng.exponential();
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

Eigen::VectorXd sample_sas(const StableParams& params, Eigen::Index n, Rng& rng) {
    params.validate();
    if (n < 1) throw ParameterError("sample count must be at least 1");
    const double c = params.standard_scale();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = c * sample_sas_unit(params.alpha, rng);
    return out;
}

double sample_positive_stable(double a, Rng& rng) {
    if (!(a > 0.0 && a < 1.0))
        throw ParameterError("positive stable index must lie in (0, 1), got " + std::to_string(a));
    const double half_pi = 0.5 * std::numbers::pi;
    const double v = rng.uniform_angle();
    const double w = rng.exponential();
    // beta = 1: the skew shift B = arctan(tan(pi a / 2)) / a equals pi / 2.
    const double shift = half_pi;
    const double s = std::pow(std::cos(half_pi * a), -1.0 / a);
    const double x = s * std::sin(a * (v + shift)) / std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
    // Underflow at extreme angles can produce an exact zero; the law has none.
    return x > 0.0 ? x : std::numeric_limits<double>::min();
}

double stable_tail_constant(double a) {
    if (!(a > 0.0 && a <= 2.0)) throw ParameterError("tail constant needs index in (0, 2]");
    if (a == 1.0) return 2.0 / std::numbers::pi;
    if (a == 2.0) return 0.0; // Gaussian: no power tail
    return (1.0 - a) / (std::tgamma(2.0 - a) * std::cos(0.5 * std::numbers::pi * a));
}

} // namespace sael
