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

#ifndef SAEL_EL_HPP
#define SAEL_EL_HPP

#include <optional>

#include <Eigen/Core>

#include "sael/process.hpp"
#include "sael/score.hpp"
#include "sael/spectral.hpp"

namespace sael {

/// (n / log n)^{1/alpha}. Requires n >= 2 and alpha in [1, 2).
double x_n(Eigen::Index n, double alpha);

enum class LagrangeStatus { Converged, HullFailure };

struct LagrangeOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;
};

struct LagrangeSolution {
    Eigen::VectorXd phi;
    LagrangeStatus status = LagrangeStatus::Converged;
    int iterations = 0;
    /// |(1/n) sum m_t / (1 + phi'm_t)| at the returned phi.
    double residual = 0.0;
};

/**
 * Solves (1/n) sum_t m_t / (1 + phi'm_t) = 0 by damped Newton on the convex
 * dual -sum log(1 + phi'm_t), keeping 1 + phi'm_t > 1/n.
 *
 * Zero outside the interior of the convex hull of the rows gives HullFailure:
 * decided exactly for q = 1, by divergence of the iterates for q > 1.
 * Throws SolverError (carrying the last residual) when Newton stalls or runs out
 * of iterations.
 */
LagrangeSolution solve_lagrange(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                const std::optional<Eigen::VectorXd>& initial = std::nullopt,
                                const LagrangeOptions& options = {});

struct ELResult {
    Eigen::VectorXd theta;
    Eigen::VectorXd phi;
    /// w_t = 1 / (n (1 + phi'm_t)); empty on hull failure.
    Eigen::VectorXd weights;
    /// sum log(n w_t) <= 0; -inf on hull failure.
    double log_ratio = 0.0;
    /// -2 (x_n^2 / n) log_ratio >= 0; +inf on hull failure.
    double statistic = 0.0;
    bool converged = false;
    bool hull_ok = false;
    int iterations = 0;
};

/// EL ratio from precomputed estimating-function rows. n is the row count.
ELResult el_from_moments(const Eigen::Ref<const Eigen::MatrixXd>& m, double alpha,
                         const std::optional<Eigen::VectorXd>& initial = std::nullopt,
                         const LagrangeOptions& options = {});

ELResult log_el_ratio(const PeriodogramGrid& grid, const ScalarScore& score,
                      const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha);
ELResult log_el_ratio(const TimeSeries& x, const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta,
                      double alpha);
ELResult log_el_ratio(const MatrixPeriodogramGrid& grid, const MatrixScore& score,
                      const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha);
ELResult log_el_ratio(const VectorTimeSeries& x, const MatrixScore& score,
                      const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha);

} // namespace sael

#endif // SAEL_EL_HPP
