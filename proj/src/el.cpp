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

#include "sael/el.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "sael/errors.hpp"

namespace sael {

double x_n(Eigen::Index n, double alpha) {
    if (n < 2) throw ParameterError("x_n needs n >= 2");
    StableParams{alpha, 1.0}.validate_inference();
    const double nd = static_cast<double>(n);
    return std::pow(nd / std::log(nd), 1.0 / alpha);
}

namespace {

constexpr double kDivergence = 1e10;

struct DualState {
    double objective = 0.0; // -sum log(1 + phi'u)
    Eigen::VectorXd score;  // (1/n) sum u / (1 + phi'u)
    bool feasible = false;
};

DualState evaluate(const Eigen::Ref<const Eigen::MatrixXd>& u, const Eigen::VectorXd& phi) {
    const Eigen::Index n = u.rows();
    const double floor = 1.0 / static_cast<double>(n);
    const Eigen::VectorXd denom = (u * phi).array() + 1.0;
    DualState s;
    if (!(denom.minCoeff() > floor)) return s;
    s.feasible = true;
    s.objective = -denom.array().log().sum();
    s.score = u.transpose() * denom.cwiseInverse() / static_cast<double>(n);
    return s;
}

} // namespace

LagrangeSolution solve_lagrange(const Eigen::Ref<const Eigen::MatrixXd>& m, const std::optional<Eigen::VectorXd>& initial,
                                const LagrangeOptions& options) {
    const Eigen::Index n = m.rows();
    const Eigen::Index q = m.cols();
    if (n < 1 || q < 1) throw ValidationError("estimating function matrix is empty");
    if (!m.allFinite()) throw ValidationError("estimating function rows must be finite");
    if (initial && initial->size() != q) throw ValidationError("initial multiplier has the wrong dimension");

    LagrangeSolution sol;
    sol.phi = Eigen::VectorXd::Zero(q);

    // Work with rows scaled to unit RMS; phi_scaled = scale * phi.
    const double scale = std::sqrt(m.squaredNorm() / static_cast<double>(n * q));
    if (scale == 0.0) return sol;
    const Eigen::MatrixXd u = m / scale;

    if (q == 1 && !(u.minCoeff() < 0.0 && u.maxCoeff() > 0.0)) {
        sol.status = LagrangeStatus::HullFailure;
        sol.residual = std::numeric_limits<double>::infinity();
        return sol;
    }
    const double row_max = u.rowwise().norm().maxCoeff();

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(q);
    DualState state = evaluate(u, phi);
    if (initial) {
        const Eigen::VectorXd start = *initial * scale;
        DualState s0 = evaluate(u, start);
        if (s0.feasible) {
            phi = start;
            state = std::move(s0);
        }
    }

    const auto finish = [&](int iterations) {
        sol.phi = phi / scale;
        sol.iterations = iterations;
        sol.residual = state.score.norm() * scale;
        return sol;
    };

    int polish = 0;
    for (int it = 0; it <= options.max_iterations; ++it) {
        const double residual = state.score.norm() * scale;
        if (residual < options.tolerance) {
            // sum w_t - 1 = -phi'(residual vector); up to two extra steps shrink it.
            const double weight_defect = std::abs(phi.dot(state.score));
            if (polish == 2 || weight_defect < 1e-3 * options.tolerance) return finish(it);
            ++polish;
        }
        if (it == options.max_iterations) break;

        const Eigen::VectorXd denom = (u * phi).array() + 1.0;
        const Eigen::MatrixXd weighted = u.array().colwise() / denom.array();
        const Eigen::MatrixXd hessian = weighted.transpose() * weighted / static_cast<double>(n);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
            throw SolverError("Lagrange solver: singular Hessian", residual);
        const Eigen::VectorXd step = ldlt.solve(state.score);

        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            const Eigen::VectorXd trial = phi + t * step;
            DualState next = evaluate(u, trial);
            if (next.feasible && (next.objective < state.objective || next.score.norm() < state.score.norm())) {
                phi = trial;
                state = std::move(next);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (polish > 0) return finish(it); // already within tolerance
            throw SolverError("Lagrange solver: line search failed", residual);
        }
        if (q > 1 && phi.norm() * row_max > kDivergence) {
            sol.status = LagrangeStatus::HullFailure;
            sol.phi = phi / scale;
            sol.iterations = it + 1;
            sol.residual = state.score.norm() * scale;
            return sol;
        }
    }
    if (polish > 0) return finish(options.max_iterations);
    throw SolverError("Lagrange solver did not converge in " + std::to_string(options.max_iterations) + " iterations",
                      state.score.norm() * scale);
}

ELResult el_from_moments(const Eigen::Ref<const Eigen::MatrixXd>& m, double alpha,
                         const std::optional<Eigen::VectorXd>& initial, const LagrangeOptions& options) {
    const Eigen::Index n = m.rows();
    const double xn = x_n(n, alpha);
    const LagrangeSolution sol = solve_lagrange(m, initial, options);
    ELResult r;
    r.phi = sol.phi;
    r.iterations = sol.iterations;
    if (sol.status == LagrangeStatus::HullFailure) {
        r.log_ratio = -std::numeric_limits<double>::infinity();
        r.statistic = std::numeric_limits<double>::infinity();
        return r;
    }
    r.converged = true;
    r.hull_ok = true;
    const Eigen::VectorXd denom = (m * sol.phi).array() + 1.0;
    r.weights = (static_cast<double>(n) * denom).cwiseInverse();
    // The dual maximum is >= its value 0 at phi = 0; clamp rounding below zero.
    r.log_ratio = -std::max(0.0, denom.array().log().sum());
    r.statistic = -2.0 * (xn * xn / static_cast<double>(n)) * r.log_ratio;
    return r;
}

ELResult log_el_ratio(const PeriodogramGrid& grid, const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta,
                      double alpha) {
    ELResult r = el_from_moments(estimating_function(grid, score, theta), alpha);
    r.theta = theta;
    return r;
}

ELResult log_el_ratio(const TimeSeries& x, const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta,
                      double alpha) {
    ELResult r = el_from_moments(estimating_function(x, score, theta, alpha), alpha);
    r.theta = theta;
    return r;
}

ELResult log_el_ratio(const MatrixPeriodogramGrid& grid, const MatrixScore& score,
                      const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha) {
    ELResult r = el_from_moments(estimating_function_mv(grid, score, theta), alpha);
    r.theta = theta;
    return r;
}

ELResult log_el_ratio(const VectorTimeSeries& x, const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta,
                      double alpha) {
    ELResult r = el_from_moments(estimating_function_mv(x, score, theta, alpha), alpha);
    r.theta = theta;
    return r;
}

} // namespace sael
