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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sael/el.hpp"
#include "sael/errors.hpp"

using namespace sael;

namespace {

Eigen::VectorXd th(double t) { return Eigen::VectorXd::Constant(1, t); }

void check_invariants(const Eigen::MatrixXd& m, const ELResult& r) {
    REQUIRE(r.converged);
    REQUIRE(r.hull_ok);
    const double n = static_cast<double>(m.rows());
    CHECK(std::abs(r.weights.sum() - 1.0) < 1e-10);
    CHECK(r.weights.minCoeff() > 0.0);
    CHECK(r.weights.maxCoeff() < 1.0);
    CHECK((m.transpose() * r.weights).norm() < 1e-8);
    CHECK(((m * r.phi).array() + 1.0).minCoeff() > 1.0 / n);
    CHECK(r.statistic >= 0.0);
    CHECK(r.log_ratio <= 0.0);
    CHECK(r.log_ratio == doctest::Approx((n * r.weights).array().log().sum()).epsilon(1e-9));
}

} // namespace

TEST_CASE("x_n") {
    CHECK(x_n(8, 1.0) == doctest::Approx(8.0 / std::log(8.0)));
    CHECK(x_n(8, 1.0) == doctest::Approx(3.8472).epsilon(1e-4));
    CHECK(std::abs(x_n(300, 1.9999) - std::sqrt(300.0 / std::log(300.0))) < 1e-3);
    for (Eigen::Index n = 3; n < 200; ++n) CHECK(x_n(n + 1, 1.5) > x_n(n, 1.5));
    CHECK_THROWS_AS(x_n(1, 1.5), ParameterError);
    CHECK_THROWS_AS(x_n(10, 2.0), ParameterError);
}

TEST_CASE("symmetric rows give phi = 0") {
    Eigen::MatrixXd m(4, 2);
    m << 1.0, 2.0, -1.0, -2.0, 0.5, -3.0, -0.5, 3.0;
    const auto sol = solve_lagrange(m);
    CHECK(sol.status == LagrangeStatus::Converged);
    CHECK(sol.phi.norm() < 1e-14);
    const auto r = el_from_moments(m, 1.5);
    CHECK(r.statistic == 0.0);
    CHECK((r.weights.array() - 0.25).abs().maxCoeff() < 1e-15);
}

TEST_CASE("hand-solved two-point case") {
    Eigen::MatrixXd m(2, 1);
    m << -1.0, 2.0;
    const auto sol = solve_lagrange(m);
    CHECK(std::abs(sol.phi[0] - 0.25) < 1e-10);
    check_invariants(m, el_from_moments(m, 1.5));
}

TEST_CASE("hull failure") {
    Eigen::MatrixXd pos = Eigen::MatrixXd::Ones(5, 1);
    pos(2, 0) = 3.0;
    CHECK(solve_lagrange(pos).status == LagrangeStatus::HullFailure);
    const auto r = el_from_moments(pos, 1.5);
    CHECK_FALSE(r.hull_ok);
    CHECK(r.statistic == std::numeric_limits<double>::infinity());
    CHECK(r.log_ratio == -std::numeric_limits<double>::infinity());

    Eigen::MatrixXd boundary(3, 1);
    boundary << 0.0, 1.0, 2.0;
    CHECK(solve_lagrange(boundary).status == LagrangeStatus::HullFailure);

    // q = 2: every row in the open half-plane x + y > 0.
    Eigen::MatrixXd half(4, 2);
    half << 1.0, -0.5, -0.5, 1.0, 2.0, 0.1, 0.3, 0.3;
    CHECK(solve_lagrange(half).status == LagrangeStatus::HullFailure);
}

TEST_CASE("iteration limit raises a solver error with the residual") {
    Rng rng(31);
    Eigen::MatrixXd m(50, 1);
    for (Eigen::Index t = 0; t < 50; ++t) m(t, 0) = rng.normal() + 0.8;
    try {
        solve_lagrange(m, std::nullopt, {1, 1e-10});
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.residual() > 1e-10);
    }
    CHECK_THROWS_AS(solve_lagrange(Eigen::MatrixXd::Constant(3, 1, std::nan(""))), ValidationError);
}

TEST_CASE("random dual problems satisfy the EL invariants") {
    Rng rng(32);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::Index n = 20 + static_cast<Eigen::Index>(rng.uniform() * 300);
        const Eigen::Index q = 1 + rep % 3;
        Eigen::MatrixXd m(n, q);
        const double shift = 0.6 * (rng.uniform() - 0.5);
        for (Eigen::Index t = 0; t < n; ++t)
            for (Eigen::Index k = 0; k < q; ++k) m(t, k) = std::exp(rng.normal()) * (rng.normal() + shift);
        const auto sol = solve_lagrange(m);
        if (sol.status == LagrangeStatus::HullFailure) continue;
        const auto r = el_from_moments(m, 1.5);
        check_invariants(m, r);
        // Idempotence from the returned multiplier.
        const auto again = solve_lagrange(m, r.phi);
        CHECK(again.iterations <= 2);
        CHECK((again.phi - r.phi).norm() <= 1e-8 * std::max(1.0, r.phi.norm()));
    }
}

TEST_CASE("statistic is invariant to rescaling the series") {
    Rng rng(33);
    const auto x = simulate_linear(ma_power_decay(0.5, 100, {1.5, 1.0}), 300, rng);
    const TimeSeries y(123.456 * x.values());
    const auto s = acf_score(2);
    for (double t : {-0.2, 0.1, 0.3}) {
        const auto a = log_el_ratio(x, *s, th(t), 1.5);
        const auto b = log_el_ratio(y, *s, th(t), 1.5);
        CHECK(std::abs(a.statistic - b.statistic) <= 1e-10 * std::max(1.0, a.statistic));
        CHECK((a.phi - b.phi).norm() <= 1e-10 * std::max(1.0, a.phi.norm()));
    }
}

TEST_CASE("statistic profile for the lag-two autocorrelation is quasi-convex around rho(2)") {
    const auto spec = ma_power_decay(0.5, 100, {1.5, 1.0});
    const auto s = acf_score(2);
    std::vector<double> grid;
    for (int i = -98; i <= 98; i += 2) grid.push_back(i / 100.0);
    const int reps = 200;
    std::vector<std::vector<double>> stats(grid.size(), std::vector<double>(reps));
    int monotone = 0;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::substream(34, static_cast<std::uint64_t>(r));
        const auto x = simulate_linear(spec, 300, rng);
        const auto per = self_normalized_periodogram_grid(x);
        std::vector<double> curve(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) curve[g] = stats[g][r] = log_el_ratio(per, *s, th(grid[g]), 1.5).statistic;
        const auto best = static_cast<std::size_t>(std::min_element(curve.begin(), curve.end()) - curve.begin());
        bool ok = true;
        for (std::size_t g = best + 1; g < grid.size() && curve[g] < 5.0; ++g) ok = ok && curve[g] >= curve[g - 1];
        for (std::size_t g = best; g > 0 && curve[g - 1] < 5.0; --g) ok = ok && curve[g - 1] >= curve[g];
        monotone += ok;
    }
    std::vector<double> median(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto v = stats[g];
        std::nth_element(v.begin(), v.begin() + reps / 2, v.end());
        median[g] = v[reps / 2];
    }
    const auto best = static_cast<std::size_t>(std::min_element(median.begin(), median.end()) - median.begin());
    CHECK(std::abs(grid[best] - 0.1168) < 0.05);
    for (std::size_t g = best + 1; g < grid.size(); ++g) CHECK(median[g] >= median[g - 1]);
    for (std::size_t g = best; g > 0; --g) CHECK(median[g - 1] >= median[g]);
    CHECK(monotone >= 0.9 * reps);
}
