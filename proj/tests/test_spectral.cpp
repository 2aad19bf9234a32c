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

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "doctest.h"
#include "sael/errors.hpp"
#include "sael/process.hpp"
#include "sael/spectral.hpp"

using namespace sael;

namespace {

TimeSeries sample_series(Eigen::Index n, std::uint64_t seed, double b = 0.5) {
    Rng rng(seed);
    return simulate_linear(ma_power_decay(b, 100, {1.5, 1.0}), n, rng);
}

} // namespace

TEST_CASE("fourier grid lies in (-pi, pi]") {
    const Eigen::VectorXd f = fourier_frequencies(10);
    CHECK(f[4] == std::numbers::pi);
    CHECK(f[9] == 0.0);
    CHECK(f[5] == doctest::Approx(-0.8 * std::numbers::pi));
    CHECK(f.maxCoeff() <= std::numbers::pi);
    CHECK(f.minCoeff() > -std::numbers::pi);
}

TEST_CASE("self-normalized series has unit energy") {
    const auto x = sample_series(300, 1);
    CHECK(self_normalize(x.values()).squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(self_normalize(Eigen::VectorXd::Zero(4)), DegenerateSeriesError);
}

TEST_CASE("FFT grid agrees with the direct sum") {
    for (Eigen::Index n : {50, 97, 300}) {
        const auto x = sample_series(n, static_cast<std::uint64_t>(n));
        const auto grid = self_normalized_periodogram_grid(x);
        for (Eigen::Index t = 0; t < n; ++t)
            CHECK(grid.values[t] == doctest::Approx(self_normalized_periodogram(x, grid.freqs[t])).epsilon(1e-10));
        // Parseval on the Fourier grid.
        CHECK(grid.values.sum() / static_cast<double>(n) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("matrix periodogram grid agrees with the direct sum and is rank one") {
    Rng rng(3);
    const auto x = simulate_vector_linear(vma_upper_triangular(0.3, 100, {1.5, 1.0}), 120, rng);
    const auto grid = periodogram_matrix_grid(x, 1.5);
    for (Eigen::Index t = 0; t < x.size(); t += 7) {
        const Eigen::MatrixXcd direct = periodogram_matrix(x, 1.5, grid.freqs[t]);
        const Eigen::MatrixXcd& fast = grid.values[static_cast<std::size_t>(t)];
        CHECK((direct - fast).norm() <= 1e-10 * direct.norm());
        CHECK((fast - fast.adjoint()).norm() <= 1e-12 * fast.norm());
        CHECK(std::abs(fast.determinant()) <= 1e-10 * fast.squaredNorm());
    }
}

TEST_CASE("raw and self-normalized periodograms are linked through gamma") {
    const auto x = sample_series(200, 4);
    const double w = 0.9;
    CHECK(raw_periodogram(x, 1.5, w) / gamma_sq(x, 1.5) == doctest::Approx(self_normalized_periodogram(x, w)));
}

TEST_CASE("lag products reproduce the periodogram") {
    const auto x = sample_series(257, 5);
    const Eigen::VectorXd rho = normalized_autocorrelations(x);
    const Eigen::VectorXd a = self_normalize(x.values());
    CHECK(rho[0] == 1.0);
    CHECK(rho[3] == doctest::Approx(a.head(254).dot(a.tail(254))).epsilon(1e-12));
    for (double w : {0.0, 0.4, 2.1, std::numbers::pi})
        CHECK(1.0 + lag_sum_statistic(x, w) == doctest::Approx(self_normalized_periodogram(x, w)).epsilon(1e-10));
}

TEST_CASE("smoothed estimate equals its cosine-series form") {
    const auto x = sample_series(300, 6);
    const Eigen::Index m = default_bandwidth(300);
    CHECK(m == 17);
    for (auto grid : {SmoothingGrid::Fourier, SmoothingGrid::Literal}) {
        const Eigen::VectorXd r = smoothed_transfer_coefficients(x, m, grid);
        for (double w : {0.1, 1.3, 2.9}) {
            double series = r[0];
            for (Eigen::Index h = 1; h < r.size(); ++h) series += 2.0 * r[h] * std::cos(static_cast<double>(h) * w);
            CHECK(series == doctest::Approx(smoothed_self_normalized(x, w, m, grid)).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(smoothed_self_normalized(x, 0.0, 0), ParameterError);
    CHECK_THROWS_AS(smoothed_self_normalized(x, 0.0, 150), ParameterError);
}

TEST_CASE("smoothed estimate tracks the normalized transfer") {
    const auto spec = ma_power_decay(0.5, 100, {1.5, 1.0});
    Rng rng(8);
    const auto x = simulate_linear(spec, 20000, rng);
    const Eigen::Index m = default_bandwidth(x.size());
    double err = 0.0;
    for (double w : {0.3, 1.0, 2.0}) err = std::max(err, std::abs(smoothed_self_normalized(x, w, m) - normalized_transfer(spec, w)));
    CHECK(err < 0.35);
}

TEST_CASE("Hill estimator on an exact geometric sample") {
    Eigen::VectorXd x(4);
    x << std::exp(3.0), -std::exp(2.0), std::exp(1.0), 1.0;
    CHECK(hill_estimator(TimeSeries(x), 3) == doctest::Approx(0.5));
    CHECK_THROWS_AS(hill_estimator(TimeSeries(x), 4), ParameterError);
    CHECK_THROWS_AS(hill_estimator(TimeSeries(Eigen::VectorXd::Ones(5)), 2), DegenerateSeriesError);
}

TEST_CASE("Hill estimator recovers alpha for iid stable data") {
    Rng rng(9);
    const TimeSeries x(sample_sas({1.5, 1.0}, 100000, rng));
    CHECK(default_hill_k(100000) == 1000);
    CHECK(hill_estimator(x, default_hill_k(x.size())) == doctest::Approx(1.5).epsilon(0.1));
    const auto plot = hill_plot(x, 10, 50);
    CHECK(plot.size() == 41);
    CHECK(plot.front().k == 10);
    std::ostringstream os;
    write_hill_csv(os, plot);
    CHECK(os.str().rfind("k,alpha_hat\n10,", 0) == 0);
}
