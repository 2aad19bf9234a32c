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

#ifndef SAEL_SPECTRAL_HPP
#define SAEL_SPECTRAL_HPP

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "sael/process.hpp"

namespace sael {

/// Values on the Fourier grid lambda_t = 2 pi t / n, t = 1..n, mapped into (-pi, pi].
struct PeriodogramGrid {
    Eigen::VectorXd freqs;
    Eigen::VectorXd values;
};

struct MatrixPeriodogramGrid {
    Eigen::VectorXd freqs;
    std::vector<Eigen::MatrixXcd> values;
};

Eigen::VectorXd fourier_frequencies(Eigen::Index n);

/// A(t) / sqrt(sum A(s)^2). Throws DegenerateSeriesError on an all-zero series.
Eigen::VectorXd self_normalize(const Eigen::Ref<const Eigen::VectorXd>& x);

/// |sum_t A~_t e^{i t omega}|^2, direct O(n) sum.
double self_normalized_periodogram(const TimeSeries& x, double omega);

/// Self-normalized periodogram on the full Fourier grid via FFT.
PeriodogramGrid self_normalized_periodogram_grid(const TimeSeries& x);

/// n^{-2/alpha} sum A(t)^2.
double gamma_sq(const TimeSeries& x, double alpha);

/// n^{-2/alpha} |sum A(t) e^{i t omega}|^2.
double raw_periodogram(const TimeSeries& x, double alpha, double omega);

/// d(omega) d(omega)^*, d = n^{-1/alpha} sum X(t) e^{i omega t}.
Eigen::MatrixXcd periodogram_matrix(const VectorTimeSeries& x, double alpha, double omega);

/// Matrix periodogram on the Fourier grid via FFT of each component.
MatrixPeriodogramGrid periodogram_matrix_grid(const VectorTimeSeries& x, double alpha);

/// rho_n(h) = sum_{t} A~_t A~_{t+h} for h = 0..n-1 (rho_n(0) = 1).
Eigen::VectorXd normalized_autocorrelations(const TimeSeries& x);

/// T_n(omega) = 2 sum_{h=1}^{n-1} rho_n(h) cos(h omega) = I~(omega) - 1.
double lag_sum_statistic(const TimeSeries& x, double omega);

/**
 * Spacing of the smoothing window around omega.
 *
 * Fourier uses omega + 2 pi k / n (a Daniell window over Fourier neighbours);
 * Literal uses omega + k / n.
 */
enum class SmoothingGrid { Fourier, Literal };

/// floor(sqrt(n)).
Eigen::Index default_bandwidth(Eigen::Index n);

/// (2m+1)^{-1} sum_{|k| <= m} I~(omega + spacing * k). Requires 1 <= m < n/2.
double smoothed_self_normalized(const TimeSeries& x, double omega, Eigen::Index m,
                                SmoothingGrid grid = SmoothingGrid::Fourier);

/**
 * Cosine coefficients r_0..r_{n-1} of the smoothed estimate, so that
 * smoothed_self_normalized(x, w, m, grid) = r_0 + 2 sum_h r_h cos(h w).
 */
Eigen::VectorXd smoothed_transfer_coefficients(const TimeSeries& x, Eigen::Index m,
                                               SmoothingGrid grid = SmoothingGrid::Fourier);

/// Hill estimate from the k largest |X(t)|. Requires 1 <= k <= n-1.
double hill_estimator(const TimeSeries& x, Eigen::Index k);

/// floor(n^0.6), clamped to [1, n-1].
Eigen::Index default_hill_k(Eigen::Index n);

struct HillPoint {
    Eigen::Index k;
    double alpha_hat;
};

/// (k, alpha_hat) for k in [k_min, k_max], sorting |X| once.
std::vector<HillPoint> hill_plot(const TimeSeries& x, Eigen::Index k_min, Eigen::Index k_max);

/// CSV with header "omega,value".
void write_grid_csv(std::ostream& os, const Eigen::VectorXd& omega, const Eigen::VectorXd& value);

/// CSV with header "k,alpha_hat".
void write_hill_csv(std::ostream& os, const std::vector<HillPoint>& points);

} // namespace sael

#endif // SAEL_SPECTRAL_HPP
