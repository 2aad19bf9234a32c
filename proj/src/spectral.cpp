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

#include "sael/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/FFT>

#include "sael/errors.hpp"

namespace sael {

namespace {

constexpr double kPi = std::numbers::pi;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("alpha must lie in (0, 2]");
}

double sum_of_squares(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double ss = x.squaredNorm();
    if (!(ss > 0.0)) throw DegenerateSeriesError("series has zero sum of squares");
    return ss;
}

std::complex<double> dft_at(const Eigen::Ref<const Eigen::VectorXd>& a, double omega) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index t = 0; t < a.size(); ++t) acc += a[t] * std::polar(1.0, static_cast<double>(t + 1) * omega);
    return acc;
}

// |sum_{t=1}^n a_t e^{i t lambda_k}|^2 for k = 1..n, returned in k order.
std::vector<std::complex<double>> fourier_sums(const Eigen::Ref<const Eigen::VectorXd>& a) {
    const auto n = static_cast<std::size_t>(a.size());
    std::vector<double> in(a.data(), a.data() + n);
    std::vector<std::complex<double>> spec;
    Eigen::FFT<double> fft;
    fft.fwd(spec, in);
    // fwd gives sum_{j=0}^{n-1} a_{j+1} e^{-2 pi i j k / n}; conjugating and
    // multiplying by e^{i lambda_k} yields sum_{t=1}^n a_t e^{i t lambda_k}.
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const double lambda = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        out[k - 1] = std::conj(spec[k % n]) * std::polar(1.0, lambda);
    }
    return out;
}

} // namespace

Eigen::VectorXd fourier_frequencies(Eigen::Index n) {
    Eigen::VectorXd f(n);
    for (Eigen::Index t = 1; t <= n; ++t) {
        // Integer reduction keeps t = n at exactly 0 and t = n/2 at exactly pi.
        const Eigen::Index r = t % n;
        const double folded = 2.0 * r > n ? static_cast<double>(r - n) : static_cast<double>(r);
        f[t - 1] = 2.0 * kPi * folded / static_cast<double>(n);
    }
    return f;
}

Eigen::VectorXd self_normalize(const Eigen::Ref<const Eigen::VectorXd>& x) {
    return x / std::sqrt(sum_of_squares(x));
}

double self_normalized_periodogram(const TimeSeries& x, double omega) {
    return std::norm(dft_at(self_normalize(x.values()), omega));
}

PeriodogramGrid self_normalized_periodogram_grid(const TimeSeries& x) {
    const Eigen::VectorXd a = self_normalize(x.values());
    const auto sums = fourier_sums(a);
    PeriodogramGrid grid{fourier_frequencies(x.size()), Eigen::VectorXd(x.size())};
    for (Eigen::Index k = 0; k < x.size(); ++k) grid.values[k] = std::norm(sums[static_cast<std::size_t>(k)]);
    return grid;
}

double gamma_sq(const TimeSeries& x, double alpha) {
    check_alpha(alpha);
    return std::pow(static_cast<double>(x.size()), -2.0 / alpha) * sum_of_squares(x.values());
}

double raw_periodogram(const TimeSeries& x, double alpha, double omega) {
    check_alpha(alpha);
    sum_of_squares(x.values());
    return std::pow(static_cast<double>(x.size()), -2.0 / alpha) * std::norm(dft_at(x.values(), omega));
}

Eigen::MatrixXcd periodogram_matrix(const VectorTimeSeries& x, double alpha, double omega) {
    check_alpha(alpha);
    const double norm = std::pow(static_cast<double>(x.size()), -1.0 / alpha);
    Eigen::VectorXcd d(x.dim());
    for (Eigen::Index k = 0; k < x.dim(); ++k) d[k] = norm * dft_at(x.values().col(k), omega);
    return d * d.adjoint();
}

MatrixPeriodogramGrid periodogram_matrix_grid(const VectorTimeSeries& x, double alpha) {
    check_alpha(alpha);
    const Eigen::Index n = x.size();
    const Eigen::Index dim = x.dim();
    const double norm = std::pow(static_cast<double>(n), -1.0 / alpha);
    std::vector<std::vector<std::complex<double>>> cols;
    for (Eigen::Index k = 0; k < dim; ++k) cols.push_back(fourier_sums(x.values().col(k)));
    MatrixPeriodogramGrid grid{fourier_frequencies(n), {}};
    grid.values.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXcd d(dim);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index k = 0; k < dim; ++k) d[k] = norm * cols[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
        grid.values.push_back(d * d.adjoint());
    }
    return grid;
}

Eigen::VectorXd normalized_autocorrelations(const TimeSeries& x) {
    const Eigen::VectorXd a = self_normalize(x.values());
    const Eigen::Index n = a.size();
    std::size_t len = 1;
    while (len < static_cast<std::size_t>(2 * n)) len <<= 1;
    std::vector<double> padded(len, 0.0);
    std::copy(a.data(), a.data() + n, padded.begin());
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, padded);
    for (auto& s : spec) s = std::norm(s);
    std::vector<double> acf;
    fft.inv(acf, spec);
    Eigen::VectorXd rho(n);
    for (Eigen::Index h = 0; h < n; ++h) rho[h] = acf[static_cast<std::size_t>(h)];
    rho[0] = 1.0;
    return rho;
}

double lag_sum_statistic(const TimeSeries& x, double omega) {
    const Eigen::VectorXd rho = normalized_autocorrelations(x);
    double acc = 0.0;
    for (Eigen::Index h = 1; h < rho.size(); ++h) acc += rho[h] * std::cos(static_cast<double>(h) * omega);
    return 2.0 * acc;
}

Eigen::Index default_bandwidth(Eigen::Index n) {
    return static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(n))));
}

namespace {

double smoothing_step(SmoothingGrid grid, Eigen::Index n) {
    return grid == SmoothingGrid::Fourier ? 2.0 * kPi / static_cast<double>(n) : 1.0 / static_cast<double>(n);
}

void check_bandwidth(Eigen::Index m, Eigen::Index n) {
    if (m < 1 || 2 * m >= n)
        throw ParameterError("bandwidth m must satisfy 1 <= m < n/2, got m=" + std::to_string(m));
}

} // namespace

double smoothed_self_normalized(const TimeSeries& x, double omega, Eigen::Index m, SmoothingGrid grid) {
    check_bandwidth(m, x.size());
    const Eigen::VectorXd a = self_normalize(x.values());
    const double step = smoothing_step(grid, x.size());
    double acc = 0.0;
    for (Eigen::Index k = -m; k <= m; ++k) acc += std::norm(dft_at(a, omega + step * static_cast<double>(k)));
    return acc / static_cast<double>(2 * m + 1);
}

Eigen::VectorXd smoothed_transfer_coefficients(const TimeSeries& x, Eigen::Index m, SmoothingGrid grid) {
    check_bandwidth(m, x.size());
    Eigen::VectorXd r = normalized_autocorrelations(x);
    const double step = smoothing_step(grid, x.size());
    for (Eigen::Index h = 1; h < r.size(); ++h) {
        double kernel = 1.0;
        for (Eigen::Index k = 1; k <= m; ++k) kernel += 2.0 * std::cos(static_cast<double>(h * k) * step);
        r[h] *= kernel / static_cast<double>(2 * m + 1);
    }
    return r;
}

namespace {

std::vector<double> sorted_magnitudes(const TimeSeries& x) {
    std::vector<double> mag(static_cast<std::size_t>(x.size()));
    for (Eigen::Index t = 0; t < x.size(); ++t) mag[static_cast<std::size_t>(t)] = std::abs(x[t]);
    std::sort(mag.begin(), mag.end(), std::greater<>());
    return mag;
}

void check_hill_k(Eigen::Index k, Eigen::Index n) {
    if (k < 1 || k > n - 1) throw ParameterError("Hill k must satisfy 1 <= k <= n-1, got " + std::to_string(k));
}

double hill_from_sorted(const std::vector<double>& mag, Eigen::Index k) {
    const double threshold = mag[static_cast<std::size_t>(k)];
    if (!(threshold > 0.0)) throw DegenerateSeriesError("Hill estimator: |X|_(k+1) is zero");
    double acc = 0.0;
    for (Eigen::Index t = 0; t < k; ++t) acc += std::log(mag[static_cast<std::size_t>(t)] / threshold);
    if (!(acc > 0.0)) throw DegenerateSeriesError("Hill estimator: top k order statistics are tied");
    return static_cast<double>(k) / acc;
}

} // namespace

double hill_estimator(const TimeSeries& x, Eigen::Index k) {
    check_hill_k(k, x.size());
    return hill_from_sorted(sorted_magnitudes(x), k);
}

Eigen::Index default_hill_k(Eigen::Index n) {
    // The guard keeps exact powers (1e5^0.6 = 1000) from rounding down.
    const auto k = static_cast<Eigen::Index>(std::floor(std::pow(static_cast<double>(n), 0.6) * (1.0 + 1e-12)));
    return std::clamp<Eigen::Index>(k, 1, n - 1);
}

std::vector<HillPoint> hill_plot(const TimeSeries& x, Eigen::Index k_min, Eigen::Index k_max) {
    check_hill_k(k_min, x.size());
    check_hill_k(k_max, x.size());
    const auto mag = sorted_magnitudes(x);
    std::vector<HillPoint> out;
    for (Eigen::Index k = k_min; k <= k_max; ++k) {
        try {
            out.push_back({k, hill_from_sorted(mag, k)});
        } catch (const DegenerateSeriesError&) {
            // Ties at this k: skip the point rather than abort the plot.
        }
    }
    return out;
}

void write_grid_csv(std::ostream& os, const Eigen::VectorXd& omega, const Eigen::VectorXd& value) {
    if (omega.size() != value.size()) throw ParameterError("grid and values differ in length");
    os << "omega,value\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < omega.size(); ++i) os << omega[i] << ',' << value[i] << '\n';
}

void write_hill_csv(std::ostream& os, const std::vector<HillPoint>& points) {
    os << "k,alpha_hat\n" << std::setprecision(17);
    for (const auto& p : points) os << p.k << ',' << p.alpha_hat << '\n';
}

} // namespace sael
