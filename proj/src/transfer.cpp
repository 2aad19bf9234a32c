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

#include "sael/transfer.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sael/errors.hpp"

namespace sael {

namespace {

void check_points(Eigen::Index points) {
    if (points < 8) throw ParameterError("quadrature needs at least 8 points");
}

} // namespace

Eigen::VectorXcd fourier_sum_on_grid(const Eigen::Ref<const Eigen::VectorXd>& a, Eigen::Index points) {
    check_points(points);
    std::vector<double> folded(static_cast<std::size_t>(points), 0.0);
    for (Eigen::Index j = 0; j < a.size(); ++j) folded[static_cast<std::size_t>(j % points)] += a[j];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, folded);
    // fwd uses e^{-i j omega_k}; conjugate for real input.
    Eigen::VectorXcd out(points);
    for (Eigen::Index k = 0; k < points; ++k) out[k] = std::conj(spec[static_cast<std::size_t>(k)]);
    return out;
}

Eigen::VectorXd ScalarTransfer::on_grid(Eigen::Index points) const {
    check_points(points);
    Eigen::VectorXd g(points);
    for (Eigen::Index k = 0; k < points; ++k)
        g[k] = at(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points));
    return g;
}

ExactTransfer::ExactTransfer(LinearProcessSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

double ExactTransfer::at(double omega) const { return normalized_transfer(spec_, omega); }

Eigen::VectorXd ExactTransfer::on_grid(Eigen::Index points) const {
    return fourier_sum_on_grid(spec_.psi, points).cwiseAbs2() / spec_.psi.squaredNorm();
}

CosineSeriesTransfer::CosineSeriesTransfer(Eigen::VectorXd coefficients) : r_(std::move(coefficients)) {
    if (r_.size() < 1) throw ParameterError("cosine series needs at least r_0");
    if (!r_.allFinite()) throw ParameterError("cosine series coefficients must be finite");
}

double CosineSeriesTransfer::at(double omega) const {
    double acc = 0.0;
    for (Eigen::Index h = 1; h < r_.size(); ++h) acc += r_[h] * std::cos(static_cast<double>(h) * omega);
    return r_[0] + 2.0 * acc;
}

Eigen::VectorXd CosineSeriesTransfer::on_grid(Eigen::Index points) const {
    Eigen::VectorXd tail = r_;
    tail[0] = 0.0;
    return (2.0 * fourier_sum_on_grid(tail, points).real()).array() + r_[0];
}

std::shared_ptr<const CosineSeriesTransfer> smoothed_transfer(const TimeSeries& x, Eigen::Index m, SmoothingGrid grid) {
    if (m == 0) m = default_bandwidth(x.size());
    return std::make_shared<CosineSeriesTransfer>(smoothed_transfer_coefficients(x, m, grid));
}

MatrixTransfer::MatrixTransfer(VectorProcessSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Eigen::MatrixXcd MatrixTransfer::psi(double omega) const { return transfer_matrix(spec_, omega); }

Eigen::MatrixXcd MatrixTransfer::g(double omega) const { return power_transfer_matrix(spec_, omega); }

std::vector<Eigen::MatrixXcd> MatrixTransfer::psi_on_grid(Eigen::Index points) const {
    const Eigen::Index d = spec_.dim;
    std::vector<Eigen::MatrixXcd> out(static_cast<std::size_t>(points), Eigen::MatrixXcd(d, d));
    Eigen::VectorXd lags(spec_.order() + 1);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
            for (std::size_t j = 0; j < spec_.coeffs.size(); ++j) lags[static_cast<Eigen::Index>(j)] = spec_.coeffs[j](r, c);
            const Eigen::VectorXcd s = fourier_sum_on_grid(lags, points);
            for (Eigen::Index k = 0; k < points; ++k) out[static_cast<std::size_t>(k)](r, c) = s[k];
        }
    return out;
}

} // namespace sael
