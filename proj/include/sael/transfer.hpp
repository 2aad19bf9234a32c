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

#ifndef SAEL_TRANSFER_HPP
#define SAEL_TRANSFER_HPP

#include <memory>

#include <Eigen/Core>

#include "sael/process.hpp"
#include "sael/spectral.hpp"

namespace sael {

/**
 * Source of the normalized power transfer function g~(omega).
 *
 * on_grid(N) returns g~ at omega_k = 2 pi k / N, k = 0..N-1, the nodes of the
 * periodic trapezoid rule.
 */
class ScalarTransfer {
public:
    virtual ~ScalarTransfer() = default;
    virtual double at(double omega) const = 0;
    virtual Eigen::VectorXd on_grid(Eigen::Index points) const;
};

/// g~ from the MA coefficients of a scalar linear process.
class ExactTransfer final : public ScalarTransfer {
public:
    explicit ExactTransfer(LinearProcessSpec spec);
    double at(double omega) const override;
    Eigen::VectorXd on_grid(Eigen::Index points) const override;

private:
    LinearProcessSpec spec_;
};

/// g~(omega) = r_0 + 2 sum_{h >= 1} r_h cos(h omega).
class CosineSeriesTransfer final : public ScalarTransfer {
public:
    explicit CosineSeriesTransfer(Eigen::VectorXd coefficients);
    double at(double omega) const override;
    Eigen::VectorXd on_grid(Eigen::Index points) const override;
    const Eigen::VectorXd& coefficients() const { return r_; }

private:
    Eigen::VectorXd r_;
};

/// Smoothed self-normalized periodogram as a transfer estimate (m = floor(sqrt(n)) by default).
std::shared_ptr<const CosineSeriesTransfer> smoothed_transfer(const TimeSeries& x, Eigen::Index m = 0,
                                                              SmoothingGrid grid = SmoothingGrid::Fourier);

/// Transfer matrix Psi(omega) of a vector linear process; g = Psi Psi^*.
class MatrixTransfer {
public:
    explicit MatrixTransfer(VectorProcessSpec spec);
    Eigen::Index dim() const { return spec_.dim; }
    Eigen::MatrixXcd psi(double omega) const;
    Eigen::MatrixXcd g(double omega) const;
    /// Psi at omega_k = 2 pi k / N via one FFT per matrix entry.
    std::vector<Eigen::MatrixXcd> psi_on_grid(Eigen::Index points) const;

private:
    VectorProcessSpec spec_;
};

/// Fourier sums sum_j a_j e^{i j omega_k} at omega_k = 2 pi k / N for real a (aliased when a is longer than N).
Eigen::VectorXcd fourier_sum_on_grid(const Eigen::Ref<const Eigen::VectorXd>& a, Eigen::Index points);

} // namespace sael

#endif // SAEL_TRANSFER_HPP
