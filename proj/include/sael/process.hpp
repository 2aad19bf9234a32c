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

#ifndef SAEL_PROCESS_HPP
#define SAEL_PROCESS_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "sael/rng.hpp"
#include "sael/stable.hpp"

namespace sael {

/// Finite real series of length >= 2. Construction rejects NaN/inf.
class TimeSeries {
public:
    explicit TimeSeries(Eigen::VectorXd values);

    Eigen::Index size() const noexcept { return values_.size(); }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    double operator[](Eigen::Index t) const { return values_[t]; }

private:
    Eigen::VectorXd values_;
};

/// n x d series; row t is the observation X(t+1).
class VectorTimeSeries {
public:
    explicit VectorTimeSeries(Eigen::MatrixXd values);

    Eigen::Index size() const noexcept { return values_.rows(); }
    Eigen::Index dim() const noexcept { return values_.cols(); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    TimeSeries component(Eigen::Index k) const { return TimeSeries(values_.col(k)); }

private:
    Eigen::MatrixXd values_;
};

/// X(t) = sum_{j=0}^{J} psi_j Z(t - j), psi_0 = 1.
struct LinearProcessSpec {
    Eigen::VectorXd psi = Eigen::VectorXd::Ones(1);
    StableParams innovations;

    void validate() const;
    Eigen::Index order() const { return psi.size() - 1; }
};

/// X(t) = sum_{j=0}^{J} Psi(j) Z(t - j), Psi(0) = I, Z with independent SaS entries.
struct VectorProcessSpec {
    Eigen::Index dim = 1;
    std::vector<Eigen::MatrixXd> coeffs{Eigen::MatrixXd::Identity(1, 1)};
    StableParams innovations;

    void validate() const;
    Eigen::Index order() const { return static_cast<Eigen::Index>(coeffs.size()) - 1; }
};

/// psi_0 = 1, psi_j = b^j / j for 1 <= j <= order.
LinearProcessSpec ma_power_decay(double b, Eigen::Index order, StableParams innovations);

/// Psi(0) = I, Psi(j) = [[0.7^j, j^-2 b^j], [0, 0.5^j]] for 1 <= j <= order.
VectorProcessSpec vma_upper_triangular(double b, Eigen::Index order, StableParams innovations);

/// Applies the MA filter to innovations z of length n + J; returns length n.
Eigen::VectorXd filter_linear(const Eigen::VectorXd& psi, const Eigen::VectorXd& z);

/// Vector analogue: z is (n + J) x d.
Eigen::MatrixXd filter_vector_linear(const std::vector<Eigen::MatrixXd>& coeffs, const Eigen::MatrixXd& z);

/// Exact finite MA: draws n + J innovations, returns X(1..n). Requires n >= 2.
TimeSeries simulate_linear(const LinearProcessSpec& spec, Eigen::Index n, Rng& rng);

/// Innovations are drawn time-major (all d entries of Z(t) before Z(t+1)).
VectorTimeSeries simulate_vector_linear(const VectorProcessSpec& spec, Eigen::Index n, Rng& rng);

/// |sum psi_j e^{ij omega}|^2 / sum psi_j^2.
double normalized_transfer(const LinearProcessSpec& spec, double omega);

/// Psi(omega) = sum_j Psi(j) e^{ij omega}.
Eigen::MatrixXcd transfer_matrix(const VectorProcessSpec& spec, double omega);

/// g(omega) = Psi(omega) Psi(omega)^*.
Eigen::MatrixXcd power_transfer_matrix(const VectorProcessSpec& spec, double omega);

/// rho(l) = sum psi_j psi_{j+l} / sum psi_j^2; zero beyond the order.
double theoretical_acf(const LinearProcessSpec& spec, Eigen::Index lag);

/// rho(0..max_lag).
Eigen::VectorXd theoretical_acf_vector(const LinearProcessSpec& spec, Eigen::Index max_lag);

// JSON schema (all fields at the top level):
//   scalar: {"alpha": 1.5, "scale": 1.0, "psi": [1, ...]}
//           or {"alpha": ..., "generator": {"type": "ma_power", "b": 0.5, "order": 100}}
//   vector: {"alpha": ..., "scale": ..., "dim": 2, "coeffs": [[[1,0],[0,1]], ...]}
//           or {"alpha": ..., "dim": 2, "generator": {"type": "vma_upper", "b": 0.3, "order": 100}}
LinearProcessSpec linear_spec_from_json(const nlohmann::json& j);
VectorProcessSpec vector_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LinearProcessSpec& spec);
nlohmann::json to_json(const VectorProcessSpec& spec);

/// True when the JSON object describes a vector process ("dim" or "coeffs" present).
bool is_vector_spec(const nlohmann::json& j);

} // namespace sael

#endif // SAEL_PROCESS_HPP
