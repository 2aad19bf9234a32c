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

#include "sael/process.hpp"

#include <cmath>
#include <complex>

#include "sael/errors.hpp"

namespace sael {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j)))
                throw ValidationError(std::string(what) + ": non-finite entry at row " + std::to_string(i + 1));
}

} // namespace

TimeSeries::TimeSeries(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() < 2) throw ValidationError("time series needs at least 2 observations");
    require_finite(values_, "time series");
}

VectorTimeSeries::VectorTimeSeries(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 2) throw ValidationError("vector time series needs at least 2 observations");
    if (values_.cols() < 1) throw ValidationError("vector time series needs at least one component");
    require_finite(values_, "vector time series");
}

void LinearProcessSpec::validate() const {
    innovations.validate();
    if (psi.size() < 1) throw ParameterError("psi must contain psi_0");
    if (psi[0] != 1.0) throw ParameterError("psi_0 must equal 1");
    require_finite(psi, "psi");
}

void VectorProcessSpec::validate() const {
    innovations.validate();
    if (dim < 1) throw ParameterError("dimension must be at least 1");
    if (coeffs.empty()) throw ParameterError("coefficient list must contain Psi(0)");
    for (const auto& c : coeffs) {
        if (c.rows() != dim || c.cols() != dim) throw ParameterError("coefficient matrices must be dim x dim");
        require_finite(c, "coefficient matrix");
    }
    if (coeffs.front() != Eigen::MatrixXd::Identity(dim, dim))
        throw ParameterError("Psi(0) must be the identity");
}

LinearProcessSpec ma_power_decay(double b, Eigen::Index order, StableParams innovations) {
    LinearProcessSpec spec;
    spec.psi.resize(order + 1);
    spec.psi[0] = 1.0;
    for (Eigen::Index j = 1; j <= order; ++j) spec.psi[j] = std::pow(b, static_cast<double>(j)) / static_cast<double>(j);
    spec.innovations = innovations;
    return spec;
}

VectorProcessSpec vma_upper_triangular(double b, Eigen::Index order, StableParams innovations) {
    VectorProcessSpec spec;
    spec.dim = 2;
    spec.innovations = innovations;
    spec.coeffs.assign(1, Eigen::MatrixXd::Identity(2, 2));
    for (Eigen::Index j = 1; j <= order; ++j) {
        const double jd = static_cast<double>(j);
        Eigen::MatrixXd a(2, 2);
        a << std::pow(0.7, jd), std::pow(b, jd) / (jd * jd), 0.0, std::pow(0.5, jd);
        spec.coeffs.push_back(a);
    }
    return spec;
}

Eigen::VectorXd filter_linear(const Eigen::VectorXd& psi, const Eigen::VectorXd& z) {
    const Eigen::Index order = psi.size() - 1;
    const Eigen::Index n = z.size() - order;
    if (n < 1) throw ParameterError("innovation stream shorter than filter order");
    Eigen::VectorXd x(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j <= order; ++j) acc += psi[j] * z[t + order - j];
        x[t] = acc;
    }
    return x;
}

Eigen::MatrixXd filter_vector_linear(const std::vector<Eigen::MatrixXd>& coeffs, const Eigen::MatrixXd& z) {
    const Eigen::Index order = static_cast<Eigen::Index>(coeffs.size()) - 1;
    const Eigen::Index n = z.rows() - order;
    if (n < 1) throw ParameterError("innovation stream shorter than filter order");
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, z.cols());
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index j = 0; j <= order; ++j)
            x.row(t).noalias() += z.row(t + order - j) * coeffs[j].transpose();
    return x;
}

TimeSeries simulate_linear(const LinearProcessSpec& spec, Eigen::Index n, Rng& rng) {
    spec.validate();
    if (n < 2) throw ParameterError("simulated length must be at least 2");
    const Eigen::VectorXd z = sample_sas(spec.innovations, n + spec.order(), rng);
    return TimeSeries(filter_linear(spec.psi, z));
}

VectorTimeSeries simulate_vector_linear(const VectorProcessSpec& spec, Eigen::Index n, Rng& rng) {
    spec.validate();
    if (n < 2) throw ParameterError("simulated length must be at least 2");
    const double c = spec.innovations.standard_scale();
    Eigen::MatrixXd z(n + spec.order(), spec.dim);
    for (Eigen::Index t = 0; t < z.rows(); ++t)
        for (Eigen::Index k = 0; k < spec.dim; ++k) z(t, k) = c * sample_sas_unit(spec.innovations.alpha, rng);
    return VectorTimeSeries(filter_vector_linear(spec.coeffs, z));
}

double normalized_transfer(const LinearProcessSpec& spec, double omega) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index j = 0; j < spec.psi.size(); ++j)
        acc += spec.psi[j] * std::polar(1.0, static_cast<double>(j) * omega);
    return std::norm(acc) / spec.psi.squaredNorm();
}

Eigen::MatrixXcd transfer_matrix(const VectorProcessSpec& spec, double omega) {
    Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(spec.dim, spec.dim);
    for (std::size_t j = 0; j < spec.coeffs.size(); ++j)
        psi += spec.coeffs[j].cast<std::complex<double>>() * std::polar(1.0, static_cast<double>(j) * omega);
    return psi;
}

Eigen::MatrixXcd power_transfer_matrix(const VectorProcessSpec& spec, double omega) {
    const Eigen::MatrixXcd psi = transfer_matrix(spec, omega);
    return psi * psi.adjoint();
}

double theoretical_acf(const LinearProcessSpec& spec, Eigen::Index lag) {
    if (lag < 0) throw ParameterError("lag must be non-negative");
    if (lag == 0) return 1.0;
    const Eigen::Index len = spec.psi.size();
    if (lag >= len) return 0.0;
    return spec.psi.head(len - lag).dot(spec.psi.tail(len - lag)) / spec.psi.squaredNorm();
}

Eigen::VectorXd theoretical_acf_vector(const LinearProcessSpec& spec, Eigen::Index max_lag) {
    Eigen::VectorXd rho(max_lag + 1);
    for (Eigen::Index l = 0; l <= max_lag; ++l) rho[l] = theoretical_acf(spec, l);
    return rho;
}

// --- JSON ---------------------------------------------------------------

namespace {

StableParams params_from_json(const nlohmann::json& j) {
    StableParams p;
    p.alpha = j.at("alpha").get<double>();
    p.scale = j.value("scale", 1.0);
    p.validate();
    return p;
}

} // namespace

bool is_vector_spec(const nlohmann::json& j) { return j.contains("dim") || j.contains("coeffs"); }

LinearProcessSpec linear_spec_from_json(const nlohmann::json& j) {
    try {
        LinearProcessSpec spec;
        spec.innovations = params_from_json(j);
        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            const auto type = g.at("type").get<std::string>();
            if (type != "ma_power") throw ParameterError("unknown scalar generator '" + type + "'");
            spec = ma_power_decay(g.at("b").get<double>(), g.value("order", 100), spec.innovations);
        } else {
            const auto psi = j.at("psi").get<std::vector<double>>();
            spec.psi = Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("process spec: ") + e.what());
    }
}

VectorProcessSpec vector_spec_from_json(const nlohmann::json& j) {
    try {
        VectorProcessSpec spec;
        spec.innovations = params_from_json(j);
        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            const auto type = g.at("type").get<std::string>();
            if (type != "vma_upper") throw ParameterError("unknown vector generator '" + type + "'");
            spec = vma_upper_triangular(g.at("b").get<double>(), g.value("order", 100), spec.innovations);
        } else {
            const auto raw = j.at("coeffs").get<std::vector<std::vector<std::vector<double>>>>();
            spec.dim = j.value("dim", raw.empty() ? 0 : static_cast<Eigen::Index>(raw.front().size()));
            spec.coeffs.clear();
            for (const auto& m : raw) {
                Eigen::MatrixXd a(spec.dim, spec.dim);
                if (static_cast<Eigen::Index>(m.size()) != spec.dim) throw ParameterError("coefficient matrices must be dim x dim");
                for (Eigen::Index r = 0; r < spec.dim; ++r) {
                    if (static_cast<Eigen::Index>(m[r].size()) != spec.dim)
                        throw ParameterError("coefficient matrices must be dim x dim");
                    for (Eigen::Index c = 0; c < spec.dim; ++c) a(r, c) = m[r][c];
                }
                spec.coeffs.push_back(a);
            }
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("vector process spec: ") + e.what());
    }
}

nlohmann::json to_json(const LinearProcessSpec& spec) {
    return {{"alpha", spec.innovations.alpha},
            {"scale", spec.innovations.scale},
            {"psi", std::vector<double>(spec.psi.data(), spec.psi.data() + spec.psi.size())}};
}

nlohmann::json to_json(const VectorProcessSpec& spec) {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& a : spec.coeffs) {
        nlohmann::json m = nlohmann::json::array();
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(a.cols()));
            for (Eigen::Index c = 0; c < a.cols(); ++c) row[static_cast<std::size_t>(c)] = a(r, c);
            m.push_back(row);
        }
        coeffs.push_back(m);
    }
    return {{"alpha", spec.innovations.alpha}, {"scale", spec.innovations.scale}, {"dim", spec.dim}, {"coeffs", coeffs}};
}

} // namespace sael
