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

#include "sael/score.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "sael/errors.hpp"

namespace sael {

using cd = std::complex<double>;

bool ThetaDomain::contains(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
    if (theta.size() != lower.size()) return false;
    return (theta.array() > lower.array()).all() && (theta.array() < upper.array()).all();
}

void ThetaDomain::require(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
    if (theta.size() != lower.size())
        throw DomainError("theta has " + std::to_string(theta.size()) + " components, expected " +
                          std::to_string(lower.size()));
    if (!contains(theta)) {
        std::ostringstream os;
        os << "theta = (" << theta.transpose() << ") outside the parameter domain";
        throw DomainError(os.str());
    }
}

Eigen::MatrixXcd MatrixScore::eval(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const {
    return inv(omega, theta).inverse();
}

// --- built-in scores ------------------------------------------------------

namespace {

ThetaDomain box(double lo, double hi) {
    return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
}

class AcfScore final : public ScalarScore {
public:
    explicit AcfScore(int lag) : lag_(lag), domain_(box(-1.0, 1.0)) {
        if (lag < 1) throw ParameterError("acf score lag must be at least 1");
    }

    std::string name() const override { return "acf_lag(" + std::to_string(lag_) + ")"; }
    const ThetaDomain& domain() const override { return domain_; }

    double inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        const double t = theta[0];
        return 1.0 - 2.0 * t * std::cos(lag_ * omega) + t * t;
    }

    Eigen::VectorXd grad_inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        return Eigen::VectorXd::Constant(1, -2.0 * std::cos(lag_ * omega) + 2.0 * theta[0]);
    }

private:
    int lag_;
    ThetaDomain domain_;
};

class Var1Score final : public MatrixScore {
public:
    Var1Score(Eigen::MatrixXd b0, std::vector<Eigen::MatrixXd> dirs, ThetaDomain domain)
        : b0_(std::move(b0)), dirs_(std::move(dirs)), domain_(std::move(domain)) {
        if (b0_.rows() != b0_.cols() || b0_.rows() < 1) throw ParameterError("var1: B0 must be square");
        if (dirs_.empty()) throw ParameterError("var1: at least one direction matrix is required");
        if (static_cast<Eigen::Index>(dirs_.size()) != domain_.dim())
            throw ParameterError("var1: domain dimension must equal the number of directions");
        for (const auto& d : dirs_)
            if (d.rows() != b0_.rows() || d.cols() != b0_.cols()) throw ParameterError("var1: direction shape mismatch");
        if (!((domain_.lower.array() < domain_.upper.array()).all()))
            throw ParameterError("var1: domain lower bounds must be below upper bounds");
    }

    std::string name() const override { return "var1"; }
    const ThetaDomain& domain() const override { return domain_; }
    Eigen::Index dim() const override { return b0_.rows(); }

    Eigen::MatrixXd coefficient(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
        Eigen::MatrixXd b = b0_;
        for (std::size_t k = 0; k < dirs_.size(); ++k) b += theta[static_cast<Eigen::Index>(k)] * dirs_[k];
        return b;
    }

    void check_theta(const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        domain_.require(theta);
        const double radius = coefficient(theta).eigenvalues().cwiseAbs().maxCoeff();
        if (!(radius < 1.0))
            throw DomainError("var1: spectral radius " + std::to_string(radius) + " of B_theta is not below 1");
    }

    Eigen::MatrixXcd inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        const Eigen::MatrixXcd a = lag_operator(omega, theta);
        return a.adjoint() * a;
    }

    std::vector<Eigen::MatrixXcd> grad_inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        const Eigen::MatrixXcd a = lag_operator(omega, theta);
        const cd phase = std::polar(1.0, omega);
        std::vector<Eigen::MatrixXcd> out;
        out.reserve(dirs_.size());
        for (const auto& d : dirs_) {
            const Eigen::MatrixXcd da = -phase * d.cast<cd>();
            out.push_back(da.adjoint() * a + a.adjoint() * da);
        }
        return out;
    }

private:
    Eigen::MatrixXcd lag_operator(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const {
        const Eigen::Index d = b0_.rows();
        return Eigen::MatrixXcd::Identity(d, d) - std::polar(1.0, omega) * coefficient(theta).cast<cd>();
    }

    Eigen::MatrixXd b0_;
    std::vector<Eigen::MatrixXd> dirs_;
    ThetaDomain domain_;
};

class FunctionalScore final : public ScalarScore {
public:
    FunctionalScore(std::string name, ThetaDomain domain, std::function<double(double, const Eigen::VectorXd&)> inv,
                    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> grad)
        : name_(std::move(name)), domain_(std::move(domain)), inv_(std::move(inv)), grad_(std::move(grad)) {}

    std::string name() const override { return name_; }
    const ThetaDomain& domain() const override { return domain_; }
    double inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        return inv_(omega, theta);
    }
    Eigen::VectorXd grad_inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const override {
        return grad_(omega, theta);
    }

private:
    std::string name_;
    ThetaDomain domain_;
    std::function<double(double, const Eigen::VectorXd&)> inv_;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> grad_;
};

} // namespace

ScalarScorePtr acf_score(int lag) { return std::make_shared<AcfScore>(lag); }

MatrixScorePtr var1_score(Eigen::MatrixXd b0, std::vector<Eigen::MatrixXd> directions, ThetaDomain domain) {
    return std::make_shared<Var1Score>(std::move(b0), std::move(directions), std::move(domain));
}

MatrixScorePtr var1_coupling_score() {
    Eigen::MatrixXd b0(2, 2);
    b0 << 0.5, 0.0, 0.4, 0.2;
    Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(2, 2);
    e12(0, 1) = 1.0;
    return var1_score(b0, {e12}, box(-1.0, 1.0));
}

ScalarScorePtr make_scalar_score(std::string name, ThetaDomain domain,
                                 std::function<double(double, const Eigen::VectorXd&)> inv,
                                 std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> grad_inv) {
    if (domain.lower.size() != domain.upper.size() || domain.dim() < 1)
        throw ParameterError("score domain bounds must be non-empty and of equal size");
    return std::make_shared<FunctionalScore>(std::move(name), std::move(domain), std::move(inv), std::move(grad_inv));
}

// --- gradient self-test ------------------------------------------------------

namespace {

template <class CheckTheta>
Eigen::VectorXd random_theta(const ThetaDomain& domain, Rng& rng, CheckTheta&& admissible) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Eigen::VectorXd theta(domain.dim());
        for (Eigen::Index k = 0; k < domain.dim(); ++k) {
            const double lo = domain.lower[k], hi = domain.upper[k];
            if (!std::isfinite(lo) || !std::isfinite(hi)) throw ParameterError("gradient check needs a bounded domain");
            theta[k] = lo + (hi - lo) * (0.05 + 0.9 * rng.uniform());
        }
        if (admissible(theta)) return theta;
    }
    throw DomainError("gradient check could not sample an admissible theta");
}

double random_omega(Rng& rng) { return -std::numbers::pi + 2.0 * std::numbers::pi * rng.uniform(); }

} // namespace

GradientCheck check_gradient(const ScalarScore& score, Rng& rng, int points, double step) {
    GradientCheck out;
    const auto admissible = [&](const Eigen::VectorXd& t) {
        try {
            score.check_theta(t);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };
    for (int i = 0; i < points; ++i) {
        const double omega = random_omega(rng);
        const Eigen::VectorXd theta = random_theta(score.domain(), rng, admissible);
        const Eigen::VectorXd analytic = score.grad_inv(omega, theta);
        Eigen::VectorXd fd(theta.size());
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
            Eigen::VectorXd up = theta, down = theta;
            up[k] += step;
            down[k] -= step;
            fd[k] = (1.0 / score.eval(omega, up) - 1.0 / score.eval(omega, down)) / (2.0 * step);
        }
        const double err = (analytic - fd).norm() / std::max(analytic.norm(), 1e-3);
        if (err >= out.max_rel_error) out = {err, omega, theta};
    }
    return out;
}

GradientCheck check_gradient(const MatrixScore& score, Rng& rng, int points, double step) {
    GradientCheck out;
    const auto admissible = [&](const Eigen::VectorXd& t) {
        try {
            score.check_theta(t);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };
    for (int i = 0; i < points; ++i) {
        const double omega = random_omega(rng);
        const Eigen::VectorXd theta = random_theta(score.domain(), rng, admissible);
        const auto analytic = score.grad_inv(omega, theta);
        double diff = 0.0, scale = 0.0;
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
            Eigen::VectorXd up = theta, down = theta;
            up[k] += step;
            down[k] -= step;
            const Eigen::MatrixXcd fd =
                (score.eval(omega, up).inverse() - score.eval(omega, down).inverse()) / (2.0 * step);
            diff += (analytic[static_cast<std::size_t>(k)] - fd).squaredNorm();
            scale += analytic[static_cast<std::size_t>(k)].squaredNorm();
        }
        const double err = std::sqrt(diff) / std::max(std::sqrt(scale), 1e-3);
        if (err >= out.max_rel_error) out = {err, omega, theta};
    }
    return out;
}

void self_test(const Score& score) {
    Rng rng(0x5C0AE);
    const GradientCheck check = score.is_matrix() ? check_gradient(*score.matrix, rng) : check_gradient(*score.scalar, rng);
    if (!(check.max_rel_error <= 1e-6)) {
        std::ostringstream os;
        os << "score '" << score.name() << "' failed the gradient self-test: relative error " << check.max_rel_error
           << " at omega=" << check.worst_omega << ", theta=(" << check.worst_theta.transpose() << ")";
        throw ValidationError(os.str());
    }
}

// --- estimating functions ----------------------------------------------------

Eigen::MatrixXd estimating_function(const PeriodogramGrid& grid, const ScalarScore& score,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta) {
    score.check_theta(theta);
    const Eigen::Index n = grid.freqs.size();
    Eigen::MatrixXd m(n, score.dim_theta());
    for (Eigen::Index t = 0; t < n; ++t) m.row(t) = score.grad_inv(grid.freqs[t], theta).transpose() * grid.values[t];
    return m;
}

Eigen::MatrixXd estimating_function(const TimeSeries& x, const ScalarScore& score,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha) {
    StableParams{alpha, 1.0}.validate_inference();
    return estimating_function(self_normalized_periodogram_grid(x), score, theta);
}

Eigen::MatrixXd estimating_function_mv(const MatrixPeriodogramGrid& grid, const MatrixScore& score,
                                       const Eigen::Ref<const Eigen::VectorXd>& theta) {
    score.check_theta(theta);
    const Eigen::Index n = grid.freqs.size();
    if (n > 0 && grid.values.front().rows() != score.dim())
        throw ValidationError("score dimension " + std::to_string(score.dim()) + " does not match series dimension " +
                              std::to_string(grid.values.front().rows()));
    Eigen::MatrixXd m(n, score.dim_theta());
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto grads = score.grad_inv(grid.freqs[t], theta);
        const Eigen::MatrixXcd& per = grid.values[static_cast<std::size_t>(t)];
        for (Eigen::Index k = 0; k < score.dim_theta(); ++k) {
            const Eigen::MatrixXcd& gk = grads[static_cast<std::size_t>(k)];
            const cd tr = (gk.transpose().array() * per.array()).sum();
            if (std::abs(tr.imag()) > 1e-10 * std::max(1.0, gk.norm() * per.norm()))
                throw NumericalError("estimating function: trace has imaginary part " + std::to_string(tr.imag()));
            m(t, k) = tr.real();
        }
    }
    return m;
}

Eigen::MatrixXd estimating_function_mv(const VectorTimeSeries& x, const MatrixScore& score,
                                       const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha) {
    StableParams{alpha, 1.0}.validate_inference();
    if (x.dim() != score.dim())
        throw ValidationError("score dimension " + std::to_string(score.dim()) + " does not match series dimension " +
                              std::to_string(x.dim()));
    return estimating_function_mv(periodogram_matrix_grid(x, alpha), score, theta);
}

// --- registry -----------------------------------------------------------------

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ParameterError("empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw ParameterError("ragged matrix");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

ScoreRegistry::ScoreRegistry() {
    factories_["acf_lag"] = [](const nlohmann::json& p) { return Score{acf_score(p.value("l", 2)), nullptr}; };
    factories_["var1"] = [](const nlohmann::json& p) {
        if (!p.contains("b0")) return Score{nullptr, var1_coupling_score()};
        std::vector<Eigen::MatrixXd> dirs;
        for (const auto& d : p.at("directions")) dirs.push_back(matrix_from_json(d));
        ThetaDomain dom{vector_from_json(p.at("lower")), vector_from_json(p.at("upper"))};
        return Score{nullptr, var1_score(matrix_from_json(p.at("b0")), std::move(dirs), std::move(dom))};
    };
}

ScoreRegistry& ScoreRegistry::instance() {
    static ScoreRegistry registry;
    return registry;
}

void ScoreRegistry::add(const std::string& name, Factory factory) {
    if (factories_.count(name)) throw ValidationError("score '" + name + "' is already registered");
    factories_[name] = std::move(factory);
}

Score ScoreRegistry::make(const std::string& name, const nlohmann::json& params) const {
    const auto it = factories_.find(name);
    if (it == factories_.end()) throw ValidationError("unknown score '" + name + "'");
    Score score;
    try {
        score = it->second(params);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("score '" + name + "' parameters: " + e.what());
    }
    self_test(score);
    return score;
}

std::vector<std::string> ScoreRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : factories_) out.push_back(k);
    return out;
}

} // namespace sael
