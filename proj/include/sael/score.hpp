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

#ifndef SAEL_SCORE_HPP
#define SAEL_SCORE_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "sael/process.hpp"
#include "sael/rng.hpp"
#include "sael/spectral.hpp"

namespace sael {

/// Open box lower < theta < upper.
struct ThetaDomain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return lower.size(); }
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
    /// Throws DomainError when theta is outside the box or has the wrong size.
    void require(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
};

/**
 * Scalar spectral score f(omega; theta) > 0.
 *
 * Implementations provide f^{-1} and its theta-gradient; f itself is derived.
 */
class ScalarScore {
public:
    virtual ~ScalarScore() = default;

    virtual std::string name() const = 0;
    virtual const ThetaDomain& domain() const = 0;
    virtual double inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const = 0;
    virtual Eigen::VectorXd grad_inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const = 0;

    Eigen::Index dim_theta() const { return domain().dim(); }
    double eval(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const { return 1.0 / inv(omega, theta); }
    /// Domain check plus any score-specific admissibility test.
    virtual void check_theta(const Eigen::Ref<const Eigen::VectorXd>& theta) const { domain().require(theta); }
};

/// d x d Hermitian positive-definite score. grad_inv returns one matrix per theta component.
class MatrixScore {
public:
    virtual ~MatrixScore() = default;

    virtual std::string name() const = 0;
    virtual const ThetaDomain& domain() const = 0;
    virtual Eigen::Index dim() const = 0;
    virtual Eigen::MatrixXcd inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const = 0;
    virtual std::vector<Eigen::MatrixXcd> grad_inv(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const = 0;

    Eigen::Index dim_theta() const { return domain().dim(); }
    Eigen::MatrixXcd eval(double omega, const Eigen::Ref<const Eigen::VectorXd>& theta) const;
    virtual void check_theta(const Eigen::Ref<const Eigen::VectorXd>& theta) const { domain().require(theta); }
};

using ScalarScorePtr = std::shared_ptr<const ScalarScore>;
using MatrixScorePtr = std::shared_ptr<const MatrixScore>;

/// Either a scalar or a matrix score; exactly one pointer is set.
struct Score {
    ScalarScorePtr scalar;
    MatrixScorePtr matrix;

    bool is_matrix() const { return matrix != nullptr; }
    Eigen::Index dim_theta() const { return is_matrix() ? matrix->dim_theta() : scalar->dim_theta(); }
    const ThetaDomain& domain() const { return is_matrix() ? matrix->domain() : scalar->domain(); }
    std::string name() const { return is_matrix() ? matrix->name() : scalar->name(); }
};

/// f^{-1} = 1 - 2 theta cos(l omega) + theta^2 on (-1, 1).
ScalarScorePtr acf_score(int lag);

/**
 * f = (I - B e^{i omega})^{-1} (I - B e^{i omega})^{-*} with B = B0 + sum_k theta_k B_k.
 *
 * Parameter values with spectral radius of B >= 1 raise DomainError.
 */
MatrixScorePtr var1_score(Eigen::MatrixXd b0, std::vector<Eigen::MatrixXd> directions, ThetaDomain domain);

/// The two-dimensional family B = [[0.5, theta], [0.4, 0.2]], theta in (-1, 1).
MatrixScorePtr var1_coupling_score();

/// Score built from user callables. grad_inv must be supplied analytically.
ScalarScorePtr make_scalar_score(std::string name, ThetaDomain domain,
                                 std::function<double(double, const Eigen::VectorXd&)> inv,
                                 std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> grad_inv);

struct GradientCheck {
    double max_rel_error = 0.0;
    double worst_omega = 0.0;
    Eigen::VectorXd worst_theta;
};

/**
 * Compares grad_inv to central differences of 1/f (matrix inverse of f in the
 * matrix case) at `points` random (omega, theta). Relative error is
 * |analytic - fd| / max(|analytic|, 1e-3).
 */
GradientCheck check_gradient(const ScalarScore& score, Rng& rng, int points = 100, double step = 1e-5);
GradientCheck check_gradient(const MatrixScore& score, Rng& rng, int points = 100, double step = 1e-5);

/// Rows grad_inv(lambda_t) * I~(lambda_t) on the Fourier grid.
Eigen::MatrixXd estimating_function(const PeriodogramGrid& grid, const ScalarScore& score,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta);
Eigen::MatrixXd estimating_function(const TimeSeries& x, const ScalarScore& score,
                                    const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha);

/// Rows Re tr[d f^{-1}/d theta_k I_n(lambda_t)]; throws NumericalError if the imaginary residual exceeds 1e-10.
Eigen::MatrixXd estimating_function_mv(const MatrixPeriodogramGrid& grid, const MatrixScore& score,
                                       const Eigen::Ref<const Eigen::VectorXd>& theta);
Eigen::MatrixXd estimating_function_mv(const VectorTimeSeries& x, const MatrixScore& score,
                                       const Eigen::Ref<const Eigen::VectorXd>& theta, double alpha);

/**
 * Name -> factory map for scores selectable from configuration.
 *
 * Built-ins: "acf_lag" with {"l": int} and "var1" with
 * {"b0": [[..]], "directions": [[[..]]], "lower": [..], "upper": [..]};
 * "var1" without parameters is the two-dimensional coupling family.
 * Every score produced by make() passes the gradient self-test or make() throws.
 */
class ScoreRegistry {
public:
    using Factory = std::function<Score(const nlohmann::json&)>;

    static ScoreRegistry& instance();

    void add(const std::string& name, Factory factory);
    Score make(const std::string& name, const nlohmann::json& params = nlohmann::json::object()) const;
    std::vector<std::string> names() const;

private:
    ScoreRegistry();
    std::map<std::string, Factory> factories_;
};

/// Runs check_gradient with tolerance 1e-6; throws ValidationError on failure.
void self_test(const Score& score);

} // namespace sael

#endif // SAEL_SCORE_HPP
