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

#ifndef SAEL_LIMIT_HPP
#define SAEL_LIMIT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sael/process.hpp"
#include "sael/rng.hpp"
#include "sael/score.hpp"
#include "sael/transfer.hpp"

namespace sael {

/// Periodic trapezoid rule on omega_k = 2 pi k / N; N doubles until N and 2N agree to rtol.
struct QuadratureOptions {
    Eigen::Index points = 4096;
    double rtol = 1e-6;
    Eigen::Index max_points = 1 << 17;
};

struct WMatrix {
    Eigen::MatrixXd W;
    /// W^{-1}, or the Moore-Penrose inverse when pseudo_inverse is set.
    Eigen::MatrixXd inverse;
    double condition = 1.0;
    bool pseudo_inverse = false;
    /// |W_N - W_2N| / |W_2N| at the accepted N.
    double richardson_error = 0.0;
    Eigen::Index points = 0;
};

/// (1/2 pi) int d_k f^{-1} d_l f^{-1} 2 g~^2.
WMatrix compute_W(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                  const ScalarTransfer& transfer, const QuadratureOptions& quad = {});

/// (1 / 2 pi d^2) int (tr[g A_a g A_b] + tr[g A_a] tr[g A_b]), A_k = d_k f^{-1}.
WMatrix compute_W_mv(const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                     const MatrixTransfer& transfer, const QuadratureOptions& quad = {});

/**
 * Coefficients of the stable series V = sum_r (S_r / S_0) c_r.
 *
 * Scalar: row t-1 holds c_t = (1/pi) int d f^{-1} g~ cos(t omega), t = 1..T.
 * Multivariate: c_{h,ij} = (1/pi) int Re(F_ij e^{i h omega}), F = Psi^* d f^{-1} Psi,
 * one row per (h, i, j) (row (h-1) d^2 + i d + j) for independent entries, or one
 * row per lag holding sum_ij c_{h,ij} when the entries share a draw.
 */
struct VCoefficients {
    Eigen::MatrixXd c;
    Eigen::Index lags = 0;
    /// Estimated sum over lags beyond T of |c_h|^mu from the decay over the last tenth of the lags.
    double tail_mass = 0.0;
    bool truncation_warning = false;
    double richardson_error = 0.0;
    Eigen::Index points = 0;
};

VCoefficients compute_V_coeffs(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                               const ScalarTransfer& transfer, Eigen::Index terms = 200, double mu = 1.5,
                               const QuadratureOptions& quad = {});

/// How the stable entries S(h)_ij of the multivariate series relate within a lag.
enum class EntryDependence { Independent, SharedPerLag };

EntryDependence entry_dependence_from_name(const std::string& name);
std::string to_string(EntryDependence dep);

VCoefficients compute_V_coeffs_mv(const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                                  const MatrixTransfer& transfer, Eigen::Index terms = 200,
                                  EntryDependence dependence = EntryDependence::Independent, double mu = 1.5,
                                  const QuadratureOptions& quad = {});

/**
 * Multipliers applied to the unit draws of S_0 (positive alpha/2-stable) and
 * S_t (SaS). "unit" leaves both at 1. "davis_resnick" matches the tail
 * constants of the sums of squares and of the lag products of unit SaS noise:
 * S_t scale C_alpha^{1/alpha}, S_0 scale (C_alpha / C_{alpha/2})^{2/alpha}.
 * "calibrated" keeps s0 = 1 and sets st to an empirically fitted ratio,
 * available for alpha in [1, 1.9].
 */
struct LimitScales {
    double s0 = 1.0;
    double st = 1.0;

    static LimitScales unit() { return {}; }
    static LimitScales davis_resnick(double alpha);
    static LimitScales calibrated(double alpha);
    static LimitScales from_name(const std::string& name, double alpha);
    double ratio() const { return st / s0; }
};

struct LimitLaw {
    double alpha = 1.5;
    WMatrix w;
    VCoefficients v;
    LimitScales scales;

    Eigen::Index dim_theta() const { return w.W.rows(); }
};

struct LimitOptions {
    double alpha = 1.5;
    Eigen::Index terms = 200;
    QuadratureOptions quad;
    LimitScales scales;
    EntryDependence dependence = EntryDependence::Independent;
};

LimitLaw make_limit_law(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                        const ScalarTransfer& transfer, const LimitOptions& options);
LimitLaw make_limit_law_mv(const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                           const MatrixTransfer& transfer, const LimitOptions& options);

/// One draw of V' W^{-1} V with every S_r drawn explicitly.
double sample_limit_stat(const LimitLaw& law, Rng& rng);

/**
 * For q = 1: V' W^{-1} V equals ratio^2 K^2 / W (S_1/S_0)^2 in law, with
 * K = (sum_r |c_r|^alpha)^{1/alpha}. Returns that multiplier of (S_1/S_0)^2.
 */
double collapsed_factor(const LimitLaw& law);

/// One draw of collapsed_factor * (S_1/S_0)^2.
double sample_limit_stat_collapsed(const LimitLaw& law, Rng& rng);

/// (S_1 / S_0) with unit scales; the building block of the collapsed samplers.
double sample_stable_ratio(double alpha, Rng& rng);

struct Quantile {
    double p = 0.0;
    double gamma_p = 0.0;
    Eigen::Index reps = 0;
    double std_err = 0.0;
};

/// X_(ceil(n p)) (p = 0 gives the minimum); std-err from `bootstrap` order-statistic resamples.
std::vector<Quantile> empirical_quantiles(std::vector<double> draws, const std::vector<double>& ps, Rng& rng,
                                          int bootstrap = 200);

/// reps draws of sample_limit_stat (or the collapsed form), in blocks with substreams of one master seed.
std::vector<double> draw_limit_stats(const LimitLaw& law, Eigen::Index reps, std::uint64_t seed, unsigned threads = 1,
                                     bool collapsed = false);

Quantile mc_quantile(const LimitLaw& law, double p, Eigen::Index reps, Rng& rng, unsigned threads = 1,
                     bool collapsed = false);

/**
 * Sorted sample of (S_1/S_0)^2 at unit scale, shared by every q = 1 threshold
 * drawn from the same (alpha, seed): gamma_p = collapsed_factor * Q_p.
 */
class RatioSample {
public:
    RatioSample(double alpha, Eigen::Index reps, std::uint64_t seed, unsigned threads = 1);

    double alpha() const { return alpha_; }
    Eigen::Index reps() const { return static_cast<Eigen::Index>(sorted_.size()); }
    /// p-quantile of (S_1/S_0)^2 with bootstrap std-err.
    Quantile squared(double p) const;
    /// p-quantile of |S_1/S_0| (the square root of squared(p)).
    Quantile absolute(double p) const;

private:
    double alpha_;
    std::vector<double> sorted_;
    std::uint64_t seed_;
};

/// K = {sum_{j=1}^{terms} |rho(l+j) + rho(|l-j|) - 2 rho(j) rho(l)|^alpha}^{1/alpha}; rho beyond its length is 0.
double sac_limit_constant(const Eigen::Ref<const Eigen::VectorXd>& rho, int lag, double alpha, Eigen::Index terms = 200);

/// p-quantile of K |S_1/S_0| scaled by scales.ratio(), with rho from the process spec.
Quantile sac_limit_quantile(const LinearProcessSpec& spec, int lag, double p, Eigen::Index terms, Eigen::Index reps,
                            Rng& rng, const LimitScales& scales = {});

/// Pivotal value: root of int d f^{-1} g~ (scalar) or int tr[d f^{-1} g] (matrix) over the domain.
Eigen::VectorXd pivotal_value(const ScalarScore& score, const ScalarTransfer& transfer, Eigen::Index points = 4096);
Eigen::VectorXd pivotal_value_mv(const MatrixScore& score, const MatrixTransfer& transfer, Eigen::Index points = 4096);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// CSV "p,gamma_p,stderr".
void write_quantile_csv(std::ostream& os, const std::vector<Quantile>& qs);

} // namespace sael

#endif // SAEL_LIMIT_HPP
