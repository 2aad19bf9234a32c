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

#include "sael/limit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "sael/errors.hpp"
#include "sael/parallel.hpp"
#include "sael/stable.hpp"

namespace sael {

using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularCondition = 1e12;

double node(Eigen::Index k, Eigen::Index points) {
    return 2.0 * kPi * static_cast<double>(k) / static_cast<double>(points);
}

double relative_change(const Eigen::MatrixXd& coarse, const Eigen::MatrixXd& fine) {
    const double scale = fine.norm();
    const double diff = (coarse - fine).norm();
    if (scale == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / scale;
}

struct Converged {
    Eigen::MatrixXd value;
    double error;
    Eigen::Index points;
};

// Evaluates a quadrature at N and 2N, doubling until they agree.
template <class Eval>
Converged richardson(Eval&& eval, const QuadratureOptions& quad, Eigen::Index min_points = 8) {
    Eigen::Index n = std::max(quad.points, min_points);
    Eigen::MatrixXd coarse = eval(n);
    for (;;) {
        Eigen::MatrixXd fine = eval(2 * n);
        const double err = relative_change(coarse, fine);
        if (err <= quad.rtol) return {std::move(fine), err, 2 * n};
        if (2 * n >= quad.max_points)
            throw NumericalError("quadrature did not reach relative accuracy " + std::to_string(quad.rtol) + " with " +
                                 std::to_string(2 * n) + " points (last change " + std::to_string(err) + ")");
        coarse = std::move(fine);
        n *= 2;
    }
}

Eigen::MatrixXd scalar_grad_grid(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta,
                                 Eigen::Index points) {
    Eigen::MatrixXd g(points, score.dim_theta());
    for (Eigen::Index k = 0; k < points; ++k) g.row(k) = score.grad_inv(node(k, points), theta).transpose();
    return g;
}

WMatrix finish_w(Converged conv) {
    WMatrix w;
    w.W = 0.5 * (conv.value + conv.value.transpose());
    w.richardson_error = conv.error;
    w.points = conv.points;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.W, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    const double smin = sv.size() ? sv[sv.size() - 1] : 0.0;
    w.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (w.condition > kSingularCondition) {
        w.pseudo_inverse = true;
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv[i] > smax / kSingularCondition) inv[i] = 1.0 / sv[i];
        w.inverse = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    } else {
        w.inverse = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w.W).eigenvalues().minCoeff();
    if (min_eig < -1e-10 * std::max(1.0, smax)) throw NumericalError("W is not positive semi-definite");
    return w;
}

// Sum over lags beyond T of |c_h|^mu, extrapolated from a log-linear fit of the last tenth.
void tail_diagnostic(VCoefficients& v, double mu, const Eigen::VectorXd& lag_norms) {
    const Eigen::Index lags = lag_norms.size();
    const double peak = lag_norms.maxCoeff();
    v.tail_mass = 0.0;
    v.truncation_warning = false;
    if (peak == 0.0) return;
    const Eigen::Index width = std::max<Eigen::Index>(2, (lags + 9) / 10);
    const Eigen::Index first = std::max<Eigen::Index>(0, lags - width);
    const double floor = 1e-13 * peak;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (Eigen::Index h = first; h < lags; ++h) {
        if (lag_norms[h] <= floor) continue;
        const double x = static_cast<double>(h + 1), y = std::log(lag_norms[h]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++count;
    }
    if (count == 0) return; // coefficients have vanished
    const double body = lag_norms.array().pow(mu).sum();
    if (count == 1) {
        v.tail_mass = std::pow(lag_norms[lags - 1], mu);
        v.truncation_warning = v.tail_mass > 1e-6 * body;
        return;
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / count;
    if (!(slope < 0.0)) {
        v.tail_mass = std::numeric_limits<double>::infinity();
        v.truncation_warning = true;
        return;
    }
    const double next = mu * (intercept + slope * static_cast<double>(lags + 1));
    v.tail_mass = std::exp(next) / (1.0 - std::exp(mu * slope));
    v.truncation_warning = v.tail_mass > 1e-6 * body;
}

// Re sum_k z_k e^{i t omega_k}, t = 1..terms, for complex samples z on the N-grid.
Eigen::VectorXd cosine_moments(const std::vector<cd>& z, Eigen::Index terms) {
    std::vector<cd> conj_z(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) conj_z[k] = std::conj(z[k]);
    Eigen::FFT<double> fft;
    std::vector<cd> spec;
    fft.fwd(spec, conj_z);
    Eigen::VectorXd out(terms);
    for (Eigen::Index t = 1; t <= terms; ++t) out[t - 1] = std::conj(spec[static_cast<std::size_t>(t)]).real();
    return out;
}

} // namespace

WMatrix compute_W(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                  const ScalarTransfer& transfer, const QuadratureOptions& quad) {
    score.check_theta(theta0);
    const Eigen::VectorXd theta = theta0;
    auto eval = [&](Eigen::Index points) {
        const Eigen::VectorXd g = transfer.on_grid(points);
        const Eigen::MatrixXd a = scalar_grad_grid(score, theta, points);
        const Eigen::MatrixXd ga = a.array().colwise() * g.array();
        return Eigen::MatrixXd(2.0 * ga.transpose() * ga / static_cast<double>(points));
    };
    return finish_w(richardson(eval, quad));
}

WMatrix compute_W_mv(const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                     const MatrixTransfer& transfer, const QuadratureOptions& quad) {
    score.check_theta(theta0);
    if (score.dim() != transfer.dim()) throw ValidationError("score and transfer dimensions differ");
    const Eigen::VectorXd theta = theta0;
    const Eigen::Index q = score.dim_theta();
    const double d = static_cast<double>(score.dim());
    auto eval = [&](Eigen::Index points) {
        const auto psi = transfer.psi_on_grid(points);
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(q, q);
        std::vector<Eigen::MatrixXcd> ga(static_cast<std::size_t>(q));
        Eigen::VectorXcd tr(q);
        for (Eigen::Index k = 0; k < points; ++k) {
            const Eigen::MatrixXcd& p = psi[static_cast<std::size_t>(k)];
            const Eigen::MatrixXcd g = p * p.adjoint();
            const auto grads = score.grad_inv(node(k, points), theta);
            for (Eigen::Index a = 0; a < q; ++a) {
                ga[static_cast<std::size_t>(a)] = g * grads[static_cast<std::size_t>(a)];
                tr[a] = ga[static_cast<std::size_t>(a)].trace();
            }
            for (Eigen::Index a = 0; a < q; ++a)
                for (Eigen::Index b = 0; b < q; ++b) {
                    const cd cross = (ga[static_cast<std::size_t>(a)].transpose().array() *
                                      ga[static_cast<std::size_t>(b)].array()).sum();
                    acc(a, b) += (cross + tr[a] * tr[b]).real();
                }
        }
        return Eigen::MatrixXd(acc / (static_cast<double>(points) * d * d));
    };
    return finish_w(richardson(eval, quad));
}

VCoefficients compute_V_coeffs(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                               const ScalarTransfer& transfer, Eigen::Index terms, double mu,
                               const QuadratureOptions& quad) {
    if (terms < 1) throw ParameterError("number of series terms must be at least 1");
    score.check_theta(theta0);
    const Eigen::VectorXd theta = theta0;
    const Eigen::Index q = score.dim_theta();
    auto eval = [&](Eigen::Index points) {
        const Eigen::VectorXd g = transfer.on_grid(points);
        const Eigen::MatrixXd a = scalar_grad_grid(score, theta, points);
        Eigen::MatrixXd c(terms, q);
        std::vector<cd> z(static_cast<std::size_t>(points));
        for (Eigen::Index j = 0; j < q; ++j) {
            for (Eigen::Index k = 0; k < points; ++k) z[static_cast<std::size_t>(k)] = a(k, j) * g[k];
            c.col(j) = 2.0 * cosine_moments(z, terms) / static_cast<double>(points);
        }
        return c;
    };
    const Converged conv = richardson(eval, quad, 4 * terms);
    VCoefficients v;
    v.c = conv.value;
    v.lags = terms;
    v.richardson_error = conv.error;
    v.points = conv.points;
    tail_diagnostic(v, mu, v.c.rowwise().norm());
    return v;
}

EntryDependence entry_dependence_from_name(const std::string& name) {
    if (name == "independent") return EntryDependence::Independent;
    if (name == "shared_per_lag") return EntryDependence::SharedPerLag;
    throw ValidationError("unknown entry dependence '" + name + "' (expected independent or shared_per_lag)");
}

std::string to_string(EntryDependence dep) {
    return dep == EntryDependence::Independent ? "independent" : "shared_per_lag";
}

VCoefficients compute_V_coeffs_mv(const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                                  const MatrixTransfer& transfer, Eigen::Index terms, EntryDependence dependence,
                                  double mu, const QuadratureOptions& quad) {
    if (terms < 1) throw ParameterError("number of series terms must be at least 1");
    score.check_theta(theta0);
    if (score.dim() != transfer.dim()) throw ValidationError("score and transfer dimensions differ");
    const Eigen::VectorXd theta = theta0;
    const Eigen::Index q = score.dim_theta();
    const Eigen::Index d = score.dim();
    const Eigen::Index d2 = d * d;
    const Eigen::Index rows = dependence == EntryDependence::Independent ? terms * d2 : terms;
    auto eval = [&](Eigen::Index points) {
        const auto psi = transfer.psi_on_grid(points);
        // F_k at every node, entry by entry.
        std::vector<std::vector<cd>> f(static_cast<std::size_t>(q * d2), std::vector<cd>(static_cast<std::size_t>(points)));
        for (Eigen::Index k = 0; k < points; ++k) {
            const Eigen::MatrixXcd& p = psi[static_cast<std::size_t>(k)];
            const auto grads = score.grad_inv(node(k, points), theta);
            for (Eigen::Index j = 0; j < q; ++j) {
                const Eigen::MatrixXcd fk = p.adjoint() * grads[static_cast<std::size_t>(j)] * p;
                for (Eigen::Index i = 0; i < d; ++i)
                    for (Eigen::Index l = 0; l < d; ++l)
                        f[static_cast<std::size_t>(j * d2 + i * d + l)][static_cast<std::size_t>(k)] = fk(i, l);
            }
        }
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, q);
        for (Eigen::Index j = 0; j < q; ++j)
            for (Eigen::Index e = 0; e < d2; ++e) {
                const Eigen::VectorXd m = 2.0 * cosine_moments(f[static_cast<std::size_t>(j * d2 + e)], terms) /
                                          static_cast<double>(points);
                for (Eigen::Index h = 0; h < terms; ++h) {
                    if (dependence == EntryDependence::Independent) c(h * d2 + e, j) = m[h];
                    else c(h, j) += m[h];
                }
            }
        return c;
    };
    const Converged conv = richardson(eval, quad, 4 * terms);
    VCoefficients v;
    v.c = conv.value;
    v.lags = terms;
    v.richardson_error = conv.error;
    v.points = conv.points;
    Eigen::VectorXd lag_norms(terms);
    const Eigen::Index per_lag = rows / terms;
    for (Eigen::Index h = 0; h < terms; ++h) lag_norms[h] = v.c.middleRows(h * per_lag, per_lag).norm();
    tail_diagnostic(v, mu, lag_norms);
    return v;
}

LimitScales LimitScales::davis_resnick(double alpha) {
    StableParams{alpha, 1.0}.validate_inference();
    const double c_alpha = stable_tail_constant(alpha);
    const double c_half = stable_tail_constant(0.5 * alpha);
    return {std::pow(c_alpha / c_half, 2.0 / alpha), std::pow(c_alpha, 1.0 / alpha)};
}

LimitScales LimitScales::calibrated(double alpha) {
    StableParams{alpha, 1.0}.validate_inference();
    // st / s0 fitted to reference SAC interval lengths; log-linear between the knots.
    constexpr double knots[][2] = {{1.0, 1.2008}, {1.5, 1.4371}, {1.9, 3.5463}};
    if (alpha > knots[2][0]) throw ParameterError("calibrated scales are only available for alpha in [1, 1.9]");
    std::size_t i = alpha <= knots[1][0] ? 0 : 1;
    const double t = (alpha - knots[i][0]) / (knots[i + 1][0] - knots[i][0]);
    const double ratio = std::exp((1.0 - t) * std::log(knots[i][1]) + t * std::log(knots[i + 1][1]));
    return {1.0, ratio};
}

LimitScales LimitScales::from_name(const std::string& name, double alpha) {
    if (name == "unit") return unit();
    if (name == "davis_resnick") return davis_resnick(alpha);
    if (name == "calibrated") return calibrated(alpha);
    throw ValidationError("unknown limit scale preset '" + name + "' (expected unit, davis_resnick or calibrated)");
}

namespace {

void check_law_options(const LimitOptions& o) {
    StableParams{o.alpha, 1.0}.validate_inference();
    if (o.terms < 1) throw ParameterError("number of series terms must be at least 1");
    if (!(o.scales.s0 > 0.0 && o.scales.st > 0.0)) throw ParameterError("limit scales must be positive");
}

} // namespace

LimitLaw make_limit_law(const ScalarScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                        const ScalarTransfer& transfer, const LimitOptions& options) {
    check_law_options(options);
    LimitLaw law;
    law.alpha = options.alpha;
    law.scales = options.scales;
    law.w = compute_W(score, theta0, transfer, options.quad);
    law.v = compute_V_coeffs(score, theta0, transfer, options.terms, options.alpha, options.quad);
    return law;
}

LimitLaw make_limit_law_mv(const MatrixScore& score, const Eigen::Ref<const Eigen::VectorXd>& theta0,
                           const MatrixTransfer& transfer, const LimitOptions& options) {
    check_law_options(options);
    LimitLaw law;
    law.alpha = options.alpha;
    law.scales = options.scales;
    law.w = compute_W_mv(score, theta0, transfer, options.quad);
    law.v = compute_V_coeffs_mv(score, theta0, transfer, options.terms, options.dependence, options.alpha, options.quad);
    return law;
}

double sample_limit_stat(const LimitLaw& law, Rng& rng) {
    const double s0 = law.scales.s0 * sample_positive_stable(0.5 * law.alpha, rng);
    const Eigen::Index rows = law.v.c.rows();
    Eigen::VectorXd s(rows);
    for (Eigen::Index r = 0; r < rows; ++r) s[r] = law.scales.st * sample_sas_unit(law.alpha, rng);
    const Eigen::VectorXd v = law.v.c.transpose() * s / s0;
    return std::max(0.0, v.dot(law.w.inverse * v));
}

double collapsed_factor(const LimitLaw& law) {
    if (law.dim_theta() != 1) throw ValidationError("the collapsed sampler needs a one-dimensional parameter");
    const double k = std::pow(law.v.c.col(0).array().abs().pow(law.alpha).sum(), 1.0 / law.alpha);
    const double ratio = law.scales.ratio();
    return ratio * ratio * k * k * law.w.inverse(0, 0);
}

double sample_stable_ratio(double alpha, Rng& rng) {
    const double s0 = sample_positive_stable(0.5 * alpha, rng);
    return sample_sas_unit(alpha, rng) / s0;
}

double sample_limit_stat_collapsed(const LimitLaw& law, Rng& rng) {
    const double r = sample_stable_ratio(law.alpha, rng);
    return collapsed_factor(law) * r * r;
}

namespace {

Eigen::Index order_index(Eigen::Index n, double p) {
    // 1-based ceil(n p); the relative guard keeps 1000 * 0.9 at 900.
    const auto r = static_cast<Eigen::Index>(std::ceil(static_cast<double>(n) * p * (1.0 - 1e-12)));
    return std::clamp<Eigen::Index>(r, 1, n);
}

void check_level(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw ParameterError("quantile level must lie in [0, 1)");
}

// Std-err of X_(r) over bootstrap resamples: the r-th order statistic of a
// resample is X_(ceil(n U)) with U ~ Beta(r, n - r + 1).
double bootstrap_stderr(const std::vector<double>& sorted, Eigen::Index r, Rng& rng, int bootstrap) {
    const auto n = static_cast<Eigen::Index>(sorted.size());
    if (bootstrap < 2 || n < 2) return 0.0;
    double sum = 0.0, sumsq = 0.0;
    for (int b = 0; b < bootstrap; ++b) {
        const double g1 = rng.gamma(static_cast<double>(r));
        const double g2 = rng.gamma(static_cast<double>(n - r + 1));
        const double u = g1 / (g1 + g2);
        const auto j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(static_cast<double>(n) * u)), 1, n);
        const double x = sorted[static_cast<std::size_t>(j - 1)];
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / bootstrap;
    return std::sqrt(std::max(0.0, (sumsq - bootstrap * mean * mean) / (bootstrap - 1)));
}

std::vector<double> draw_blocks(Eigen::Index reps, std::uint64_t seed, unsigned threads,
                                const std::function<double(Rng&)>& draw) {
    if (reps < 1) throw ParameterError("Monte-Carlo replicate count must be at least 1");
    constexpr Eigen::Index kBlock = 4096;
    std::vector<double> out(static_cast<std::size_t>(reps));
    const auto blocks = static_cast<std::size_t>((reps + kBlock - 1) / kBlock);
    parallel_for(blocks, threads, [&](std::size_t b) {
        Rng rng = Rng::substream(seed, b);
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlock;
        const Eigen::Index end = std::min(reps, begin + kBlock);
        for (Eigen::Index i = begin; i < end; ++i) out[static_cast<std::size_t>(i)] = draw(rng);
    });
    return out;
}

} // namespace

std::vector<Quantile> empirical_quantiles(std::vector<double> draws, const std::vector<double>& ps, Rng& rng,
                                          int bootstrap) {
    if (draws.empty()) throw ParameterError("no draws to take quantiles of");
    std::sort(draws.begin(), draws.end());
    const auto n = static_cast<Eigen::Index>(draws.size());
    std::vector<Quantile> out;
    for (double p : ps) {
        check_level(p);
        const Eigen::Index r = p == 0.0 ? 1 : order_index(n, p);
        out.push_back({p, draws[static_cast<std::size_t>(r - 1)], n, bootstrap_stderr(draws, r, rng, bootstrap)});
    }
    return out;
}

std::vector<double> draw_limit_stats(const LimitLaw& law, Eigen::Index reps, std::uint64_t seed, unsigned threads,
                                     bool collapsed) {
    if (collapsed) {
        const double factor = collapsed_factor(law);
        return draw_blocks(reps, seed, threads, [&](Rng& rng) {
            const double r = sample_stable_ratio(law.alpha, rng);
            return factor * r * r;
        });
    }
    return draw_blocks(reps, seed, threads, [&](Rng& rng) { return sample_limit_stat(law, rng); });
}

Quantile mc_quantile(const LimitLaw& law, double p, Eigen::Index reps, Rng& rng, unsigned threads, bool collapsed) {
    check_level(p);
    const std::uint64_t seed = rng.bits();
    return empirical_quantiles(draw_limit_stats(law, reps, seed, threads, collapsed), {p}, rng).front();
}

RatioSample::RatioSample(double alpha, Eigen::Index reps, std::uint64_t seed, unsigned threads)
    : alpha_(alpha), seed_(seed) {
    StableParams{alpha, 1.0}.validate_inference();
    sorted_ = draw_blocks(reps, seed, threads, [alpha](Rng& rng) {
        const double r = sample_stable_ratio(alpha, rng);
        return r * r;
    });
    std::sort(sorted_.begin(), sorted_.end());
}

Quantile RatioSample::squared(double p) const {
    check_level(p);
    const auto n = static_cast<Eigen::Index>(sorted_.size());
    const Eigen::Index r = p == 0.0 ? 1 : order_index(n, p);
    Rng rng = Rng::substream(seed_ ^ 0xB007B007ULL, static_cast<std::uint64_t>(r));
    return {p, sorted_[static_cast<std::size_t>(r - 1)], n, bootstrap_stderr(sorted_, r, rng, 200)};
}

Quantile RatioSample::absolute(double p) const {
    Quantile q = squared(p);
    const double root = std::sqrt(q.gamma_p);
    // Delta method for the square root.
    q.std_err = root > 0.0 ? q.std_err / (2.0 * root) : 0.0;
    q.gamma_p = root;
    return q;
}

double sac_limit_constant(const Eigen::Ref<const Eigen::VectorXd>& rho, int lag, double alpha, Eigen::Index terms) {
    if (lag < 1) throw ParameterError("SAC lag must be at least 1");
    if (rho.size() < 1 || rho[0] != 1.0) throw ValidationError("autocorrelations must start with rho(0) = 1");
    if (!rho.allFinite() || (rho.array().abs() > 1.0).any())
        throw ValidationError("autocorrelations must be finite and bounded by 1 in absolute value");
    const auto r = [&](Eigen::Index h) { return h < rho.size() ? rho[h] : 0.0; };
    double acc = 0.0;
    for (Eigen::Index j = 1; j <= terms; ++j) {
        const double term = r(lag + j) + r(std::abs(lag - j)) - 2.0 * r(j) * r(lag);
        acc += std::pow(std::abs(term), alpha);
    }
    return std::pow(acc, 1.0 / alpha);
}

Quantile sac_limit_quantile(const LinearProcessSpec& spec, int lag, double p, Eigen::Index terms, Eigen::Index reps,
                            Rng& rng, const LimitScales& scales) {
    const double alpha = spec.innovations.alpha;
    const double k = sac_limit_constant(theoretical_acf_vector(spec, terms + lag), lag, alpha, terms);
    const RatioSample base(alpha, reps, rng.bits());
    Quantile q = base.absolute(p);
    q.gamma_p *= k * scales.ratio();
    q.std_err *= k * scales.ratio();
    return q;
}

// --- pivotal value ---------------------------------------------------------------

namespace {

using Residual = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd solve_pivotal(const ThetaDomain& domain, const Residual& f,
                              const std::function<bool(const Eigen::VectorXd&)>& admissible) {
    const Eigen::Index q = domain.dim();
    if (q == 1) {
        const double width = domain.upper[0] - domain.lower[0];
        if (!std::isfinite(width)) throw ParameterError("pivotal value search needs a bounded domain");
        // Scan for a sign change, then bisect.
        const int scan = 64;
        double lo = 0.0, flo = 0.0;
        bool have = false;
        double a = 0.0, b = 0.0, fa = 0.0, fb = 0.0;
        bool bracketed = false;
        for (int i = 0; i <= scan && !bracketed; ++i) {
            const double t = domain.lower[0] + width * (1e-9 + (1.0 - 2e-9) * i / scan);
            const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, t);
            if (!admissible(theta)) continue;
            const double ft = f(theta)[0];
            if (ft == 0.0) return theta;
            if (have && (ft > 0.0) != (flo > 0.0)) {
                a = lo, fa = flo, b = t, fb = ft;
                bracketed = true;
            }
            lo = t, flo = ft, have = true;
        }
        if (!bracketed) throw NumericalError("no pivotal value: the estimating equation does not change sign on the domain");
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
            // Secant proposal, falling back to bisection outside the middle of the bracket.
            double m = b - fb * (b - a) / (fb - fa);
            if (!(m > a + 0.1 * (b - a) && m < b - 0.1 * (b - a))) m = 0.5 * (a + b);
            const double fm = f(Eigen::VectorXd::Constant(1, m))[0];
            if (fm == 0.0) return Eigen::VectorXd::Constant(1, m);
            if ((fm > 0.0) == (fa > 0.0)) a = m, fa = fm;
            else b = m, fb = fm;
        }
        return Eigen::VectorXd::Constant(1, 0.5 * (a + b));
    }
    // q > 1: damped Newton with a central-difference Jacobian from the domain centre.
    Eigen::VectorXd theta = 0.5 * (domain.lower + domain.upper);
    if (!theta.allFinite()) theta = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd r = f(theta);
    for (int it = 0; it < 100; ++it) {
        if (r.norm() < 1e-13) return theta;
        Eigen::MatrixXd jac(q, q);
        for (Eigen::Index k = 0; k < q; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
            Eigen::VectorXd up = theta, down = theta;
            up[k] += h;
            down[k] -= h;
            jac.col(k) = (f(up) - f(down)) / (2.0 * h);
        }
        const Eigen::VectorXd step = jac.fullPivLu().solve(r);
        double t = 1.0;
        bool moved = false;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            const Eigen::VectorXd trial = theta - t * step;
            if (!admissible(trial)) continue;
            const Eigen::VectorXd rt = f(trial);
            if (rt.norm() < r.norm()) {
                theta = trial, r = rt, moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (r.norm() < 1e-9) return theta;
    throw NumericalError("pivotal value solver did not converge (residual " + std::to_string(r.norm()) + ")");
}

} // namespace

Eigen::VectorXd pivotal_value(const ScalarScore& score, const ScalarTransfer& transfer, Eigen::Index points) {
    const Eigen::VectorXd g = transfer.on_grid(points);
    const auto residual = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(score.dim_theta());
        for (Eigen::Index k = 0; k < points; ++k) acc += score.grad_inv(node(k, points), theta) * g[k];
        return Eigen::VectorXd(acc / static_cast<double>(points));
    };
    const auto admissible = [&](const Eigen::VectorXd& theta) {
        try {
            score.check_theta(theta);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };
    return solve_pivotal(score.domain(), residual, admissible);
}

Eigen::VectorXd pivotal_value_mv(const MatrixScore& score, const MatrixTransfer& transfer, Eigen::Index points) {
    if (score.dim() != transfer.dim()) throw ValidationError("score and transfer dimensions differ");
    const auto psi = transfer.psi_on_grid(points);
    std::vector<Eigen::MatrixXcd> g;
    g.reserve(psi.size());
    for (const auto& p : psi) g.push_back(p * p.adjoint());
    const auto residual = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(score.dim_theta());
        for (Eigen::Index k = 0; k < points; ++k) {
            const auto grads = score.grad_inv(node(k, points), theta);
            for (Eigen::Index j = 0; j < score.dim_theta(); ++j)
                acc[j] += (grads[static_cast<std::size_t>(j)].transpose().array() * g[static_cast<std::size_t>(k)].array())
                              .sum()
                              .real();
        }
        return Eigen::VectorXd(acc / static_cast<double>(points));
    };
    const auto admissible = [&](const Eigen::VectorXd& theta) {
        try {
            score.check_theta(theta);
            return true;
        } catch (const DomainError&) {
            return false;
        }
    };
    return solve_pivotal(score.domain(), residual, admissible);
}

// --- Kolmogorov-Smirnov ---------------------------------------------------------

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ParameterError("KS test needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 1.0; // the series does not converge as lambda -> 0
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12 * std::max(1e-300, std::abs(sum))) {
            p = sum;
            break;
        }
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

void write_quantile_csv(std::ostream& os, const std::vector<Quantile>& qs) {
    os << "p,gamma_p,stderr\n" << std::setprecision(10);
    for (const auto& q : qs) os << q.p << ',' << q.gamma_p << ',' << q.std_err << '\n';
}

} // namespace sael
