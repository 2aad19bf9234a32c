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


#include "sael/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "sael/el.hpp"
#include "sael/errors.hpp"
#include "sael/parallel.hpp"
#include "sael/stable.hpp"
#include "sael/transfer.hpp"

namespace sael {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kRatioStream = 0x52A7105A3B1E5EEDULL;
constexpr std::uint64_t kLimitStream = 0x11A17D157ULL;

} // namespace

// --- grids and regions ----------------------------------------------------------

Eigen::VectorXd ThetaGrid::points() const {
    const auto count = static_cast<Eigen::Index>(std::floor((max - min) / step + 1e-9)) + 1;
    Eigen::VectorXd p(count);
    for (Eigen::Index k = 0; k < count; ++k) p[k] = min + static_cast<double>(k) * step;
    return p;
}

void ThetaGrid::validate(const ThetaDomain& domain) const {
    if (!(std::isfinite(min) && std::isfinite(max) && std::isfinite(step)) || !(step > 0.0) || max < min)
        throw ValidationError("theta grid needs finite min <= max and step > 0");
    if (domain.dim() != 1) throw ValidationError("theta grids are one-dimensional; the score has " +
                                                 std::to_string(domain.dim()) + " parameters");
    const Eigen::VectorXd p = points();
    if (!(p[0] > domain.lower[0] && p[p.size() - 1] < domain.upper[0]))
        throw ValidationError("theta grid leaves the score domain");
}

std::string to_string(Method m) { return m == Method::EL ? "EL" : "SAC"; }

void ConfidenceInterval::check_coverage(double theta0) {
    covered = !empty && lower <= theta0 && theta0 <= upper;
}

Eigen::Index ELRegion::accepted_count() const {
    return static_cast<Eigen::Index>(std::count(accepted.begin(), accepted.end(), true));
}

namespace {

template <class Moments, class Check>
ELRegion scan_region(const Eigen::Ref<const Eigen::MatrixXd>& theta, double gamma, double alpha, Moments&& moments,
                     Check&& check) {
    if (!(gamma >= 0.0)) throw ParameterError("threshold gamma must be non-negative");
    ELRegion region;
    region.theta = theta;
    region.gamma = gamma;
    region.statistic = Eigen::VectorXd::Constant(theta.rows(), kInf);
    region.accepted.assign(static_cast<std::size_t>(theta.rows()), false);
    std::optional<Eigen::VectorXd> warm;
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
        const Eigen::VectorXd t = theta.row(i).transpose();
        try {
            check(t);
        } catch (const DomainError&) {
            ++region.inadmissible;
            warm.reset();
            continue;
        }
        const Eigen::MatrixXd m = moments(t);
        ELResult res;
        try {
            res = el_from_moments(m, alpha, warm);
        } catch (const SolverError&) {
            try {
                res = el_from_moments(m, alpha);
            } catch (const SolverError&) {
                ++region.solver_failures;
                warm.reset();
                continue;
            }
        }
        if (!res.hull_ok) {
            ++region.hull_failures;
            warm.reset();
            continue;
        }
        warm = res.phi;
        region.statistic[i] = res.statistic;
        region.accepted[static_cast<std::size_t>(i)] = res.statistic < gamma;
    }
    region.interval.method = Method::EL;
    if (theta.cols() == 1) {
        for (Eigen::Index i = 0; i < theta.rows(); ++i) {
            if (!region.accepted[static_cast<std::size_t>(i)]) continue;
            const double t = theta(i, 0);
            if (region.interval.empty) region.interval.lower = region.interval.upper = t;
            region.interval.lower = std::min(region.interval.lower, t);
            region.interval.upper = std::max(region.interval.upper, t);
            region.interval.empty = false;
        }
    }
    return region;
}

} // namespace

ELRegion el_confidence_region(const PeriodogramGrid& grid, const ScalarScore& score,
                              const Eigen::Ref<const Eigen::MatrixXd>& theta, double gamma, double alpha) {
    if (theta.cols() != score.dim_theta()) throw ValidationError("theta points have the wrong dimension");
    return scan_region(
        theta, gamma, alpha, [&](const Eigen::VectorXd& t) { return estimating_function(grid, score, t); },
        [&](const Eigen::VectorXd& t) { score.check_theta(t); });
}

ELRegion el_confidence_region(const MatrixPeriodogramGrid& grid, const MatrixScore& score,
                              const Eigen::Ref<const Eigen::MatrixXd>& theta, double gamma, double alpha) {
    if (theta.cols() != score.dim_theta()) throw ValidationError("theta points have the wrong dimension");
    return scan_region(
        theta, gamma, alpha, [&](const Eigen::VectorXd& t) { return estimating_function_mv(grid, score, t); },
        [&](const Eigen::VectorXd& t) { score.check_theta(t); });
}

double sample_autocorrelation(const TimeSeries& x, int lag) {
    const Eigen::Index n = x.size();
    if (lag < 1 || lag >= n) throw ParameterError("autocorrelation lag must satisfy 1 <= l < n");
    const double ss = x.values().squaredNorm();
    if (!(ss > 0.0)) throw DegenerateSeriesError("series has zero sum of squares");
    return x.values().head(n - lag).dot(x.values().tail(n - lag)) / ss;
}

ConfidenceInterval sac_confidence_interval(const TimeSeries& x, int lag, double quantile, double alpha) {
    if (!(quantile >= 0.0)) throw ParameterError("SAC quantile must be non-negative");
    const double centre = sample_autocorrelation(x, lag);
    const double half = quantile / x_n(x.size(), alpha);
    ConfidenceInterval ci;
    ci.method = Method::SAC;
    ci.lower = centre - half;
    ci.upper = centre + half;
    ci.empty = false;
    return ci;
}

// --- configuration ----------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
    if (n < 8) throw ValidationError("sample size n must be at least 8");
    if (replicates < 1) throw ValidationError("replicates must be at least 1");
    if (reps < 1000) throw ValidationError("Monte-Carlo reps must be at least 1000");
    if (terms < 1) throw ValidationError("terms must be at least 1");
    if (hill_k < 0) throw ValidationError("hill_k must be non-negative");
    if (gamma && !(*gamma >= 0.0)) throw ValidationError("gamma must be non-negative");
    scales_from_json(scales, alpha.value_or(1.5));
    if (process.is_null() && input.empty()) throw ValidationError("config needs a process spec or an input file");
    if (!(grid.step > 0.0) || grid.max < grid.min) throw ValidationError("theta grid needs min <= max and step > 0");
}

LimitScales scales_from_json(const nlohmann::json& j, double alpha) {
    if (j.is_string()) return LimitScales::from_name(j.get<std::string>(), alpha);
    if (!j.is_object()) throw ValidationError("scales must be a preset name or {\"s0\": .., \"st\": ..}");
    LimitScales s;
    for (const auto& [key, v] : j.items()) {
        if (!v.is_number()) throw ValidationError("scale '" + key + "' must be a number");
        if (key == "s0") s.s0 = v.get<double>();
        else if (key == "st") s.st = v.get<double>();
        else throw ValidationError("unknown scales key '" + key + "'");
    }
    if (!(s.s0 > 0.0 && s.st > 0.0 && std::isfinite(s.s0) && std::isfinite(s.st)))
        throw ValidationError("scales must be positive and finite");
    return s;
}

namespace {

AlphaSource alpha_source_from_name(const std::string& s) {
    if (s == "known") return AlphaSource::Known;
    if (s == "hill") return AlphaSource::Hill;
    throw ValidationError("unknown alpha_source '" + s + "' (expected known or hill)");
}

TransferSource transfer_from_name(const std::string& s) {
    if (s == "exact") return TransferSource::Exact;
    if (s == "smoothed") return TransferSource::Smoothed;
    throw ValidationError("unknown transfer '" + s + "' (expected exact or smoothed)");
}

double number_or_inf(const nlohmann::json& v) {
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) return kInf;
    return v.get<double>();
}

} // namespace

ExperimentConfig merge_config(ExperimentConfig c, const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "process") c.process = v;
            else if (key == "input") c.input = v.get<std::string>();
            else if (key == "score") c.score = v.get<std::string>();
            else if (key == "score_params") c.score_params = v;
            else if (key == "grid") {
                for (const auto& [gk, gv] : v.items()) {
                    if (gk == "min") c.grid.min = gv.get<double>();
                    else if (gk == "max") c.grid.max = gv.get<double>();
                    else if (gk == "step") c.grid.step = gv.get<double>();
                    else throw ValidationError("unknown grid key '" + gk + "'");
                }
            } else if (key == "alpha_source") c.alpha_source = alpha_source_from_name(v.get<std::string>());
            else if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "hill_k") c.hill_k = v.get<Eigen::Index>();
            else if (key == "transfer") c.transfer = transfer_from_name(v.get<std::string>());
            else if (key == "level") c.level = v.get<double>();
            else if (key == "n") c.n = v.get<Eigen::Index>();
            else if (key == "replicates") c.replicates = v.get<int>();
            else if (key == "reps") c.reps = v.get<Eigen::Index>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "output") c.output = v.get<std::string>();
            else if (key == "scales") c.scales = v;
            else if (key == "dependence") c.dependence = entry_dependence_from_name(v.get<std::string>());
            else if (key == "terms") c.terms = v.get<Eigen::Index>();
            else if (key == "sac") c.sac = v.get<bool>();
            else if (key == "threads") c.threads = v.get<unsigned>();
            else if (key == "gamma") {
                if (v.is_null()) c.gamma.reset();
                else c.gamma = number_or_inf(v);
            } else throw ValidationError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    }
    return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c = merge_config({}, j);
    c.validate();
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    if (!c.process.is_null()) j["process"] = c.process;
    if (!c.input.empty()) j["input"] = c.input;
    j["score"] = c.score;
    j["score_params"] = c.score_params;
    j["grid"] = {{"min", c.grid.min}, {"max", c.grid.max}, {"step", c.grid.step}};
    j["alpha_source"] = c.alpha_source == AlphaSource::Known ? "known" : "hill";
    if (c.alpha) j["alpha"] = *c.alpha;
    j["hill_k"] = c.hill_k;
    if (c.transfer) j["transfer"] = *c.transfer == TransferSource::Exact ? "exact" : "smoothed";
    j["level"] = c.level;
    j["n"] = c.n;
    j["replicates"] = c.replicates;
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    if (!c.output.empty()) j["output"] = c.output;
    j["scales"] = c.scales;
    j["dependence"] = to_string(c.dependence);
    j["terms"] = c.terms;
    j["sac"] = c.sac;
    j["threads"] = c.threads;
    if (c.gamma) {
        if (std::isinf(*c.gamma)) j["gamma"] = "inf";
        else j["gamma"] = *c.gamma;
    }
    return j;
}

// --- study ------------------------------------------------------------------------

namespace {

unsigned thread_count(const ExperimentConfig& c) { return c.threads ? c.threads : default_threads(); }

} // namespace

Study::Study(ExperimentConfig config) : config_(std::move(config)) {
    config_.validate();
    score_ = ScoreRegistry::instance().make(config_.score, config_.score_params);
    if (!config_.process.is_null()) {
        if (is_vector_spec(config_.process)) vector_spec_ = vector_spec_from_json(config_.process);
        else scalar_spec_ = linear_spec_from_json(config_.process);
    }
    const bool vector = vector_spec_.has_value();
    if (vector != score_.is_matrix())
        throw ValidationError(vector ? "vector processes need a matrix score" : "scalar series need a scalar score");
    transfer_ = config_.transfer.value_or(vector ? TransferSource::Exact : TransferSource::Smoothed);
    if (vector && transfer_ == TransferSource::Smoothed)
        throw ValidationError("multivariate limit laws use the exact transfer matrix; transfer must be exact");
    if (transfer_ == TransferSource::Exact && config_.process.is_null())
        throw ValidationError("exact transfer needs a process spec");
    if (vector && config_.alpha_source == AlphaSource::Hill)
        throw ValidationError("Hill-estimated alpha is only supported for scalar series");

    if (config_.alpha_source == AlphaSource::Known) {
        double alpha = 0.0;
        if (scalar_spec_) alpha = scalar_spec_->innovations.alpha;
        else if (vector_spec_) alpha = vector_spec_->innovations.alpha;
        else if (config_.alpha) alpha = *config_.alpha;
        else throw ValidationError("known alpha needs a process spec or an \"alpha\" entry");
        if (config_.alpha && *config_.alpha != alpha)
            throw ValidationError("config alpha disagrees with the process spec");
        StableParams{alpha, 1.0}.validate_inference();
        config_.alpha = alpha;
    }
    config_.grid.validate(score_.domain());

    if (scalar_spec_) theta0_ = pivotal_value(*score_.scalar, ExactTransfer(*scalar_spec_));
    if (vector_spec_) theta0_ = pivotal_value_mv(*score_.matrix, MatrixTransfer(*vector_spec_));

    if (!vector && config_.score == "acf_lag" && config_.sac) sac_lag_ = config_.score_params.value("l", 2);
    if (config_.alpha && !config_.gamma)
        ratio_ = std::make_shared<const RatioSample>(*config_.alpha, config_.reps, splitmix64(config_.seed ^ kRatioStream),
                                                     thread_count(config_));
}

Eigen::MatrixXd Study::theta_points() const { return config_.grid.points(); }

std::shared_ptr<const RatioSample> Study::ratio_sample(double alpha) const {
    if (ratio_ && ratio_->alpha() == alpha) return ratio_;
    return std::make_shared<const RatioSample>(alpha, config_.reps, splitmix64(config_.seed ^ kRatioStream), 1);
}

double Study::threshold(const LimitLaw& law, double alpha, int index) const {
    if (config_.gamma) return *config_.gamma;
    if (law.dim_theta() == 1) return collapsed_factor(law) * ratio_sample(alpha)->squared(config_.level).gamma_p;
    Rng rng = Rng::substream(config_.seed ^ kLimitStream, static_cast<std::uint64_t>(index));
    return mc_quantile(law, config_.level, config_.reps, rng).gamma_p;
}

TimeSeries Study::simulate(int index) const {
    if (!scalar_spec_) throw ValidationError("no scalar process spec to simulate");
    Rng rng = Rng::substream(config_.seed, static_cast<std::uint64_t>(index));
    return simulate_linear(*scalar_spec_, config_.n, rng);
}

VectorTimeSeries Study::simulate_vector(int index) const {
    if (!vector_spec_) throw ValidationError("no vector process spec to simulate");
    Rng rng = Rng::substream(config_.seed, static_cast<std::uint64_t>(index));
    return simulate_vector_linear(*vector_spec_, config_.n, rng);
}

ReplicateResult Study::analyze(const TimeSeries& x, int index) const {
    if (is_vector()) throw ValidationError("this study expects a vector series");
    ReplicateResult r;
    r.index = index;
    if (config_.alpha_source == AlphaSource::Hill) {
        const Eigen::Index k = config_.hill_k ? config_.hill_k : default_hill_k(x.size());
        const double a = hill_estimator(x, k);
        r.alpha = std::clamp(a, 1.0, 1.999);
        r.alpha_clamped = r.alpha != a;
    } else {
        r.alpha = *config_.alpha;
    }
    const ScalarScore& score = *score_.scalar;
    std::shared_ptr<const ScalarTransfer> transfer;
    if (transfer_ == TransferSource::Exact) {
        transfer = std::make_shared<ExactTransfer>(*scalar_spec_);
        r.theta0_hat = (*theta0_)[0];
    } else {
        transfer = smoothed_transfer(x);
        r.theta0_hat = pivotal_value(score, *transfer)[0];
    }
    if (theta0_) r.theta0 = (*theta0_)[0];

    LimitOptions o;
    o.alpha = r.alpha;
    o.terms = config_.terms;
    o.scales = scales_from_json(config_.scales, r.alpha);
    const LimitLaw law = make_limit_law(score, Eigen::VectorXd::Constant(1, r.theta0_hat), *transfer, o);
    r.truncation_warning = law.v.truncation_warning;
    r.gamma = threshold(law, r.alpha, index);

    const ELRegion region = el_confidence_region(self_normalized_periodogram_grid(x), score, theta_points(), r.gamma, r.alpha);
    r.hull_failures = region.hull_failures;
    r.solver_failures = region.solver_failures;
    r.el = region.interval;
    if (theta0_) r.el.check_coverage(r.theta0);

    if (sac_lag_ > 0) {
        const Eigen::Index len = config_.terms + sac_lag_ + 1;
        Eigen::VectorXd rho;
        if (scalar_spec_) {
            rho = theoretical_acf_vector(*scalar_spec_, len - 1);
        } else {
            const Eigen::VectorXd full = normalized_autocorrelations(x);
            rho = Eigen::VectorXd::Zero(len);
            const Eigen::Index used = std::min(len, full.size());
            rho.head(used) = full.head(used);
        }
        const double k = sac_limit_constant(rho, sac_lag_, r.alpha, config_.terms);
        const double base = config_.gamma ? std::sqrt(*config_.gamma)
                                          : ratio_sample(r.alpha)->absolute(config_.level).gamma_p;
        r.sac_quantile = k * o.scales.ratio() * base;
        r.sac = sac_confidence_interval(x, sac_lag_, r.sac_quantile, r.alpha);
        if (theta0_) r.sac->check_coverage(r.theta0);
    }
    return r;
}

ReplicateResult Study::analyze(const VectorTimeSeries& x, int index) const {
    if (!is_vector()) throw ValidationError("this study expects a scalar series");
    if (x.dim() != vector_spec_->dim) throw ValidationError("series dimension differs from the process spec");
    ReplicateResult r;
    r.index = index;
    r.alpha = *config_.alpha;
    r.theta0 = (*theta0_)[0];
    r.theta0_hat = r.theta0;
    const MatrixScore& score = *score_.matrix;
    const MatrixTransfer transfer(*vector_spec_);
    LimitOptions o;
    o.alpha = r.alpha;
    o.terms = config_.terms;
    o.scales = scales_from_json(config_.scales, r.alpha);
    o.dependence = config_.dependence;
    const LimitLaw law = make_limit_law_mv(score, *theta0_, transfer, o);
    r.truncation_warning = law.v.truncation_warning;
    r.gamma = threshold(law, r.alpha, index);
    const ELRegion region = el_confidence_region(periodogram_matrix_grid(x, r.alpha), score, theta_points(), r.gamma, r.alpha);
    r.hull_failures = region.hull_failures;
    r.solver_failures = region.solver_failures;
    r.el = region.interval;
    r.el.check_coverage(r.theta0);
    return r;
}

ReplicateResult Study::replicate(int index) const {
    try {
        if (is_vector()) return analyze(simulate_vector(index), index);
        return analyze(simulate(index), index);
    } catch (const Error& e) {
        ReplicateResult r;
        r.index = index;
        if (theta0_) r.theta0 = (*theta0_)[0];
        r.error = e.what();
        if (r.error.empty()) r.error = "unknown failure";
        return r;
    }
}

// --- coverage ---------------------------------------------------------------------

CoverageSummary summarize(const std::vector<ReplicateResult>& records, Method method, double level) {
    CoverageSummary s;
    s.method = method;
    s.replicates = static_cast<int>(records.size());
    double length = 0.0;
    for (const auto& r : records) {
        const ConfidenceInterval* ci = method == Method::EL ? &r.el : (r.sac ? &*r.sac : nullptr);
        if (!r.ok() || ci == nullptr || !ci->covered) {
            ++s.failures;
            continue;
        }
        ++s.evaluated;
        if (!*ci->covered) ++s.misses;
        length += ci->length();
    }
    if (s.evaluated > 0) {
        s.mean_length = length / s.evaluated;
        s.error = std::abs(static_cast<double>(s.misses) / s.evaluated - (1.0 - level));
    } else {
        s.mean_length = s.error = kNaN;
    }
    return s;
}

CoverageReport coverage_experiment(const ExperimentConfig& config) {
    if (config.replicates < 100) throw ValidationError("coverage experiments need at least 100 replicates");
    if (config.process.is_null()) throw ValidationError("coverage experiments need a process spec");
    const Study study(config);
    CoverageReport report;
    report.level = config.level;
    report.records.resize(static_cast<std::size_t>(config.replicates));
    parallel_for(report.records.size(), thread_count(config),
                 [&](std::size_t i) { report.records[i] = study.replicate(static_cast<int>(i)); });
    report.el = summarize(report.records, Method::EL, config.level);
    const bool any_sac = std::any_of(report.records.begin(), report.records.end(),
                                     [](const ReplicateResult& r) { return r.sac.has_value(); });
    if (any_sac) report.sac = summarize(report.records, Method::SAC, config.level);
    return report;
}

// --- tables -----------------------------------------------------------------------

namespace {

struct TableCase {
    std::string label;
    double setting;
    nlohmann::json changes;
};

nlohmann::json ma_process(double b, double alpha) {
    return {{"alpha", alpha}, {"scale", 1.0}, {"generator", {{"type", "ma_power"}, {"b", b}, {"order", 100}}}};
}

nlohmann::json vma_process(double b) {
    return {{"alpha", 1.5}, {"scale", 1.0}, {"dim", 2}, {"generator", {{"type", "vma_upper"}, {"b", b}, {"order", 100}}}};
}

} // namespace

TableReport run_table(int id, const nlohmann::json& overrides) {
    TableReport t;
    t.id = id;
    std::vector<TableCase> cases;
    nlohmann::json fixed = {{"n", 300},
                            {"score", "acf_lag"},
                            {"score_params", {{"l", 2}}},
                            {"alpha_source", "known"},
                            {"scales", "calibrated"}};
    switch (id) {
    case 1:
        t.setting_name = "b";
        cases = {{"Case 1", 0.5, {{"process", ma_process(0.5, 1.5)}}}, {"Case 2", 0.9, {{"process", ma_process(0.9, 1.5)}}}};
        break;
    case 2:
        t.setting_name = "alpha";
        for (auto [label, a] : {std::pair{"Case 3", 1.0}, {"Case 4", 1.5}, {"Case 5", 1.9}})
            cases.push_back({label, a, {{"process", ma_process(0.5, a)}}});
        break;
    case 3:
        t.setting_name = "n";
        cases = {{"Case 6", 50, {{"process", ma_process(0.5, 1.5)}, {"n", 50}}},
                 {"Case 7", 100, {{"process", ma_process(0.5, 1.5)}, {"n", 100}}}};
        break;
    case 5:
        t.setting_name = "b";
        fixed = {{"n", 300},       {"score", "var1"},      {"score_params", nlohmann::json::object()},
                 {"alpha_source", "known"}, {"scales", "calibrated"}, {"transfer", "exact"},
                 {"sac", false}};
        for (auto [label, b] : {std::pair{"Case 8", 0.0}, {"Case 9", 0.3}, {"Case 10", 0.6}, {"Case 11", 0.9}})
            cases.push_back({label, b, {{"process", vma_process(b)}}});
        break;
    default:
        throw ValidationError("unknown table id " + std::to_string(id) + " (expected 1, 2, 3 or 5)");
    }
    for (const auto& c : cases) {
        ExperimentConfig cfg = merge_config(merge_config(merge_config({}, fixed), overrides), c.changes);
        const Study study(cfg);
        const ReplicateResult r = study.replicate(0);
        if (!r.ok()) throw NumericalError(c.label + ": " + r.error);
        t.rows.push_back({c.label, c.setting, r.theta0, r.el, r.sac});
    }
    return t;
}

// --- CSV --------------------------------------------------------------------------

void write_csv_header(std::ostream& os, const std::string& kind) { os << "# sael-csv v1 " << kind << '\n'; }

namespace {

void put_interval(std::ostream& os, const ConfidenceInterval& ci) {
    if (ci.empty) os << "nan,nan," << 0.0;
    else os << ci.lower << ',' << ci.upper << ',' << ci.length();
}

std::string covered_str(const std::optional<bool>& c) { return c ? (*c ? "1" : "0") : ""; }

} // namespace

void write_table_csv(std::ostream& os, const TableReport& table) {
    write_csv_header(os, "table=" + std::to_string(table.id));
    const bool sac = std::any_of(table.rows.begin(), table.rows.end(), [](const TableRow& r) { return r.sac.has_value(); });
    os << "case," << table.setting_name << ",theta0,el_lower,el_upper,el_length";
    if (sac) os << ",sac_lower,sac_upper,sac_length";
    os << '\n';
    for (const auto& r : table.rows) {
        os << r.label << ',' << std::defaultfloat << std::setprecision(6) << r.setting << ',' << std::fixed
           << std::setprecision(6) << r.theta0 << ',';
        put_interval(os, r.el);
        if (sac) {
            os << ',';
            if (r.sac) put_interval(os, *r.sac);
            else os << ",,";
        }
        os << std::defaultfloat << '\n';
    }
}

void write_coverage_csv(std::ostream& os, const CoverageReport& report) {
    write_csv_header(os, "coverage");
    os << "replicate,alpha,theta0,theta0_hat,gamma,el_lower,el_upper,el_covered,sac_quantile,sac_lower,sac_upper,"
          "sac_covered,hull_failures,solver_failures,truncation_warning,error\n"
       << std::setprecision(10);
    for (const auto& r : report.records) {
        os << r.index << ',' << r.alpha << ',' << r.theta0 << ',' << r.theta0_hat << ',' << r.gamma << ',' << r.el.lower
           << ',' << r.el.upper << ',' << covered_str(r.el.covered) << ',' << r.sac_quantile << ',';
        if (r.sac) os << r.sac->lower << ',' << r.sac->upper << ',' << covered_str(r.sac->covered);
        else os << ",,";
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << ',' << r.hull_failures << ',' << r.solver_failures << ',' << (r.truncation_warning ? 1 : 0) << ',' << err
           << '\n';
    }
}

void write_coverage_summary_csv(std::ostream& os, const CoverageReport& report) {
    write_csv_header(os, "coverage-summary");
    os << "method,replicates,failures,evaluated,misses,mean_length,coverage_error\n" << std::setprecision(10);
    auto row = [&](const CoverageSummary& s) {
        os << to_string(s.method) << ',' << s.replicates << ',' << s.failures << ',' << s.evaluated << ',' << s.misses
           << ',' << s.mean_length << ',' << s.error << '\n';
    };
    row(report.el);
    if (report.sac) row(*report.sac);
}

void write_region_csv(std::ostream& os, const ELRegion& region) {
    write_csv_header(os, "region gamma=" + [&] {
        std::ostringstream g;
        g << std::setprecision(17) << region.gamma;
        return g.str();
    }());
    for (Eigen::Index k = 0; k < region.theta.cols(); ++k)
        os << (region.theta.cols() == 1 ? std::string("theta") : "theta" + std::to_string(k + 1)) << ',';
    os << "statistic,accepted\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < region.theta.rows(); ++i) {
        for (Eigen::Index k = 0; k < region.theta.cols(); ++k) os << region.theta(i, k) << ',';
        os << region.statistic[i] << ',' << (region.accepted[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
    }
}

void write_series_csv(std::ostream& os, const TimeSeries& x) {
    write_csv_header(os, "series");
    os << "x\n" << std::setprecision(17);
    for (Eigen::Index t = 0; t < x.size(); ++t) os << x[t] << '\n';
}

void write_series_csv(std::ostream& os, const VectorTimeSeries& x) {
    write_csv_header(os, "series");
    for (Eigen::Index k = 0; k < x.dim(); ++k) os << (k ? ",x" : "x") << k + 1;
    os << '\n' << std::setprecision(17);
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        for (Eigen::Index k = 0; k < x.dim(); ++k) os << (k ? "," : "") << x.values()(t, k);
        os << '\n';
    }
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

} // namespace

Eigen::MatrixXd read_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    bool first = true;
    std::size_t cols = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(t);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(trim(f));
        if (t.back() == ',') fields.emplace_back();
        std::vector<double> values;
        bool numeric = true;
        std::string bad;
        for (const auto& field : fields) {
            double v = 0.0;
            if (!parse_double(field, v)) {
                numeric = false;
                bad = field;
                break;
            }
            values.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue; // header
            }
            throw ValidationError("line " + std::to_string(line_no) + ": cannot parse '" + bad + "' as a number");
        }
        first = false;
        for (std::size_t k = 0; k < values.size(); ++k)
            if (!std::isfinite(values[k]))
                throw ValidationError("line " + std::to_string(line_no) + ": non-finite value '" + fields[k] + "'");
        if (rows.empty()) cols = values.size();
        else if (values.size() != cols)
            throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                                  " columns, found " + std::to_string(values.size()));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ValidationError("CSV has no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return m;
}

namespace {

Eigen::MatrixXd read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return read_csv(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

} // namespace

TimeSeries ingest_csv(const std::string& path) {
    const Eigen::MatrixXd m = read_csv_file(path);
    if (m.cols() != 1) throw ValidationError(path + ": expected one column, found " + std::to_string(m.cols()));
    return TimeSeries(m.col(0));
}

VectorTimeSeries ingest_vector_csv(const std::string& path, Eigen::Index dim) {
    const Eigen::MatrixXd m = read_csv_file(path);
    if (m.cols() != dim)
        throw ValidationError(path + ": expected " + std::to_string(dim) + " columns, found " + std::to_string(m.cols()));
    return VectorTimeSeries(m);
}

} // namespace sael
