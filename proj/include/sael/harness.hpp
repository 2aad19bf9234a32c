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

#ifndef SAEL_HARNESS_HPP
#define SAEL_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "sael/limit.hpp"
#include "sael/process.hpp"
#include "sael/score.hpp"
#include "sael/spectral.hpp"

namespace sael {

/// min, min + step, ... up to max.
struct ThetaGrid {
    double min = -0.999;
    double max = 0.999;
    double step = 0.001;

    Eigen::VectorXd points() const;
    /// Throws ValidationError if the grid is empty or leaves the (open) domain.
    void validate(const ThetaDomain& domain) const;
};

enum class Method { EL, SAC };
std::string to_string(Method m);

struct ConfidenceInterval {
    Method method = Method::EL;
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
    bool empty = true;
    /// Set when a reference value was supplied: lower <= theta0 <= upper.
    std::optional<bool> covered;

    double length() const { return empty ? 0.0 : upper - lower; }
    void check_coverage(double theta0);
};

/// EL statistic over a list of parameter points (rows of theta).
struct ELRegion {
    Eigen::MatrixXd theta;
    /// +inf where the point is excluded (hull failure, solver failure or inadmissible theta).
    Eigen::VectorXd statistic;
    std::vector<bool> accepted;
    double gamma = 0.0;
    int hull_failures = 0;
    int solver_failures = 0;
    int inadmissible = 0;
    /// Hull of the accepted points; only for one-dimensional theta.
    ConfidenceInterval interval;

    Eigen::Index accepted_count() const;
};

/// Accepts the points with statistic < gamma. The dual solution at each point warm-starts the next one.
ELRegion el_confidence_region(const PeriodogramGrid& grid, const ScalarScore& score,
                              const Eigen::Ref<const Eigen::MatrixXd>& theta, double gamma, double alpha);
ELRegion el_confidence_region(const MatrixPeriodogramGrid& grid, const MatrixScore& score,
                              const Eigen::Ref<const Eigen::MatrixXd>& theta, double gamma, double alpha);

/// sum_{t <= n-l} X(t) X(t+l) / sum X(t)^2.
double sample_autocorrelation(const TimeSeries& x, int lag);

/// rho^(l) -/+ quantile / x_n, where quantile is the p-quantile of K |S_1/S_0|.
ConfidenceInterval sac_confidence_interval(const TimeSeries& x, int lag, double quantile, double alpha);

enum class AlphaSource { Known, Hill };
enum class TransferSource { Exact, Smoothed };

/**
 * Settings of one experiment. JSON keys match the field names; "grid" is
 * {"min", "max", "step"}, "gamma" may be a number or "inf", and unknown keys
 * are rejected.
 */
struct ExperimentConfig {
    /// Process spec JSON (scalar or vector); null in data mode.
    nlohmann::json process;
    /// CSV series to analyse instead of simulating.
    std::string input;
    std::string score = "acf_lag";
    nlohmann::json score_params = {{"l", 2}};
    ThetaGrid grid;
    AlphaSource alpha_source = AlphaSource::Known;
    /// Used without a process spec; otherwise the spec's innovation alpha.
    std::optional<double> alpha;
    Eigen::Index hill_k = 0;
    /// Unset: smoothed for scalar series, exact for vector series.
    std::optional<TransferSource> transfer;
    double level = 0.9;
    Eigen::Index n = 300;
    int replicates = 1000;
    Eigen::Index reps = 100000;
    std::uint64_t seed = 20120601;
    std::string output;
    /// "unit", "davis_resnick" or {"s0": .., "st": ..}.
    nlohmann::json scales = "unit";
    EntryDependence dependence = EntryDependence::Independent;
    Eigen::Index terms = 200;
    bool sac = true;
    unsigned threads = 0;
    /// Fixed EL threshold instead of the Monte-Carlo quantile; SAC then uses K sqrt(gamma) in place of K Q_p.
    std::optional<double> gamma;

    void validate() const;
};

/// Resolves the "scales" entry of a config at the given alpha.
LimitScales scales_from_json(const nlohmann::json& j, double alpha);

ExperimentConfig config_from_json(const nlohmann::json& j);
/// Applies the keys present in j on top of base.
ExperimentConfig merge_config(ExperimentConfig base, const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct ReplicateResult {
    int index = 0;
    double alpha = 0.0;
    bool alpha_clamped = false;
    /// Reference value for coverage; NaN in data mode.
    double theta0 = std::numeric_limits<double>::quiet_NaN();
    /// Parameter at which W and c were evaluated.
    double theta0_hat = std::numeric_limits<double>::quiet_NaN();
    double gamma = 0.0;
    double sac_quantile = std::numeric_limits<double>::quiet_NaN();
    ConfidenceInterval el;
    std::optional<ConfidenceInterval> sac;
    int hull_failures = 0;
    int solver_failures = 0;
    bool truncation_warning = false;
    /// Non-empty when the replicate failed; the intervals are then meaningless.
    std::string error;

    bool ok() const { return error.empty(); }
};

/**
 * One configured experiment: resolves the process, score, transfer source
 * and thresholds once, then analyses observed or simulated series.
 */
class Study {
public:
    explicit Study(ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    bool is_vector() const { return vector_spec_.has_value(); }
    /// Pivotal value of the exact transfer; empty in data mode.
    std::optional<Eigen::VectorXd> true_theta() const { return theta0_; }
    Eigen::MatrixXd theta_points() const;

    ReplicateResult analyze(const TimeSeries& x, int index = 0) const;
    ReplicateResult analyze(const VectorTimeSeries& x, int index = 0) const;
    /// Simulates replicate index from substream (seed, index) and analyses it.
    ReplicateResult replicate(int index) const;

    TimeSeries simulate(int index) const;
    VectorTimeSeries simulate_vector(int index) const;

private:
    double threshold(const LimitLaw& law, double alpha, int index) const;
    std::shared_ptr<const RatioSample> ratio_sample(double alpha) const;

    ExperimentConfig config_;
    Score score_;
    std::optional<LinearProcessSpec> scalar_spec_;
    std::optional<VectorProcessSpec> vector_spec_;
    std::optional<Eigen::VectorXd> theta0_;
    LimitScales scales_;
    TransferSource transfer_ = TransferSource::Smoothed;
    int sac_lag_ = 0;
    std::shared_ptr<const RatioSample> ratio_;
};

struct CoverageSummary {
    Method method = Method::EL;
    int replicates = 0;
    int failures = 0;
    int evaluated = 0;
    int misses = 0;
    double mean_length = 0.0;
    /// |misses / evaluated - (1 - level)|.
    double error = 0.0;
};

struct CoverageReport {
    double level = 0.9;
    std::vector<ReplicateResult> records;
    CoverageSummary el;
    std::optional<CoverageSummary> sac;
};

/// Needs replicates >= 100 and a process spec.
CoverageReport coverage_experiment(const ExperimentConfig& config);
CoverageSummary summarize(const std::vector<ReplicateResult>& records, Method method, double level);

struct TableRow {
    std::string label;
    double setting = 0.0;
    double theta0 = 0.0;
    ConfidenceInterval el;
    std::optional<ConfidenceInterval> sac;
};

struct TableReport {
    int id = 1;
    std::string setting_name;
    std::vector<TableRow> rows;
};

/// Single-realization interval table 1, 2, 3 or 5 (replicate 0, calibrated scales); overrides adjust seed, reps, grid and the like.
TableReport run_table(int id, const nlohmann::json& overrides = nlohmann::json::object());

// CSV output. Every file starts with "# sael-csv v1 <kind>".
void write_csv_header(std::ostream& os, const std::string& kind);
void write_table_csv(std::ostream& os, const TableReport& table);
void write_coverage_csv(std::ostream& os, const CoverageReport& report);
void write_coverage_summary_csv(std::ostream& os, const CoverageReport& report);
void write_region_csv(std::ostream& os, const ELRegion& region);
void write_series_csv(std::ostream& os, const TimeSeries& x);
void write_series_csv(std::ostream& os, const VectorTimeSeries& x);

/**
 * Numeric CSV: comma-separated finite reals, an optional non-numeric header on
 * the first line, '#' comment lines. Errors name the offending line.
 */
Eigen::MatrixXd read_csv(std::istream& is);
TimeSeries ingest_csv(const std::string& path);
VectorTimeSeries ingest_vector_csv(const std::string& path, Eigen::Index dim);

} // namespace sael

#endif // SAEL_HARNESS_HPP
