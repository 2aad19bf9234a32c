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


// Command-line front end: simulate, ci, limit, table, coverage, hill-plot.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sael/errors.hpp"
#include "sael/harness.hpp"
#include "sael/limit.hpp"
#include "sael/parallel.hpp"
#include "sael/process.hpp"
#include "sael/score.hpp"
#include "sael/spectral.hpp"
#include "sael/transfer.hpp"

namespace {

using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Options shared by every subcommand; each flag, when given, becomes a config override.
struct Common {
    std::string config_path;
    std::vector<std::string> sets;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<long> n;
    std::optional<double> alpha;
    std::optional<double> level;
    std::optional<long> reps;
    std::string scales;
    std::string process;
    std::string input;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sael::ValidationError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw sael::ValidationError(path + ": " + e.what());
    }
}

// "key=value"; value parsed as JSON, falling back to a plain string.
void apply_set(json& j, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw sael::ValidationError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json v = json::parse(value, nullptr, false);
    if (v.is_discarded()) v = value;
    // Dotted keys address nested objects, e.g. grid.step=0.01.
    json* node = &j;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
        node = &(*node)[key.substr(start, dot - start)];
        if (!node->is_object() && !node->is_null()) throw sael::ValidationError("--set: '" + key + "' is not an object path");
    }
    (*node)[key.substr(start)] = v;
}

json overrides(const Common& c) {
    json j = json::object();
    if (!c.config_path.empty()) j = read_json_file(c.config_path);
    if (!j.is_object()) throw sael::ValidationError("config must be a JSON object");
    if (!c.process.empty()) j["process"] = read_json_file(c.process);
    if (!c.input.empty()) j["input"] = c.input;
    if (c.seed) j["seed"] = *c.seed;
    if (c.threads) j["threads"] = *c.threads;
    if (c.n) j["n"] = *c.n;
    if (c.alpha) j["alpha"] = *c.alpha;
    if (c.level) j["level"] = *c.level;
    if (c.reps) j["reps"] = *c.reps;
    if (!c.scales.empty()) j["scales"] = c.scales;
    if (!c.output.empty()) j["output"] = c.output;
    for (const auto& s : c.sets) apply_set(j, s);
    return j;
}

sael::ExperimentConfig load_config(const Common& c) { return sael::merge_config({}, overrides(c)); }

// Writes to the configured output path, or stdout when it is empty.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) throw sael::ValidationError("cannot write " + path);
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config_path, "JSON experiment config");
    app->add_option("--set", c.sets, "config override key=value (JSON value; dotted keys for nesting)");
    app->add_option("-o,--output", c.output, "output CSV path (default stdout)");
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--threads", c.threads, "worker threads (0 = hardware)");
    app->add_option("-n,--n", c.n, "series length");
    app->add_option("--alpha", c.alpha, "characteristic exponent (data mode)");
    app->add_option("--level", c.level, "confidence level p");
    app->add_option("--reps", c.reps, "Monte-Carlo draws for the limit quantile");
    app->add_option("--scales", c.scales, "limit scales: unit, davis_resnick or calibrated");
    app->add_option("--process", c.process, "process spec JSON file");
}

int run_simulate(const Common& common, int index) {
    const sael::ExperimentConfig cfg = load_config(common);
    if (cfg.process.is_null()) throw sael::ValidationError("simulate needs a process spec (--process or config)");
    sael::Rng rng = sael::Rng::substream(cfg.seed, static_cast<std::uint64_t>(index));
    Sink sink(cfg.output);
    if (sael::is_vector_spec(cfg.process))
        sael::write_series_csv(sink.stream(), sael::simulate_vector_linear(sael::vector_spec_from_json(cfg.process), cfg.n, rng));
    else
        sael::write_series_csv(sink.stream(), sael::simulate_linear(sael::linear_spec_from_json(cfg.process), cfg.n, rng));
    return 0;
}

void write_interval_row(std::ostream& os, const sael::ConfidenceInterval& ci, const sael::ReplicateResult& r,
                        double threshold) {
    os << sael::to_string(ci.method) << ',' << r.alpha << ',' << r.theta0_hat << ',' << threshold << ',';
    if (ci.empty) os << ",,0,1,";
    else os << ci.lower << ',' << ci.upper << ',' << ci.length() << ",0,";
    if (ci.covered) os << (*ci.covered ? 1 : 0);
    os << '\n';
}

int run_ci(const Common& common, const std::string& method, bool hill, long hill_k, int index,
           const std::string& region_path) {
    json j = overrides(common);
    if (hill) j["alpha_source"] = "hill";
    if (hill_k > 0) j["hill_k"] = hill_k;
    if (method == "el") j["sac"] = false;
    const sael::ExperimentConfig cfg = sael::merge_config({}, j);
    const sael::Study study(cfg);

    sael::ReplicateResult r;
    if (!cfg.input.empty()) {
        if (study.is_vector()) r = study.analyze(sael::ingest_vector_csv(cfg.input, sael::vector_spec_from_json(cfg.process).dim));
        else r = study.analyze(sael::ingest_csv(cfg.input));
    } else {
        r = study.replicate(index);
        if (!r.ok()) throw sael::NumericalError(r.error);
    }
    if (r.alpha_clamped) std::cerr << "sael: Hill estimate clamped to alpha=" << r.alpha << '\n';
    if (r.truncation_warning) std::cerr << "sael: stable series truncation tail exceeds 1e-3\n";
    if (r.hull_failures) std::cerr << "sael: " << r.hull_failures << " grid points outside the convex hull\n";

    if (!region_path.empty()) {
        // Re-scan to persist the per-point statistic.
        sael::ELRegion region;
        const sael::Score score = sael::ScoreRegistry::instance().make(cfg.score, cfg.score_params);
        if (study.is_vector()) {
            const auto x = cfg.input.empty() ? study.simulate_vector(index)
                                             : sael::ingest_vector_csv(cfg.input, sael::vector_spec_from_json(cfg.process).dim);
            region = sael::el_confidence_region(sael::periodogram_matrix_grid(x, r.alpha), *score.matrix,
                                                study.theta_points(), r.gamma, r.alpha);
        } else {
            const auto x = cfg.input.empty() ? study.simulate(index) : sael::ingest_csv(cfg.input);
            region = sael::el_confidence_region(sael::self_normalized_periodogram_grid(x), *score.scalar,
                                                study.theta_points().row(0).transpose(), r.gamma, r.alpha);
        }
        std::ofstream out(region_path);
        if (!out) throw sael::ValidationError("cannot write " + region_path);
        sael::write_region_csv(out, region);
    }

    Sink sink(cfg.output);
    std::ostream& os = sink.stream();
    sael::write_csv_header(os, "ci");
    os << "method,alpha,theta0_hat,threshold,lower,upper,length,empty,covered\n" << std::setprecision(10);
    if (method != "sac") write_interval_row(os, r.el, r, r.gamma);
    if (method != "el") {
        if (!r.sac) throw sael::ValidationError("SAC intervals need the acf_lag score on a scalar series");
        write_interval_row(os, *r.sac, r, r.sac_quantile);
    }
    return 0;
}

int run_limit(const Common& common, std::vector<double> ps, bool explicit_draws) {
    const sael::ExperimentConfig cfg = load_config(common);
    if (cfg.process.is_null()) throw sael::ValidationError("limit needs a process spec (--process or config)");
    const sael::Score score = sael::ScoreRegistry::instance().make(cfg.score, cfg.score_params);
    sael::LimitOptions o;
    o.terms = cfg.terms;
    o.dependence = cfg.dependence;
    sael::LimitLaw law;
    if (sael::is_vector_spec(cfg.process)) {
        if (!score.is_matrix()) throw sael::ValidationError("vector processes need a matrix score");
        const auto spec = sael::vector_spec_from_json(cfg.process);
        o.alpha = spec.innovations.alpha;
        o.scales = sael::scales_from_json(cfg.scales, o.alpha);
        const sael::MatrixTransfer transfer(spec);
        law = sael::make_limit_law_mv(*score.matrix, sael::pivotal_value_mv(*score.matrix, transfer), transfer, o);
    } else {
        if (score.is_matrix()) throw sael::ValidationError("scalar processes need a scalar score");
        const auto spec = sael::linear_spec_from_json(cfg.process);
        o.alpha = spec.innovations.alpha;
        o.scales = sael::scales_from_json(cfg.scales, o.alpha);
        const sael::ExactTransfer transfer(spec);
        law = sael::make_limit_law(*score.scalar, sael::pivotal_value(*score.scalar, transfer), transfer, o);
    }
    if (law.v.truncation_warning) std::cerr << "sael: stable series truncation tail exceeds 1e-3\n";
    for (double p : ps)
        if (!(p > 0.0 && p < 1.0)) throw sael::ValidationError("quantile levels must lie in (0, 1)");
    const unsigned threads = cfg.threads ? cfg.threads : sael::default_threads();
    const bool collapsed = law.dim_theta() == 1 && !explicit_draws;
    const auto draws = sael::draw_limit_stats(law, cfg.reps, cfg.seed, threads, collapsed);
    sael::Rng boot(sael::splitmix64(cfg.seed) ^ 0xB0075ULL);
    Sink sink(cfg.output);
    sael::write_csv_header(sink.stream(), "limit");
    sael::write_quantile_csv(sink.stream(), sael::empirical_quantiles(draws, ps, boot));
    return 0;
}

int run_table_cmd(const Common& common, int id) {
    const json j = overrides(common);
    const sael::TableReport t = sael::run_table(id, j);
    Sink sink(j.value("output", std::string()));
    sael::write_table_csv(sink.stream(), t);
    return 0;
}

int run_coverage(const Common& common, const std::string& records, std::optional<double> gamma) {
    json j = overrides(common);
    if (gamma) j["gamma"] = std::isinf(*gamma) ? json("inf") : json(*gamma);
    const sael::ExperimentConfig cfg = sael::merge_config({}, j);
    const sael::CoverageReport rep = sael::coverage_experiment(cfg);
    if (!records.empty()) {
        std::ofstream out(records);
        if (!out) throw sael::ValidationError("cannot write " + records);
        sael::write_coverage_csv(out, rep);
    }
    Sink sink(cfg.output);
    sael::write_coverage_summary_csv(sink.stream(), rep);
    return 0;
}

int run_hill(const Common& common, long k_min, long k_max) {
    const sael::ExperimentConfig cfg = load_config(common);
    if (cfg.input.empty()) throw sael::ValidationError("hill-plot needs --input");
    const sael::TimeSeries x = sael::ingest_csv(cfg.input);
    if (k_max <= 0) k_max = std::min<long>(x.size() - 1, std::max<long>(k_min, x.size() / 2));
    Sink sink(cfg.output);
    sael::write_csv_header(sink.stream(), "hill");
    sael::write_hill_csv(sink.stream(), sael::hill_plot(x, k_min, k_max));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical likelihood for stable linear processes"};
    app.require_subcommand(1);
    Common common;

    auto* sim = app.add_subcommand("simulate", "simulate a linear process and write the series CSV");
    add_common(sim, common);
    int index = 0;
    sim->add_option("--index", index, "replicate substream index");

    auto* ci = app.add_subcommand("ci", "EL and SAC confidence intervals for one series");
    add_common(ci, common);
    ci->add_option("--input", common.input, "series CSV (omit to simulate replicate --index)");
    ci->add_option("--index", index, "replicate substream index when simulating");
    std::string method = "both";
    ci->add_option("--method", method, "el, sac or both")->check(CLI::IsMember({"el", "sac", "both"}));
    bool hill = false;
    ci->add_flag("--hill", hill, "estimate alpha with the Hill estimator");
    long hill_k = 0;
    ci->add_option("--hill-k", hill_k, "Hill order statistic count (default floor(n^0.6))");
    std::string region;
    ci->add_option("--region", region, "also write the per-point EL statistic to this CSV");

    auto* lim = app.add_subcommand("limit", "quantiles of the limit law V'W^{-1}V");
    add_common(lim, common);
    std::vector<double> ps{0.5, 0.75, 0.9, 0.95, 0.99};
    lim->add_option("-p,--p", ps, "quantile levels")->delimiter(',');
    bool explicit_draws = false;
    lim->add_flag("--explicit", explicit_draws, "draw every stable term instead of the collapsed q = 1 form");

    auto* tab = app.add_subcommand("table", "reproduce an interval table");
    add_common(tab, common);
    int id = 1;
    tab->add_option("--id", id, "table id")->required()->check(CLI::IsMember({1, 2, 3, 5}));

    auto* cov = app.add_subcommand("coverage", "coverage-error experiment");
    add_common(cov, common);
    std::string records;
    cov->add_option("--records", records, "per-replicate records CSV");
    std::optional<double> gamma;
    cov->add_option("--gamma", gamma, "fixed EL threshold (inf allowed)");
    long replicates = 0;
    cov->add_option("--replicates", replicates, "number of replicates");

    auto* hp = app.add_subcommand("hill-plot", "Hill estimates over a range of k");
    add_common(hp, common);
    hp->add_option("--input", common.input, "series CSV")->required();
    long k_min = 10, k_max = 0;
    hp->add_option("--k-min", k_min, "smallest k");
    hp->add_option("--k-max", k_max, "largest k (default n/2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*sim) return run_simulate(common, index);
        if (*ci) return run_ci(common, method, hill, hill_k, index, region);
        if (*lim) return run_limit(common, ps, explicit_draws);
        if (*tab) return run_table_cmd(common, id);
        if (*cov) {
            if (replicates > 0) common.sets.insert(common.sets.begin(), "replicates=" + std::to_string(replicates));
            return run_coverage(common, records, gamma);
        }
        if (*hp) return run_hill(common, k_min, k_max);
    } catch (const sael::ValidationError& e) {
        std::cerr << "sael: " << e.what() << '\n';
        return kExitValidation;
    } catch (const sael::NumericalError& e) {
        std::cerr << "sael: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "sael: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
