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


#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sael/el.hpp"
#include "sael/errors.hpp"
#include "sael/harness.hpp"

using namespace sael;

namespace {

nlohmann::json ma_json(double b, double alpha) {
    return {{"alpha", alpha}, {"generator", {{"type", "ma_power"}, {"b", b}, {"order", 100}}}};
}

ExperimentConfig quick_config() {
    ExperimentConfig c;
    c.process = ma_json(0.5, 1.5);
    c.n = 100;
    c.replicates = 100;
    c.reps = 5000;
    c.grid = {-0.99, 0.99, 0.01};
    c.threads = 1;
    return c;
}

std::string temp_file(const std::string& name, const std::string& text) {
    const std::string path = "/tmp/sael_test_" + name;
    std::ofstream(path) << text;
    return path;
}

std::string table_csv(int id, const nlohmann::json& overrides) {
    std::ostringstream os;
    write_table_csv(os, run_table(id, overrides));
    return os.str();
}

} // namespace

TEST_CASE("theta grid") {
    const ThetaGrid g;
    const Eigen::VectorXd p = g.points();
    CHECK(p.size() == 1999);
    CHECK(p[0] == -0.999);
    CHECK(p[p.size() - 1] == doctest::Approx(0.999).epsilon(1e-12));
    const ThetaDomain dom{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
    CHECK_NOTHROW(g.validate(dom));
    CHECK_THROWS_AS((ThetaGrid{-1.0, 0.5, 0.1}.validate(dom)), ValidationError);
    CHECK_THROWS_AS((ThetaGrid{0.0, 0.5, 0.0}.validate(dom)), ValidationError);
    CHECK_THROWS_AS((ThetaGrid{0.5, 0.0, 0.1}.validate(dom)), ValidationError);
}

TEST_CASE("EL region: thresholds and consistency") {
    Rng rng(8);
    const TimeSeries x = simulate_linear(ma_power_decay(0.5, 100, {1.5, 1.0}), 300, rng);
    const auto grid = self_normalized_periodogram_grid(x);
    const auto score = acf_score(2);
    const Eigen::VectorXd thetas = ThetaGrid{-0.9, 0.9, 0.01}.points();

    const ELRegion all = el_confidence_region(grid, *score, thetas, std::numeric_limits<double>::infinity(), 1.5);
    REQUIRE(all.hull_failures == 0);
    CHECK(all.accepted_count() == thetas.size());
    CHECK(all.interval.lower == -0.9);

    const ELRegion none = el_confidence_region(grid, *score, thetas, 0.0, 1.5);
    CHECK(none.accepted_count() == 0);
    CHECK(none.interval.empty);
    CHECK(none.interval.length() == 0.0);

    const ELRegion mid = el_confidence_region(grid, *score, thetas, 2.0, 1.5);
    for (Eigen::Index i = 0; i < thetas.size(); ++i) {
        CHECK(mid.accepted[static_cast<std::size_t>(i)] == (mid.statistic[i] < 2.0));
        // Warm-started values agree with a cold solve.
        if (i % 30 == 0)
            CHECK(mid.statistic[i] ==
                  doctest::Approx(log_el_ratio(grid, *score, Eigen::VectorXd::Constant(1, thetas[i]), 1.5).statistic)
                      .epsilon(1e-8));
    }
    CHECK_FALSE(mid.interval.empty);
    CHECK(mid.interval.lower <= mid.interval.upper);
    CHECK_THROWS_AS(el_confidence_region(grid, *score, thetas, -1.0, 1.5), ParameterError);
}

TEST_CASE("SAC interval") {
    Rng rng(2);
    const TimeSeries x = simulate_linear(ma_power_decay(0.5, 100, {1.5, 1.0}), 300, rng);
    CHECK(sample_autocorrelation(x, 2) == doctest::Approx(normalized_autocorrelations(x)[2]).epsilon(1e-12));
    const auto a = sac_confidence_interval(x, 2, 1.7, 1.5);
    const auto b = sac_confidence_interval(TimeSeries(123.456 * x.values()), 2, 1.7, 1.5);
    CHECK(a.lower == doctest::Approx(b.lower).epsilon(1e-12));
    CHECK(a.upper == doctest::Approx(b.upper).epsilon(1e-12));
    CHECK(a.length() == doctest::Approx(2 * 1.7 / x_n(300, 1.5)));
    CHECK(a.method == Method::SAC);
    CHECK_THROWS_AS(sample_autocorrelation(x, 0), ParameterError);
}

TEST_CASE("SAC interval covers zero for white noise") {
    LinearProcessSpec wn;
    wn.innovations = {1.5, 1.0};
    Rng qrng(17);
    const double q = sac_limit_quantile(wn, 2, 0.9, 200, 100000, qrng).gamma_p;
    int covered = 0;
    for (int r = 0; r < 300; ++r) {
        Rng rng = Rng::substream(31, static_cast<std::uint64_t>(r));
        auto ci = sac_confidence_interval(simulate_linear(wn, 300, rng), 2, q, 1.5);
        ci.check_coverage(0.0);
        covered += *ci.covered;
    }
    CHECK(covered >= 255);
}

TEST_CASE("config JSON round trip and validation") {
    ExperimentConfig c = quick_config();
    c.gamma = std::numeric_limits<double>::infinity();
    c.transfer = TransferSource::Exact;
    c.scales = "calibrated";
    const nlohmann::json j = to_json(c);
    const ExperimentConfig d = config_from_json(j);
    CHECK(to_json(d) == j);
    CHECK(std::isinf(*d.gamma));
    CHECK(*d.transfer == TransferSource::Exact);

    CHECK_THROWS_AS(config_from_json({{"process", ma_json(0.5, 1.5)}, {"levle", 0.9}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"process", ma_json(0.5, 1.5)}, {"level", 1.5}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"process", ma_json(0.5, 1.5)}, {"n", "many"}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"process", ma_json(0.5, 1.5)}, {"scales", "wide"}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"process", ma_json(0.5, 1.5)}, {"scales", {{"st", -1.0}}}}), ValidationError);
    CHECK_THROWS_AS(config_from_json({{"n", 300}}), ValidationError);
    CHECK(scales_from_json({{"s0", 2.0}, {"st", 3.0}}, 1.5).ratio() == 1.5);
    CHECK(scales_from_json("calibrated", 1.5).ratio() == doctest::Approx(1.4371));
}

TEST_CASE("study setup errors") {
    ExperimentConfig c = quick_config();
    c.score = "var1";
    c.score_params = nlohmann::json::object();
    CHECK_THROWS_AS(Study{c}, ValidationError);

    ExperimentConfig v = quick_config();
    v.process = {{"alpha", 1.5}, {"dim", 2}, {"generator", {{"type", "vma_upper"}, {"b", 0.3}, {"order", 100}}}};
    v.score = "var1";
    v.score_params = nlohmann::json::object();
    v.transfer = TransferSource::Smoothed;
    CHECK_THROWS_AS(Study{v}, ValidationError);

    ExperimentConfig data;
    data.input = "unused.csv";
    CHECK_THROWS_AS(Study{data}, ValidationError); // needs alpha
    data.alpha = 1.5;
    data.transfer = TransferSource::Exact;
    CHECK_THROWS_AS(Study{data}, ValidationError); // exact needs a spec

    ExperimentConfig mismatch = quick_config();
    mismatch.alpha = 1.2;
    CHECK_THROWS_AS(Study{mismatch}, ValidationError);
}

TEST_CASE("replicate analysis") {
    ExperimentConfig c = quick_config();
    c.n = 300;
    const Study s(c);
    REQUIRE(s.true_theta());
    CHECK((*s.true_theta())[0] == doctest::Approx(0.1168).epsilon(1e-3));
    const ReplicateResult r = s.replicate(4);
    REQUIRE(r.ok());
    CHECK(r.el.covered.has_value());
    REQUIRE(r.sac.has_value());
    CHECK(r.gamma > 0.0);
    CHECK(std::abs(r.theta0_hat - r.theta0) < 0.3);
    // Same replicate, same answer.
    const ReplicateResult again = s.replicate(4);
    CHECK(again.el.lower == r.el.lower);
    CHECK(again.sac->upper == r.sac->upper);

    c.transfer = TransferSource::Exact;
    const ReplicateResult e = Study(c).replicate(4);
    CHECK(e.theta0_hat == e.theta0);
}

TEST_CASE("data mode with known and Hill alpha") {
    Rng rng(12);
    const TimeSeries x = simulate_linear(ma_power_decay(0.5, 100, {1.5, 1.0}), 400, rng);
    std::ostringstream os;
    write_series_csv(os, x);
    const std::string path = temp_file("series.csv", os.str());
    const TimeSeries y = ingest_csv(path);
    CHECK((y.values() - x.values()).norm() == 0.0);

    ExperimentConfig c;
    c.input = path;
    c.alpha = 1.5;
    c.reps = 5000;
    c.grid = {-0.99, 0.99, 0.01};
    const ReplicateResult r = Study(c).analyze(y);
    REQUIRE(r.ok());
    CHECK(std::isnan(r.theta0));
    CHECK_FALSE(r.el.covered.has_value());
    CHECK_FALSE(r.el.empty);
    REQUIRE(r.sac.has_value());

    c.alpha.reset();
    c.alpha_source = AlphaSource::Hill;
    const ReplicateResult h = Study(c).analyze(y);
    CHECK(h.alpha >= 1.0);
    CHECK(h.alpha < 2.0);
    std::remove(path.c_str());
}

TEST_CASE("coverage experiment arithmetic") {
    ExperimentConfig c = quick_config();
    c.gamma = std::numeric_limits<double>::infinity();
    const CoverageReport inf = coverage_experiment(c);
    CHECK(inf.el.error == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(inf.el.misses == 0);
    REQUIRE(inf.sac);
    CHECK(inf.sac->error == doctest::Approx(0.1).epsilon(1e-12));

    c.gamma.reset();
    c.threads = 2;
    const CoverageReport rep = coverage_experiment(c);
    int misses = 0, evaluated = 0;
    for (const auto& r : rep.records)
        if (r.ok()) {
            ++evaluated;
            misses += !*r.el.covered;
        }
    CHECK(rep.el.evaluated == evaluated);
    CHECK(rep.el.failures == 100 - evaluated);
    CHECK(rep.el.error == doctest::Approx(std::abs(double(misses) / evaluated - 0.1)).epsilon(1e-12));

    std::ostringstream rec, sum;
    write_coverage_csv(rec, rep);
    write_coverage_summary_csv(sum, rep);
    CHECK(rec.str().rfind("# sael-csv v1 coverage\n", 0) == 0);
    std::istringstream lines(rec.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 102);
    CHECK(sum.str().find("\nEL,100,") != std::string::npos);

    c.threads = 1;
    const CoverageReport serial = coverage_experiment(c);
    std::ostringstream rec1;
    write_coverage_csv(rec1, serial);
    CHECK(rec1.str() == rec.str());

    c.replicates = 99;
    CHECK_THROWS_AS(coverage_experiment(c), ValidationError);
}

TEST_CASE("tables") {
    const nlohmann::json fast = {{"reps", 20000}};
    const std::string t1 = table_csv(1, {{"reps", 20000}, {"threads", 1}});
    CHECK(t1 == table_csv(1, {{"reps", 20000}, {"threads", 3}}));
    CHECK(t1.rfind("# sael-csv v1 table=1\ncase,b,theta0,el_lower,el_upper,el_length,sac_lower,sac_upper,sac_length\n", 0) == 0);
    CHECK(t1.find("Case 1,0.5,0.116827,") != std::string::npos);
    CHECK(t1.find("Case 2,0.9,0.360342,") != std::string::npos);

    // Same setting, same realization.
    const TableReport t2 = run_table(2, fast);
    const TableReport t1r = run_table(1, fast);
    CHECK(t2.rows[1].el.lower == t1r.rows[0].el.lower);
    CHECK(t2.rows[1].sac->upper == t1r.rows[0].sac->upper);

    const TableReport t3 = run_table(3, fast);
    REQUIRE(t3.rows.size() == 2);
    CHECK(t3.rows[0].setting == 50);
    CHECK(t3.rows[1].setting == 100);

    const TableReport t5 = run_table(5, {{"reps", 20000}, {"grid", {{"step", 0.01}}}});
    REQUIRE(t5.rows.size() == 4);
    CHECK(std::abs(t5.rows[0].theta0) < 5e-5);
    CHECK_FALSE(t5.rows[0].sac.has_value());

    CHECK_THROWS_AS(run_table(4), ValidationError);
}

TEST_CASE("CSV ingestion") {
    const auto simple = temp_file("a.csv", "1.0\n-2.0\n0.5\n");
    const TimeSeries a = ingest_csv(simple);
    REQUIRE(a.size() == 3);
    CHECK(a[0] == 1.0);
    CHECK(a[1] == -2.0);
    CHECK(a[2] == 0.5);

    const auto nan = temp_file("b.csv", "1.0\nNaN\n0.5\n");
    try {
        ingest_csv(nan);
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    const auto two = temp_file("c.csv", "x1,x2\n1,2\n3,4\n5,6\n7,8\n");
    const VectorTimeSeries v = ingest_vector_csv(two, 2);
    CHECK(v.size() == 4);
    CHECK(v.values()(3, 1) == 8.0);
    CHECK_THROWS_AS(ingest_csv(two), ValidationError);
    CHECK_THROWS_AS(ingest_vector_csv(two, 3), ValidationError);

    CHECK_THROWS_AS(ingest_csv(temp_file("d.csv", "")), ValidationError);
    CHECK_THROWS_AS(ingest_csv(temp_file("e.csv", "# comment only\n")), ValidationError);
    CHECK_THROWS_AS(ingest_csv(temp_file("f.csv", "1\nabc\n")), ValidationError);
    CHECK_THROWS_AS(ingest_vector_csv(temp_file("g.csv", "1,2\n3\n"), 2), ValidationError);
    CHECK_THROWS_AS(ingest_csv("/nonexistent/file.csv"), ValidationError);
    CHECK(ingest_csv(temp_file("h.csv", "# sael-csv v1 series\nx\n+1.5\n  2.5 \n")).size() == 2);

    std::ostringstream os;
    write_series_csv(os, v);
    CHECK(os.str() == "# sael-csv v1 series\nx1,x2\n1,2\n3,4\n5,6\n7,8\n");
}

TEST_CASE("region CSV") {
    ELRegion r;
    r.theta = Eigen::MatrixXd::Constant(1, 1, 0.25);
    r.statistic = Eigen::VectorXd::Constant(1, 1.5);
    r.accepted = {true};
    r.gamma = 2.0;
    std::ostringstream os;
    write_region_csv(os, r);
    CHECK(os.str() == "# sael-csv v1 region gamma=2\ntheta,statistic,accepted\n0.25,1.5,1\n");
}
