#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "edm/errors.hpp"
#include "edm/experiment.hpp"
#include "oracles.hpp"

using namespace edm;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.train_size = 20;
    cfg.runs = 2;
    cfg.seed = 314;
    cfg.methods = {Method::edm, Method::ann};
    cfg.models = 8;
    cfg.growth.max_failed_attempts = 40;
    cfg.growth.max_complexity = 4;
    cfg.ann.ensemble_size = 3;
    cfg.ann.epochs = 30;
    cfg.ann.loo_validation = false;
    return cfg;
}

std::string csv(const ExperimentReport& r, bool timing) {
    std::ostringstream out;
    write_report_csv(out, r, timing);
    return out.str();
}

}  // namespace

TEST_CASE("sample statistics") {
    const std::vector<double> xs = {2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(mean(xs) == 5.0);
    CHECK(sample_sd(xs) == doctest::Approx(2.138089935299395));
    const std::vector<double> one = {3.0};
    CHECK(sample_sd(one) == 0.0);
    CHECK(mean(std::vector<double>{}) == 0.0);
}

TEST_CASE("method names") {
    CHECK(method_from_string("edm") == Method::edm);
    CHECK(to_string(Method::ann) == "ann");
    CHECK_THROWS_AS(method_from_string("svm"), ConfigError);
}

TEST_CASE("a two-fold experiment report") {
    const Dataset d = oracle::synthetic_dataset(60, 5, 2, 10);
    const ExperimentConfig cfg = small_config();
    std::vector<std::string> log;
    const ExperimentReport r = run_experiment(d, cfg, [&](const std::string& s) { log.push_back(s); });
    REQUIRE(r.cells.size() == 2 * 2 * 2);
    CHECK(log.size() == r.cells.size());
    for (const CellResult& c : r.cells) {
        CHECK(c.bs_accuracy >= 0.0);
        CHECK(c.bs_accuracy <= 100.0);
        CHECK(c.e_accuracy >= 0.0);
        CHECK(c.e_accuracy <= 100.0);
        CHECK(c.mean_chi >= 0.5);
        CHECK(c.mean_chi <= 1.0);
        CHECK(c.train_rows == 20);
        CHECK(c.test_rows == 30);
        if (c.method == Method::edm) {
            CHECK(c.ensemble_size >= 1);
            CHECK(c.ensemble_size <= cfg.models);
        }
    }
    const auto rows = summarize(r);
    CHECK(rows.size() == 4);
    for (const auto& row : rows) CHECK(row.runs == 2);
    CHECK(render_summary(rows).find("edm") != std::string::npos);

    const std::string text = csv(r, false);
    CHECK(text.rfind("method,fold,run,bs_accuracy,e_accuracy,mean_chi,seconds\n", 0) == 0);
    CHECK(text == csv(run_experiment(d, cfg), false));
}

TEST_CASE("a single run has zero spread") {
    const Dataset d = oracle::synthetic_dataset(40, 4, 0, 2);
    ExperimentConfig cfg = small_config();
    cfg.runs = 1;
    cfg.methods = {Method::edm};
    const auto rows = summarize(run_experiment(d, cfg));
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.bs_sd == 0.0);
        CHECK(row.e_sd == 0.0);
    }
}

TEST_CASE("training size shrinks with a warning when a class is short") {
    const Dataset d = oracle::synthetic_dataset(30, 4, 0, 3);
    ExperimentConfig cfg = small_config();
    cfg.runs = 1;
    cfg.methods = {Method::edm};
    cfg.train_size = 40;
    const ExperimentReport r = run_experiment(d, cfg);
    CHECK_FALSE(r.warnings.empty());
    for (const CellResult& c : r.cells) CHECK(c.train_rows < 40);
}

TEST_CASE("experiment config errors") {
    const Dataset d = oracle::synthetic_dataset(20, 3, 0, 1);
    ExperimentConfig cfg = small_config();
    cfg.train_size = 7;
    CHECK_THROWS_AS(run_experiment(d, cfg), ConfigError);
    cfg = small_config();
    cfg.runs = 0;
    CHECK_THROWS_AS(run_experiment(d, cfg), ConfigError);
    cfg = small_config();
    cfg.methods.clear();
    CHECK_THROWS_AS(run_experiment(d, cfg), ConfigError);
}
