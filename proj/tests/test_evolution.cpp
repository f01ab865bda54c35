#include <doctest.h>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edm/errors.hpp"
#include "edm/evolution.hpp"
#include "edm/rng.hpp"
#include "oracles.hpp"

using namespace edm;

namespace {

// Columns of equal length; numeric[i] marks column i numeric.
Dataset make_dataset(const std::vector<std::vector<double>>& columns, const std::vector<bool>& numeric,
                     const std::vector<int>& labels) {
    std::vector<AttributeSpec> attrs;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const std::string name = "x" + std::to_string(c);
        if (numeric[c]) {
            attrs.push_back({name, AttributeKind::numeric, {}, name, 0.0});
        } else {
            attrs.push_back({name, AttributeKind::binary, {"0", "1"}, name, 0.0});
        }
    }
    std::vector<double> values;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        for (const auto& col : columns) values.push_back(col[r]);
    }
    std::vector<std::uint8_t> y(labels.begin(), labels.end());
    return Dataset(std::move(attrs), std::move(values), std::move(y), "neg", "pos");
}

Dataset xor_dataset(std::size_t copies) {
    std::vector<double> a, b;
    std::vector<int> y;
    for (std::size_t k = 0; k < copies; ++k) {
        for (int i = 0; i < 4; ++i) {
            a.push_back(i >> 1);
            b.push_back(i & 1);
            y.push_back((i >> 1) != (i & 1));
        }
    }
    return make_dataset({a, b}, {false, false}, y);
}

std::string trace_csv(const std::vector<GrowthResult>& pop) {
    std::ostringstream out;
    write_trace_csv(out, pop);
    return out.str();
}

}  // namespace

TEST_CASE("acceptance rule") {
    CHECK(accept(0.10, 0.20, 0.15));
    CHECK_FALSE(accept(0.15, 0.15, 0.20));
    CHECK_FALSE(accept(0.2, 0.1, 0.3));
}

TEST_CASE("growth config validation") {
    GrowthConfig c;
    CHECK_NOTHROW(c.validate());
    c.max_complexity = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GrowthConfig{};
    c.target_error = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GrowthConfig{};
    c.max_failed_attempts = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("source scores") {
    std::vector<double> same, constant(10, 0.0), ramp;
    std::vector<int> y;
    for (int i = 1; i <= 10; ++i) {
        y.push_back(i > 5);
        same.push_back(i > 5);
        ramp.push_back(i);
    }
    const Dataset d = make_dataset({same, constant, ramp}, {false, false, true}, y);
    const TrainingSet ts(d);

    SUBCASE("an attribute equal to the label has no error") { CHECK(input_mu(ts, 0, true).mu == 0.0); }
    SUBCASE("a constant attribute on balanced data is always wrong when one row is held out") {
        CHECK(input_mu(ts, 1, true).mu == 1.0);
        CHECK(input_mu(ts, 1, false).mu == 0.5);
    }
    SUBCASE("a numeric attribute refits its threshold per fold") {
        std::vector<bool> lab(y.begin(), y.end());
        const std::size_t expected = oracle::loo_numeric_errors(ramp, lab);
        CHECK(expected == 1);
        CHECK(input_mu(ts, 2, true).errors == expected);
        CHECK(input_mu(ts, 2, true).mu == doctest::Approx(0.1));
        CHECK(input_mu(ts, 2, false).mu == 0.0);
    }
}

TEST_CASE("numeric source scores agree with the oracle (property)") {
    Rng rng(404);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 6 + rng.below(14);
        std::vector<double> v(n), other(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = double(rng.below(7));
            other[i] = double(rng.below(2));
            y[i] = rng.below(3) == 0 ? int(rng.below(2)) : int(v[i] > 3);
        }
        y[0] = 0;
        y[1] = 1;
        const Dataset d = make_dataset({v, other}, {true, false}, y);
        const TrainingSet ts(d);
        const std::vector<bool> lab(y.begin(), y.end());
        CHECK(input_mu(ts, 0, true).errors == oracle::loo_numeric_errors(v, lab));
    }
}

TEST_CASE("nominal attributes are refused") {
    std::vector<AttributeSpec> attrs = {{"c", AttributeKind::nominal, {"a", "b", "c"}, "c", 0.0},
                                        {"d", AttributeKind::binary, {"0", "1"}, "d", 0.0}};
    const Dataset d(attrs, {0, 1, 1, 0, 2, 1, 0, 0}, {0, 1, 1, 0}, "n", "p");
    CHECK_THROWS_AS(TrainingSet{d}, DataError);
}

TEST_CASE("candidate generation") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t pool = 2 + rng.below(30);
        const auto [a, b] = generate_candidate(pool, rng);
        CHECK(a != b);
        CHECK(a < pool);
        CHECK(b < pool);
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (int i = 0; i < 200; ++i) seen.insert(generate_candidate(2, rng));
    CHECK(seen.size() == 2);
    Rng r1(9), r2(9);
    CHECK(generate_candidate(17, r1) == generate_candidate(17, r2));
    CHECK_THROWS_AS(generate_candidate(1, rng), ConfigError);
}

TEST_CASE("leave-one-out error is a count over the training rows") {
    const Dataset d = oracle::synthetic_dataset(30, 3, 2, 12);
    const TrainingSet ts(d);
    GrowthConfig cfg;
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto [a, b] = generate_candidate(ts.attribute_count(), rng);
        const LooEvaluation ev =
            loo_error(PoolColumn{ts.view(a), nullptr, 0}, PoolColumn{ts.view(b), nullptr, 0}, ts, cfg, rng.next());
        CHECK_FALSE(ev.aborted);
        CHECK(ev.mu * 30 == doctest::Approx(double(ev.errors)));
        CHECK(ev.loo_predictions.size() == 30);
        std::size_t wrong = 0;
        for (std::size_t r = 0; r < 30; ++r) wrong += ev.loo_predictions.get(r) != ts.labels().get(r);
        CHECK(wrong == ev.errors);
    }
    const LooEvaluation capped =
        loo_error(PoolColumn{ts.view(3), nullptr, 0}, PoolColumn{ts.view(4), nullptr, 0}, ts, cfg, 5, 1);
    CHECK(capped.errors <= 1);
}

TEST_CASE("xor is grown from two binary attributes") {
    const Dataset d = xor_dataset(8);
    const TrainingSet ts(d);
    GrowthConfig cfg;
    cfg.seed = 42;
    const GrowthResult r = grow_model(ts, cfg);
    CHECK(r.trace.reason == Termination::target_reached);
    CHECK_FALSE(r.trace.fallback);
    CHECK(r.model.mu() == 0.0);
    CHECK(r.model.complexity() <= 3);
    for (std::size_t row = 0; row < d.size(); ++row) {
        const std::vector<double> s = {d.value(row, 0), d.value(row, 1)};
        CHECK(r.model.predict(s) == d.label(row));
    }
}

TEST_CASE("growth stops at the target and at the complexity cap") {
    const Dataset d = oracle::synthetic_dataset(40, 6, 2, 21);
    const TrainingSet ts(d);
    GrowthConfig cfg;
    cfg.seed = 7;
    cfg.target_error = 1.0;
    const GrowthResult first = grow_model(ts, cfg);
    CHECK(first.trace.accepted.size() <= 1);
    if (!first.trace.accepted.empty()) CHECK(first.trace.reason == Termination::target_reached);

    for (std::size_t cap : {1, 2, 4}) {
        cfg.target_error = 0.0;
        cfg.max_complexity = cap;
        cfg.max_failed_attempts = 400;
        const GrowthResult r = grow_model(ts, cfg);
        CHECK(r.trace.accepted.size() <= cap);
        CHECK(r.model.complexity() <= cap);
    }
}

TEST_CASE("growth traces obey the acceptance invariants (property)") {
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const Dataset d = oracle::synthetic_dataset(24 + rng.below(20), 4, 2, rng.next());
        const TrainingSet ts(d);
        GrowthConfig cfg;
        cfg.seed = rng.next();
        cfg.max_failed_attempts = 100;
        const GrowthResult r = grow_model(ts, cfg);
        double best = 1.0;
        for (const GrowthRecord& rec : r.trace.accepted) {
            CHECK(rec.mu < rec.mu1);
            CHECK(rec.mu < rec.mu2);
            CHECK(rec.loo_predictions != rec.input_predictions[0]);
            CHECK(rec.loo_predictions != rec.input_predictions[1]);
            best = std::min(best, rec.mu);
            CHECK(rec.best_mu == doctest::Approx(best));
        }
        CHECK(r.trace.accepted.size() + r.trace.rejected == r.trace.attempts);
        CHECK(r.model.mu() >= 0.0);
        if (!r.trace.fallback) CHECK(r.model.mu() == doctest::Approx(best));
    }
}

TEST_CASE("population training is independent of the thread count") {
    const Dataset d = oracle::synthetic_dataset(30, 5, 2, 77);
    const TrainingSet ts(d);
    GrowthConfig cfg;
    cfg.seed = 2024;
    cfg.max_failed_attempts = 60;
    const auto serial = train_population(ts, cfg, 12, 1);
    const auto threaded = train_population(ts, cfg, 12, 4);
    REQUIRE(serial.size() == 12);
    CHECK(trace_csv(serial) == trace_csv(threaded));
    for (std::size_t m = 0; m < serial.size(); ++m) {
        CHECK(serial[m].model.mu() == threaded[m].model.mu());
        CHECK(serial[m].model.complexity() == threaded[m].model.complexity());
        for (std::size_t row = 0; row < d.size(); ++row) {
            std::vector<double> s;
            for (std::size_t a = 0; a < d.attribute_count(); ++a) s.push_back(d.value(row, a));
            CHECK(serial[m].model.predict(s) == threaded[m].model.predict(s));
        }
    }

    GrowthConfig single = cfg;
    single.seed = derive_seed(cfg.seed, 0);
    const GrowthResult alone = grow_model(ts, single);
    CHECK(alone.trace.attempts == serial[0].trace.attempts);
    CHECK(alone.model.mu() == serial[0].model.mu());
}

TEST_CASE("trace csv") {
    const Dataset d = xor_dataset(4);
    const TrainingSet ts(d);
    GrowthConfig cfg;
    cfg.seed = 1;
    const auto pop = train_population(ts, cfg, 2);
    const std::string csv = trace_csv(pop);
    CHECK(csv.rfind("model,unit_index,mu,mu1,mu2,complexity,pool_units,attempts,fitness\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + pop[0].trace.accepted.size() + pop[1].trace.accepted.size());
}
