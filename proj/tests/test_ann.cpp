#include <doctest.h>

#include <cmath>
#include <vector>

#include "edm/ann.hpp"
#include "edm/errors.hpp"
#include "edm/kernels.hpp"
#include "edm/rng.hpp"
#include "oracles.hpp"

using namespace edm;

namespace {

struct Batch {
    std::vector<double> x;
    std::vector<std::uint8_t> y;
};

Batch random_batch(Rng& rng, std::size_t rows, std::size_t inputs) {
    Batch b;
    for (std::size_t i = 0; i < rows * inputs; ++i) b.x.push_back(rng.uniform(-2, 2));
    for (std::size_t i = 0; i < rows; ++i) b.y.push_back(static_cast<std::uint8_t>(rng.below(2)));
    return b;
}

double max_gradient_error(Mlp& net, const Batch& b, const kernels::Table& k) {
    std::vector<double> grad;
    net.gradient(b.x, b.y, grad, k);
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t p = 0; p < net.parameter_count(); ++p) {
        const double saved = net.parameters()[p];
        net.parameters()[p] = saved + h;
        const double up = net.loss(b.x, b.y, k);
        net.parameters()[p] = saved - h;
        const double down = net.loss(b.x, b.y, k);
        net.parameters()[p] = saved;
        const double numeric = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(numeric - grad[p]) / std::max(1.0, std::abs(numeric)));
    }
    return worst;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t inputs = 1 + rng.below(5), hidden = 1 + rng.below(6), rows = 2 + rng.below(10);
        Mlp net(inputs, hidden);
        net.initialize(rng);
        for (double& p : net.parameters()) p += rng.uniform(-0.5, 0.5);
        const Batch b = random_batch(rng, rows, inputs);
        CHECK(max_gradient_error(net, b, kernels::scalar()) < 1e-4);
        if (kernels::avx2()) CHECK(max_gradient_error(net, b, *kernels::avx2()) < 1e-4);
    }
}

TEST_CASE("initialization ranges") {
    Rng rng(1);
    Mlp net(4, 3);
    net.initialize(rng);
    const auto p = net.parameters();
    CHECK(net.parameter_count() == 3 * 4 + 3 + 3 + 1);
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(p[i]) <= 0.5);
    for (std::size_t i = 12; i < 15; ++i) CHECK(p[i] == 0.0);
    CHECK(p[18] == 0.0);
    CHECK_THROWS_AS(Mlp(0, 3), ConfigError);
}

TEST_CASE("small-step gradient descent lowers the loss") {
    Rng rng(2);
    const Batch b = random_batch(rng, 20, 3);
    Mlp net(3, 5);
    net.initialize(rng);
    const auto& k = kernels::active();
    double last = net.loss(b.x, b.y, k);
    for (int step = 0; step < 50; ++step) {
        net.train(b.x, b.y, 1, 0.05, k);
        const double now = net.loss(b.x, b.y, k);
        CHECK(now <= last + 1e-12);
        last = now;
    }
}

TEST_CASE("a network learns xor") {
    Batch b;
    for (int rep = 0; rep < 4; ++rep) {
        for (int i = 0; i < 4; ++i) {
            b.x.push_back(i >> 1 ? 1.0 : -1.0);
            b.x.push_back(i & 1 ? 1.0 : -1.0);
            b.y.push_back(static_cast<std::uint8_t>((i >> 1) != (i & 1)));
        }
    }
    Rng rng(4);
    Mlp net(2, 6);
    net.initialize(rng);
    const auto& k = kernels::active();
    net.train(b.x, b.y, 4000, 0.5, k);
    for (std::size_t i = 0; i < 4; ++i) CHECK((net.probability(b.x.data() + 2 * i, k) > 0.5) == (b.y[i] != 0));
}

TEST_CASE("baseline ensembles") {
    const Dataset d = oracle::synthetic_dataset(40, 4, 3, 6);
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < d.size(); ++r) (r % 2 ? test : train).push_back(r);
    BaselineConfig cfg;
    cfg.ensemble_size = 6;
    cfg.epochs = 60;
    cfg.seed = 77;

    const BaselineEnsemble a = train_baseline(d, train, cfg, 1);
    const BaselineEnsemble b = train_baseline(d, train, cfg, 3);
    REQUIRE(a.members.size() == 6);
    for (std::size_t m = 0; m < 6; ++m) {
        CHECK(a.members[m].features == b.members[m].features);
        CHECK(a.members[m].validation_accuracy == b.members[m].validation_accuracy);
        CHECK(a.members[m].features.size() == 4);  // half of 7 rounded
    }
    const BaselineEvaluation ea = evaluate_baseline(a, d, test), eb = evaluate_baseline(b, d, test);
    CHECK(ea.e_accuracy == eb.e_accuracy);
    CHECK(ea.bs_accuracy == eb.bs_accuracy);
    CHECK(ea.mean_confidence >= 0.5);
    CHECK(ea.mean_confidence <= 1.0);

    cfg.ensemble_size = 1;
    cfg.loo_validation = false;
    const BaselineEnsemble one = train_baseline(d, train, cfg);
    const BaselineEvaluation e1 = evaluate_baseline(one, d, test);
    CHECK(e1.e_accuracy == e1.bs_accuracy);
    CHECK(e1.mean_confidence == 1.0);
}

TEST_CASE("baseline input checks") {
    const Dataset d = oracle::synthetic_dataset(20, 2, 1, 1);
    std::vector<std::size_t> same;
    for (std::size_t r = 0; r < d.size() && same.size() < 6; ++r) {
        if (d.label(r)) same.push_back(r);
    }
    BaselineConfig cfg;
    cfg.ensemble_size = 2;
    cfg.epochs = 5;
    CHECK_THROWS_AS(train_baseline(d, same, cfg), DataError);
    const std::vector<std::size_t> few = {0, 1, 2};
    CHECK_THROWS_AS(train_baseline(d, few, cfg), DataError);
    cfg.subset_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
