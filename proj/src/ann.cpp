#include "edm/ann.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "edm/errors.hpp"
#include "edm/parallel.hpp"

namespace edm {
namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Cross-entropy of a sigmoid output with logit z against label y.
double logistic_loss(double z, bool y) { return std::max(z, 0.0) - (y ? z : 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

void BaselineConfig::validate() const {
    if (hidden_units < 1) throw ConfigError("hidden_units must be at least 1");
    if (ensemble_size < 1) throw ConfigError("ensemble_size must be at least 1");
    if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) throw ConfigError("subset_fraction must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

Mlp::Mlp(std::size_t inputs, std::size_t hidden)
    : inputs_(inputs), hidden_(hidden), params_(hidden * inputs + 2 * hidden + 1, 0.0) {
    if (inputs == 0 || hidden == 0) throw ConfigError("a network needs at least one input and one hidden unit");
}

void Mlp::initialize(Rng& rng) {
    const double r1 = 1.0 / std::sqrt(static_cast<double>(inputs_));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    double* p = params_.data();
    for (std::size_t i = 0; i < hidden_ * inputs_; ++i) *p++ = rng.uniform(-r1, r1);
    for (std::size_t i = 0; i < hidden_; ++i) *p++ = 0.0;
    for (std::size_t i = 0; i < hidden_; ++i) *p++ = rng.uniform(-r2, r2);
    *p = 0.0;
}

double Mlp::logit(const double* x, double* h, const kernels::Table& k) const {
    const double* w1 = params_.data();
    const double* b1 = w1 + hidden_ * inputs_;
    const double* w2 = b1 + hidden_;
    const double b2 = w2[hidden_];
    k.gemv(w1, x, b1, h, hidden_, inputs_);
    for (std::size_t j = 0; j < hidden_; ++j) h[j] = sigmoid(h[j]);
    return k.dot(w2, h, hidden_) + b2;
}

double Mlp::probability(const double* x, const kernels::Table& k) const {
    std::vector<double> h(hidden_);
    return sigmoid(logit(x, h.data(), k));
}

double Mlp::loss(std::span<const double> x, std::span<const std::uint8_t> y, const kernels::Table& k) const {
    std::vector<double> h(hidden_);
    double total = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        total += logistic_loss(logit(x.data() + r * inputs_, h.data(), k), y[r] != 0);
    }
    return total / static_cast<double>(y.size());
}

double Mlp::gradient(std::span<const double> x, std::span<const std::uint8_t> y, std::vector<double>& grad,
                     const kernels::Table& k) const {
    grad.assign(params_.size(), 0.0);
    double* gw1 = grad.data();
    double* gb1 = gw1 + hidden_ * inputs_;
    double* gw2 = gb1 + hidden_;
    double* gb2 = gw2 + hidden_;
    const double* w2 = params_.data() + hidden_ * inputs_ + hidden_;
    const double inv_n = 1.0 / static_cast<double>(y.size());
    std::vector<double> h(hidden_);
    double total = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        const double* xr = x.data() + r * inputs_;
        const double z = logit(xr, h.data(), k);
        total += logistic_loss(z, y[r] != 0);
        const double d2 = (sigmoid(z) - (y[r] ? 1.0 : 0.0)) * inv_n;
        k.axpy(d2, h.data(), gw2, hidden_);
        *gb2 += d2;
        for (std::size_t j = 0; j < hidden_; ++j) {
            const double d1 = d2 * w2[j] * h[j] * (1.0 - h[j]);
            k.axpy(d1, xr, gw1 + j * inputs_, inputs_);
            gb1[j] += d1;
        }
    }
    return total * inv_n;
}

void Mlp::train(std::span<const double> x, std::span<const std::uint8_t> y, std::size_t epochs, double learning_rate,
                const kernels::Table& k) {
    std::vector<double> grad;
    for (std::size_t e = 0; e < epochs; ++e) {
        gradient(x, y, grad, k);
        k.axpy(-learning_rate, grad.data(), params_.data(), params_.size());
    }
}

namespace {

void standardize(const BaselineMember& m, std::span<const double> sample, double* out) {
    for (std::size_t i = 0; i < m.features.size(); ++i) {
        out[i] = (sample[m.features[i]] - m.mean[i]) / m.scale[i];
    }
}

}  // namespace

bool BaselineMember::predict(std::span<const double> sample, const kernels::Table& k) const {
    std::vector<double> x(features.size());
    standardize(*this, sample, x.data());
    return network.probability(x.data(), k) >= 0.5;
}

Prediction BaselineEnsemble::predict(std::span<const double> sample) const {
    if (sample.size() != width) {
        throw DataError(fmt::format("sample has {} values, baseline expects {}", sample.size(), width));
    }
    const kernels::Table& k = kernels::active();
    std::size_t positive = 0;
    for (const BaselineMember& m : members) positive += m.predict(sample, k) ? 1 : 0;
    return vote(positive, members.size(), tie);
}

std::size_t BaselineEnsemble::best_member() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (members[i].validation_accuracy > members[best].validation_accuracy) best = i;
    }
    return best;
}

BaselineEnsemble train_baseline(const Dataset& data, std::span<const std::size_t> rows, const BaselineConfig& config,
                                std::size_t threads) {
    config.validate();
    if (rows.size() < 4) throw DataError("the baseline needs at least four training rows");
    std::size_t positives = 0;
    for (std::size_t r : rows) positives += data.label(r) ? 1 : 0;
    if (positives == 0 || positives == rows.size()) throw DataError("the baseline training rows hold a single class");
    for (const AttributeSpec& a : data.attributes()) {
        if (a.kind == AttributeKind::nominal) {
            throw DataError(fmt::format("attribute '{}' is nominal; binarize the dataset first", a.name));
        }
    }
    const std::size_t width = data.attribute_count();
    if (width == 0) throw DataError("the baseline needs at least one attribute");
    const std::size_t n_features =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(config.subset_fraction * static_cast<double>(width))), 1,
                                width);
    const kernels::Table& k = kernels::active();
    const std::size_t n = rows.size();

    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = data.label(rows[i]) ? 1 : 0;

    BaselineEnsemble ensemble;
    ensemble.width = width;
    ensemble.members.resize(config.ensemble_size);

    parallel_for(config.ensemble_size, threads, [&](std::size_t index) {
        Rng rng(derive_seed(config.seed, index));
        BaselineMember& m = ensemble.members[index];

        std::vector<std::size_t> all(width);
        for (std::size_t i = 0; i < width; ++i) all[i] = i;
        for (std::size_t i = 0; i < n_features; ++i) {
            std::swap(all[i], all[i + rng.below(width - i)]);
        }
        m.features.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_features));
        std::sort(m.features.begin(), m.features.end());

        m.mean.assign(n_features, 0.0);
        m.scale.assign(n_features, 1.0);
        for (std::size_t f = 0; f < n_features; ++f) {
            double sum = 0.0;
            for (std::size_t r : rows) sum += data.value(r, m.features[f]);
            const double mean = sum / static_cast<double>(n);
            double var = 0.0;
            for (std::size_t r : rows) var += (data.value(r, m.features[f]) - mean) * (data.value(r, m.features[f]) - mean);
            const double sd = std::sqrt(var / static_cast<double>(n));
            m.mean[f] = mean;
            m.scale[f] = sd > 0.0 ? sd : 1.0;
        }
        std::vector<double> x(n * n_features);
        for (std::size_t i = 0; i < n; ++i) standardize(m, data.row(rows[i]), x.data() + i * n_features);

        Mlp initial(n_features, config.hidden_units);
        initial.initialize(rng);

        std::size_t correct = 0;
        if (config.loo_validation) {
            std::vector<double> xf((n - 1) * n_features);
            std::vector<std::uint8_t> yf(n - 1);
            for (std::size_t held = 0; held < n; ++held) {
                for (std::size_t i = 0, j = 0; i < n; ++i) {
                    if (i == held) continue;
                    std::copy_n(x.data() + i * n_features, n_features, xf.data() + j * n_features);
                    yf[j++] = labels[i];
                }
                Mlp net = initial;
                net.train(xf, yf, config.epochs, config.learning_rate, k);
                const bool p = net.probability(x.data() + held * n_features, k) >= 0.5;
                if (p == (labels[held] != 0)) ++correct;
            }
        }
        m.network = initial;
        m.network.train(x, labels, config.epochs, config.learning_rate, k);
        if (!config.loo_validation) {
            for (std::size_t i = 0; i < n; ++i) {
                const bool p = m.network.probability(x.data() + i * n_features, k) >= 0.5;
                if (p == (labels[i] != 0)) ++correct;
            }
        }
        m.validation_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    });
    return ensemble;
}

BaselineEvaluation evaluate_baseline(const BaselineEnsemble& ensemble, const Dataset& data,
                                     std::span<const std::size_t> rows) {
    if (rows.empty()) throw DataError("evaluation needs at least one test row");
    if (ensemble.members.empty()) throw DataError("the baseline ensemble is empty");
    const kernels::Table& k = kernels::active();
    const std::size_t best = ensemble.best_member();
    std::size_t bs_correct = 0;
    std::size_t e_correct = 0;
    double chi = 0.0;
    for (std::size_t r : rows) {
        const auto sample = data.row(r);
        const bool truth = data.label(r);
        std::size_t positive = 0;
        for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
            const bool p = ensemble.members[m].predict(sample, k);
            positive += p ? 1 : 0;
            if (m == best && p == truth) ++bs_correct;
        }
        const Prediction pred = vote(positive, ensemble.members.size(), ensemble.tie);
        if (pred.positive == truth) ++e_correct;
        chi += pred.confidence;
    }
    const auto n = static_cast<double>(rows.size());
    return {100.0 * static_cast<double>(bs_correct) / n, 100.0 * static_cast<double>(e_correct) / n, chi / n};
}

}  // namespace edm
