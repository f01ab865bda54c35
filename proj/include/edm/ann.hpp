#pragma once

// Comparison baseline: an ensemble of one-hidden-layer sigmoid networks, each
// trained by full-batch gradient descent on a random subset of attributes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edm/dataset.hpp"
#include "edm/ensemble.hpp"
#include "edm/kernels.hpp"
#include "edm/rng.hpp"

namespace edm {

struct BaselineConfig {
    std::size_t hidden_units = 10;
    std::size_t ensemble_size = 200;
    double subset_fraction = 0.5;
    std::size_t epochs = 500;
    double learning_rate = 0.1;
    // Score members by leave-one-out accuracy (true) or training accuracy.
    bool loo_validation = true;
    std::uint64_t seed = 0;

    void validate() const;
};

// Parameters are stored flat: W1 (hidden x inputs, row-major), b1, w2, b2.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::size_t inputs, std::size_t hidden);

    std::size_t inputs() const { return inputs_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    // Uniform in +-1/sqrt(fan_in) for weights, zero biases.
    void initialize(Rng& rng);

    // Pre-activation of the output for one input row.
    double logit(const double* x, double* hidden_out, const kernels::Table& k) const;
    double probability(const double* x, const kernels::Table& k) const;

    // Mean cross-entropy over `rows` rows of x (row-major, inputs() wide).
    double loss(std::span<const double> x, std::span<const std::uint8_t> y, const kernels::Table& k) const;
    // Loss and its gradient with respect to parameters().
    double gradient(std::span<const double> x, std::span<const std::uint8_t> y, std::vector<double>& grad,
                    const kernels::Table& k) const;
    void train(std::span<const double> x, std::span<const std::uint8_t> y, std::size_t epochs, double learning_rate,
               const kernels::Table& k);

private:
    std::size_t inputs_ = 0;
    std::size_t hidden_ = 0;
    std::vector<double> params_;
};

struct BaselineMember {
    std::vector<std::size_t> features;
    std::vector<double> mean;
    std::vector<double> scale;
    Mlp network;
    double validation_accuracy = 0.0;

    bool predict(std::span<const double> sample, const kernels::Table& k) const;
};

struct BaselineEnsemble {
    std::vector<BaselineMember> members;
    std::size_t width = 0;
    TiePolicy tie = TiePolicy::negative;

    Prediction predict(std::span<const double> sample) const;
    // Member with the highest validation accuracy (first on ties).
    std::size_t best_member() const;
};

// Throws DataError for fewer than 4 rows, a single class among them, or
// nominal attributes.
BaselineEnsemble train_baseline(const Dataset& data, std::span<const std::size_t> rows, const BaselineConfig& config,
                                std::size_t threads = 1);

struct BaselineEvaluation {
    double bs_accuracy = 0.0;
    double e_accuracy = 0.0;
    double mean_confidence = 0.0;
};

BaselineEvaluation evaluate_baseline(const BaselineEnsemble& ensemble, const Dataset& data,
                                     std::span<const std::size_t> rows);

}  // namespace edm
