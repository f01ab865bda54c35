#pragma once

// Majority-vote ensembles of decision models, their selection from a grown
// population, and the JSON model file.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "edm/dataset.hpp"
#include "edm/logic.hpp"

namespace edm {

enum class TiePolicy { negative, positive };
enum class EnsembleMode { paper, all };

std::string to_string(TiePolicy p);
std::string to_string(EnsembleMode m);
TiePolicy tie_policy_from_string(const std::string& s);
EnsembleMode ensemble_mode_from_string(const std::string& s);

struct EnsembleMetadata {
    std::uint64_t seed = 0;
    // Training settings as written by the caller; kept verbatim.
    std::map<std::string, std::string> config;
    std::string dataset_fingerprint;

    friend bool operator==(const EnsembleMetadata&, const EnsembleMetadata&) = default;
};

struct Prediction {
    bool positive = false;
    // Share of models voting for the returned class, in [0.5, 1].
    double confidence = 1.0;
    std::size_t votes_positive = 0;
    std::size_t votes_negative = 0;
};

// "paper": models with the minimal mu, then of those the minimal complexity.
// "all": the whole population.
std::vector<DecisionModel> select_models(std::span<const DecisionModel> population,
                                         EnsembleMode mode = EnsembleMode::paper);

// Majority vote over m models. Exact ties go to the tie policy with
// confidence 0.5.
Prediction vote(std::size_t positive_votes, std::size_t m, TiePolicy tie);

class Ensemble {
public:
    // Throws StructuralError when models is empty or a model reads an
    // attribute missing from the schema or of the wrong kind.
    Ensemble(std::vector<DecisionModel> models, std::vector<AttributeSpec> schema, std::string negative_label,
             std::string positive_label, TiePolicy tie = TiePolicy::negative, EnsembleMetadata metadata = {});

    const std::vector<DecisionModel>& models() const { return models_; }
    std::size_t size() const { return models_.size(); }
    const std::vector<AttributeSpec>& schema() const { return schema_; }
    const std::string& negative_label() const { return negative_label_; }
    const std::string& positive_label() const { return positive_label_; }
    const std::string& class_name(bool positive) const { return positive ? positive_label_ : negative_label_; }
    TiePolicy tie_policy() const { return tie_; }
    const EnsembleMetadata& metadata() const { return metadata_; }

    // Throws DataError when the sample width differs from the schema.
    Prediction predict(std::span<const double> sample) const;

private:
    std::vector<DecisionModel> models_;
    std::vector<AttributeSpec> schema_;
    std::string negative_label_;
    std::string positive_label_;
    TiePolicy tie_;
    EnsembleMetadata metadata_;
};

struct Evaluation {
    double accuracy = 0.0;  // percent
    std::vector<double> member_accuracies;
    double mean_member_accuracy = 0.0;
    // Test accuracy of the member with the lowest mu (then complexity, then index).
    double bs_accuracy = 0.0;
    double mean_confidence = 0.0;
};

// Scores the ensemble on the given rows of `data`, whose schema must equal the
// ensemble's. Throws DataError for an empty row set.
Evaluation evaluate(const Ensemble& ensemble, const Dataset& data, std::span<const std::size_t> rows);

// Index of the member a "best single" comparison uses.
std::size_t best_single_index(std::span<const DecisionModel> models);

inline constexpr int kModelFormatVersion = 1;

std::string to_json(const Ensemble& ensemble);
// Throws FormatError on malformed text, a different format_version or an
// inconsistent model.
Ensemble ensemble_from_json(const std::string& text);

void save(const Ensemble& ensemble, const std::string& path);
Ensemble load(const std::string& path);

}  // namespace edm
