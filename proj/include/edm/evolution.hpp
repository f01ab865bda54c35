#pragma once

// Unit-by-unit growth of decision models under leave-one-out selection.
//
// A model starts from the attribute pool. Each attempt draws two distinct
// pool members, fits a unit on them (entropy search), and scores it by
// leave-one-out error mu. The unit joins the pool only if
//     mu < min(mu_1, mu_2)
// where mu_i is the stored error of each input. Equal-error candidates
// (including exact repeats of an input) are therefore rejected. Growth stops
// when the target error is reached, after max_failed_attempts consecutive
// rejections, or when max_complexity units have been accepted.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edm/bits.hpp"
#include "edm/dataset.hpp"
#include "edm/entropy.hpp"
#include "edm/logic.hpp"
#include "edm/rng.hpp"

namespace edm {

struct GrowthConfig {
    std::size_t max_complexity = 10;
    std::size_t max_failed_attempts = 200;
    double target_error = 0.0;
    // false: fit once on all rows and use the training error as mu.
    bool loo_refit = true;
    SearchBudget budget;
    std::uint64_t seed = 0;

    // Throws ConfigError when a field is out of range.
    void validate() const;
};

enum class Termination { target_reached, attempts_exhausted, complexity_cap };

std::string to_string(Termination t);

struct CandidateScore {
    double mu = 1.0;
    double mu1 = 1.0;
    double mu2 = 1.0;
    bool accepted = false;
};

bool accept(double mu, double mu1, double mu2);

struct GrowthRecord {
    std::size_t unit_index = 0;
    double mu = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    // Units in the accepted unit's input cone (its model complexity).
    std::size_t complexity = 0;
    // Accepted units in the pool after this acceptance.
    std::size_t pool_units = 0;
    // Attempts made so far, including this one.
    std::size_t attempts = 0;
    // Lowest mu among accepted units so far.
    double best_mu = 0.0;
    // Held-out class predictions of the unit and of its two inputs.
    BitVector loo_predictions;
    std::array<BitVector, 2> input_predictions;
};

struct GrowthTrace {
    std::vector<GrowthRecord> accepted;
    std::size_t attempts = 0;
    std::size_t rejected = 0;
    // Rejections of candidates that repeat an existing pool member's predictions.
    std::size_t duplicates = 0;
    Termination reason = Termination::attempts_exhausted;
    // No unit was accepted; the model reads the best single attribute.
    bool fallback = false;
};

// Binary/numeric training rows prepared for growth: label bits, attribute bit
// columns and numeric columns with threshold masks. Row i is data row rows[i].
class TrainingSet {
public:
    TrainingSet(const Dataset& data, std::span<const std::size_t> rows,
                const kernels::Table& k = kernels::active());
    // All rows of `data`.
    explicit TrainingSet(const Dataset& data, const kernels::Table& k = kernels::active());

    std::size_t size() const { return labels_.size(); }
    std::size_t attribute_count() const { return attributes_.size(); }
    const std::vector<AttributeSpec>& attributes() const { return attributes_; }
    const BitVector& labels() const { return labels_; }
    bool is_numeric(std::size_t a) const { return attributes_[a].kind == AttributeKind::numeric; }
    ColumnView view(std::size_t a) const;
    const BitVector& bits(std::size_t a) const { return bits_[a]; }
    const NumericColumn& column(std::size_t a) const { return numeric_[a]; }
    const kernels::Table& kernels() const { return *kernels_; }

private:
    std::vector<AttributeSpec> attributes_;
    BitVector labels_;
    std::vector<BitVector> bits_;
    std::vector<NumericColumn> numeric_;
    const kernels::Table* kernels_;
};

// Error of an attribute used alone as a classifier (binary: best polarity;
// numeric: best single threshold), refitted per fold when loo_refit.
struct SourceScore {
    std::size_t errors = 0;
    double mu = 0.0;
    BitVector loo_predictions;
    // Fitted on all rows.
    DirectOutput full;
};

SourceScore input_mu(const TrainingSet& ts, std::size_t attribute, bool loo_refit);

// A pool member as seen by leave-one-out scoring: the column used on all
// rows plus, for units, the output bits refitted within each fold.
struct PoolColumn {
    ColumnView full;
    const Word* fold_bits = nullptr;
    std::size_t stride = 0;

    ColumnView fold(std::size_t f) const { return fold_bits ? ColumnView::fixed(fold_bits + f * stride) : full; }
};

struct LooEvaluation {
    std::size_t errors = 0;
    double mu = 1.0;
    // Stopped early once errors reached the limit; mu and predictions incomplete.
    bool aborted = false;
    BitVector loo_predictions;
    // Output bits of the unit refitted in each fold (n blocks of words_for(n)).
    std::vector<Word> fold_outputs;
};

// Leave-one-out error of a unit on inputs (a, b): for every row i the unit
// is refitted on the other rows and predicts row i. Stops early when the
// error count reaches error_limit.
LooEvaluation loo_error(const PoolColumn& a, const PoolColumn& b, const TrainingSet& ts, const GrowthConfig& config,
                        std::uint64_t seed, std::size_t error_limit = std::numeric_limits<std::size_t>::max());

// Two distinct members of a pool of `pool_size`, uniformly without replacement.
// Throws ConfigError when pool_size < 2.
std::pair<std::size_t, std::size_t> generate_candidate(std::size_t pool_size, Rng& rng);

// Attribute scores shared by every model grown on the same training set.
class GrowthContext {
public:
    GrowthContext(const TrainingSet& ts, bool loo_refit);

    const TrainingSet& training() const { return *ts_; }
    bool loo_refit() const { return loo_refit_; }
    const SourceScore& score(std::size_t attribute) const { return scores_[attribute]; }

private:
    const TrainingSet* ts_;
    bool loo_refit_;
    std::vector<SourceScore> scores_;
};

struct GrowthResult {
    DecisionModel model;
    GrowthTrace trace;
};

GrowthResult grow_model(const GrowthContext& ctx, const GrowthConfig& config);
GrowthResult grow_model(const TrainingSet& ts, const GrowthConfig& config);

// Grows n_models models; model i uses seed derive_seed(config.seed, i), so
// the result does not depend on `threads` (0 = hardware concurrency).
std::vector<GrowthResult> train_population(const TrainingSet& ts, const GrowthConfig& config, std::size_t n_models,
                                           std::size_t threads = 1);

// One CSV row per accepted unit:
// model,unit_index,mu,mu1,mu2,complexity,pool_units,attempts,fitness
void write_trace_csv(std::ostream& out, std::span<const GrowthResult> population);

}  // namespace edm
