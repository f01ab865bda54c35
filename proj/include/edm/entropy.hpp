#pragma once

// Shannon entropy of labeled sets and the randomized search for the
// (threshold, function) pair that minimizes conditional entropy of a unit.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edm/bits.hpp"
#include "edm/kernels.hpp"
#include "edm/logic.hpp"

namespace edm {

// Entropy in bits of a set with the given per-class counts (0 log 0 = 0).
// Throws DomainError when the counts sum to zero.
double entropy(std::span<const std::size_t> class_counts);

// Size-weighted entropy of the two subsets induced by `outputs` (1 / 0).
// Throws DomainError on length mismatch or empty input.
double conditional_entropy(std::span<const std::uint8_t> outputs, std::span<const std::uint8_t> labels);

// k * log2(k), tabulated for small k.
double xlog2x(std::size_t k);

// Conditional entropy of a binary split from integer counts: side 1 holds n1
// rows of which p1 are positive, side 0 holds n0 rows of which p0 positive.
double split_entropy(std::size_t n1, std::size_t p1, std::size_t n0, std::size_t p0);

// Two entropies closer than this are treated as equal when ranking splits.
inline constexpr double kEntropyTieTolerance = 1e-12;

// A numeric attribute restricted to a row set, with the bit mask of rows
// above each row's value precomputed (so a threshold drawn from row r selects
// mask_above(r) without rescanning the column).
class NumericColumn {
public:
    NumericColumn() = default;
    explicit NumericColumn(std::vector<double> values, const kernels::Table& k = kernels::active());

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    const Word* mask_above(std::size_t row) const { return masks_.data() + row * words_for(values_.size()); }

private:
    std::vector<double> values_;
    std::vector<Word> masks_;
};

// One unit input as seen by the search: either a fixed bit column (binary
// attribute or prior unit output) or a numeric column to be thresholded.
struct ColumnView {
    const Word* bits = nullptr;
    const NumericColumn* numeric = nullptr;

    static ColumnView fixed(const BitVector& b) { return {b.data(), nullptr}; }
    static ColumnView fixed(const Word* b) { return {b, nullptr}; }
    static ColumnView thresholded(const NumericColumn& c) { return {nullptr, &c}; }
    bool is_numeric() const { return numeric != nullptr; }
};

struct SearchBudget {
    // Number of threshold draws (pairs, when both inputs are numeric).
    std::size_t draws = 100;
    std::uint64_t seed = 0;
    // Enumerate every distinct training value instead of drawing.
    bool exhaustive = false;
};

struct EntropySplit {
    int function_id = 1;
    std::array<std::optional<double>, 2> thresholds;
    // Row whose value supplied each threshold (for mask lookup).
    std::array<std::optional<std::size_t>, 2> threshold_rows;
    double entropy = 0.0;
    bool polarity = true;
    // Training misclassifications under `polarity`.
    std::size_t errors = 0;

    LogicFunction function() const { return LogicFunction(function_id); }
};

// Splits are ranked by entropy (within kEntropyTieTolerance), then training
// errors, then function id, then thresholds (first input, then second).
bool better_split(const EntropySplit& a, const EntropySplit& b);

// Fits the best (thresholds, function, polarity) for a unit with inputs a, b
// over the rows set in `train`. Thresholds are values of training rows drawn
// uniformly (with replacement) `budget.draws` times from `budget.seed`, or
// every distinct value when budget.exhaustive. Polarity is the majority class
// among training rows with output 1 (ties and empty sides give true).
EntropySplit fit_unit(ColumnView a, ColumnView b, const BitVector& labels, const BitVector& train,
                      const SearchBudget& budget, const kernels::Table& k = kernels::active());

// Output bits of the fitted unit over all n rows (writes words_for(n) words).
void split_outputs(ColumnView a, ColumnView b, const EntropySplit& split, std::size_t n, Word* out);
BitVector split_outputs(ColumnView a, ColumnView b, const EntropySplit& split, std::size_t n);

}  // namespace edm
