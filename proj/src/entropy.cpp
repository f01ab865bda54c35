#include "edm/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "edm/errors.hpp"
#include "edm/rng.hpp"

namespace edm {
namespace {

constexpr std::size_t kTableSize = 4096;

const std::vector<double>& xlog2x_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(kTableSize);
        for (std::size_t k = 1; k < kTableSize; ++k) {
            const auto x = static_cast<double>(k);
            t[k] = x * std::log2(x);
        }
        return t;
    }();
    return table;
}

// Candidate under evaluation; thresholds are -inf for fixed inputs so that
// they never decide a comparison.
struct Candidate {
    double h;
    std::size_t errors;
    int function_id;
    double ta;
    double tb;
    std::size_t ra;
    std::size_t rb;
    bool polarity;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.h < b.h - kEntropyTieTolerance) return true;
    if (a.h > b.h + kEntropyTieTolerance) return false;
    if (a.errors != b.errors) return a.errors < b.errors;
    if (a.function_id != b.function_id) return a.function_id < b.function_id;
    if (a.ta != b.ta) return a.ta < b.ta;
    return a.tb < b.tb;
}

constexpr std::size_t kNoRow = std::numeric_limits<std::size_t>::max();
constexpr double kNoThreshold = -std::numeric_limits<double>::infinity();

// Representative rows, one per distinct training value, in ascending value order.
std::vector<std::size_t> distinct_value_rows(const NumericColumn& col, const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> sorted = rows;
    const auto values = col.values();
    std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    std::vector<std::size_t> out;
    for (std::size_t r : sorted) {
        if (out.empty() || values[out.back()] != values[r]) out.push_back(r);
    }
    return out;
}

}  // namespace

double xlog2x(std::size_t k) {
    if (k < kTableSize) return xlog2x_table()[k];
    const auto x = static_cast<double>(k);
    return x * std::log2(x);
}

double entropy(std::span<const std::size_t> class_counts) {
    std::size_t total = 0;
    for (std::size_t c : class_counts) total += c;
    if (total == 0) {
        throw DomainError("entropy of an empty set");
    }
    double h = 0.0;
    for (std::size_t c : class_counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double conditional_entropy(std::span<const std::uint8_t> outputs, std::span<const std::uint8_t> labels) {
    if (outputs.size() != labels.size()) {
        throw DomainError(fmt::format("outputs ({}) and labels ({}) differ in length", outputs.size(), labels.size()));
    }
    if (outputs.empty()) {
        throw DomainError("conditional entropy of an empty set");
    }
    std::array<std::size_t, 2> side1{};
    std::array<std::size_t, 2> side0{};
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        (outputs[i] ? side1 : side0)[labels[i] ? 1 : 0]++;
    }
    const double n = static_cast<double>(outputs.size());
    const double n1 = static_cast<double>(side1[0] + side1[1]);
    const double n0 = static_cast<double>(side0[0] + side0[1]);
    double h = 0.0;
    if (n1 > 0) h += (n1 / n) * entropy(side1);
    if (n0 > 0) h += (n0 / n) * entropy(side0);
    return h;
}

double split_entropy(std::size_t n1, std::size_t p1, std::size_t n0, std::size_t p0) {
    const std::size_t n = n1 + n0;
    const double scaled = (xlog2x(n1) - xlog2x(p1) - xlog2x(n1 - p1)) + (xlog2x(n0) - xlog2x(p0) - xlog2x(n0 - p0));
    const double h = scaled / static_cast<double>(n);
    return h < 0.0 ? 0.0 : h;
}

NumericColumn::NumericColumn(std::vector<double> values, const kernels::Table& k) : values_(std::move(values)) {
    const std::size_t n = values_.size();
    const std::size_t nw = words_for(n);
    masks_.assign(n * nw, 0);
    for (std::size_t r = 0; r < n; ++r) {
        k.threshold_mask(values_.data(), n, values_[r], masks_.data() + r * nw);
    }
}

bool better_split(const EntropySplit& a, const EntropySplit& b) {
    const Candidate ca{a.entropy, a.errors, a.function_id, a.thresholds[0].value_or(kNoThreshold),
                       a.thresholds[1].value_or(kNoThreshold), 0, 0, a.polarity};
    const Candidate cb{b.entropy, b.errors, b.function_id, b.thresholds[0].value_or(kNoThreshold),
                       b.thresholds[1].value_or(kNoThreshold), 0, 0, b.polarity};
    return better(ca, cb);
}

EntropySplit fit_unit(ColumnView a, ColumnView b, const BitVector& labels, const BitVector& train,
                      const SearchBudget& budget, const kernels::Table& k) {
    const std::size_t n_words = train.word_count();
    const std::size_t n_train = train.count();
    if (n_train == 0) {
        throw DomainError("fit_unit needs at least one training row");
    }
    if (labels.word_count() != n_words) {
        throw DomainError("labels and training mask differ in length");
    }

    std::vector<std::size_t> rows;
    if (a.is_numeric() || b.is_numeric()) {
        rows.reserve(n_train);
        for (std::size_t i = 0; i < train.size(); ++i) {
            if (train.get(i)) rows.push_back(i);
        }
    }

    Candidate best{std::numeric_limits<double>::infinity(), 0, 0, 0, 0, kNoRow, kNoRow, true};
    std::size_t n_pos = 0;
    bool have_positive_count = false;

    auto evaluate = [&](std::size_t ra, std::size_t rb) {
        const Word* wa = a.is_numeric() ? a.numeric->mask_above(ra) : a.bits;
        const Word* wb = b.is_numeric() ? b.numeric->mask_above(rb) : b.bits;
        const kernels::CellCounts c = k.cell_counts(wa, wb, labels.data(), train.data(), n_words);
        if (!have_positive_count) {
            n_pos = c.positive[0] + c.positive[1] + c.positive[2] + c.positive[3];
            have_positive_count = true;
        }
        const double ta = a.is_numeric() ? a.numeric->values()[ra] : kNoThreshold;
        const double tb = b.is_numeric() ? b.numeric->values()[rb] : kNoThreshold;
        for (const LogicFunction& fn : LogicFunction::all()) {
            const std::uint8_t t = fn.truth_table();
            std::size_t n1 = 0;
            std::size_t p1 = 0;
            for (int cell = 0; cell < 4; ++cell) {
                if ((t >> cell) & 1U) {
                    n1 += c.total[static_cast<std::size_t>(cell)];
                    p1 += c.positive[static_cast<std::size_t>(cell)];
                }
            }
            const std::size_t n0 = n_train - n1;
            const std::size_t p0 = n_pos - p1;
            const bool polarity = 2 * p1 >= n1;
            const std::size_t errors = polarity ? (n1 - p1) + p0 : p1 + (n0 - p0);
            const Candidate cand{split_entropy(n1, p1, n0, p0), errors, fn.id(), ta, tb, ra, rb, polarity};
            if (better(cand, best)) best = cand;
        }
    };

    if (!a.is_numeric() && !b.is_numeric()) {
        evaluate(kNoRow, kNoRow);
    } else if (budget.exhaustive) {
        const std::vector<std::size_t> ra = a.is_numeric() ? distinct_value_rows(*a.numeric, rows) : std::vector<std::size_t>{kNoRow};
        const std::vector<std::size_t> rb = b.is_numeric() ? distinct_value_rows(*b.numeric, rows) : std::vector<std::size_t>{kNoRow};
        for (std::size_t x : ra) {
            for (std::size_t y : rb) evaluate(x, y);
        }
    } else {
        if (budget.draws == 0) {
            throw DomainError("search budget needs at least one draw");
        }
        Rng rng(budget.seed);
        for (std::size_t d = 0; d < budget.draws; ++d) {
            const std::size_t x = a.is_numeric() ? rows[rng.below(rows.size())] : kNoRow;
            const std::size_t y = b.is_numeric() ? rows[rng.below(rows.size())] : kNoRow;
            evaluate(x, y);
        }
    }

    EntropySplit split;
    split.function_id = best.function_id;
    split.entropy = best.h;
    split.polarity = best.polarity;
    split.errors = best.errors;
    if (a.is_numeric()) {
        split.thresholds[0] = best.ta;
        split.threshold_rows[0] = best.ra;
    }
    if (b.is_numeric()) {
        split.thresholds[1] = best.tb;
        split.threshold_rows[1] = best.rb;
    }
    return split;
}

void split_outputs(ColumnView a, ColumnView b, const EntropySplit& split, std::size_t n, Word* out) {
    const Word* wa = a.is_numeric() ? a.numeric->mask_above(*split.threshold_rows[0]) : a.bits;
    const Word* wb = b.is_numeric() ? b.numeric->mask_above(*split.threshold_rows[1]) : b.bits;
    const LogicFunction fn = split.function();
    const std::size_t nw = words_for(n);
    for (std::size_t w = 0; w < nw; ++w) {
        out[w] = fn.apply(wa[w], wb[w]);
    }
    if (n % 64 != 0 && nw > 0) {
        out[nw - 1] &= (Word{1} << (n % 64)) - 1;
    }
}

BitVector split_outputs(ColumnView a, ColumnView b, const EntropySplit& split, std::size_t n) {
    BitVector out(n);
    split_outputs(a, b, split, n, out.data());
    return out;
}

}  // namespace edm
