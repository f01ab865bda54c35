#include "edm/evolution.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "edm/errors.hpp"
#include "edm/parallel.hpp"

namespace edm {
namespace {

struct SingleSplit {
    double h;
    std::size_t errors;
    double threshold;
    std::size_t row;
    bool polarity;
};

// Best threshold for a numeric attribute used alone (side 1 = value > Q),
// ranked like fit_unit: entropy, errors, threshold.
SingleSplit best_single_split(const NumericColumn& col, const BitVector& labels, const BitVector& train,
                              const kernels::Table& k) {
    const std::size_t nw = train.word_count();
    const std::size_t n_train = train.count();
    const auto values = col.values();
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train.get(i)) rows.push_back(i);
    }
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    // cell_counts with a == b gives (out, out) cells; cell 3 is side 1.
    SingleSplit best{std::numeric_limits<double>::infinity(), 0, 0.0, 0, true};
    bool have = false;
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
        const std::size_t r = rows[idx];
        if (idx > 0 && values[rows[idx - 1]] == values[r]) continue;
        const Word* m = col.mask_above(r);
        const kernels::CellCounts c = k.cell_counts(m, m, labels.data(), train.data(), nw);
        const std::size_t n1 = c.total[3];
        const std::size_t p1 = c.positive[3];
        const std::size_t n0 = n_train - n1;
        const std::size_t p0 = c.positive[0];
        const bool polarity = 2 * p1 >= n1;
        const std::size_t errors = polarity ? (n1 - p1) + p0 : p1 + (n0 - p0);
        const double h = split_entropy(n1, p1, n0, p0);
        const bool better = !have || h < best.h - kEntropyTieTolerance ||
                            (h <= best.h + kEntropyTieTolerance && errors < best.errors);
        if (better) {
            best = {h, errors, values[r], r, polarity};
            have = true;
        }
    }
    return best;
}

struct BinaryFit {
    bool polarity;
    std::size_t errors;
};

BinaryFit best_polarity(const BitVector& bits, const BitVector& labels, const BitVector& train,
                        const kernels::Table& k) {
    const kernels::CellCounts c = k.cell_counts(bits.data(), bits.data(), labels.data(), train.data(), train.word_count());
    const std::size_t ones_pos = c.positive[3];
    const std::size_t ones_neg = c.total[3] - c.positive[3];
    const std::size_t zeros_pos = c.positive[0];
    const std::size_t zeros_neg = c.total[0] - c.positive[0];
    const std::size_t err_true = ones_neg + zeros_pos;
    const std::size_t err_false = ones_pos + zeros_neg;
    return err_true <= err_false ? BinaryFit{true, err_true} : BinaryFit{false, err_false};
}

BitVector all_rows(std::size_t n) { return BitVector(n, true); }

struct GrownUnit {
    Unit unit;
    std::size_t errors = 0;
    BitVector full_output;
    std::vector<Word> fold_outputs;
    BitVector loo_predictions;
    std::vector<std::size_t> cone;  // unit indices, sorted, including itself
};

}  // namespace

void GrowthConfig::validate() const {
    if (max_complexity < 1) throw ConfigError("max_complexity must be at least 1");
    if (max_failed_attempts < 1) throw ConfigError("max_failed_attempts must be at least 1");
    if (!(target_error >= 0.0 && target_error <= 1.0)) throw ConfigError("target_error must be in [0, 1]");
    if (!budget.exhaustive && budget.draws < 1) throw ConfigError("the search budget needs at least one draw");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::target_reached: return "target_reached";
        case Termination::attempts_exhausted: return "attempts_exhausted";
        case Termination::complexity_cap: return "complexity_cap";
    }
    return "unknown";
}

bool accept(double mu, double mu1, double mu2) { return mu < std::min(mu1, mu2); }

TrainingSet::TrainingSet(const Dataset& data, std::span<const std::size_t> rows, const kernels::Table& k)
    : attributes_(data.attributes()), labels_(rows.size()), kernels_(&k) {
    const std::size_t n = rows.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i] >= data.size()) throw DataError(fmt::format("training row {} out of range", rows[i]));
        labels_.set(i, data.label(rows[i]));
    }
    bits_.resize(attributes_.size());
    numeric_.resize(attributes_.size());
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
        switch (attributes_[a].kind) {
            case AttributeKind::binary: {
                BitVector b(n);
                for (std::size_t i = 0; i < n; ++i) b.set(i, data.value(rows[i], a) != 0.0);
                bits_[a] = std::move(b);
                break;
            }
            case AttributeKind::numeric: {
                std::vector<double> v(n);
                for (std::size_t i = 0; i < n; ++i) v[i] = data.value(rows[i], a);
                numeric_[a] = NumericColumn(std::move(v), k);
                break;
            }
            case AttributeKind::nominal:
                throw DataError(fmt::format("attribute '{}' is nominal; binarize the dataset first", attributes_[a].name));
        }
    }
}

namespace {
std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = i;
    return r;
}
}  // namespace

TrainingSet::TrainingSet(const Dataset& data, const kernels::Table& k) : TrainingSet(data, iota_rows(data.size()), k) {}

ColumnView TrainingSet::view(std::size_t a) const {
    return is_numeric(a) ? ColumnView::thresholded(numeric_[a]) : ColumnView::fixed(bits_[a]);
}

SourceScore input_mu(const TrainingSet& ts, std::size_t attribute, bool loo_refit) {
    const std::size_t n = ts.size();
    if (n < 2) throw DomainError("input_mu needs at least two rows");
    const BitVector& labels = ts.labels();
    const kernels::Table& k = ts.kernels();
    const BitVector everything = all_rows(n);

    SourceScore score;
    score.loo_predictions = BitVector(n);

    // Fit on all rows.
    if (ts.is_numeric(attribute)) {
        const SingleSplit s = best_single_split(ts.column(attribute), labels, everything, k);
        score.full = {InputRef::numeric(attribute, s.threshold), s.polarity};
    } else {
        const BinaryFit f = best_polarity(ts.bits(attribute), labels, everything, k);
        score.full = {InputRef::binary(attribute), f.polarity};
    }

    auto predict_row = [&](std::size_t row, const DirectOutput& d) {
        bool bit;
        if (d.source.kind == InputRef::Kind::numeric_attribute) {
            bit = ts.column(attribute).values()[row] > d.source.threshold;
        } else {
            bit = ts.bits(attribute).get(row);
        }
        return bit == d.polarity;
    };

    if (!loo_refit) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool p = predict_row(i, score.full);
            score.loo_predictions.set(i, p);
            if (p != labels.get(i)) ++score.errors;
        }
    } else {
        BitVector train = everything;
        for (std::size_t f = 0; f < n; ++f) {
            train.set(f, false);
            DirectOutput d;
            if (ts.is_numeric(attribute)) {
                const SingleSplit s = best_single_split(ts.column(attribute), labels, train, k);
                d = {InputRef::numeric(attribute, s.threshold), s.polarity};
            } else {
                const BinaryFit bf = best_polarity(ts.bits(attribute), labels, train, k);
                d = {InputRef::binary(attribute), bf.polarity};
            }
            train.set(f, true);
            const bool p = predict_row(f, d);
            score.loo_predictions.set(f, p);
            if (p != labels.get(f)) ++score.errors;
        }
    }
    score.mu = static_cast<double>(score.errors) / static_cast<double>(n);
    return score;
}

LooEvaluation loo_error(const PoolColumn& a, const PoolColumn& b, const TrainingSet& ts, const GrowthConfig& config,
                        std::uint64_t seed, std::size_t error_limit) {
    const std::size_t n = ts.size();
    const std::size_t nw = words_for(n);
    const BitVector& labels = ts.labels();
    LooEvaluation ev;
    ev.loo_predictions = BitVector(n);

    if (!config.loo_refit) {
        SearchBudget budget = config.budget;
        budget.seed = derive_seed(seed, n);
        const BitVector train = all_rows(n);
        const EntropySplit s = fit_unit(a.full, b.full, labels, train, budget, ts.kernels());
        ev.fold_outputs.resize(nw);
        split_outputs(a.full, b.full, s, n, ev.fold_outputs.data());
        for (std::size_t i = 0; i < n; ++i) {
            const bool bit = (ev.fold_outputs[i >> 6] >> (i & 63)) & 1U;
            const bool cls = bit == s.polarity;
            ev.loo_predictions.set(i, cls);
            if (cls != labels.get(i)) ++ev.errors;
        }
        ev.aborted = ev.errors >= error_limit;
        ev.mu = static_cast<double>(ev.errors) / static_cast<double>(n);
        return ev;
    }

    if (n < 3) throw DomainError("leave-one-out scoring needs at least three rows");
    ev.fold_outputs.assign(n * nw, 0);
    BitVector train = all_rows(n);
    for (std::size_t f = 0; f < n; ++f) {
        train.set(f, false);
        SearchBudget budget = config.budget;
        budget.seed = derive_seed(seed, f);
        const ColumnView va = a.fold(f);
        const ColumnView vb = b.fold(f);
        const EntropySplit s = fit_unit(va, vb, labels, train, budget, ts.kernels());
        train.set(f, true);
        Word* out = ev.fold_outputs.data() + f * nw;
        split_outputs(va, vb, s, n, out);
        const bool bit = (out[f >> 6] >> (f & 63)) & 1U;
        const bool cls = bit == s.polarity;
        ev.loo_predictions.set(f, cls);
        if (cls != labels.get(f)) {
            if (++ev.errors >= error_limit) {
                ev.aborted = true;
                return ev;
            }
        }
    }
    ev.mu = static_cast<double>(ev.errors) / static_cast<double>(n);
    return ev;
}

std::pair<std::size_t, std::size_t> generate_candidate(std::size_t pool_size, Rng& rng) {
    if (pool_size < 2) {
        throw ConfigError(fmt::format("candidate pool has {} member(s); need at least two", pool_size));
    }
    const std::size_t i = rng.below(pool_size);
    std::size_t j = rng.below(pool_size - 1);
    if (j >= i) ++j;
    return {i, j};
}

GrowthContext::GrowthContext(const TrainingSet& ts, bool loo_refit) : ts_(&ts), loo_refit_(loo_refit) {
    scores_.reserve(ts.attribute_count());
    for (std::size_t a = 0; a < ts.attribute_count(); ++a) {
        scores_.push_back(input_mu(ts, a, loo_refit));
    }
}

GrowthResult grow_model(const GrowthContext& ctx, const GrowthConfig& config) {
    config.validate();
    if (ctx.loo_refit() != config.loo_refit) {
        throw ConfigError("growth context and config disagree on loo_refit");
    }
    const TrainingSet& ts = ctx.training();
    const std::size_t n = ts.size();
    const std::size_t nw = words_for(n);
    const std::size_t n_attr = ts.attribute_count();
    if (n < 3) throw DataError("growing a model needs at least three training rows");
    if (n_attr < 2) throw DataError("growing a model needs at least two attributes");

    Rng rng(config.seed);
    GrowthResult result;
    GrowthTrace& trace = result.trace;
    std::vector<GrownUnit> units;
    std::size_t failed = 0;
    std::size_t best_errors = std::numeric_limits<std::size_t>::max();

    auto member_errors = [&](std::size_t m) { return m < n_attr ? ctx.score(m).errors : units[m - n_attr].errors; };
    auto member_predictions = [&](std::size_t m) -> const BitVector& {
        return m < n_attr ? ctx.score(m).loo_predictions : units[m - n_attr].loo_predictions;
    };
    auto member_column = [&](std::size_t m) {
        if (m < n_attr) return PoolColumn{ts.view(m), nullptr, 0};
        const GrownUnit& u = units[m - n_attr];
        if (!config.loo_refit) return PoolColumn{ColumnView::fixed(u.full_output), u.fold_outputs.data(), 0};
        return PoolColumn{ColumnView::fixed(u.full_output), u.fold_outputs.data(), nw};
    };
    auto member_ref = [&](std::size_t m, const EntropySplit& s, int slot) {
        if (m >= n_attr) return InputRef::unit(m - n_attr);
        if (ts.is_numeric(m)) return InputRef::numeric(m, *s.thresholds[static_cast<std::size_t>(slot)]);
        return InputRef::binary(m);
    };

    while (true) {
        if (units.size() >= config.max_complexity) {
            trace.reason = Termination::complexity_cap;
            break;
        }
        if (failed >= config.max_failed_attempts) {
            trace.reason = Termination::attempts_exhausted;
            break;
        }
        const auto [ia, ib] = generate_candidate(n_attr + units.size(), rng);
        const std::uint64_t candidate_seed = rng.next();
        ++trace.attempts;

        const std::size_t limit = std::min(member_errors(ia), member_errors(ib));
        const PoolColumn ca = member_column(ia);
        const PoolColumn cb = member_column(ib);
        LooEvaluation ev;
        if (limit > 0) ev = loo_error(ca, cb, ts, config, candidate_seed, limit);
        if (limit == 0 || ev.aborted || ev.errors >= limit) {
            ++trace.rejected;
            ++failed;
            continue;
        }
        bool duplicate = false;
        for (std::size_t m = 0; m < n_attr + units.size() && !duplicate; ++m) {
            duplicate = member_predictions(m) == ev.loo_predictions;
        }
        if (duplicate) {
            ++trace.rejected;
            ++trace.duplicates;
            ++failed;
            continue;
        }

        // The accepted unit's parameters come from a fit on all rows.
        SearchBudget budget = config.budget;
        budget.seed = derive_seed(candidate_seed, n);
        const BitVector everything = all_rows(n);
        const EntropySplit full = fit_unit(ca.full, cb.full, ts.labels(), everything, budget, ts.kernels());

        GrownUnit g;
        g.unit.function = full.function();
        g.unit.inputs = {member_ref(ia, full, 0), member_ref(ib, full, 1)};
        g.unit.polarity = full.polarity;
        g.unit.mu = ev.mu;
        g.errors = ev.errors;
        g.full_output = split_outputs(ca.full, cb.full, full, n);
        g.fold_outputs = config.loo_refit ? std::move(ev.fold_outputs) : std::vector<Word>(g.full_output.words().begin(), g.full_output.words().end());
        g.loo_predictions = ev.loo_predictions;
        for (std::size_t m : {ia, ib}) {
            if (m >= n_attr) {
                const auto& c = units[m - n_attr].cone;
                g.cone.insert(g.cone.end(), c.begin(), c.end());
            }
        }
        g.cone.push_back(units.size());
        std::sort(g.cone.begin(), g.cone.end());
        g.cone.erase(std::unique(g.cone.begin(), g.cone.end()), g.cone.end());

        GrowthRecord rec;
        rec.unit_index = units.size();
        rec.mu = ev.mu;
        rec.mu1 = static_cast<double>(member_errors(ia)) / static_cast<double>(n);
        rec.mu2 = static_cast<double>(member_errors(ib)) / static_cast<double>(n);
        rec.complexity = g.cone.size();
        rec.pool_units = units.size() + 1;
        rec.attempts = trace.attempts;
        best_errors = std::min(best_errors, ev.errors);
        rec.best_mu = static_cast<double>(best_errors) / static_cast<double>(n);
        rec.loo_predictions = ev.loo_predictions;
        rec.input_predictions = {member_predictions(ia), member_predictions(ib)};
        trace.accepted.push_back(std::move(rec));

        units.push_back(std::move(g));
        failed = 0;
        if (ev.mu <= config.target_error) {
            trace.reason = Termination::target_reached;
            break;
        }
    }

    if (units.empty()) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < n_attr; ++a) {
            if (ctx.score(a).errors < ctx.score(best).errors) best = a;
        }
        trace.fallback = true;
        result.model = DecisionModel(ctx.score(best).full, ctx.score(best).mu);
        return result;
    }

    std::size_t out = 0;
    for (std::size_t u = 1; u < units.size(); ++u) {
        const bool better = units[u].errors < units[out].errors ||
                            (units[u].errors == units[out].errors && units[u].cone.size() < units[out].cone.size());
        if (better) out = u;
    }
    // Keep only the output unit's cone, renumbered in acceptance order.
    const std::vector<std::size_t>& cone = units[out].cone;
    std::vector<std::size_t> remap(units.size(), 0);
    for (std::size_t i = 0; i < cone.size(); ++i) remap[cone[i]] = i;
    std::vector<Unit> model_units;
    model_units.reserve(cone.size());
    for (std::size_t idx : cone) {
        Unit u = units[idx].unit;
        for (InputRef& r : u.inputs) {
            if (r.kind == InputRef::Kind::unit) r.index = remap[r.index];
        }
        model_units.push_back(u);
    }
    result.model = DecisionModel(std::move(model_units), units[out].unit.mu);
    return result;
}

GrowthResult grow_model(const TrainingSet& ts, const GrowthConfig& config) {
    const GrowthContext ctx(ts, config.loo_refit);
    return grow_model(ctx, config);
}

std::vector<GrowthResult> train_population(const TrainingSet& ts, const GrowthConfig& config, std::size_t n_models,
                                           std::size_t threads) {
    if (n_models < 1) throw ConfigError("population needs at least one model");
    config.validate();
    const GrowthContext ctx(ts, config.loo_refit);
    std::vector<GrowthResult> population(n_models);

    auto grow = [&](std::size_t i) {
        GrowthConfig c = config;
        c.seed = derive_seed(config.seed, i);
        population[i] = grow_model(ctx, c);
    };

    parallel_for(n_models, threads, grow);
    return population;
}

void write_trace_csv(std::ostream& out, std::span<const GrowthResult> population) {
    out << "model,unit_index,mu,mu1,mu2,complexity,pool_units,attempts,fitness\n";
    for (std::size_t m = 0; m < population.size(); ++m) {
        for (const GrowthRecord& r : population[m].trace.accepted) {
            out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{},{},{},{:.4f}\n", m, r.unit_index, r.mu, r.mu1, r.mu2,
                               r.complexity, r.pool_units, r.attempts, 100.0 * (1.0 - r.best_mu));
        }
    }
}

}  // namespace edm
