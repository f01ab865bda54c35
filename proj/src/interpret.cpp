#include "edm/interpret.hpp"

#include <algorithm>
#include <array>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "edm/errors.hpp"
#include "edm/rng.hpp"

namespace edm {

std::string to_string(Comparator c) {
    switch (c) {
        case Comparator::greater: return ">";
        case Comparator::less_equal: return "≤";
        case Comparator::is_one: return "=1";
        case Comparator::is_zero: return "=0";
    }
    return "?";
}

namespace {

Literal literal_of(const InputRef& r) {
    Literal l{r.index, std::nullopt};
    if (r.kind == InputRef::Kind::numeric_attribute) l.threshold = r.threshold;
    return l;
}

std::size_t literal_index(const std::vector<Literal>& literals, const Literal& l) {
    return static_cast<std::size_t>(std::find(literals.begin(), literals.end(), l) - literals.begin());
}

// Each unit input resolved to a literal index or a prior unit.
struct Wiring {
    std::vector<std::array<std::pair<bool, std::size_t>, 2>> inputs;  // (is_unit, index)
    std::size_t direct_literal = 0;
};

Wiring wire(const DecisionModel& model, const std::vector<Literal>& literals) {
    Wiring w;
    if (model.direct()) {
        w.direct_literal = literal_index(literals, literal_of(model.direct()->source));
        return w;
    }
    for (const Unit& u : model.units()) {
        std::array<std::pair<bool, std::size_t>, 2> in;
        for (std::size_t k = 0; k < 2; ++k) {
            const InputRef& r = u.inputs[k];
            in[k] = r.kind == InputRef::Kind::unit ? std::pair{true, r.index}
                                                   : std::pair{false, literal_index(literals, literal_of(r))};
        }
        w.inputs.push_back(in);
    }
    return w;
}

template <typename Bit>
bool eval_wired(const DecisionModel& model, const Wiring& w, Bit&& literal, std::vector<std::uint8_t>& out) {
    if (model.direct()) return literal(w.direct_literal) == model.direct()->polarity;
    const auto& units = model.units();
    out.resize(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        bool v[2];
        for (std::size_t k = 0; k < 2; ++k) {
            const auto [is_unit, idx] = w.inputs[i][k];
            v[k] = is_unit ? out[idx] != 0 : literal(idx);
        }
        out[i] = units[i].function(v[0], v[1]) ? 1 : 0;
    }
    return (out.back() != 0) == units.back().polarity;
}

using Table = std::vector<std::uint8_t>;

struct Cover {
    std::vector<Term> terms;
    Table realized;
};

// Irredundant sum of products for any f with lower <= f <= upper over `vars`
// variables (Minato-Morreale), splitting on the highest variable.
Cover isop(const Table& lower, const Table& upper, std::size_t vars) {
    const std::size_t size = lower.size();
    if (std::none_of(lower.begin(), lower.end(), [](std::uint8_t b) { return b != 0; })) {
        return {{}, Table(size, 0)};
    }
    if (std::all_of(upper.begin(), upper.end(), [](std::uint8_t b) { return b != 0; })) {
        return {{Term{}}, Table(size, 1)};
    }
    const std::size_t half = size / 2;
    const std::size_t var = vars - 1;
    Table l0(lower.begin(), lower.begin() + static_cast<std::ptrdiff_t>(half));
    Table l1(lower.begin() + static_cast<std::ptrdiff_t>(half), lower.end());
    Table u0(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(half));
    Table u1(upper.begin() + static_cast<std::ptrdiff_t>(half), upper.end());

    Table a(half), b(half);
    for (std::size_t i = 0; i < half; ++i) {
        a[i] = l0[i] & ~u1[i] & 1;
        b[i] = l1[i] & ~u0[i] & 1;
    }
    Cover c0 = isop(a, u0, vars - 1);
    Cover c1 = isop(b, u1, vars - 1);
    Table ls(half), us(half);
    for (std::size_t i = 0; i < half; ++i) {
        ls[i] = (l0[i] & ~c0.realized[i] & 1) | (l1[i] & ~c1.realized[i] & 1);
        us[i] = u0[i] & u1[i];
    }
    Cover cs = isop(ls, us, vars - 1);

    Cover out;
    for (Term& t : c0.terms) {
        t.emplace_back(var, false);
        out.terms.push_back(std::move(t));
    }
    for (Term& t : c1.terms) {
        t.emplace_back(var, true);
        out.terms.push_back(std::move(t));
    }
    for (Term& t : cs.terms) out.terms.push_back(std::move(t));
    out.realized.resize(size);
    for (std::size_t i = 0; i < half; ++i) {
        out.realized[i] = c0.realized[i] | cs.realized[i];
        out.realized[half + i] = c1.realized[i] | cs.realized[i];
    }
    return out;
}

Condition condition_for(const Literal& l, bool value, const std::vector<AttributeSpec>& schema) {
    Condition c;
    c.attribute = l.attribute < schema.size() ? schema[l.attribute].name : fmt::format("x{}", l.attribute + 1);
    if (l.threshold) {
        c.comparator = value ? Comparator::greater : Comparator::less_equal;
        c.threshold = l.threshold;
    } else {
        c.comparator = value ? Comparator::is_one : Comparator::is_zero;
    }
    return c;
}

std::vector<Term> sampled_terms(const DecisionModel& model, const Wiring& w, std::size_t n_literals, std::uint64_t seed) {
    constexpr std::size_t kSamples = 4096;
    constexpr std::size_t kChecks = 64;
    Rng rng(seed);
    std::vector<std::uint8_t> scratch;
    std::vector<bool> assignment(n_literals);
    auto random_fill = [&] {
        for (std::size_t i = 0; i < n_literals; ++i) assignment[i] = (rng.next() >> 63) != 0;
    };
    auto eval = [&] { return eval_wired(model, w, [&](std::size_t i) { return bool(assignment[i]); }, scratch); };

    std::vector<std::vector<bool>> positives, negatives;
    for (std::size_t s = 0; s < kSamples; ++s) {
        random_fill();
        (eval() ? positives : negatives).push_back(assignment);
    }
    std::vector<Term> terms;
    for (const auto& sample : positives) {
        if (std::any_of(terms.begin(), terms.end(), [&](const Term& t) { return term_holds(t, sample); })) continue;
        Term term;
        for (std::size_t i = 0; i < n_literals; ++i) term.emplace_back(i, sample[i]);
        // Greedily drop literals while no seen negative matches and random
        // completions stay positive.
        for (std::size_t k = 0; k < term.size();) {
            Term trial = term;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
            bool implies = std::none_of(negatives.begin(), negatives.end(),
                                        [&](const std::vector<bool>& neg) { return term_holds(trial, neg); });
            for (std::size_t c = 0; c < kChecks && implies; ++c) {
                random_fill();
                for (const auto& [lit, val] : trial) assignment[lit] = val;
                implies = eval();
                if (!implies) negatives.push_back(assignment);
            }
            if (implies) {
                term = std::move(trial);
            } else {
                ++k;
            }
        }
        terms.push_back(std::move(term));
    }
    return terms;
}

}  // namespace

std::vector<Literal> model_literals(const DecisionModel& model) {
    std::vector<Literal> out;
    auto add = [&](const InputRef& r) {
        if (r.kind == InputRef::Kind::unit) return;
        const Literal l = literal_of(r);
        if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
    };
    if (model.direct()) add(model.direct()->source);
    for (const Unit& u : model.units()) {
        add(u.inputs[0]);
        add(u.inputs[1]);
    }
    return out;
}

bool eval_on_literals(const DecisionModel& model, const std::vector<Literal>& literals,
                      const std::vector<bool>& assignment) {
    if (assignment.size() != literals.size()) throw DomainError("assignment size differs from literal count");
    const Wiring w = wire(model, literals);
    std::vector<std::uint8_t> scratch;
    return eval_wired(model, w, [&](std::size_t i) { return bool(assignment[i]); }, scratch);
}

bool term_holds(const Term& term, const std::vector<bool>& assignment) {
    return std::all_of(term.begin(), term.end(), [&](const auto& lv) { return assignment[lv.first] == lv.second; });
}

RuleSet extract_rules(const DecisionModel& model, const std::vector<AttributeSpec>& schema,
                      const std::string& positive_label, const std::string& negative_label, std::size_t exact_limit,
                      std::uint64_t seed) {
    RuleSet rs;
    rs.literals = model_literals(model);
    rs.otherwise = negative_label;
    const std::size_t n = rs.literals.size();
    const Wiring w = wire(model, rs.literals);

    if (n <= exact_limit && n < 32) {
        const std::size_t size = std::size_t{1} << n;
        // Literal pairs on one attribute: "x > high" implies "x > low".
        std::vector<std::pair<std::size_t, std::size_t>> implied;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const Literal& lo = rs.literals[i];
                const Literal& hi = rs.literals[j];
                if (i != j && lo.attribute == hi.attribute && lo.threshold && hi.threshold && *lo.threshold < *hi.threshold) {
                    implied.emplace_back(j, i);
                }
            }
        }
        // Assignments no sample can produce are don't-cares.
        Table lower(size), upper(size);
        std::vector<std::uint8_t> scratch;
        for (std::size_t a = 0; a < size; ++a) {
            const bool feasible = std::all_of(implied.begin(), implied.end(), [a](const auto& p) {
                return ((a >> p.first) & 1U) == 0 || ((a >> p.second) & 1U) != 0;
            });
            const bool f = eval_wired(model, w, [a](std::size_t i) { return ((a >> i) & 1U) != 0; }, scratch);
            lower[a] = feasible && f ? 1 : 0;
            upper[a] = !feasible || f ? 1 : 0;
        }
        if (n == 0) {
            if (lower[0]) rs.terms.push_back({});
        } else {
            rs.terms = isop(lower, upper, n).terms;
        }
    } else {
        rs.partial = true;
        rs.terms = sampled_terms(model, w, n, seed);
    }
    for (Term& t : rs.terms) {
        std::sort(t.begin(), t.end());
        Rule r;
        r.conclusion = positive_label;
        for (const auto& [lit, val] : t) r.conditions.push_back(condition_for(rs.literals[lit], val, schema));
        rs.rules.push_back(std::move(r));
    }
    return rs;
}

namespace {

std::string condition_text(const Condition& c) {
    switch (c.comparator) {
        case Comparator::greater: return fmt::format("{} > {:g}", c.attribute, *c.threshold);
        case Comparator::less_equal: return fmt::format("{} ≤ {:g}", c.attribute, *c.threshold);
        case Comparator::is_one: return fmt::format("{} = 1", c.attribute);
        case Comparator::is_zero: return fmt::format("{} = 0", c.attribute);
    }
    return {};
}

}  // namespace

std::string render_rules_text(const std::vector<RuleSet>& sets, const std::vector<DecisionModel>& models) {
    std::string out;
    for (std::size_t m = 0; m < sets.size(); ++m) {
        const RuleSet& rs = sets[m];
        out += fmt::format("# model {}", m + 1);
        if (m < models.size()) out += fmt::format(" (mu {:.4f}, {} units)", models[m].mu(), models[m].complexity());
        out += "\n";
        if (rs.partial) out += "# partial: sampled from random assignments, may be incomplete\n";
        for (const Rule& r : rs.rules) {
            if (r.conditions.empty()) {
                out += fmt::format("always\nthen {}\n\n", r.conclusion);
                continue;
            }
            for (std::size_t i = 0; i < r.conditions.size(); ++i) {
                out += fmt::format("{} {}\n", i == 0 ? "if" : "and", condition_text(r.conditions[i]));
            }
            out += fmt::format("then {}\n\n", r.conclusion);
        }
        out += fmt::format("otherwise {}\n\n", rs.otherwise);
    }
    return out;
}

std::string render_rules_json(const std::vector<RuleSet>& sets) {
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t m = 0; m < sets.size(); ++m) {
        nlohmann::json rules = nlohmann::json::array();
        for (const Rule& r : sets[m].rules) {
            nlohmann::json conds = nlohmann::json::array();
            for (const Condition& c : r.conditions) {
                nlohmann::json jc = {{"attribute", c.attribute}, {"comparator", to_string(c.comparator)}};
                if (c.threshold) jc["threshold"] = *c.threshold;
                conds.push_back(std::move(jc));
            }
            rules.push_back({{"conditions", std::move(conds)}, {"conclusion", r.conclusion}});
        }
        doc.push_back({{"model", m + 1}, {"partial", sets[m].partial}, {"rules", std::move(rules)},
                       {"otherwise", sets[m].otherwise}});
    }
    return doc.dump(2) + "\n";
}

std::vector<AttributeRank> rank_attributes(const Ensemble& ensemble) {
    const auto& schema = ensemble.schema();
    std::vector<std::size_t> refs(schema.size(), 0);
    std::size_t total = 0;
    auto count = [&](const InputRef& r) {
        if (r.kind == InputRef::Kind::unit) return;
        ++refs.at(r.index);
        ++total;
    };
    for (const DecisionModel& m : ensemble.models()) {
        if (m.direct()) count(m.direct()->source);
        for (const Unit& u : m.units()) {
            count(u.inputs[0]);
            count(u.inputs[1]);
        }
    }
    std::vector<std::size_t> order(schema.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return refs[a] > refs[b]; });
    std::vector<AttributeRank> ranks;
    for (std::size_t i : order) {
        const double score = total == 0 ? 0.0 : static_cast<double>(refs[i]) / static_cast<double>(total);
        ranks.push_back({schema[i].name, refs[i], score});
    }
    return ranks;
}

void write_ranks_csv(std::ostream& out, const std::vector<AttributeRank>& ranks) {
    out << "attribute,score\n";
    for (const AttributeRank& r : ranks) out << fmt::format("{},{:.6f}\n", r.attribute, r.score);
}

}  // namespace edm
