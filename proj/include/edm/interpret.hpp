#pragma once

// If-then rules from decision models and attribute ranks from ensembles.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edm/dataset.hpp"
#include "edm/ensemble.hpp"
#include "edm/logic.hpp"

namespace edm {

enum class Comparator { greater, less_equal, is_one, is_zero };

// ">", "≤", "=1", "=0"
std::string to_string(Comparator c);

// An attribute atom a model reads: "value > threshold" for numeric
// attributes, the stored bit for binary ones.
struct Literal {
    std::size_t attribute = 0;
    std::optional<double> threshold;

    friend bool operator==(const Literal&, const Literal&) = default;
};

// Distinct literals in order of first use.
std::vector<Literal> model_literals(const DecisionModel& model);

// Model class output when literal i takes the value assignment[i].
bool eval_on_literals(const DecisionModel& model, const std::vector<Literal>& literals,
                      const std::vector<bool>& assignment);

// A conjunction: (literal index, required value) pairs.
using Term = std::vector<std::pair<std::size_t, bool>>;

bool term_holds(const Term& term, const std::vector<bool>& assignment);

struct Condition {
    std::string attribute;
    Comparator comparator = Comparator::is_one;
    std::optional<double> threshold;
};

struct Rule {
    // Empty when the model is constantly positive.
    std::vector<Condition> conditions;
    std::string conclusion;
};

struct RuleSet {
    std::vector<Literal> literals;
    std::vector<Term> terms;
    std::vector<Rule> rules;
    std::string otherwise;
    // Too many literals for exact enumeration: the rules come from sampled
    // assignments and may miss positive regions.
    bool partial = false;
};

inline constexpr std::size_t kExactLiteralLimit = 20;

// Prime implicants of the positive class over the model's literals, one rule
// per implicant; together they are equivalent to the model on every sample.
// Literal combinations no sample can produce (x > 5 without x > 3) are
// treated as don't-cares. Above
// `exact_limit` literals the result is a sampled approximation marked partial.
RuleSet extract_rules(const DecisionModel& model, const std::vector<AttributeSpec>& schema,
                      const std::string& positive_label, const std::string& negative_label,
                      std::size_t exact_limit = kExactLiteralLimit, std::uint64_t seed = 0);

std::string render_rules_text(const std::vector<RuleSet>& sets, const std::vector<DecisionModel>& models);
std::string render_rules_json(const std::vector<RuleSet>& sets);

struct AttributeRank {
    std::string attribute;
    std::size_t references = 0;
    double score = 0.0;
};

// Share of attribute references (unit inputs and direct outputs) across the
// ensemble per attribute. Sorted by descending score, then schema order.
std::vector<AttributeRank> rank_attributes(const Ensemble& ensemble);

void write_ranks_csv(std::ostream& out, const std::vector<AttributeRank>& ranks);

}  // namespace edm
