#include <doctest.h>

#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "edm/interpret.hpp"
#include "edm/rng.hpp"
#include "oracles.hpp"

using namespace edm;

namespace {

Unit unit(int id, InputRef a, InputRef b, bool polarity = true) {
    Unit u;
    u.function = LogicFunction(id);
    u.inputs = {a, b};
    u.polarity = polarity;
    return u;
}

std::vector<AttributeSpec> schema_of(const std::vector<std::string>& names, const std::vector<bool>& numeric) {
    std::vector<AttributeSpec> s;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (numeric[i]) {
            s.push_back({names[i], AttributeKind::numeric, {}, names[i], 0.0});
        } else {
            s.push_back({names[i], AttributeKind::binary, {"0", "1"}, names[i], 0.0});
        }
    }
    return s;
}

std::vector<bool> assignment(std::size_t bits, std::size_t n) {
    std::vector<bool> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (bits >> i) & 1U;
    return a;
}

// False when some numeric attribute would be above a higher threshold but
// not a lower one.
bool feasible(const std::vector<Literal>& lits, const std::vector<bool>& a) {
    for (std::size_t i = 0; i < lits.size(); ++i) {
        for (std::size_t j = 0; j < lits.size(); ++j) {
            if (lits[i].attribute == lits[j].attribute && lits[i].threshold && lits[j].threshold &&
                *lits[i].threshold < *lits[j].threshold && a[j] && !a[i]) {
                return false;
            }
        }
    }
    return true;
}

bool rules_fire(const RuleSet& rs, const std::vector<bool>& a) {
    for (const Term& t : rs.terms) {
        if (term_holds(t, a)) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("comparator text") {
    CHECK(to_string(Comparator::greater) == ">");
    CHECK(to_string(Comparator::less_equal) == "≤");
    CHECK(to_string(Comparator::is_one) == "=1");
    CHECK(to_string(Comparator::is_zero) == "=0");
}

TEST_CASE("a single AND unit gives one two-condition rule") {
    const auto schema = schema_of({"fever", "cough"}, {false, false});
    const DecisionModel m({unit(5, InputRef::binary(0), InputRef::binary(1))}, 0.0);
    const RuleSet rs = extract_rules(m, schema, "sick", "well");
    REQUIRE(rs.rules.size() == 1);
    REQUIRE(rs.rules[0].conditions.size() == 2);
    CHECK(rs.rules[0].conditions[0].attribute == "fever");
    CHECK(rs.rules[0].conditions[0].comparator == Comparator::is_one);
    CHECK(rs.rules[0].conditions[1].attribute == "cough");
    CHECK(rs.rules[0].conclusion == "sick");
    CHECK(rs.otherwise == "well");
    CHECK_FALSE(rs.partial);
    const std::string text = render_rules_text({rs}, {m});
    CHECK(text.find("if fever = 1\nand cough = 1\nthen sick\n") != std::string::npos);
    CHECK(text.find("otherwise well") != std::string::npos);
}

TEST_CASE("negated numeric literals render as at-most conditions") {
    const auto schema = schema_of({"size", "flag"}, {true, false});
    // a AND NOT b with a = flag and b = size > 6.2
    const DecisionModel m({unit(8, InputRef::binary(1), InputRef::numeric(0, 6.2))}, 0.0);
    const RuleSet rs = extract_rules(m, schema, "p", "n");
    REQUIRE(rs.rules.size() == 1);
    bool found = false;
    for (const Condition& c : rs.rules[0].conditions) {
        if (c.attribute == "size") {
            CHECK(c.comparator == Comparator::less_equal);
            CHECK(*c.threshold == 6.2);
            found = true;
        }
    }
    CHECK(found);
    CHECK(render_rules_text({rs}, {m}).find("size ≤ 6.2") != std::string::npos);
    CHECK(render_rules_json({rs}).find("\"comparator\": \"≤\"") != std::string::npos);
}

TEST_CASE("constant models") {
    const auto schema = schema_of({"a", "b"}, {false, false});
    // NOT(a) OR b, with a unit OR'ing it with its complement: always true.
    const DecisionModel always({unit(2, InputRef::binary(0), InputRef::binary(1)),
                                unit(1, InputRef::unit(0), InputRef::binary(0))},
                               0.0);
    const RuleSet rs = extract_rules(always, schema, "p", "n");
    REQUIRE(rs.rules.size() == 1);
    CHECK(rs.rules[0].conditions.empty());
    CHECK(render_rules_text({rs}, {always}).find("always\nthen p") != std::string::npos);
    const DecisionModel never({unit(2, InputRef::binary(0), InputRef::binary(1)),
                               unit(1, InputRef::unit(0), InputRef::binary(0), false)},
                              0.0);
    CHECK(extract_rules(never, schema, "p", "n").rules.empty());
}

TEST_CASE("thresholds on one attribute give no redundant conditions") {
    const auto schema = schema_of({"t", "c"}, {true, false});
    // (t <= 37 AND t <= 38.3) OR (c AND t <= 38.3) collapses to t <= 37 OR (c AND t <= 38.3).
    const DecisionModel m({unit(3, InputRef::numeric(0, 37.0), InputRef::numeric(0, 38.3)),
                           unit(6, InputRef::numeric(0, 38.3), InputRef::binary(1)),
                           unit(1, InputRef::unit(0), InputRef::unit(1))},
                          0.0);
    const RuleSet rs = extract_rules(m, schema, "p", "n");
    for (const Rule& r : rs.rules) {
        std::size_t on_t = 0;
        for (const Condition& c : r.conditions) on_t += c.attribute == "t";
        CHECK(on_t <= 1);
    }
    CHECK(rs.rules.size() == 2);
}

TEST_CASE("rules are equivalent to the model and consist of prime implicants (property)") {
    Rng rng(17);
    const std::vector<bool> numeric = {true, false, true, false, false, true};
    const auto schema = schema_of({"a", "b", "c", "d", "e", "f"}, numeric);
    for (int trial = 0; trial < 100; ++trial) {
        const DecisionModel m = oracle::random_model(rng, numeric, {-0.5, 0.0, 0.7}, 6, 10);
        const RuleSet rs = extract_rules(m, schema, "p", "n");
        CHECK_FALSE(rs.partial);
        const std::size_t n = rs.literals.size();
        REQUIRE(n <= 10);
        for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
            const auto a = assignment(bits, n);
            if (feasible(rs.literals, a)) CHECK(rules_fire(rs, a) == eval_on_literals(m, rs.literals, a));
        }
        for (const Term& t : rs.terms) {
            for (std::size_t drop = 0; drop < t.size(); ++drop) {
                Term shorter = t;
                shorter.erase(shorter.begin() + static_cast<std::ptrdiff_t>(drop));
                bool implies = true;
                for (std::size_t bits = 0; bits < (std::size_t{1} << n) && implies; ++bits) {
                    const auto a = assignment(bits, n);
                    if (feasible(rs.literals, a) && term_holds(shorter, a) && !eval_on_literals(m, rs.literals, a)) {
                        implies = false;
                    }
                }
                CHECK_FALSE(implies);
            }
        }
    }
}

TEST_CASE("literals follow first use and match real samples") {
    Rng rng(3);
    const std::vector<bool> numeric = {true, false, true};
    for (int trial = 0; trial < 50; ++trial) {
        const DecisionModel m = oracle::random_model(rng, numeric, {0.0, 0.4}, 4, 6);
        const auto lits = model_literals(m);
        std::vector<double> s = {rng.uniform(-1, 1), double(rng.below(2)), rng.uniform(-1, 1)};
        std::vector<bool> a;
        for (const Literal& l : lits) a.push_back(l.threshold ? s[l.attribute] > *l.threshold : s[l.attribute] != 0);
        CHECK(eval_on_literals(m, lits, a) == m.predict(s));
    }
}

TEST_CASE("models with many literals get sampled, partial rules") {
    std::vector<std::string> names;
    std::vector<bool> numeric;
    for (int i = 0; i < 8; ++i) {
        names.push_back("x" + std::to_string(i));
        numeric.push_back(false);
    }
    // An OR chain over 8 attributes, evaluated with a literal limit of 4.
    std::vector<Unit> us = {unit(1, InputRef::binary(0), InputRef::binary(1))};
    for (std::size_t i = 2; i < 8; ++i) us.push_back(unit(1, InputRef::unit(i - 2), InputRef::binary(i)));
    const DecisionModel m(us, 0.0);
    const RuleSet rs = extract_rules(m, schema_of(names, numeric), "p", "n", 4, 1);
    CHECK(rs.partial);
    // Every sampled rule still implies the positive class.
    for (std::size_t bits = 0; bits < 256; ++bits) {
        const auto a = assignment(bits, 8);
        if (rules_fire(rs, a)) CHECK(eval_on_literals(m, rs.literals, a));
    }
    CHECK(render_rules_text({rs}, {m}).find("# partial") != std::string::npos);
    CHECK_FALSE(extract_rules(m, schema_of(names, numeric), "p", "n").partial);
}

TEST_CASE("attribute ranks") {
    const auto schema = schema_of({"a", "b", "c", "d"}, {false, false, true, false});
    const DecisionModel one({unit(5, InputRef::binary(0), InputRef::binary(1))}, 0.0);
    const auto r1 = rank_attributes(Ensemble({one}, schema, "n", "p"));
    REQUIRE(r1.size() == 4);
    CHECK(r1[0].attribute == "a");
    CHECK(r1[0].score == 0.5);
    CHECK(r1[1].score == 0.5);
    CHECK(r1[2].score == 0.0);
    CHECK(r1[3].attribute == "d");

    std::ostringstream csv;
    write_ranks_csv(csv, r1);
    CHECK(csv.str() == "attribute,score\na,0.500000\nb,0.500000\nc,0.000000\nd,0.000000\n");
}

TEST_CASE("rank properties (property)") {
    Rng rng(71);
    const std::vector<bool> numeric = {false, true, false, true, false};
    const auto schema = schema_of({"a", "b", "c", "d", "e"}, numeric);
    const auto renamed = schema_of({"v", "w", "x", "y", "z"}, numeric);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<DecisionModel> models;
        const std::size_t m = 1 + rng.below(8);
        for (std::size_t i = 0; i < m; ++i) models.push_back(oracle::random_model(rng, numeric, {0.0}, 5, 6));
        const auto ranks = rank_attributes(Ensemble(models, schema, "n", "p"));
        double sum = 0;
        for (const auto& r : ranks) sum += r.score;
        CHECK(sum == doctest::Approx(1.0));
        for (std::size_t i = 1; i < ranks.size(); ++i) CHECK(ranks[i - 1].score >= ranks[i].score);

        std::vector<DecisionModel> reversed(models.rbegin(), models.rend());
        const auto again = rank_attributes(Ensemble(reversed, schema, "n", "p"));
        const auto other = rank_attributes(Ensemble(models, renamed, "n", "p"));
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            CHECK(again[i].attribute == ranks[i].attribute);
            CHECK(again[i].score == ranks[i].score);
            CHECK(other[i].score == ranks[i].score);
            CHECK(other[i].attribute[0] - 'v' == ranks[i].attribute[0] - 'a');
        }
    }
}
