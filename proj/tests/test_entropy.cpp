#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "edm/entropy.hpp"
#include "edm/errors.hpp"
#include "edm/rng.hpp"
#include "oracles.hpp"

using namespace edm;

namespace {

constexpr double kH_12_4 = 0.811278124459132864;

BitVector bits_of(const std::vector<bool>& v) {
    BitVector b(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) b.set(i, v[i]);
    return b;
}

}  // namespace

TEST_CASE("entropy of class counts") {
    const std::vector<std::size_t> pure = {10, 0};
    const std::vector<std::size_t> even = {8, 8};
    const std::vector<std::size_t> skew = {12, 4};
    CHECK(entropy(pure) == 0.0);
    CHECK(entropy(even) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(entropy(skew) == doctest::Approx(kH_12_4).epsilon(1e-14));
    const std::vector<std::size_t> none = {0, 0};
    CHECK_THROWS_AS(entropy(none), DomainError);
}

TEST_CASE("conditional entropy") {
    const std::vector<std::uint8_t> labels = {1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    SUBCASE("perfect separation") { CHECK(conditional_entropy(labels, labels) == 0.0); }
    SUBCASE("constant output keeps the whole-set entropy") {
        const std::vector<std::uint8_t> ones(16, 1);
        CHECK(conditional_entropy(ones, labels) == doctest::Approx(1.0));
    }
    SUBCASE("(6+,2-) / (2+,6-)") {
        const std::vector<std::uint8_t> out = {1, 1, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0};
        CHECK(conditional_entropy(out, labels) == doctest::Approx(kH_12_4).epsilon(1e-14));
        std::vector<bool> o(out.begin(), out.end()), l(labels.begin(), labels.end());
        CHECK(conditional_entropy(out, labels) == doctest::Approx(double(oracle::conditional_entropy(o, l))).epsilon(1e-14));
    }
    SUBCASE("length mismatch") {
        const std::vector<std::uint8_t> shorter = {1, 0};
        CHECK_THROWS_AS(conditional_entropy(shorter, labels), DomainError);
    }
}

TEST_CASE("tabulated k log k and split entropy agree with the definition") {
    for (std::size_t k = 0; k < 5000; k += 7) {
        const double direct = k == 0 ? 0.0 : double(k) * std::log2(double(k));
        CHECK(xlog2x(k) == doctest::Approx(direct).epsilon(1e-14));
    }
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n1 = rng.below(60), n0 = rng.below(60) + (n1 == 0 ? 1 : 0);
        const std::size_t p1 = n1 ? rng.below(n1 + 1) : 0, p0 = rng.below(n0 + 1);
        std::vector<bool> out, lab;
        for (std::size_t j = 0; j < n1; ++j) {
            out.push_back(true);
            lab.push_back(j < p1);
        }
        for (std::size_t j = 0; j < n0; ++j) {
            out.push_back(false);
            lab.push_back(j < p0);
        }
        CHECK(split_entropy(n1, p1, n0, p0) ==
              doctest::Approx(double(oracle::conditional_entropy(out, lab))).epsilon(1e-12));
    }
}

TEST_CASE("entropy properties") {
    Rng rng(2);
    for (int i = 0; i < 300; ++i) {
        const std::size_t a = rng.below(40), b = rng.below(40) + 1;
        const std::vector<std::size_t> ab = {a, b}, ba = {b, a};
        CHECK(entropy(ab) == entropy(ba));
        CHECK(entropy(ab) <= 1.0 + 1e-15);
        if (a != b) CHECK(entropy(ab) < 1.0);

        // Splitting never raises entropy.
        const std::size_t n = 2 + rng.below(40);
        std::vector<std::uint8_t> out(n), lab(n);
        std::size_t pos = 0;
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = rng.below(2);
            lab[j] = rng.below(2);
            pos += lab[j];
        }
        const std::vector<std::size_t> whole = {pos, n - pos};
        CHECK(conditional_entropy(out, lab) <= entropy(whole) + 1e-12);
    }
}

TEST_CASE("fit_unit finds a separating threshold") {
    std::vector<double> v;
    BitVector labels(10);
    for (int i = 1; i <= 10; ++i) {
        v.push_back(i);
        labels.set(static_cast<std::size_t>(i - 1), i > 5);
    }
    const NumericColumn col(v);
    const BitVector zeros(10);
    const BitVector train(10, true);
    SearchBudget budget;
    budget.exhaustive = true;
    const EntropySplit s = fit_unit(ColumnView::thresholded(col), ColumnView::fixed(zeros), labels, train, budget);
    CHECK(s.entropy == 0.0);
    CHECK(s.errors == 0);
    REQUIRE(s.thresholds[0]);
    CHECK(*s.thresholds[0] == 5.0);
    const BitVector out = split_outputs(ColumnView::thresholded(col), ColumnView::fixed(zeros), s, 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK((out.get(i) == s.polarity) == labels.get(i));

    budget.exhaustive = false;
    budget.draws = 200;
    budget.seed = 3;
    const EntropySplit r = fit_unit(ColumnView::thresholded(col), ColumnView::fixed(zeros), labels, train, budget);
    CHECK(r.entropy == 0.0);
}

TEST_CASE("constant inputs leave the set entropy") {
    const std::vector<double> v(12, 4.0);
    const NumericColumn col(v);
    BitVector labels(12);
    for (std::size_t i = 0; i < 3; ++i) labels.set(i);
    const BitVector ones(12, true);
    const EntropySplit s = fit_unit(ColumnView::thresholded(col), ColumnView::fixed(ones), labels, BitVector(12, true),
                                    SearchBudget{});
    CHECK(s.entropy == doctest::Approx(kH_12_4));
}

TEST_CASE("exhaustive search equals the brute-force oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 20;
        std::vector<double> a(n), b(n);
        std::vector<bool> bits(n), lab(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = double(rng.below(8));
            b[i] = std::round(rng.uniform(-3, 3) * 10) / 10;
            bits[i] = rng.below(2) == 1;
            lab[i] = rng.below(3) == 0 ? a[i] > 4 : rng.below(2) == 1;
        }
        // A random training subset.
        std::vector<std::size_t> train;
        BitVector mask(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.below(5) != 0) {
                train.push_back(i);
                mask.set(i);
            }
        }
        if (train.size() < 2) continue;
        const NumericColumn ca(a), cb(b);
        const BitVector fixed = bits_of(bits), labels = bits_of(lab);
        SearchBudget budget;
        budget.exhaustive = true;

        const EntropySplit one = fit_unit(ColumnView::thresholded(ca), ColumnView::fixed(fixed), labels, mask, budget);
        const oracle::Split o1 = oracle::brute_force_unit(&a, nullptr, nullptr, &bits, lab, train);
        CHECK(one.entropy == doctest::Approx(double(o1.h)).epsilon(1e-12));
        CHECK(one.function_id == o1.function_id);
        CHECK(*one.thresholds[0] == *o1.qa);
        CHECK(one.polarity == o1.polarity);
        CHECK(one.errors == o1.errors);

        const EntropySplit two = fit_unit(ColumnView::thresholded(ca), ColumnView::thresholded(cb), labels, mask, budget);
        const oracle::Split o2 = oracle::brute_force_unit(&a, nullptr, &b, nullptr, lab, train);
        CHECK(two.entropy == doctest::Approx(double(o2.h)).epsilon(1e-12));
        CHECK(two.function_id == o2.function_id);
        CHECK(*two.thresholds[0] == *o2.qa);
        CHECK(*two.thresholds[1] == *o2.qb);
    }
}

TEST_CASE("randomized search is deterministic in its seed") {
    const auto d = oracle::synthetic_dataset(40, 0, 2, 8);
    std::vector<double> a, b;
    BitVector labels(40);
    for (std::size_t r = 0; r < 40; ++r) {
        a.push_back(d.value(r, 0));
        b.push_back(d.value(r, 1));
        labels.set(r, d.label(r));
    }
    const NumericColumn ca(a), cb(b);
    SearchBudget budget;
    budget.draws = 15;
    budget.seed = 1234;
    const BitVector train(40, true);
    const EntropySplit s1 = fit_unit(ColumnView::thresholded(ca), ColumnView::thresholded(cb), labels, train, budget);
    const EntropySplit s2 = fit_unit(ColumnView::thresholded(ca), ColumnView::thresholded(cb), labels, train, budget);
    CHECK(s1.function_id == s2.function_id);
    CHECK(s1.thresholds == s2.thresholds);
    CHECK(s1.entropy == s2.entropy);
    // Every drawn threshold is an observed value.
    CHECK(std::find(a.begin(), a.end(), *s1.thresholds[0]) != a.end());
    CHECK(std::find(b.begin(), b.end(), *s1.thresholds[1]) != b.end());
}

TEST_CASE("fit_unit rejects an empty training set") {
    const BitVector bits(8);
    CHECK_THROWS_AS(fit_unit(ColumnView::fixed(bits), ColumnView::fixed(bits), bits, BitVector(8), SearchBudget{}),
                    DomainError);
}
