#pragma once

// Two-input logic basis, input references, units and decision models.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edm/bits.hpp"

namespace edm {

// One of the ten two-argument Boolean functions of the basis.
//
// The truth table is a 4-bit mask indexed by (u1 << 1) | u2:
//   id  formula               table
//    1  u1 + u2                1110
//    2  ~u1 + u2               1011
//    3  ~(u1 + u2)             0001
//    4  u1 + ~u2               1101
//    5  u1 * u2                1000
//    6  ~u1 * u2               0010
//    7  ~(u1 * u2)             0111
//    8  u1 * ~u2               0100
//    9  ~u1*u2 + u1*~u2 (XOR)  0110
//   10  ~u1*~u2 + u1*u2 (XNOR) 1001
// (bit 3 on the left). The constants and the four projections are not part
// of the basis.
class LogicFunction {
public:
    static constexpr int count = 10;

    // Throws DomainError for ids outside 1..10.
    explicit LogicFunction(int id);

    int id() const { return id_; }
    std::uint8_t truth_table() const { return table_; }

    bool operator()(bool u1, bool u2) const { return (table_ >> ((u1 ? 2 : 0) | (u2 ? 1 : 0))) & 1U; }

    // Bitwise application over whole words.
    Word apply(Word u1, Word u2) const;

    static std::span<const LogicFunction> all();

    friend bool operator==(const LogicFunction&, const LogicFunction&) = default;

private:
    int id_;
    std::uint8_t table_;
};

// Value of function `id` (1..10) at (u1, u2). Throws DomainError on a bad id.
bool eval_function(int id, bool u1, bool u2);

// Where a unit input comes from.
struct InputRef {
    enum class Kind : std::uint8_t { binary_attribute, numeric_attribute, unit };

    Kind kind = Kind::binary_attribute;
    std::size_t index = 0;
    // Only meaningful for numeric_attribute: the input bit is value > threshold.
    double threshold = 0.0;

    static InputRef binary(std::size_t attribute) { return {Kind::binary_attribute, attribute, 0.0}; }
    static InputRef numeric(std::size_t attribute, double q) { return {Kind::numeric_attribute, attribute, q}; }
    static InputRef unit(std::size_t u) { return {Kind::unit, u, 0.0}; }

    bool is_attribute() const { return kind != Kind::unit; }

    friend bool operator==(const InputRef&, const InputRef&) = default;
};

// Input bit for `ref`. Throws StructuralError for out-of-range references and
// DataError for a non-finite numeric value.
bool eval_input(const InputRef& ref, std::span<const double> sample, std::span<const std::uint8_t> prior_outputs);

struct Unit {
    LogicFunction function{1};
    std::array<InputRef, 2> inputs;
    // Output bit 1 maps to the positive class iff polarity is true.
    bool polarity = true;
    // Leave-one-out error rate recorded when the unit was accepted.
    double mu = 0.0;

    bool output_bit(bool u1, bool u2) const { return function(u1, u2); }
};

// A model that is a single attribute read directly (no logic units). Produced
// only as the fallback when growth never accepts a unit.
struct DirectOutput {
    InputRef source;
    bool polarity = true;
};

// Ordered, acyclic unit list; the last unit is the output.
class DecisionModel {
public:
    DecisionModel() = default;

    // Validates references (acyclic, unit refs point backwards, inputs distinct).
    DecisionModel(std::vector<Unit> units, double mu);
    DecisionModel(DirectOutput direct, double mu);

    const std::vector<Unit>& units() const { return units_; }
    const std::optional<DirectOutput>& direct() const { return direct_; }
    double mu() const { return mu_; }

    // Number of units; a direct single-attribute model counts as one.
    std::size_t complexity() const { return direct_ ? 1 : units_.size(); }

    // Class bit (true = positive). Throws DataError when the sample is too
    // short for a referenced attribute.
    bool predict(std::span<const double> sample) const;

    // Largest attribute index referenced, plus one.
    std::size_t required_width() const;

private:
    std::vector<Unit> units_;
    std::optional<DirectOutput> direct_;
    double mu_ = 0.0;
};

bool eval_model(const DecisionModel& model, std::span<const double> sample);

std::string to_string(InputRef::Kind kind);

}  // namespace edm
