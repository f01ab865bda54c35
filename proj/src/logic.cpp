#include "edm/logic.hpp"

#include <cmath>

#include <fmt/format.h>

#include "edm/errors.hpp"

namespace edm {
namespace {

constexpr std::array<std::uint8_t, LogicFunction::count> kTables = {
    0b1110,  // 1  u1 + u2
    0b1011,  // 2  ~u1 + u2
    0b0001,  // 3  ~(u1 + u2)
    0b1101,  // 4  u1 + ~u2
    0b1000,  // 5  u1 * u2
    0b0010,  // 6  ~u1 * u2
    0b0111,  // 7  ~(u1 * u2)
    0b0100,  // 8  u1 * ~u2
    0b0110,  // 9  xor
    0b1001,  // 10 xnor
};

const std::array<LogicFunction, LogicFunction::count>& basis() {
    static const std::array<LogicFunction, LogicFunction::count> functions = {
        LogicFunction(1), LogicFunction(2), LogicFunction(3), LogicFunction(4), LogicFunction(5),
        LogicFunction(6), LogicFunction(7), LogicFunction(8), LogicFunction(9), LogicFunction(10),
    };
    return functions;
}

void check_ref(const InputRef& ref, std::size_t unit_index) {
    if (ref.kind == InputRef::Kind::unit && ref.index >= unit_index) {
        throw StructuralError(
            fmt::format("unit {} references unit {} which does not precede it", unit_index, ref.index));
    }
    if (ref.kind == InputRef::Kind::numeric_attribute && !std::isfinite(ref.threshold)) {
        throw StructuralError(fmt::format("unit {} has a non-finite threshold", unit_index));
    }
}

}  // namespace

LogicFunction::LogicFunction(int id) : id_(id), table_(0) {
    if (id < 1 || id > count) {
        throw DomainError(fmt::format("logic function id {} outside 1..{}", id, count));
    }
    table_ = kTables[static_cast<std::size_t>(id - 1)];
}

Word LogicFunction::apply(Word u1, Word u2) const {
    Word out = 0;
    if (table_ & 0b0001) out |= ~u1 & ~u2;
    if (table_ & 0b0010) out |= ~u1 & u2;
    if (table_ & 0b0100) out |= u1 & ~u2;
    if (table_ & 0b1000) out |= u1 & u2;
    return out;
}

std::span<const LogicFunction> LogicFunction::all() { return basis(); }

bool eval_function(int id, bool u1, bool u2) { return LogicFunction(id)(u1, u2); }

bool eval_input(const InputRef& ref, std::span<const double> sample, std::span<const std::uint8_t> prior_outputs) {
    switch (ref.kind) {
        case InputRef::Kind::binary_attribute:
            if (ref.index >= sample.size()) {
                throw DataError(fmt::format("sample has no attribute {}", ref.index));
            }
            return sample[ref.index] != 0.0;
        case InputRef::Kind::numeric_attribute: {
            if (ref.index >= sample.size()) {
                throw DataError(fmt::format("sample has no attribute {}", ref.index));
            }
            const double v = sample[ref.index];
            if (!std::isfinite(v)) {
                throw DataError(fmt::format("attribute {} is not finite", ref.index));
            }
            return v > ref.threshold;
        }
        case InputRef::Kind::unit:
            if (ref.index >= prior_outputs.size()) {
                throw StructuralError(fmt::format("reference to unit {} which has not been evaluated", ref.index));
            }
            return prior_outputs[ref.index] != 0;
    }
    return false;
}

DecisionModel::DecisionModel(std::vector<Unit> units, double mu) : units_(std::move(units)), mu_(mu) {
    if (units_.empty()) {
        throw StructuralError("a decision model needs at least one unit");
    }
    for (std::size_t i = 0; i < units_.size(); ++i) {
        const Unit& u = units_[i];
        check_ref(u.inputs[0], i);
        check_ref(u.inputs[1], i);
        if (u.inputs[0] == u.inputs[1]) {
            throw StructuralError(fmt::format("unit {} has identical inputs", i));
        }
        if (!(u.mu >= 0.0 && u.mu <= 1.0)) {
            throw StructuralError(fmt::format("unit {} has mu {} outside [0,1]", i, u.mu));
        }
    }
}

DecisionModel::DecisionModel(DirectOutput direct, double mu) : direct_(direct), mu_(mu) {
    if (direct.source.kind == InputRef::Kind::unit) {
        throw StructuralError("a direct model must read an attribute");
    }
    check_ref(direct.source, 0);
}

bool DecisionModel::predict(std::span<const double> sample) const {
    if (direct_) {
        return eval_input(direct_->source, sample, {}) == direct_->polarity;
    }
    // Models are small; a fixed buffer covers the usual complexity caps.
    std::array<std::uint8_t, 64> small{};
    std::vector<std::uint8_t> large;
    std::span<std::uint8_t> outputs;
    if (units_.size() <= small.size()) {
        outputs = std::span<std::uint8_t>(small.data(), units_.size());
    } else {
        large.resize(units_.size());
        outputs = large;
    }
    for (std::size_t i = 0; i < units_.size(); ++i) {
        const Unit& u = units_[i];
        const auto prior = std::span<const std::uint8_t>(outputs.data(), i);
        const bool a = eval_input(u.inputs[0], sample, prior);
        const bool b = eval_input(u.inputs[1], sample, prior);
        outputs[i] = u.output_bit(a, b) ? 1 : 0;
    }
    const Unit& last = units_.back();
    return (outputs.back() != 0) == last.polarity;
}

std::size_t DecisionModel::required_width() const {
    std::size_t width = 0;
    auto visit = [&](const InputRef& r) {
        if (r.is_attribute()) width = std::max(width, r.index + 1);
    };
    if (direct_) visit(direct_->source);
    for (const Unit& u : units_) {
        visit(u.inputs[0]);
        visit(u.inputs[1]);
    }
    return width;
}

bool eval_model(const DecisionModel& model, std::span<const double> sample) { return model.predict(sample); }

std::string to_string(InputRef::Kind kind) {
    switch (kind) {
        case InputRef::Kind::binary_attribute: return "binary";
        case InputRef::Kind::numeric_attribute: return "numeric";
        case InputRef::Kind::unit: return "unit";
    }
    return "unknown";
}

}  // namespace edm
