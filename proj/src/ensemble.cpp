#include "edm/ensemble.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edm/errors.hpp"

namespace edm {

using nlohmann::json;

std::string to_string(TiePolicy p) { return p == TiePolicy::negative ? "negative" : "positive"; }

std::string to_string(EnsembleMode m) { return m == EnsembleMode::paper ? "paper" : "all"; }

TiePolicy tie_policy_from_string(const std::string& s) {
    if (s == "negative") return TiePolicy::negative;
    if (s == "positive") return TiePolicy::positive;
    throw ConfigError(fmt::format("unknown tie policy '{}' (expected negative or positive)", s));
}

EnsembleMode ensemble_mode_from_string(const std::string& s) {
    if (s == "paper") return EnsembleMode::paper;
    if (s == "all") return EnsembleMode::all;
    throw ConfigError(fmt::format("unknown ensemble mode '{}' (expected paper or all)", s));
}

std::vector<DecisionModel> select_models(std::span<const DecisionModel> population, EnsembleMode mode) {
    if (population.empty()) throw ConfigError("cannot select from an empty population");
    if (mode == EnsembleMode::all) return {population.begin(), population.end()};
    double min_mu = population[0].mu();
    for (const auto& m : population) min_mu = std::min(min_mu, m.mu());
    std::size_t min_complexity = std::numeric_limits<std::size_t>::max();
    for (const auto& m : population) {
        if (m.mu() == min_mu) min_complexity = std::min(min_complexity, m.complexity());
    }
    std::vector<DecisionModel> kept;
    for (const auto& m : population) {
        if (m.mu() == min_mu && m.complexity() == min_complexity) kept.push_back(m);
    }
    return kept;
}

Prediction vote(std::size_t positive_votes, std::size_t m, TiePolicy tie) {
    if (m == 0) throw DomainError("vote over zero models");
    if (positive_votes > m) throw DomainError("more positive votes than models");
    Prediction p;
    p.votes_positive = positive_votes;
    p.votes_negative = m - positive_votes;
    if (p.votes_positive == p.votes_negative) {
        p.positive = tie == TiePolicy::positive;
        p.confidence = 0.5;
        return p;
    }
    p.positive = p.votes_positive > p.votes_negative;
    p.confidence = static_cast<double>(std::max(p.votes_positive, p.votes_negative)) / static_cast<double>(m);
    return p;
}

namespace {

void check_input(const InputRef& ref, const std::vector<AttributeSpec>& schema, std::size_t model) {
    if (ref.kind == InputRef::Kind::unit) return;
    if (ref.index >= schema.size()) {
        throw StructuralError(fmt::format("model {} reads attribute {} but the schema has {}", model, ref.index,
                                          schema.size()));
    }
    const AttributeKind want =
        ref.kind == InputRef::Kind::numeric_attribute ? AttributeKind::numeric : AttributeKind::binary;
    if (schema[ref.index].kind != want) {
        throw StructuralError(fmt::format("model {} reads '{}' as {} but it is {}", model, schema[ref.index].name,
                                          to_string(want), to_string(schema[ref.index].kind)));
    }
}

}  // namespace

Ensemble::Ensemble(std::vector<DecisionModel> models, std::vector<AttributeSpec> schema, std::string negative_label,
                   std::string positive_label, TiePolicy tie, EnsembleMetadata metadata)
    : models_(std::move(models)),
      schema_(std::move(schema)),
      negative_label_(std::move(negative_label)),
      positive_label_(std::move(positive_label)),
      tie_(tie),
      metadata_(std::move(metadata)) {
    if (models_.empty()) throw StructuralError("an ensemble needs at least one model");
    for (std::size_t m = 0; m < models_.size(); ++m) {
        const DecisionModel& model = models_[m];
        if (model.direct()) {
            check_input(model.direct()->source, schema_, m);
            continue;
        }
        if (model.units().empty()) throw StructuralError(fmt::format("model {} has no units", m));
        for (const Unit& u : model.units()) {
            for (const InputRef& r : u.inputs) check_input(r, schema_, m);
        }
    }
}

Prediction Ensemble::predict(std::span<const double> sample) const {
    if (sample.size() != schema_.size()) {
        throw DataError(fmt::format("sample has {} values, schema has {} attributes", sample.size(), schema_.size()));
    }
    std::size_t positive = 0;
    for (const DecisionModel& m : models_) positive += m.predict(sample) ? 1 : 0;
    return vote(positive, models_.size(), tie_);
}

std::size_t best_single_index(std::span<const DecisionModel> models) {
    if (models.empty()) throw DomainError("no models to choose from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < models.size(); ++i) {
        const bool better = models[i].mu() < models[best].mu() ||
                            (models[i].mu() == models[best].mu() && models[i].complexity() < models[best].complexity());
        if (better) best = i;
    }
    return best;
}

Evaluation evaluate(const Ensemble& ensemble, const Dataset& data, std::span<const std::size_t> rows) {
    if (rows.empty()) throw DataError("evaluation needs at least one test row");
    if (data.attributes() != ensemble.schema()) {
        throw DataError("dataset schema differs from the ensemble schema");
    }
    const auto& models = ensemble.models();
    std::vector<std::size_t> member_correct(models.size(), 0);
    std::size_t correct = 0;
    double chi = 0.0;
    for (std::size_t r : rows) {
        const auto sample = data.row(r);
        const bool truth = data.label(r);
        std::size_t positive = 0;
        for (std::size_t m = 0; m < models.size(); ++m) {
            const bool p = models[m].predict(sample);
            positive += p ? 1 : 0;
            if (p == truth) ++member_correct[m];
        }
        const Prediction pred = vote(positive, models.size(), ensemble.tie_policy());
        if (pred.positive == truth) ++correct;
        chi += pred.confidence;
    }
    const auto n = static_cast<double>(rows.size());
    Evaluation ev;
    ev.accuracy = 100.0 * static_cast<double>(correct) / n;
    ev.mean_confidence = chi / n;
    double sum = 0.0;
    for (std::size_t c : member_correct) {
        ev.member_accuracies.push_back(100.0 * static_cast<double>(c) / n);
        sum += ev.member_accuracies.back();
    }
    ev.mean_member_accuracy = sum / static_cast<double>(models.size());
    ev.bs_accuracy = ev.member_accuracies[best_single_index(models)];
    return ev;
}

namespace {

InputRef::Kind kind_from_string(const std::string& s) {
    if (s == "binary") return InputRef::Kind::binary_attribute;
    if (s == "numeric") return InputRef::Kind::numeric_attribute;
    if (s == "unit") return InputRef::Kind::unit;
    throw FormatError(fmt::format("unknown input kind '{}'", s));
}

json input_json(const InputRef& r) { return {{"kind", to_string(r.kind)}, {"index", r.index}}; }

json thresholds_json(std::span<const InputRef> refs) {
    json t = json::array();
    for (const InputRef& r : refs) {
        if (r.kind == InputRef::Kind::numeric_attribute) t.push_back(r.threshold);
    }
    return t;
}

json model_json(const DecisionModel& m) {
    json out;
    if (m.direct()) {
        const DirectOutput& d = *m.direct();
        out["direct"] = {{"input", input_json(d.source)},
                         {"thresholds", thresholds_json(std::span(&d.source, 1))},
                         {"polarity", d.polarity}};
    } else {
        json units = json::array();
        for (const Unit& u : m.units()) {
            units.push_back({{"function_id", u.function.id()},
                             {"input_a", input_json(u.inputs[0])},
                             {"input_b", input_json(u.inputs[1])},
                             {"thresholds", thresholds_json(u.inputs)},
                             {"polarity", u.polarity},
                             {"mu", u.mu}});
        }
        out["units"] = std::move(units);
    }
    out["mu"] = m.mu();
    out["complexity"] = m.complexity();
    return out;
}

// Reads inputs and assigns thresholds in order to the numeric ones.
void read_inputs(const json& j, std::span<InputRef> refs, std::span<const char* const> keys) {
    const json& thresholds = j.at("thresholds");
    std::size_t next = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const json& in = j.at(keys[i]);
        refs[i].kind = kind_from_string(in.at("kind").get<std::string>());
        refs[i].index = in.at("index").get<std::size_t>();
        if (refs[i].kind == InputRef::Kind::numeric_attribute) {
            if (next >= thresholds.size()) throw FormatError("missing threshold for a numeric input");
            refs[i].threshold = thresholds.at(next++).get<double>();
        }
    }
    if (next != thresholds.size()) throw FormatError("more thresholds than numeric inputs");
}

DecisionModel model_from_json(const json& j) {
    const double mu = j.at("mu").get<double>();
    if (j.contains("direct")) {
        const json& d = j.at("direct");
        DirectOutput out;
        constexpr const char* keys[] = {"input"};
        read_inputs(d, std::span(&out.source, 1), keys);
        out.polarity = d.at("polarity").get<bool>();
        return DecisionModel(out, mu);
    }
    std::vector<Unit> units;
    for (const json& ju : j.at("units")) {
        Unit u;
        u.function = LogicFunction(ju.at("function_id").get<int>());
        constexpr const char* keys[] = {"input_a", "input_b"};
        read_inputs(ju, u.inputs, keys);
        u.polarity = ju.at("polarity").get<bool>();
        u.mu = ju.at("mu").get<double>();
        units.push_back(u);
    }
    return DecisionModel(std::move(units), mu);
}

}  // namespace

std::string to_json(const Ensemble& e) {
    json attrs = json::array();
    for (const AttributeSpec& a : e.schema()) {
        attrs.push_back({{"name", a.name},
                         {"kind", to_string(a.kind)},
                         {"source", a.source},
                         {"categories", a.categories},
                         {"impute", a.impute}});
    }
    json models = json::array();
    for (const DecisionModel& m : e.models()) models.push_back(model_json(m));
    json config = json::object();
    for (const auto& [k, v] : e.metadata().config) config[k] = v;
    const json doc = {
        {"format_version", kModelFormatVersion},
        {"labels", {{"negative", e.negative_label()}, {"positive", e.positive_label()}}},
        {"attributes", std::move(attrs)},
        {"tie_policy", to_string(e.tie_policy())},
        {"models", std::move(models)},
        {"metadata",
         {{"seed", e.metadata().seed}, {"config", std::move(config)}, {"dataset_fingerprint", e.metadata().dataset_fingerprint}}},
    };
    return doc.dump(2) + "\n";
}

Ensemble ensemble_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(fmt::format("model file is not valid JSON: {}", e.what()));
    }
    try {
        if (!doc.is_object() || !doc.contains("format_version")) throw FormatError("model file has no format_version");
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw FormatError(fmt::format("model file format_version {} is not supported (expected {})", version,
                                          kModelFormatVersion));
        }
        std::vector<AttributeSpec> schema;
        for (const json& a : doc.at("attributes")) {
            AttributeSpec s;
            s.name = a.at("name").get<std::string>();
            s.kind = attribute_kind_from_string(a.at("kind").get<std::string>());
            s.source = a.at("source").get<std::string>();
            s.categories = a.at("categories").get<std::vector<std::string>>();
            s.impute = a.at("impute").get<double>();
            schema.push_back(std::move(s));
        }
        std::vector<DecisionModel> models;
        for (const json& m : doc.at("models")) models.push_back(model_from_json(m));
        EnsembleMetadata meta;
        const json& jm = doc.at("metadata");
        meta.seed = jm.at("seed").get<std::uint64_t>();
        for (const auto& [k, v] : jm.at("config").items()) meta.config[k] = v.get<std::string>();
        meta.dataset_fingerprint = jm.at("dataset_fingerprint").get<std::string>();
        return Ensemble(std::move(models), std::move(schema), doc.at("labels").at("negative").get<std::string>(),
                        doc.at("labels").at("positive").get<std::string>(),
                        tie_policy_from_string(doc.at("tie_policy").get<std::string>()), std::move(meta));
    } catch (const FormatError&) {
        throw;
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("malformed model file: {}", e.what()));
    } catch (const Error& e) {
        throw FormatError(fmt::format("inconsistent model file: {}", e.what()));
    }
}

void save(const Ensemble& ensemble, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path));
    out << to_json(ensemble);
    if (!out) throw DataError(fmt::format("failed writing '{}'", path));
}

Ensemble load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ensemble_from_json(ss.str());
}

}  // namespace edm
