// edm: train, evaluate and inspect evolved logic-network ensembles.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "edm/dataset.hpp"
#include "edm/ensemble.hpp"
#include "edm/errors.hpp"
#include "edm/evolution.hpp"
#include "edm/experiment.hpp"
#include "edm/interpret.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitFormat = 66;
constexpr int kExitInternal = 70;

struct DataOptions {
    std::string path;
    std::string label = "class";
    std::string positive;
    std::vector<std::string> drop;
    std::vector<std::string> types;
};

struct GrowthOptions {
    std::size_t max_complexity = 10;
    std::size_t max_attempts = 200;
    double target_error = 0.0;
    std::size_t loo_samples = 100;
    bool no_loo_refit = false;
    std::size_t models = 500;
    std::string tie_policy = "negative";
    std::string ensemble_mode = "paper";
};

struct Common {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool quiet = false;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--data", d.path, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    cmd->add_option("--label", d.label, "Name of the class column")->capture_default_str();
    cmd->add_option("--positive", d.positive, "Class value treated as positive (default: larger label)");
    cmd->add_option("--drop", d.drop, "Columns to ignore")->delimiter(',');
    cmd->add_option("--types", d.types, "Type overrides as name=binary|nominal|numeric")->delimiter(',');
}

void add_growth_options(CLI::App* cmd, GrowthOptions& g) {
    cmd->add_option("--max-complexity", g.max_complexity, "Maximum units per model")->capture_default_str();
    cmd->add_option("--max-attempts", g.max_attempts, "Consecutive rejected candidates before a model stops")
        ->capture_default_str();
    cmd->add_option("--target-error", g.target_error, "Stop growing once a unit's error is at or below this")
        ->capture_default_str();
    cmd->add_option("--loo-samples", g.loo_samples, "Threshold draws per unit fit (0 = every distinct value)")
        ->capture_default_str();
    cmd->add_flag("--no-loo-refit", g.no_loo_refit, "Score units by training error instead of leave-one-out");
    cmd->add_option("--models", g.models, "Models grown per population")->capture_default_str();
    cmd->add_option("--tie-policy", g.tie_policy, "Class for tied votes")
        ->check(CLI::IsMember({"negative", "positive"}))
        ->capture_default_str();
    cmd->add_option("--ensemble-mode", g.ensemble_mode, "paper: minimal error then complexity; all: every model")
        ->check(CLI::IsMember({"paper", "all"}))
        ->capture_default_str();
}

void add_common_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_flag("--quiet", c.quiet, "Suppress progress on stderr");
}

edm::GrowthConfig growth_config(const GrowthOptions& g, std::uint64_t seed) {
    edm::GrowthConfig c;
    c.max_complexity = g.max_complexity;
    c.max_failed_attempts = g.max_attempts;
    c.target_error = g.target_error;
    c.loo_refit = !g.no_loo_refit;
    c.budget.draws = g.loo_samples;
    c.budget.exhaustive = g.loo_samples == 0;
    c.seed = seed;
    c.validate();
    return c;
}

edm::Dataset load_dataset(const DataOptions& d) {
    edm::LoadOptions opts;
    if (!d.positive.empty()) opts.positive_label = d.positive;
    opts.drop = d.drop;
    for (const std::string& t : d.types) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw edm::ConfigError(fmt::format("type override '{}' is not name=kind", t));
        opts.type_hints[t.substr(0, eq)] = edm::attribute_kind_from_string(t.substr(eq + 1));
    }
    edm::Dataset raw = edm::load_csv(d.path, d.label, opts);
    return edm::binarize(raw);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw edm::DataError(fmt::format("cannot write '{}'", path));
    out << text;
}

// Data rows to score: the label column is used when present.
edm::Dataset load_for_model(const std::string& path, const edm::Ensemble& e, const std::string& label) {
    const edm::CsvTable table = edm::read_csv(path);
    std::optional<std::string> label_col;
    if (table.column(label)) label_col = label;
    return edm::apply_schema(table, e.schema(), label_col, e.negative_label(), e.positive_label());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolved logic-network decision model ensembles"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI file; a [train], [evaluate], ... section holds that command's options");

    Common common;
    DataOptions data;
    GrowthOptions growth;

    // train
    auto* train = app.add_subcommand("train", "Grow a population on a CSV and save the selected ensemble");
    std::size_t train_size = 0;
    std::string out_path;
    std::string trace_path;
    add_data_options(train, data);
    add_growth_options(train, growth);
    add_common_options(train, common);
    train->add_option("--train-size", train_size, "Stratified training sample size (0 = all rows)")
        ->capture_default_str();
    train->add_option("--out", out_path, "Model file to write")->required();
    train->add_option("--trace", trace_path, "Growth trace CSV (default: <out>.trace.csv)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Repeated two-fold comparison of EDM and the network baseline");
    std::size_t eval_train_size = 50;
    std::size_t runs = 5;
    std::vector<std::string> methods{"edm"};
    std::string report_path;
    std::string timing = "on";
    std::string models_dir;
    edm::BaselineConfig ann;
    std::string ann_validation = "loo";
    add_data_options(evaluate, data);
    add_growth_options(evaluate, growth);
    add_common_options(evaluate, common);
    evaluate->add_option("--train-size", eval_train_size, "Training sample per fold")->capture_default_str();
    evaluate->add_option("--runs", runs, "Repetitions of the two-fold split")->capture_default_str();
    evaluate->add_option("--methods", methods, "edm, ann or both")
        ->delimiter(',')
        ->check(CLI::IsMember({"edm", "ann"}))
        ->capture_default_str();
    evaluate->add_option("--out", report_path, "Report CSV (default: stdout)");
    evaluate->add_option("--timing", timing, "Write wall times into the report")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    evaluate->add_option("--models-dir", models_dir, "Directory for each fold's EDM model file");
    evaluate->add_option("--ann-members", ann.ensemble_size, "Baseline networks per fold")->capture_default_str();
    evaluate->add_option("--ann-hidden", ann.hidden_units, "Hidden units per network")->capture_default_str();
    evaluate->add_option("--ann-epochs", ann.epochs, "Gradient descent epochs")->capture_default_str();
    evaluate->add_option("--ann-lr", ann.learning_rate, "Learning rate")->capture_default_str();
    evaluate->add_option("--ann-subset", ann.subset_fraction, "Share of attributes per network")
        ->capture_default_str();
    evaluate->add_option("--ann-validation", ann_validation, "Member score: leave-one-out or training accuracy")
        ->check(CLI::IsMember({"loo", "train"}))
        ->capture_default_str();

    // predict
    auto* predict = app.add_subcommand("predict", "Classify rows with a saved ensemble");
    std::string model_path;
    std::string predict_out;
    std::string predict_data;
    std::string predict_label = "class";
    predict->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--data", predict_data, "CSV with the model's attribute columns")
        ->required()
        ->check(CLI::ExistingFile);
    predict->add_option("--label", predict_label, "Class column, ignored if absent")->capture_default_str();
    predict->add_option("--out", predict_out, "Output CSV (default: stdout)");

    // rules
    auto* rules = app.add_subcommand("rules", "Print each model of an ensemble as if-then rules");
    std::string rules_out;
    std::string rules_format = "text";
    rules->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    rules->add_option("--out", rules_out, "Output file (default: stdout)");
    rules->add_option("--format", rules_format, "text or json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();

    // rank
    auto* rank = app.add_subcommand("rank", "Rank attributes by how often the ensemble reads them");
    std::string rank_out;
    rank->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    rank->add_option("--out", rank_out, "Output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    auto log = [&](const std::string& s) {
        if (!common.quiet) std::cerr << s << '\n';
    };

    try {
        if (*train) {
            const edm::GrowthConfig cfg = growth_config(growth, common.seed);
            const edm::Dataset ds = load_dataset(data);
            if (ds.imputed_count() > 0) log(fmt::format("imputed {} missing values", ds.imputed_count()));
            std::vector<std::size_t> rows;
            if (train_size == 0) {
                for (std::size_t i = 0; i < ds.size(); ++i) rows.push_back(i);
            } else {
                rows = edm::stratified_sample(ds, train_size, edm::derive_seed(common.seed, 0, 1)).train;
            }
            const auto mode = edm::ensemble_mode_from_string(growth.ensemble_mode);
            auto settings = edm::growth_settings(cfg, growth.models, mode);
            settings["train_size"] = std::to_string(rows.size());
            settings["label"] = data.label;
            const edm::TrainedEnsemble trained =
                edm::train_ensemble(ds, rows, cfg, growth.models, mode, edm::tie_policy_from_string(growth.tie_policy),
                                    common.threads, settings);
            edm::save(trained.ensemble, out_path);
            const std::string trace = trace_path.empty() ? out_path + ".trace.csv" : trace_path;
            std::ofstream tf(trace, std::ios::binary);
            if (!tf) throw edm::DataError(fmt::format("cannot write '{}'", trace));
            edm::write_trace_csv(tf, trained.population);
            const auto& kept = trained.ensemble.models();
            std::cout << fmt::format("trained {} models on {} rows; kept {}; min mu {:.4f}; complexity {}\n",
                                     trained.population.size(), rows.size(), kept.size(), kept.front().mu(),
                                     kept.front().complexity());
            std::cout << fmt::format("wrote {} and {}\n", out_path, trace);
        } else if (*evaluate) {
            edm::ExperimentConfig cfg;
            cfg.train_size = eval_train_size;
            cfg.runs = runs;
            cfg.seed = common.seed;
            cfg.methods.clear();
            for (const std::string& m : methods) cfg.methods.push_back(edm::method_from_string(m));
            cfg.growth = growth_config(growth, common.seed);
            cfg.models = growth.models;
            cfg.mode = edm::ensemble_mode_from_string(growth.ensemble_mode);
            cfg.tie = edm::tie_policy_from_string(growth.tie_policy);
            cfg.ann = ann;
            cfg.ann.loo_validation = ann_validation == "loo";
            cfg.threads = common.threads;
            cfg.keep_models = !models_dir.empty();
            const edm::Dataset ds = load_dataset(data);
            if (ds.imputed_count() > 0) log(fmt::format("imputed {} missing values", ds.imputed_count()));
            const edm::ExperimentReport report = edm::run_experiment(ds, cfg, log);
            std::ostringstream csv;
            edm::write_report_csv(csv, report, timing == "on");
            write_text(report_path, csv.str());
            if (!models_dir.empty()) {
                std::filesystem::create_directories(models_dir);
                for (const edm::CellResult& c : report.cells) {
                    if (c.model_json.empty()) continue;
                    write_text((std::filesystem::path(models_dir) / fmt::format("run{}_fold{}.json", c.run, c.fold)).string(),
                               c.model_json);
                }
            }
            if (!report_path.empty()) std::cout << edm::render_summary(edm::summarize(report));
        } else if (*predict) {
            const edm::Ensemble e = edm::load(model_path);
            const edm::Dataset ds = load_for_model(predict_data, e, predict_label);
            std::string out = "row,class,chi,votes_positive,votes_negative\n";
            for (std::size_t i = 0; i < ds.size(); ++i) {
                const edm::Prediction p = e.predict(ds.row(i));
                out += fmt::format("{},{},{:.4f},{},{}\n", i + 1, e.class_name(p.positive), p.confidence,
                                   p.votes_positive, p.votes_negative);
            }
            write_text(predict_out, out);
        } else if (*rules) {
            const edm::Ensemble e = edm::load(model_path);
            std::vector<edm::RuleSet> sets;
            for (std::size_t m = 0; m < e.size(); ++m) {
                sets.push_back(edm::extract_rules(e.models()[m], e.schema(), e.positive_label(), e.negative_label(),
                                                  edm::kExactLiteralLimit, edm::derive_seed(e.metadata().seed, m)));
            }
            write_text(rules_out, rules_format == "json" ? edm::render_rules_json(sets)
                                                         : edm::render_rules_text(sets, e.models()));
        } else if (*rank) {
            const edm::Ensemble e = edm::load(model_path);
            std::ostringstream csv;
            edm::write_ranks_csv(csv, edm::rank_attributes(e));
            write_text(rank_out, csv.str());
        }
    } catch (const edm::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const edm::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const edm::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const edm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
