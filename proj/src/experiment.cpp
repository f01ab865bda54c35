#include "edm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "edm/errors.hpp"

namespace edm {

std::map<std::string, std::string> growth_settings(const GrowthConfig& growth, std::size_t n_models, EnsembleMode mode) {
    return {
        {"max_complexity", std::to_string(growth.max_complexity)},
        {"max_attempts", std::to_string(growth.max_failed_attempts)},
        {"target_error", fmt::format("{}", growth.target_error)},
        {"loo_refit", growth.loo_refit ? "true" : "false"},
        {"loo_samples", growth.budget.exhaustive ? "exhaustive" : std::to_string(growth.budget.draws)},
        {"models", std::to_string(n_models)},
        {"ensemble_mode", to_string(mode)},
    };
}

TrainedEnsemble train_ensemble(const Dataset& data, std::span<const std::size_t> rows, const GrowthConfig& growth,
                               std::size_t n_models, EnsembleMode mode, TiePolicy tie, std::size_t threads,
                               std::map<std::string, std::string> settings) {
    const TrainingSet ts(data, rows);
    std::vector<GrowthResult> population = train_population(ts, growth, n_models, threads);
    std::vector<DecisionModel> models;
    models.reserve(population.size());
    for (const GrowthResult& g : population) models.push_back(g.model);
    EnsembleMetadata meta;
    meta.seed = growth.seed;
    meta.config = std::move(settings);
    meta.dataset_fingerprint = data.fingerprint(rows);
    Ensemble ensemble(select_models(models, mode), data.attributes(), data.negative_label(), data.positive_label(), tie,
                      std::move(meta));
    return {std::move(population), std::move(ensemble)};
}

std::string to_string(Method m) { return m == Method::edm ? "edm" : "ann"; }

Method method_from_string(const std::string& s) {
    if (s == "edm") return Method::edm;
    if (s == "ann") return Method::ann;
    throw ConfigError(fmt::format("unknown method '{}' (expected edm or ann)", s));
}

namespace {

std::size_t class_count(const Dataset& data, std::span<const std::size_t> rows, bool positive) {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](std::size_t r) { return data.label(r) == positive; }));
}

}  // namespace

ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config, const Logger& log) {
    if (config.runs < 1) throw ConfigError("runs must be at least 1");
    if (config.train_size < 2 || config.train_size % 2 != 0) throw ConfigError("train size must be even and at least 2");
    if (config.methods.empty()) throw ConfigError("no methods selected");
    config.growth.validate();
    if (std::find(config.methods.begin(), config.methods.end(), Method::ann) != config.methods.end()) {
        config.ann.validate();
    }
    auto say = [&](const std::string& s) {
        if (log) log(s);
    };

    ExperimentReport report;
    const auto plans = two_fold_plans(data, config.runs, config.seed);
    for (std::size_t run = 0; run < config.runs; ++run) {
        const auto& [first, second] = plans[run];
        for (std::size_t fold = 0; fold < 2; ++fold) {
            const SplitPlan& plan = fold == 0 ? first : second;
            const std::size_t cell = run * 2 + fold;
            const std::size_t shortest =
                std::min(class_count(data, plan.train, true), class_count(data, plan.train, false));
            std::size_t train_size = config.train_size;
            if (train_size / 2 > shortest) {
                train_size = 2 * shortest;
                report.warnings.push_back(fmt::format(
                    "run {} fold {}: a class has only {} rows in the training half; using {} training rows", run + 1,
                    fold + 1, shortest, train_size));
                say(report.warnings.back());
            }
            const SplitPlan sample = stratified_sample(data, plan.train, train_size, derive_seed(config.seed, cell, 1));
            const std::vector<std::size_t>& test = plan.test;

            for (Method method : config.methods) {
                CellResult r;
                r.method = method;
                r.fold = fold + 1;
                r.run = run + 1;
                r.train_rows = sample.train.size();
                r.test_rows = test.size();
                const auto start = std::chrono::steady_clock::now();
                if (method == Method::edm) {
                    GrowthConfig growth = config.growth;
                    growth.seed = derive_seed(config.seed, cell, 2);
                    TrainedEnsemble trained =
                        train_ensemble(data, sample.train, growth, config.models, config.mode, config.tie,
                                       config.threads, growth_settings(growth, config.models, config.mode));
                    const Evaluation ev = evaluate(trained.ensemble, data, test);
                    std::vector<DecisionModel> all;
                    all.reserve(trained.population.size());
                    for (const GrowthResult& g : trained.population) all.push_back(g.model);
                    const Ensemble everyone(std::move(all), data.attributes(), data.negative_label(),
                                            data.positive_label(), config.tie);
                    const Evaluation ev_all = evaluate(everyone, data, test);
                    r.e_accuracy = ev.accuracy;
                    r.mean_chi = ev.mean_confidence;
                    r.bs_accuracy = ev_all.bs_accuracy;
                    r.ensemble_size = trained.ensemble.size();
                    r.all_accuracy = ev_all.accuracy;
                    r.mean_member_accuracy = ev_all.mean_member_accuracy;
                    if (config.keep_models) r.model_json = to_json(trained.ensemble);
                } else {
                    BaselineConfig ann = config.ann;
                    ann.seed = derive_seed(config.seed, cell, 3);
                    BaselineEnsemble baseline = train_baseline(data, sample.train, ann, config.threads);
                    baseline.tie = config.tie;
                    const BaselineEvaluation ev = evaluate_baseline(baseline, data, test);
                    r.bs_accuracy = ev.bs_accuracy;
                    r.e_accuracy = ev.e_accuracy;
                    r.mean_chi = ev.mean_confidence;
                    r.ensemble_size = baseline.members.size();
                }
                r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                say(fmt::format("{} run {} fold {}: BS {:.1f}% E {:.1f}% chi {:.3f} ({} kept, {:.1f}s)", to_string(method),
                                r.run, r.fold, r.bs_accuracy, r.e_accuracy, r.mean_chi, r.ensemble_size, r.seconds));
                report.cells.push_back(std::move(r));
            }
        }
    }
    return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report, bool timing) {
    out << "method,fold,run,bs_accuracy,e_accuracy,mean_chi,seconds\n";
    for (const CellResult& c : report.cells) {
        out << fmt::format("{},{},{},{:.4f},{:.4f},{:.4f},{:.3f}\n", to_string(c.method), c.fold, c.run, c.bs_accuracy,
                           c.e_accuracy, c.mean_chi, timing ? c.seconds : 0.0);
    }
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<SummaryRow> summarize(const ExperimentReport& report) {
    std::vector<SummaryRow> rows;
    for (Method method : {Method::ann, Method::edm}) {
        for (std::size_t fold = 1; fold <= 2; ++fold) {
            std::vector<double> bs, e, chi;
            for (const CellResult& c : report.cells) {
                if (c.method != method || c.fold != fold) continue;
                bs.push_back(c.bs_accuracy);
                e.push_back(c.e_accuracy);
                chi.push_back(c.mean_chi);
            }
            if (bs.empty()) continue;
            rows.push_back({method, fold, bs.size(), mean(bs), sample_sd(bs), mean(e), sample_sd(e), mean(chi)});
        }
    }
    return rows;
}

std::string render_summary(const std::vector<SummaryRow>& rows) {
    std::string out = fmt::format("{:<8}{:<6}{:>6}  {:>14}  {:>14}  {:>8}\n", "method", "fold", "runs", "BS %", "E %",
                                  "chi");
    for (const SummaryRow& r : rows) {
        out += fmt::format("{:<8}{:<6}{:>6}  {:>6.1f} ± {:<5.1f}  {:>6.1f} ± {:<5.1f}  {:>8.3f}\n", to_string(r.method),
                           r.fold, r.runs, r.bs_mean, r.bs_sd, r.e_mean, r.e_sd, r.chi_mean);
    }
    return out;
}

}  // namespace edm
