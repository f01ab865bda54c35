#pragma once

// Training one ensemble end to end, and the repeated two-fold comparison of
// the evolved ensembles with the network baseline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "edm/ann.hpp"
#include "edm/dataset.hpp"
#include "edm/ensemble.hpp"
#include "edm/evolution.hpp"

namespace edm {

using Logger = std::function<void(const std::string&)>;

struct TrainedEnsemble {
    std::vector<GrowthResult> population;
    Ensemble ensemble;
};

// Grows `n_models` models on `rows` of a binarized dataset and selects the
// ensemble. `settings` is stored in the metadata as given.
TrainedEnsemble train_ensemble(const Dataset& data, std::span<const std::size_t> rows, const GrowthConfig& growth,
                               std::size_t n_models, EnsembleMode mode, TiePolicy tie, std::size_t threads,
                               std::map<std::string, std::string> settings = {});

// Settings map recorded in model files.
std::map<std::string, std::string> growth_settings(const GrowthConfig& growth, std::size_t n_models, EnsembleMode mode);

enum class Method { edm, ann };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ExperimentConfig {
    std::size_t train_size = 50;
    std::size_t runs = 5;
    std::uint64_t seed = 0;
    std::vector<Method> methods = {Method::edm};
    GrowthConfig growth;
    std::size_t models = 500;
    EnsembleMode mode = EnsembleMode::paper;
    TiePolicy tie = TiePolicy::negative;
    BaselineConfig ann;
    std::size_t threads = 1;
    // Keep each cell's model file text in the report.
    bool keep_models = false;
};

struct CellResult {
    Method method = Method::edm;
    std::size_t fold = 1;  // 1 or 2
    std::size_t run = 1;   // 1-based
    double bs_accuracy = 0.0;
    double e_accuracy = 0.0;
    double mean_chi = 0.0;
    double seconds = 0.0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    // EDM only: members kept, accuracy of the whole population voting, and
    // the mean accuracy of its members.
    std::size_t ensemble_size = 0;
    double all_accuracy = 0.0;
    double mean_member_accuracy = 0.0;
    std::string model_json;
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    std::vector<std::string> warnings;
};

// Per run: a stratified half split; each half in turn supplies a stratified
// training sample of train_size rows (fewer, with a warning, when a class is
// short) and the other half is the test set.
ExperimentReport run_experiment(const Dataset& data, const ExperimentConfig& config, const Logger& log = {});

// method,fold,run,bs_accuracy,e_accuracy,mean_chi,seconds
// With timing off the seconds column is written as 0.
void write_report_csv(std::ostream& out, const ExperimentReport& report, bool timing = true);

struct SummaryRow {
    Method method = Method::edm;
    std::size_t fold = 1;
    std::size_t runs = 0;
    double bs_mean = 0.0;
    double bs_sd = 0.0;
    double e_mean = 0.0;
    double e_sd = 0.0;
    double chi_mean = 0.0;
};

double mean(std::span<const double> xs);
// Sample standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

std::vector<SummaryRow> summarize(const ExperimentReport& report);
std::string render_summary(const std::vector<SummaryRow>& rows);

}  // namespace edm
