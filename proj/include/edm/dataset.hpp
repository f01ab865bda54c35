#pragma once

// CSV ingestion, attribute typing, nominal encoding, and the sampling
// protocol (stratified training subsets, repeated two-fold splits).

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace edm {

enum class AttributeKind { binary, nominal, numeric };

std::string to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(const std::string& s);

struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::numeric;
    // Nominal: sorted category list (value = index). Binary: {zero, one}.
    std::vector<std::string> categories;
    // Raw CSV column the attribute is read from. Equals `name` unless the
    // attribute is a one-vs-rest indicator.
    std::string source;
    // Value substituted for "?" (already encoded: median, mode index, or bit).
    double impute = 0.0;

    // Raw value that encodes as 1 for a binary attribute.
    const std::string& one_value() const { return categories.at(1); }

    friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

// Rows of encoded attribute values with a binary label (1 = positive).
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<AttributeSpec> attributes, std::vector<double> values, std::vector<std::uint8_t> labels,
            std::string negative_label, std::string positive_label);

    const std::vector<AttributeSpec>& attributes() const { return attributes_; }
    std::size_t attribute_count() const { return attributes_.size(); }
    std::size_t size() const { return labels_.size(); }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * attributes_.size(), attributes_.size()};
    }
    double value(std::size_t row, std::size_t attribute) const { return values_[row * attributes_.size() + attribute]; }
    bool label(std::size_t i) const { return labels_[i] != 0; }
    std::span<const std::uint8_t> labels() const { return labels_; }

    const std::string& positive_label() const { return positive_label_; }
    const std::string& negative_label() const { return negative_label_; }
    const std::string& class_name(bool positive) const { return positive ? positive_label_ : negative_label_; }

    std::size_t imputed_count() const { return imputed_count_; }
    void set_imputed_count(std::size_t n) { imputed_count_ = n; }

    std::size_t count_class(bool positive) const;

    // Index of the attribute with this name, if any.
    std::optional<std::size_t> find(const std::string& name) const;

    // 64-bit FNV-1a over schema, values and labels of the given rows, as hex.
    std::string fingerprint(std::span<const std::size_t> rows) const;
    std::string fingerprint() const;

private:
    std::vector<AttributeSpec> attributes_;
    std::vector<double> values_;
    std::vector<std::uint8_t> labels_;
    std::string negative_label_;
    std::string positive_label_;
    std::size_t imputed_count_ = 0;
};

// Header plus rows of raw string fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const;
};

// Plain comma-separated fields, first row is the header. Throws DataError on
// empty input or ragged rows.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

struct LoadOptions {
    // Column name -> forced kind.
    std::map<std::string, AttributeKind> type_hints;
    // Raw label value that should map to the positive class. Defaults to the
    // lexicographically larger of the two label values.
    std::optional<std::string> positive_label;
    // Columns to ignore entirely (row ids and the like).
    std::vector<std::string> drop;
};

// Types columns (numeric with values in {0,1} or two categories -> binary,
// other numeric -> numeric, else nominal), imputes "?" with median/mode.
Dataset load_csv(const std::string& path, const std::string& label_column, const LoadOptions& options = {});
Dataset load_table(const CsvTable& table, const std::string& label_column, const LoadOptions& options = {});

// Replaces every nominal attribute with k > 2 categories by k indicator
// attributes named "name=category". Binary and numeric attributes pass through.
Dataset binarize(const Dataset& dataset);

// Encodes a raw table against an existing binary/numeric schema (as stored in
// a model file). Throws DataError listing every missing source column.
// When `label_column` is present in the table, labels are filled using the
// given label names; otherwise all labels are 0.
Dataset apply_schema(const CsvTable& table, const std::vector<AttributeSpec>& schema,
                     const std::optional<std::string>& label_column, const std::string& negative_label,
                     const std::string& positive_label);

struct SplitPlan {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

// Draws n/2 rows of each class (without replacement) from `pool` for training;
// the rest of the pool is the test set. n must be even. Throws DataError when
// a class has fewer than n/2 rows in the pool.
SplitPlan stratified_sample(const Dataset& dataset, std::span<const std::size_t> pool, std::size_t n,
                            std::uint64_t seed);
SplitPlan stratified_sample(const Dataset& dataset, std::size_t n, std::uint64_t seed);

// Per run: stratified shuffle, halve into A and B; fold 1 trains on A and
// tests on B, fold 2 the reverse.
std::vector<std::pair<SplitPlan, SplitPlan>> two_fold_plans(const Dataset& dataset, std::size_t runs,
                                                            std::uint64_t seed);

}  // namespace edm
