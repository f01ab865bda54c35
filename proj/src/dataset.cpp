#include "edm/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "edm/errors.hpp"
#include "edm/rng.hpp"

namespace edm {
namespace {

constexpr const char* kMissing = "?";

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

bool is_missing(const std::string& v) { return v.empty() || v == kMissing; }

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || errno == ERANGE || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool raw_matches(const std::string& raw, const std::string& target) {
    if (raw == target) return true;
    const auto a = parse_number(raw);
    const auto b = parse_number(target);
    return a && b && *a == *b;
}

struct FnvHasher {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ULL;
        }
    }
    void str(const std::string& s) {
        bytes(s.data(), s.size());
        const unsigned char sep = 0;
        bytes(&sep, 1);
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(v[i - 1], v[j]);
    }
}

// Encodes one raw column as an attribute, returning the number of imputed cells.
std::size_t encode_column(const CsvTable& table, std::size_t col, const std::string& name,
                          std::optional<AttributeKind> hint, AttributeSpec& spec, std::vector<double>& out) {
    const std::size_t n = table.rows.size();
    std::vector<std::string> raw(n);
    std::vector<double> numbers;
    std::set<std::string> categories;
    bool all_numeric = true;
    std::size_t missing = 0;
    for (std::size_t r = 0; r < n; ++r) {
        raw[r] = table.rows[r][col];
        if (is_missing(raw[r])) {
            ++missing;
            continue;
        }
        categories.insert(raw[r]);
        if (auto v = parse_number(raw[r])) {
            numbers.push_back(*v);
        } else {
            all_numeric = false;
        }
    }

    AttributeKind kind;
    bool binary_numeric = false;
    if (hint) {
        kind = *hint;
        if (kind == AttributeKind::numeric && !all_numeric) {
            for (const auto& v : raw) {
                if (!is_missing(v) && !parse_number(v)) {
                    throw DataError(fmt::format("column '{}': unparseable numeric value '{}'", name, v));
                }
            }
        }
        if (kind == AttributeKind::binary) {
            if (all_numeric && std::all_of(numbers.begin(), numbers.end(), [](double x) { return x == 0.0 || x == 1.0; })) {
                binary_numeric = true;
            } else if (categories.size() > 2) {
                throw DataError(fmt::format("column '{}' has {} categories and cannot be binary", name, categories.size()));
            }
        }
    } else if (all_numeric && !numbers.empty()) {
        binary_numeric = std::all_of(numbers.begin(), numbers.end(), [](double x) { return x == 0.0 || x == 1.0; });
        kind = binary_numeric ? AttributeKind::binary : AttributeKind::numeric;
    } else if (numbers.empty() && categories.empty()) {
        kind = AttributeKind::numeric;
    } else {
        kind = categories.size() <= 2 ? AttributeKind::binary : AttributeKind::nominal;
    }

    spec.name = name;
    spec.source = name;
    spec.kind = kind;
    out.assign(n, 0.0);

    switch (kind) {
        case AttributeKind::numeric: {
            spec.categories.clear();
            spec.impute = median(numbers);
            for (std::size_t r = 0; r < n; ++r) {
                out[r] = is_missing(raw[r]) ? spec.impute : *parse_number(raw[r]);
            }
            break;
        }
        case AttributeKind::binary: {
            if (binary_numeric) {
                spec.categories = {"0", "1"};
            } else {
                std::vector<std::string> cats(categories.begin(), categories.end());
                if (cats.empty()) cats = {"0", "1"};
                if (cats.size() == 1) cats.insert(cats.begin(), "");
                spec.categories = cats;
            }
            std::size_t ones = 0;
            std::size_t present = 0;
            for (std::size_t r = 0; r < n; ++r) {
                if (is_missing(raw[r])) continue;
                ++present;
                if (raw_matches(raw[r], spec.one_value())) ++ones;
            }
            spec.impute = (2 * ones > present) ? 1.0 : 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                out[r] = is_missing(raw[r]) ? spec.impute : (raw_matches(raw[r], spec.one_value()) ? 1.0 : 0.0);
            }
            break;
        }
        case AttributeKind::nominal: {
            spec.categories.assign(categories.begin(), categories.end());
            std::vector<std::size_t> counts(spec.categories.size(), 0);
            std::vector<double> index(n, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                if (is_missing(raw[r])) continue;
                const auto it = std::lower_bound(spec.categories.begin(), spec.categories.end(), raw[r]);
                const auto k = static_cast<std::size_t>(it - spec.categories.begin());
                ++counts[k];
                index[r] = static_cast<double>(k);
            }
            const auto mode = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            spec.impute = static_cast<double>(mode);
            for (std::size_t r = 0; r < n; ++r) {
                out[r] = is_missing(raw[r]) ? spec.impute : index[r];
            }
            break;
        }
    }
    return missing;
}

}  // namespace

std::string to_string(AttributeKind kind) {
    switch (kind) {
        case AttributeKind::binary: return "binary";
        case AttributeKind::nominal: return "nominal";
        case AttributeKind::numeric: return "numeric";
    }
    return "numeric";
}

AttributeKind attribute_kind_from_string(const std::string& s) {
    if (s == "binary") return AttributeKind::binary;
    if (s == "nominal") return AttributeKind::nominal;
    if (s == "numeric") return AttributeKind::numeric;
    throw FormatError(fmt::format("unknown attribute kind '{}'", s));
}

Dataset::Dataset(std::vector<AttributeSpec> attributes, std::vector<double> values, std::vector<std::uint8_t> labels,
                 std::string negative_label, std::string positive_label)
    : attributes_(std::move(attributes)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      negative_label_(std::move(negative_label)),
      positive_label_(std::move(positive_label)) {
    if (values_.size() != labels_.size() * attributes_.size()) {
        throw DataError(fmt::format("dataset has {} values for {} rows of {} attributes", values_.size(),
                                    labels_.size(), attributes_.size()));
    }
    std::set<std::string> names;
    for (const auto& a : attributes_) {
        if (!names.insert(a.name).second) {
            throw DataError(fmt::format("duplicate attribute name '{}'", a.name));
        }
        if (a.kind == AttributeKind::nominal && a.categories.size() < 2) {
            throw DataError(fmt::format("nominal attribute '{}' needs at least two categories", a.name));
        }
    }
}

std::size_t Dataset::count_class(bool positive) const {
    return static_cast<std::size_t>(
        std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(positive ? 1 : 0)));
}

std::optional<std::size_t> Dataset::find(const std::string& name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i].name == name) return i;
    }
    return std::nullopt;
}

std::string Dataset::fingerprint(std::span<const std::size_t> rows) const {
    FnvHasher h;
    for (const auto& a : attributes_) {
        h.str(a.name);
        h.str(to_string(a.kind));
    }
    h.str(negative_label_);
    h.str(positive_label_);
    for (std::size_t r : rows) {
        for (double v : row(r)) {
            h.u64(std::bit_cast<std::uint64_t>(v));
        }
        h.u64(labels_[r]);
    }
    return fmt::format("{:016x}", h.h);
}

std::string Dataset::fingerprint() const {
    std::vector<std::size_t> rows(size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return fingerprint(rows);
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError(fmt::format("line {}: expected {} fields, found {}", line_no, table.header.size(),
                                        fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) {
        throw DataError("empty CSV input");
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(fmt::format("cannot open '{}'", path));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

Dataset load_table(const CsvTable& table, const std::string& label_column, const LoadOptions& options) {
    if (table.rows.empty()) {
        throw DataError("dataset has no rows");
    }
    const auto label_col = table.column(label_column);
    if (!label_col) {
        throw DataError(fmt::format("label column '{}' not found", label_column));
    }
    for (const auto& d : options.drop) {
        if (!table.column(d)) {
            throw DataError(fmt::format("column '{}' to drop not found", d));
        }
    }

    std::set<std::string> label_values;
    for (const auto& row : table.rows) {
        const std::string& v = row[*label_col];
        if (is_missing(v)) {
            throw DataError("missing class label");
        }
        label_values.insert(v);
    }
    if (label_values.size() != 2) {
        throw DataError(fmt::format("label column '{}' must have exactly 2 distinct values, found {}", label_column,
                                    label_values.size()));
    }
    std::string negative = *label_values.begin();
    std::string positive = *label_values.rbegin();
    if (options.positive_label) {
        if (!label_values.count(*options.positive_label)) {
            throw DataError(fmt::format("positive label '{}' does not occur in column '{}'", *options.positive_label,
                                        label_column));
        }
        if (*options.positive_label != positive) std::swap(negative, positive);
    }

    std::vector<std::size_t> columns;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == *label_col) continue;
        if (std::find(options.drop.begin(), options.drop.end(), table.header[c]) != options.drop.end()) continue;
        columns.push_back(c);
    }
    for (const auto& [name, kind] : options.type_hints) {
        (void)kind;
        if (!table.column(name)) {
            throw DataError(fmt::format("type hint for unknown column '{}'", name));
        }
    }

    const std::size_t n = table.rows.size();
    std::vector<AttributeSpec> specs(columns.size());
    std::vector<std::vector<double>> encoded(columns.size());
    std::size_t imputed = 0;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const std::string& name = table.header[columns[k]];
        std::optional<AttributeKind> hint;
        if (auto it = options.type_hints.find(name); it != options.type_hints.end()) hint = it->second;
        imputed += encode_column(table, columns[k], name, hint, specs[k], encoded[k]);
    }

    std::vector<double> values(n * columns.size());
    std::vector<std::uint8_t> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < columns.size(); ++k) {
            values[r * columns.size() + k] = encoded[k][r];
        }
        labels[r] = table.rows[r][*label_col] == positive ? 1 : 0;
    }
    Dataset ds(std::move(specs), std::move(values), std::move(labels), negative, positive);
    ds.set_imputed_count(imputed);
    return ds;
}

Dataset load_csv(const std::string& path, const std::string& label_column, const LoadOptions& options) {
    return load_table(read_csv(path), label_column, options);
}

Dataset binarize(const Dataset& dataset) {
    struct Source {
        std::size_t attribute;
        std::optional<std::size_t> category;  // indicator of this category
    };
    std::vector<AttributeSpec> specs;
    std::vector<Source> sources;
    for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
        const AttributeSpec& in = dataset.attributes()[a];
        if (in.kind != AttributeKind::nominal || in.categories.size() <= 2) {
            AttributeSpec out = in;
            if (in.kind == AttributeKind::nominal) {
                // Two categories: index already is the indicator of the second.
                out.kind = AttributeKind::binary;
            }
            specs.push_back(out);
            sources.push_back({a, std::nullopt});
            continue;
        }
        for (std::size_t k = 0; k < in.categories.size(); ++k) {
            AttributeSpec ind;
            ind.name = in.name + "=" + in.categories[k];
            ind.kind = AttributeKind::binary;
            ind.categories = {"", in.categories[k]};
            ind.source = in.source;
            ind.impute = (static_cast<std::size_t>(in.impute) == k) ? 1.0 : 0.0;
            specs.push_back(std::move(ind));
            sources.push_back({a, k});
        }
    }
    std::vector<double> values(dataset.size() * specs.size());
    std::vector<std::uint8_t> labels(dataset.labels().begin(), dataset.labels().end());
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (std::size_t k = 0; k < specs.size(); ++k) {
            const double v = dataset.value(r, sources[k].attribute);
            values[r * specs.size() + k] =
                sources[k].category ? (static_cast<std::size_t>(v) == *sources[k].category ? 1.0 : 0.0) : v;
        }
    }
    Dataset out(std::move(specs), std::move(values), std::move(labels), dataset.negative_label(),
                dataset.positive_label());
    out.set_imputed_count(dataset.imputed_count());
    return out;
}

Dataset apply_schema(const CsvTable& table, const std::vector<AttributeSpec>& schema,
                     const std::optional<std::string>& label_column, const std::string& negative_label,
                     const std::string& positive_label) {
    std::vector<std::size_t> cols(schema.size());
    std::vector<std::string> missing;
    for (std::size_t k = 0; k < schema.size(); ++k) {
        const auto c = table.column(schema[k].source);
        if (!c) {
            if (std::find(missing.begin(), missing.end(), schema[k].source) == missing.end()) {
                missing.push_back(schema[k].source);
            }
            continue;
        }
        cols[k] = *c;
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw DataError(fmt::format("schema mismatch: missing attributes: {}", list));
    }
    std::optional<std::size_t> label_col;
    if (label_column) label_col = table.column(*label_column);

    const std::size_t n = table.rows.size();
    std::vector<double> values(n * schema.size());
    std::vector<std::uint8_t> labels(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < schema.size(); ++k) {
            const AttributeSpec& spec = schema[k];
            const std::string& raw = table.rows[r][cols[k]];
            double v = spec.impute;
            if (!is_missing(raw)) {
                if (spec.kind == AttributeKind::numeric) {
                    const auto x = parse_number(raw);
                    if (!x) {
                        throw DataError(fmt::format("row {}: attribute '{}': unparseable numeric value '{}'", r + 1,
                                                    spec.name, raw));
                    }
                    v = *x;
                } else if (spec.kind == AttributeKind::binary) {
                    v = raw_matches(raw, spec.one_value()) ? 1.0 : 0.0;
                } else {
                    throw DataError(fmt::format("attribute '{}' is nominal; schemas must be binarized", spec.name));
                }
            }
            values[r * schema.size() + k] = v;
        }
        if (label_col) {
            const std::string& l = table.rows[r][*label_col];
            if (l == positive_label) {
                labels[r] = 1;
            } else if (l != negative_label) {
                throw DataError(fmt::format("row {}: unknown class label '{}'", r + 1, l));
            }
        }
    }
    return Dataset(schema, std::move(values), std::move(labels), negative_label, positive_label);
}

SplitPlan stratified_sample(const Dataset& dataset, std::span<const std::size_t> pool, std::size_t n,
                            std::uint64_t seed) {
    if (n == 0 || n % 2 != 0) {
        throw ConfigError(fmt::format("stratified sample size must be a positive even number, got {}", n));
    }
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t r : pool) {
        (dataset.label(r) ? pos : neg).push_back(r);
    }
    const std::size_t half = n / 2;
    if (pos.size() < half || neg.size() < half) {
        throw DataError(fmt::format("stratified sample of {} needs {} rows per class; have {} positive, {} negative", n,
                                    half, pos.size(), neg.size()));
    }
    Rng rng(seed);
    shuffle(pos, rng);
    shuffle(neg, rng);
    SplitPlan plan;
    plan.seed = seed;
    plan.train.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(half));
    plan.train.insert(plan.train.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(half));
    std::sort(plan.train.begin(), plan.train.end());
    for (std::size_t r : pool) {
        if (!std::binary_search(plan.train.begin(), plan.train.end(), r)) plan.test.push_back(r);
    }
    std::sort(plan.test.begin(), plan.test.end());
    return plan;
}

SplitPlan stratified_sample(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return stratified_sample(dataset, all, n, seed);
}

std::vector<std::pair<SplitPlan, SplitPlan>> two_fold_plans(const Dataset& dataset, std::size_t runs,
                                                            std::uint64_t seed) {
    if (runs == 0) {
        throw ConfigError("runs must be at least 1");
    }
    std::vector<std::pair<SplitPlan, SplitPlan>> plans;
    for (std::size_t run = 0; run < runs; ++run) {
        const std::uint64_t run_seed = derive_seed(seed, run);
        Rng rng(run_seed);
        std::vector<std::size_t> pos;
        std::vector<std::size_t> neg;
        for (std::size_t r = 0; r < dataset.size(); ++r) {
            (dataset.label(r) ? pos : neg).push_back(r);
        }
        shuffle(pos, rng);
        shuffle(neg, rng);
        // Odd class counts: the larger half of positives goes to A, of negatives to B.
        const std::size_t pos_a = (pos.size() + 1) / 2;
        const std::size_t neg_a = neg.size() / 2;
        std::vector<std::size_t> a(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(pos_a));
        a.insert(a.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(neg_a));
        std::vector<std::size_t> b(pos.begin() + static_cast<std::ptrdiff_t>(pos_a), pos.end());
        b.insert(b.end(), neg.begin() + static_cast<std::ptrdiff_t>(neg_a), neg.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        SplitPlan fold1{a, b, run_seed};
        SplitPlan fold2{b, a, run_seed};
        plans.emplace_back(std::move(fold1), std::move(fold2));
    }
    return plans;
}

}  // namespace edm
