#include "fairglvq/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "fairglvq/error.hpp"
#include "format.hpp"
#include "rng.hpp"

namespace fairglvq {

namespace {

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    out.push_back(trim(cell));
    return out;
}

// Distinct values ordered numerically when all parse as numbers, otherwise
// lexicographically.
std::vector<std::string> ordered_levels(std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    bool numeric = std::all_of(values.begin(), values.end(),
                               [](const std::string& v) { return parse_number(v).has_value(); });
    if (numeric) {
        std::stable_sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
            return *parse_number(a) < *parse_number(b);
        });
    }
    return values;
}

bool passes(const RowFilter& f, const std::string& cell) {
    auto lhs = parse_number(cell);
    auto rhs = parse_number(f.value);
    switch (f.op) {
        case RowFilter::Op::Eq:
            return (lhs && rhs) ? *lhs == *rhs : cell == f.value;
        case RowFilter::Op::Ne:
            return (lhs && rhs) ? *lhs != *rhs : cell != f.value;
        default:
            break;
    }
    if (!lhs || !rhs) return false;
    switch (f.op) {
        case RowFilter::Op::Lt: return *lhs < *rhs;
        case RowFilter::Op::Le: return *lhs <= *rhs;
        case RowFilter::Op::Gt: return *lhs > *rhs;
        case RowFilter::Op::Ge: return *lhs >= *rhs;
        default: return false;
    }
}

}  // namespace

// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<Sample> samples, std::size_t dim, std::size_t num_classes,
                 std::size_t num_groups, std::vector<ColumnDescriptor> schema)
    : samples_(std::move(samples)),
      dim_(dim),
      num_classes_(num_classes),
      num_groups_(num_groups),
      schema_(std::move(schema)) {
    if (samples_.empty()) throw ParameterError("dataset must contain at least one sample");
    if (num_classes_ == 0 || num_groups_ == 0)
        throw ParameterError("dataset needs at least one class and one group");
    if (!schema_.empty() && schema_.size() != dim_)
        throw SchemaError("schema has " + std::to_string(schema_.size()) + " columns, expected " +
                          std::to_string(dim_));
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (s.features.size() != dim_)
            throw DimensionError("sample " + std::to_string(i) + " has dimension " +
                                 std::to_string(s.features.size()) + ", expected " + std::to_string(dim_));
        if (s.label >= num_classes_) throw ParameterError("sample " + std::to_string(i) + ": label out of range");
        if (s.group >= num_groups_) throw ParameterError("sample " + std::to_string(i) + ": group out of range");
        for (double v : s.features)
            if (!std::isfinite(v)) throw ParameterError("sample " + std::to_string(i) + ": non-finite feature");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(samples_.at(i));
    Dataset ds(std::move(out), dim_, num_classes_, num_groups_, schema_);
    ds.class_names = class_names;
    ds.group_names = group_names;
    return ds;
}

Dataset Dataset::with_features(std::vector<Vector> features, std::vector<ColumnDescriptor> schema) const {
    if (features.size() != samples_.size()) throw DimensionError("feature row count mismatch");
    std::vector<Sample> out(samples_.size());
    std::size_t dim = features.empty() ? 0 : features.front().size();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        out[i].features = std::move(features[i]);
        out[i].label = samples_[i].label;
        out[i].group = samples_[i].group;
    }
    Dataset ds(std::move(out), dim, num_classes_, num_groups_, std::move(schema));
    ds.class_names = class_names;
    ds.group_names = group_names;
    return ds;
}

std::vector<std::size_t> Dataset::labels() const {
    std::vector<std::size_t> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.label);
    return out;
}

std::vector<std::size_t> Dataset::groups() const {
    std::vector<std::size_t> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.group);
    return out;
}

// ---------------------------------------------------------------------------

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? npos : static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
            table.header = split_record(line);
            have_header = true;
            continue;
        }
        if (trim(line).empty()) continue;
        auto cells = split_record(line);
        if (cells.size() != table.header.size())
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(cells.size()),
                             table.rows.size());
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw ParseError("missing header row", 0);
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_csv(in);
}

Dataset load_csv(const std::string& path, const PreprocessSpec& spec) {
    return load_csv(read_csv(path), spec);
}

Dataset load_csv(const CsvTable& table, const PreprocessSpec& spec) {
    auto require = [&](const std::string& name) {
        auto idx = table.column(name);
        if (idx == CsvTable::npos) throw SchemaError("missing column '" + name + "'");
        return idx;
    };
    if (spec.label_column == spec.protected_column)
        throw SchemaError("label and protected columns must differ");
    const std::size_t label_col = require(spec.label_column);
    const std::size_t prot_col = require(spec.protected_column);

    std::vector<std::size_t> feature_cols;
    if (spec.feature_columns.empty()) {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == label_col || c == prot_col) continue;
            if (table.column(table.header[c]) != c) continue;  // duplicate header name
            feature_cols.push_back(c);
        }
    } else {
        for (const auto& name : spec.feature_columns) {
            auto c = require(name);
            if (c == label_col) throw SchemaError("label column listed as a feature");
            if (c != prot_col) feature_cols.push_back(c);
        }
    }
    if (spec.keep_protected_as_feature) feature_cols.push_back(prot_col);

    std::vector<std::pair<std::size_t, const RowFilter*>> filters;
    for (const auto& f : spec.filters) filters.emplace_back(require(f.column), &f);

    std::vector<std::size_t> used = feature_cols;
    used.push_back(label_col);
    used.push_back(prot_col);

    auto missing = [&](const std::string& cell) { return cell.empty() || cell == spec.missing_marker; };

    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        bool ok = std::all_of(filters.begin(), filters.end(),
                              [&](const auto& f) { return passes(*f.second, row[f.first]); });
        ok = ok && std::none_of(used.begin(), used.end(), [&](std::size_t c) { return missing(row[c]); });
        if (ok) kept.push_back(r);
    }

    if (spec.protected_top_groups > 0) {
        std::map<std::string, std::size_t> freq;
        for (auto r : kept) ++freq[table.rows[r][prot_col]];
        std::vector<std::pair<std::string, std::size_t>> order(freq.begin(), freq.end());
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (order.size() > spec.protected_top_groups) order.resize(spec.protected_top_groups);
        std::vector<std::size_t> filtered;
        for (auto r : kept) {
            const auto& v = table.rows[r][prot_col];
            if (std::any_of(order.begin(), order.end(), [&](const auto& p) { return p.first == v; }))
                filtered.push_back(r);
        }
        kept = std::move(filtered);
    }
    if (kept.empty()) throw SchemaError("no rows left after filtering");

    // Labels and groups.
    std::vector<std::string> label_levels;
    std::vector<std::size_t> label_ids(kept.size());
    if (!spec.positive_labels.empty()) {
        label_levels = {"negative", "positive"};
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const auto& v = table.rows[kept[i]][label_col];
            label_ids[i] = std::find(spec.positive_labels.begin(), spec.positive_labels.end(), v) !=
                                   spec.positive_labels.end()
                               ? 1
                               : 0;
        }
    } else {
        std::vector<std::string> raw;
        for (auto r : kept) raw.push_back(table.rows[r][label_col]);
        label_levels = ordered_levels(raw);
        for (std::size_t i = 0; i < kept.size(); ++i)
            label_ids[i] = static_cast<std::size_t>(
                std::find(label_levels.begin(), label_levels.end(), raw[i]) - label_levels.begin());
    }
    std::vector<std::string> raw_groups;
    for (auto r : kept) raw_groups.push_back(table.rows[r][prot_col]);
    auto group_levels = ordered_levels(raw_groups);
    std::vector<std::size_t> group_ids(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        group_ids[i] = static_cast<std::size_t>(
            std::find(group_levels.begin(), group_levels.end(), raw_groups[i]) - group_levels.begin());

    // Feature encoding.
    std::vector<Vector> features(kept.size());
    std::vector<ColumnDescriptor> schema;
    for (auto c : feature_cols) {
        const auto& name = table.header[c];
        bool forced_categorical = std::find(spec.categorical_columns.begin(), spec.categorical_columns.end(),
                                            name) != spec.categorical_columns.end();
        bool numeric = !forced_categorical && parse_number(table.rows[kept.front()][c]).has_value();
        if (numeric) {
            for (std::size_t i = 0; i < kept.size(); ++i) {
                auto v = parse_number(table.rows[kept[i]][c]);
                if (!v)
                    throw ParseError("non-numeric value '" + table.rows[kept[i]][c] + "' in numeric column '" +
                                         name + "'",
                                     kept[i]);
                features[i].push_back(*v);
            }
            schema.push_back({name, ColumnKind::Numeric, name});
            continue;
        }
        std::vector<std::string> raw;
        for (auto r : kept) raw.push_back(table.rows[r][c]);
        std::vector<std::string> levels = raw;
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        auto level_of = [&](const std::string& v) {
            return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
        };
        if (spec.one_hot) {
            for (const auto& lv : levels) schema.push_back({name + "=" + lv, ColumnKind::Categorical, name});
            for (std::size_t i = 0; i < kept.size(); ++i) {
                auto at = level_of(raw[i]);
                for (std::size_t l = 0; l < levels.size(); ++l) features[i].push_back(l == at ? 1.0 : 0.0);
            }
        } else {
            schema.push_back({name, ColumnKind::Categorical, name});
            for (std::size_t i = 0; i < kept.size(); ++i)
                features[i].push_back(static_cast<double>(level_of(raw[i])));
        }
    }

    std::vector<Sample> samples(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        samples[i] = Sample{std::move(features[i]), label_ids[i], group_ids[i]};
    const std::size_t dim = schema.size();
    Dataset ds(std::move(samples), dim, label_levels.size(), group_levels.size(), std::move(schema));
    ds.class_names = label_levels;
    ds.group_names = group_levels;
    if (spec.favorable_label >= ds.num_classes())
        throw ParameterError("favorable label " + std::to_string(spec.favorable_label) + " out of range");
    if (spec.standardize) ds = Standardizer::fit(ds).transform(ds);
    return ds;
}

void write_csv(const Dataset& ds, std::ostream& out) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
    out << "label,protected\n";
    for (const auto& s : ds.samples()) {
        for (double v : s.features) out << detail::format_double(v) << ',';
        out << s.label << ',' << s.group << '\n';
    }
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_csv(ds, out);
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const Dataset& ds) {
    const std::size_t d = ds.dim();
    Standardizer st;
    st.active.assign(d, true);
    if (!ds.schema().empty())
        for (std::size_t j = 0; j < d; ++j) st.active[j] = ds.schema()[j].kind == ColumnKind::Numeric;
    st.mean.assign(d, 0.0);
    st.scale.assign(d, 1.0);
    const double n = static_cast<double>(ds.size());
    for (std::size_t j = 0; j < d; ++j) {
        if (!st.active[j]) continue;
        double sum = 0.0;
        for (const auto& s : ds.samples()) sum += s.features[j];
        const double mu = sum / n;
        double ss = 0.0;
        for (const auto& s : ds.samples()) ss += (s.features[j] - mu) * (s.features[j] - mu);
        const double sd = std::sqrt(ss / n);
        st.mean[j] = mu;
        // Relative threshold: constant columns can leave rounding residue.
        st.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? 1.0 / sd : 0.0;
    }
    return st;
}

Vector Standardizer::transform(std::span<const double> x) const {
    if (x.size() != mean.size()) throw DimensionError("standardizer dimension mismatch");
    Vector out(x.begin(), x.end());
    for (std::size_t j = 0; j < out.size(); ++j)
        if (active[j]) out[j] = (out[j] - mean[j]) * scale[j];
    return out;
}

Dataset Standardizer::transform(const Dataset& ds) const {
    std::vector<Vector> feats;
    feats.reserve(ds.size());
    for (const auto& s : ds.samples()) feats.push_back(transform(s.features));
    return ds.with_features(std::move(feats), ds.schema());
}

// ---------------------------------------------------------------------------

namespace {

void check_generator(std::size_t n, const GeneratorParams& p) {
    if (n < 4) throw ParameterError("generators need n >= 4");
    if (!(p.stddev > 0.0) || !std::isfinite(p.stddev)) throw ParameterError("blob std must be positive");
}

std::vector<ColumnDescriptor> planar_schema() {
    return {{"f0", ColumnKind::Numeric, "f0"}, {"f1", ColumnKind::Numeric, "f1"}};
}

}  // namespace

Dataset gen_xor(std::size_t n, std::uint64_t seed, const GeneratorParams& params) {
    check_generator(n, params);
    auto rng = detail::make_rng(seed, detail::kGenerator);
    std::normal_distribution<double> noise(0.0, params.stddev);
    std::vector<Sample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Blobs are dealt round-robin so every blob holds n/4 (+-1) samples.
        const bool right = (i & 1U) != 0;
        const bool top = (i & 2U) != 0;
        const double cx = right ? params.center : -params.center;
        const double cy = top ? params.center : -params.center;
        const double x = cx + noise(rng);
        const double y = cy + noise(rng);
        samples[i].features = {x, y};
        samples[i].label = (right != top) ? 1 : 0;
        samples[i].group = ((x + params.shift > 0.0) != (y > 0.0)) ? 1 : 0;
    }
    return Dataset(std::move(samples), 2, 2, 2, planar_schema());
}

Dataset gen_local(std::size_t n, std::uint64_t seed, const GeneratorParams& params) {
    check_generator(n, params);
    auto rng = detail::make_rng(seed, detail::kGenerator);
    std::normal_distribution<double> noise(0.0, params.stddev);
    std::bernoulli_distribution coin(0.5);
    std::vector<Sample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool region_b = (i & 1U) != 0;
        const std::size_t blob = (i >> 1) & 1U;
        const double cx = region_b ? params.region_offset : -params.region_offset;
        const double cy = blob ? params.center : -params.center;
        samples[i].features = {cx + noise(rng), cy + noise(rng)};
        samples[i].label = blob;
        samples[i].group = region_b ? static_cast<std::size_t>(coin(rng)) : blob;
    }
    return Dataset(std::move(samples), 2, 2, 2, planar_schema());
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldSplit::fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignments) ++sizes[a];
    return sizes;
}

FoldSplit kfold(const Dataset& ds, std::size_t k, std::uint64_t seed, bool stratify) {
    const std::size_t n = ds.size();
    if (k < 2) throw ParameterError("k-fold needs k >= 2");
    if (k > n) throw ParameterError("k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    auto rng = detail::make_rng(seed, detail::kFolds);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    if (stratify) {
        const std::size_t g = ds.num_groups();
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ds[a].label * g + ds[a].group < ds[b].label * g + ds[b].group;
        });
    }
    FoldSplit split;
    split.k = k;
    split.seed = seed;
    split.assignments.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) split.assignments[order[pos]] = pos % k;
    return split;
}

}  // namespace fairglvq
