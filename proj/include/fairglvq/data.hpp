#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fairglvq {

using Vector = std::vector<double>;

/// One observation: features, class label and protected-group id.
struct Sample {
    Vector features;
    std::size_t label = 0;
    std::size_t group = 0;
};

enum class ColumnKind { Numeric, Categorical };

/// Describes one feature column of a Dataset. One-hot expanded columns
/// share the same `source` and are named `source=value`.
struct ColumnDescriptor {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::string source;
};

/// Immutable collection of samples sharing a feature dimension.
///
/// Invariants checked on construction: n >= 1, every sample has `dim`
/// finite features, labels < num_classes, groups < num_groups, and the
/// schema (when given) has one descriptor per feature.
class Dataset {
public:
    Dataset(std::vector<Sample> samples, std::size_t dim, std::size_t num_classes,
            std::size_t num_groups, std::vector<ColumnDescriptor> schema = {});

    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t num_groups() const noexcept { return num_groups_; }
    const std::vector<ColumnDescriptor>& schema() const noexcept { return schema_; }

    // Optional display names for label / group ids (filled by the CSV loader).
    std::vector<std::string> class_names;
    std::vector<std::string> group_names;

    Dataset subset(std::span<const std::size_t> indices) const;

    // Same labels, groups, class/group counts; new feature vectors (which
    // may have a different dimension, e.g. after a projection).
    Dataset with_features(std::vector<Vector> features,
                          std::vector<ColumnDescriptor> schema = {}) const;

    std::vector<std::size_t> labels() const;
    std::vector<std::size_t> groups() const;

private:
    std::vector<Sample> samples_;
    std::size_t dim_;
    std::size_t num_classes_;
    std::size_t num_groups_;
    std::vector<ColumnDescriptor> schema_;
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

/// Raw delimited text: header plus string cells. Quoted fields ("a,b") and
/// doubled quotes inside them are supported; cells are whitespace-trimmed.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // First column with this name, or npos.
    std::size_t column(const std::string& name) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in);

struct RowFilter {
    enum class Op { Eq, Ne, Lt, Le, Gt, Ge };
    std::string column;
    Op op = Op::Eq;
    std::string value;
};

struct PreprocessSpec {
    std::string label_column;
    std::string protected_column;
    bool standardize = true;
    bool one_hot = true;
    bool keep_protected_as_feature = false;
    std::size_t favorable_label = 1;
    std::string missing_marker = "?";

    // Feature columns in order; empty means every column except label and
    // protected.
    std::vector<std::string> feature_columns;
    // Columns forced to categorical even if their values parse as numbers.
    std::vector<std::string> categorical_columns;
    // Nonempty: label becomes 1 for these raw values, 0 otherwise.
    std::vector<std::string> positive_labels;
    // Nonzero: keep only rows whose protected value is among the k most
    // frequent ones.
    std::size_t protected_top_groups = 0;
    std::vector<RowFilter> filters;
};

/// Loads a header-row CSV and turns it into a Dataset.
///
/// Rows failing a filter or holding the missing marker (or an empty cell) in
/// any used column are dropped. Column types are fixed by the first kept
/// row: a cell that parses as a number makes the column numeric, and a later
/// non-numeric cell raises ParseError carrying the file row index.
/// Categorical columns are one-hot encoded (sorted category order) or coded
/// as ordinals. Numeric columns are standardized over the whole file when
/// `spec.standardize`; zero-variance columns become zeros.
Dataset load_csv(const std::string& path, const PreprocessSpec& spec);
Dataset load_csv(const CsvTable& table, const PreprocessSpec& spec);

/// Writes columns f0..f{d-1},label,protected with round-trip precision.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::string& path);

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

/// Per-column affine map fitted on one dataset and applied to others.
/// Only columns whose schema kind is Numeric are touched (all columns when
/// the schema is empty).
struct Standardizer {
    std::vector<bool> active;
    Vector mean;
    Vector scale;  // 0 for zero-variance columns

    static Standardizer fit(const Dataset& ds);
    Vector transform(std::span<const double> x) const;
    Dataset transform(const Dataset& ds) const;
};

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

struct GeneratorParams {
    double stddev = 0.35;       // per-blob isotropic std
    double center = 1.0;        // blob centres at +-center
    double shift = 1.25;        // XOR: displacement of the protected pattern
    double region_offset = 2.0;  // local: regions at first coordinate +-offset
};

/// Four Gaussian blobs at (+-c, +-c). Class is the XOR of the blob's centre
/// signs; the protected value is the XOR of the sample's signs after moving
/// its first coordinate by `shift`.
Dataset gen_xor(std::size_t n, std::uint64_t seed, const GeneratorParams& params = {});

/// Two regions along the first axis, two blobs each along the second axis.
/// Region A (negative side): label = protected = blob id. Region B: label =
/// blob id, protected is an independent fair coin.
Dataset gen_local(std::size_t n, std::uint64_t seed, const GeneratorParams& params = {});

// ---------------------------------------------------------------------------
// k-fold splitting
// ---------------------------------------------------------------------------

struct FoldSplit {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;
    std::uint64_t seed = 0;

    std::vector<std::size_t> train_indices(std::size_t fold) const;
    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> fold_sizes() const;
};

/// Shuffled assignment with fold sizes differing by at most one. With
/// `stratify`, samples are dealt out stratum by stratum (label x group) so
/// every fold sees each cell in near-equal proportion.
FoldSplit kfold(const Dataset& ds, std::size_t k, std::uint64_t seed, bool stratify = false);

}  // namespace fairglvq
