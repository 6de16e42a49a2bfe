#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairglvq/data.hpp"
#include "fairglvq/metrics.hpp"
#include "fairglvq/train.hpp"

namespace fairglvq {

struct DatasetSource {
    std::string name;
    std::string generator;  // "xor" | "local"; empty means CSV
    std::size_t n = 4000;
    std::uint64_t seed = 0;
    GeneratorParams params;
    std::string csv_path;
    PreprocessSpec preprocess;
};

Dataset load_dataset(const DatasetSource& src);

enum class MethodKind { FairGlvq, Inp, Glvq, Constant };

std::string to_string(MethodKind kind);
MethodKind parse_method_kind(std::string_view name);

struct MethodSpec {
    MethodKind kind = MethodKind::Glvq;
    TrainConfig train;
    std::size_t inp_iterations = 1;
    // FairGLVQ: C values; INP: iteration counts. Used by sweep().
    std::vector<double> sweep;

    // Regularization value reported for a single run: C, iterations, or 0.
    double regularization() const;
};

struct ExperimentConfig {
    DatasetSource dataset;
    std::vector<MethodSpec> methods;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    bool stratify = false;
    // Per-fold standardization of numeric columns, fitted on the train part.
    bool standardize = false;
    std::optional<std::size_t> favorable_label;

    void validate() const;
};

/// Parses the JSON experiment document. Relative CSV paths are resolved
/// against `base_dir` when it is nonempty.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::string& base_dir = {});
ExperimentConfig load_experiment_config(const std::string& path);

struct ResultRow {
    std::string dataset;
    std::string method;
    double reg = 0.0;
    MetricSummary acc, sp, eo;
    EvaluationReport report;
    std::string error;  // nonempty: the row was aborted
};

struct ResultTable {
    std::vector<ResultRow> rows;

    std::vector<std::string> errors() const;
    const ResultRow* find(std::string_view method, double reg) const;
};

/// Outcome of training one method on one train/test split. `fitted` is a
/// JSON summary of everything learned from the train part (standardizer,
/// projection, prototypes) so leakage checks can compare it across test sets.
struct FoldOutcome {
    MetricValues metrics;
    std::string fitted;
};

/// Trains `method` at regularization `reg` (C or INP iterations; ignored
/// otherwise) on `train` and evaluates on `test`. Only `train` feeds any fit.
FoldOutcome fit_and_evaluate(const Dataset& train, const Dataset& test, const MethodSpec& method, double reg,
                             std::size_t favorable, bool standardize);

/// k-fold CV of every method at its configured regularization.
ResultTable run_experiment(const ExperimentConfig& cfg);

/// One row per sweep value (methods with an empty sweep contribute a single
/// row). Rows keep config method order and ascending regularization.
ResultTable sweep(const ExperimentConfig& cfg);

enum class OutputFormat { Csv, Json };

OutputFormat parse_output_format(std::string_view name);

/// CSV columns: dataset,method,reg,acc_mean,acc_std,sp_mean,sp_std,eo_mean,eo_std.
void emit(const ResultTable& table, OutputFormat format, std::ostream& out);
void emit(const ResultTable& table, OutputFormat format, const std::string& path);

/// One CSV line per evaluated fold: dataset,method,reg,fold,acc,sp,eo.
/// Aborted rows keep the folds that finished before the error.
void emit_folds(const ResultTable& table, std::ostream& out);
void emit_folds(const ResultTable& table, const std::string& path);

}  // namespace fairglvq
