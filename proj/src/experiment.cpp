#include "fairglvq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fairglvq/baselines.hpp"
#include "fairglvq/error.hpp"
#include "fairglvq/model.hpp"
#include "format.hpp"
#include "json.hpp"

namespace fairglvq {

using nlohmann::json;

Dataset load_dataset(const DatasetSource& src) {
    if (src.generator == "xor") return gen_xor(src.n, src.seed, src.params);
    if (src.generator == "local") return gen_local(src.n, src.seed, src.params);
    if (!src.generator.empty()) throw ParameterError("unknown generator '" + src.generator + "'");
    if (src.csv_path.empty()) throw ParameterError("dataset needs a generator or a csv path");
    return load_csv(src.csv_path, src.preprocess);
}

std::string to_string(MethodKind kind) {
    switch (kind) {
        case MethodKind::FairGlvq: return "fairglvq";
        case MethodKind::Inp: return "inp";
        case MethodKind::Glvq: return "glvq";
        case MethodKind::Constant: return "constant";
    }
    return "unknown";
}

MethodKind parse_method_kind(std::string_view name) {
    if (name == "fairglvq") return MethodKind::FairGlvq;
    if (name == "inp") return MethodKind::Inp;
    if (name == "glvq") return MethodKind::Glvq;
    if (name == "constant") return MethodKind::Constant;
    throw ParameterError("unknown method '" + std::string(name) + "'");
}

double MethodSpec::regularization() const {
    switch (kind) {
        case MethodKind::FairGlvq: return train.C;
        case MethodKind::Inp: return static_cast<double>(inp_iterations);
        default: return 0.0;
    }
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw ParameterError("experiment lists no methods");
    if (folds < 2) throw ParameterError("need at least two folds");
    for (const auto& m : methods) {
        if (m.kind == MethodKind::Constant) continue;
        fairglvq::validate(m.train);
    }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

RowFilter::Op parse_op(const std::string& op) {
    if (op == "==" || op == "eq") return RowFilter::Op::Eq;
    if (op == "!=" || op == "ne") return RowFilter::Op::Ne;
    if (op == "<" || op == "lt") return RowFilter::Op::Lt;
    if (op == "<=" || op == "le") return RowFilter::Op::Le;
    if (op == ">" || op == "gt") return RowFilter::Op::Gt;
    if (op == ">=" || op == "ge") return RowFilter::Op::Ge;
    throw ParameterError("unknown filter operator '" + op + "'");
}

void read_train(const json& j, TrainConfig& t) {
    t.epochs = j.value("epochs", t.epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.learning_rate = j.value("learning_rate", t.learning_rate);
    t.C = j.value("C", t.C);
    t.alpha = j.value("alpha", t.alpha);
    t.prototypes_per_class = j.value("prototypes_per_class", t.prototypes_per_class);
    t.init_perturbation = j.value("init_perturbation", t.init_perturbation);
    t.seed = j.value("seed", t.seed);
    t.beta = j.value("beta", t.beta);
    if (j.contains("update")) {
        const auto u = j.at("update").get<std::string>();
        if (u == "mean")
            t.update_scale = UpdateScale::Mean;
        else if (u == "sum")
            t.update_scale = UpdateScale::Sum;
        else
            throw ParameterError("train.update must be 'mean' or 'sum', got '" + u + "'");
    }
}

PreprocessSpec read_preprocess(const json& j) {
    PreprocessSpec p;
    p.label_column = j.at("label").get<std::string>();
    p.protected_column = j.at("protected").get<std::string>();
    p.standardize = j.value("standardize", p.standardize);
    p.one_hot = j.value("one_hot", p.one_hot);
    p.keep_protected_as_feature = j.value("keep_protected_as_feature", p.keep_protected_as_feature);
    p.favorable_label = j.value("favorable_label", p.favorable_label);
    p.missing_marker = j.value("missing_marker", p.missing_marker);
    p.feature_columns = j.value("features", p.feature_columns);
    p.categorical_columns = j.value("categorical", p.categorical_columns);
    p.positive_labels = j.value("positive_labels", p.positive_labels);
    p.protected_top_groups = j.value("protected_top_groups", p.protected_top_groups);
    if (j.contains("filters"))
        for (const auto& f : j["filters"])
            p.filters.push_back({f.at("column").get<std::string>(), parse_op(f.at("op").get<std::string>()),
                                 f.at("value").is_string() ? f["value"].get<std::string>() : f["value"].dump()});
    return p;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::string& base_dir) {
    ExperimentConfig cfg;
    try {
        const json doc = json::parse(json_text);
        cfg.folds = doc.value("folds", cfg.folds);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.stratify = doc.value("stratify", cfg.stratify);
        cfg.standardize = doc.value("standardize", cfg.standardize);
        if (doc.contains("favorable_label")) cfg.favorable_label = doc["favorable_label"].get<std::size_t>();

        const json& ds = doc.at("dataset");
        auto& src = cfg.dataset;
        src.name = ds.value("name", std::string{});
        src.generator = ds.value("generator", std::string{});
        src.n = ds.value("n", src.n);
        src.seed = ds.value("seed", src.seed);
        if (ds.contains("params")) {
            const json& p = ds["params"];
            src.params.stddev = p.value("stddev", src.params.stddev);
            src.params.center = p.value("center", src.params.center);
            src.params.shift = p.value("shift", src.params.shift);
            src.params.region_offset = p.value("region_offset", src.params.region_offset);
        }
        if (ds.contains("csv")) {
            std::filesystem::path path = ds["csv"].get<std::string>();
            if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
            src.csv_path = path.lexically_normal().string();
            src.preprocess = read_preprocess(ds.at("preprocess"));
        }
        if (src.name.empty()) src.name = src.generator.empty() ? "csv" : src.generator;

        TrainConfig defaults;
        defaults.seed = cfg.seed;
        if (doc.contains("train")) read_train(doc["train"], defaults);
        for (const auto& m : doc.at("methods")) {
            MethodSpec spec;
            spec.kind = parse_method_kind(m.at("method").get<std::string>());
            spec.train = defaults;
            if (m.contains("train")) read_train(m["train"], spec.train);
            if (m.contains("C")) spec.train.C = m["C"].get<double>();
            spec.inp_iterations = m.value("iterations", spec.inp_iterations);
            spec.sweep = m.value("sweep", spec.sweep);
            if (spec.kind != MethodKind::FairGlvq) spec.train.C = 0.0;
            cfg.methods.push_back(std::move(spec));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what(), 0);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Fold evaluation

std::vector<std::string> ResultTable::errors() const {
    std::vector<std::string> out;
    for (const auto& r : rows)
        if (!r.error.empty())
            out.push_back(r.method + " (reg " + detail::format_double(r.reg) + "): " + r.error);
    return out;
}

const ResultRow* ResultTable::find(std::string_view method, double reg) const {
    for (const auto& r : rows)
        if (r.method == method && r.reg == reg) return &r;
    return nullptr;
}

namespace {

struct PreparedFold {
    Dataset train;
    Dataset test;
    json fitted;
};

PreparedFold prepare_fold(const Dataset& train, const Dataset& test, bool standardize) {
    if (!standardize) return {train, test, json::object()};
    const auto st = Standardizer::fit(train);
    json fitted;
    fitted["standardizer"] = {{"mean", st.mean}, {"scale", st.scale}};
    return {st.transform(train), st.transform(test), fitted};
}

FoldOutcome evaluate_method(const PreparedFold& fold, const MethodSpec& method, double reg, std::size_t favorable,
                            const ProjectionStack* inp_full) {
    json fitted = fold.fitted;
    FoldOutcome out;
    auto finish_model = [&](const PrototypeModel& model, const Dataset& test) {
        out.metrics = evaluate([&](std::span<const double> x) { return classify(model, x); }, test, favorable);
        fitted["model"] = json::parse(model_to_json(model));
    };
    switch (method.kind) {
        case MethodKind::Constant: {
            const auto clf = constant_classifier(fold.train);
            out.metrics = evaluate(clf, fold.test, favorable);
            fitted["constant"] = clf.label;
            break;
        }
        case MethodKind::Glvq:
            finish_model(train_glvq(fold.train, method.train).model, fold.test);
            break;
        case MethodKind::FairGlvq: {
            TrainConfig tc = method.train;
            tc.C = reg;
            finish_model(train_fairglvq(fold.train, tc).model, fold.test);
            break;
        }
        case MethodKind::Inp: {
            if (reg < 0.0 || reg != std::floor(reg)) throw ParameterError("INP iterations must be a whole number");
            const auto iterations = static_cast<std::size_t>(reg);
            const ProjectionStack stack =
                (inp_full && iterations <= inp_full->directions().size()) ? inp_full->prefix(iterations)
                                                                          : fit_inp(fold.train, iterations);
            fitted["projection"] = json::parse(projection_to_json(stack));
            finish_model(train_glvq(apply_inp(stack, fold.train), method.train).model,
                         apply_inp(stack, fold.test));
            break;
        }
    }
    out.fitted = fitted.dump();
    return out;
}

struct Job {
    std::size_t method;
    double reg;
};

ResultTable cross_validate(const ExperimentConfig& cfg, const std::vector<Job>& jobs) {
    cfg.validate();
    const Dataset ds = load_dataset(cfg.dataset);
    const std::size_t favorable = cfg.favorable_label.value_or(cfg.dataset.preprocess.favorable_label);
    const FoldSplit split = kfold(ds, cfg.folds, cfg.seed, cfg.stratify);

    ResultTable table;
    for (const auto& job : jobs) {
        ResultRow row;
        row.dataset = cfg.dataset.name;
        row.method = to_string(cfg.methods[job.method].kind);
        row.reg = job.reg;
        table.rows.push_back(std::move(row));
    }

    for (std::size_t f = 0; f < cfg.folds; ++f) {
        const auto tr = split.train_indices(f);
        const auto te = split.test_indices(f);
        std::optional<PreparedFold> fold;
        try {
            fold = prepare_fold(ds.subset(tr), ds.subset(te), cfg.standardize);
        } catch (const std::exception& e) {
            for (auto& row : table.rows)
                if (row.error.empty()) row.error = "fold " + std::to_string(f) + ": " + e.what();
            continue;
        }
        // INP stacks are nested, so fit the deepest one once per method and fold.
        std::map<std::size_t, std::optional<ProjectionStack>> inp_cache;
        for (std::size_t r = 0; r < jobs.size(); ++r) {
            auto& row = table.rows[r];
            if (!row.error.empty()) continue;
            MethodSpec method = cfg.methods[jobs[r].method];
            method.train.seed += f;
            try {
                const ProjectionStack* full = nullptr;
                if (method.kind == MethodKind::Inp) {
                    auto& slot = inp_cache[jobs[r].method];
                    if (!slot) {
                        double deepest = 0.0;
                        for (const auto& j : jobs)
                            if (j.method == jobs[r].method) deepest = std::max(deepest, j.reg);
                        const auto depth = std::min(static_cast<std::size_t>(deepest), fold->train.dim());
                        slot = fit_inp(fold->train, depth);
                    }
                    full = &*slot;
                }
                row.report.folds.push_back(evaluate_method(*fold, method, jobs[r].reg, favorable, full).metrics);
            } catch (const std::exception& e) {
                row.error = "fold " + std::to_string(f) + ": " + e.what();
            }
        }
    }

    const double nan = std::nan("");
    for (auto& row : table.rows) {
        if (!row.error.empty()) {
            row.acc = row.sp = row.eo = {nan, nan};
            continue;
        }
        row.acc = row.report.accuracy();
        row.sp = row.report.sp_diff();
        row.eo = row.report.eo_diff();
    }
    return table;
}

}  // namespace

FoldOutcome fit_and_evaluate(const Dataset& train, const Dataset& test, const MethodSpec& method, double reg,
                             std::size_t favorable, bool standardize) {
    return evaluate_method(prepare_fold(train, test, standardize), method, reg, favorable, nullptr);
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) jobs.push_back({m, cfg.methods[m].regularization()});
    return cross_validate(cfg, jobs);
}

ResultTable sweep(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const auto& method = cfg.methods[m];
        const bool sweepable = method.kind == MethodKind::FairGlvq || method.kind == MethodKind::Inp;
        if (!sweepable || method.sweep.empty()) {
            jobs.push_back({m, method.regularization()});
            continue;
        }
        auto values = method.sweep;
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (double v : values) jobs.push_back({m, v});
    }
    return cross_validate(cfg, jobs);
}

// ---------------------------------------------------------------------------
// Output

OutputFormat parse_output_format(std::string_view name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    throw ParameterError("unknown output format '" + std::string(name) + "'");
}

void emit(const ResultTable& table, OutputFormat format, std::ostream& out) {
    using detail::format_double;
    if (format == OutputFormat::Csv) {
        out << "dataset,method,reg,acc_mean,acc_std,sp_mean,sp_std,eo_mean,eo_std\n";
        for (const auto& r : table.rows)
            out << r.dataset << ',' << r.method << ',' << format_double(r.reg) << ',' << format_double(r.acc.mean)
                << ',' << format_double(r.acc.std) << ',' << format_double(r.sp.mean) << ','
                << format_double(r.sp.std) << ',' << format_double(r.eo.mean) << ',' << format_double(r.eo.std)
                << '\n';
        return;
    }
    json rows = json::array();
    for (const auto& r : table.rows) {
        json folds = json::array();
        for (std::size_t f = 0; f < r.report.folds.size(); ++f) {
            const auto& m = r.report.folds[f];
            folds.push_back({{"fold", f}, {"acc", m.accuracy}, {"sp", m.sp_diff}, {"eo", m.eo_diff}});
        }
        json row = {{"dataset", r.dataset}, {"method", r.method},   {"reg", r.reg},
                    {"acc_mean", r.acc.mean}, {"acc_std", r.acc.std}, {"sp_mean", r.sp.mean},
                    {"sp_std", r.sp.std},   {"eo_mean", r.eo.mean}, {"eo_std", r.eo.std},
                    {"folds", folds}};
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(std::move(row));
    }
    out << json{{"rows", rows}}.dump(2) << '\n';
}

void emit_folds(const ResultTable& table, std::ostream& out) {
    using detail::format_double;
    out << "dataset,method,reg,fold,acc,sp,eo\n";
    for (const auto& r : table.rows)
        for (std::size_t f = 0; f < r.report.folds.size(); ++f) {
            const auto& m = r.report.folds[f];
            out << r.dataset << ',' << r.method << ',' << format_double(r.reg) << ',' << f << ','
                << format_double(m.accuracy) << ',' << format_double(m.sp_diff) << ',' << format_double(m.eo_diff)
                << '\n';
        }
}

void emit_folds(const ResultTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    emit_folds(table, out);
    if (!out) throw IoError("failed writing " + path);
}

void emit(const ResultTable& table, OutputFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    emit(table, format, out);
    if (!out) throw IoError("failed writing " + path);
}

}  // namespace fairglvq
