// Command-line front end: generate synthetic data, run cross-validated
// experiments and regularization sweeps, evaluate saved predictions.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fairglvq/data.hpp"
#include "fairglvq/error.hpp"
#include "fairglvq/experiment.hpp"
#include "fairglvq/metrics.hpp"
#include "json.hpp"

namespace {

using namespace fairglvq;

int report_errors(const ResultTable& table) {
    const auto errors = table.errors();
    for (const auto& e : errors) std::cerr << "error: " << e << '\n';
    return errors.empty() ? 0 : 1;
}

void write_table(const ResultTable& table, const std::string& out, const std::string& format) {
    const auto fmt = parse_output_format(format);
    if (out.empty() || out == "-")
        emit(table, fmt, std::cout);
    else
        emit(table, fmt, out);
}

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    auto cfg = load_experiment_config(path);
    if (seed) {
        cfg.seed = *seed;
        for (auto& m : cfg.methods) m.train.seed = *seed;
    }
    return cfg;
}

int run_generate(const std::string& config, const std::string& dataset, std::size_t n,
                 std::optional<std::uint64_t> seed, const std::string& out) {
    DatasetSource src;
    if (!config.empty()) {
        src = load_experiment_config(config).dataset;
    } else {
        src.generator = dataset;
        src.n = n;
    }
    if (src.generator.empty()) throw ParameterError("generate needs a synthetic dataset (xor or local)");
    if (seed) src.seed = *seed;
    const auto ds = load_dataset(src);
    if (out.empty() || out == "-")
        write_csv(ds, std::cout);
    else
        write_csv(ds, out);
    return 0;
}

int run_eval(const std::string& input, std::size_t favorable, const std::string& out, const std::string& format) {
    const auto table = read_csv(input);
    auto col = [&](const char* name) {
        auto c = table.column(name);
        if (c == CsvTable::npos) throw SchemaError(std::string("predictions file lacks column '") + name + "'");
        return c;
    };
    const auto yt = col("y_true"), yp = col("y_pred"), sc = col("protected");
    std::vector<std::size_t> y_true, y_pred, groups;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            y_true.push_back(std::stoul(table.rows[r][yt]));
            y_pred.push_back(std::stoul(table.rows[r][yp]));
            groups.push_back(std::stoul(table.rows[r][sc]));
        } catch (const std::logic_error&) {
            throw ParseError("non-integer label or group", r);
        }
    }
    const auto m = evaluate_counts(GroupCounts::tally(y_true, y_pred, groups), favorable);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.empty() && out != "-") {
        file.open(out);
        if (!file) throw IoError("cannot write " + out);
        os = &file;
    }
    if (parse_output_format(format) == OutputFormat::Json)
        *os << nlohmann::json{{"n", y_true.size()}, {"acc", m.accuracy}, {"sp", m.sp_diff}, {"eo", m.eo_diff}}.dump(2)
            << '\n';
    else
        *os << "n,acc,sp,eo\n" << y_true.size() << ',' << m.accuracy << ',' << m.sp_diff << ',' << m.eo_diff << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FairGLVQ experiments: fairness-regularized prototype classifiers and baselines"};
    app.require_subcommand(1);

    std::string config, out, format = "csv", dataset = "xor", input, folds_out;
    std::optional<std::uint64_t> seed;
    std::size_t n = 4000;
    std::size_t favorable = 1;

    auto* gen = app.add_subcommand("generate", "write a synthetic dataset as CSV (f0,f1,label,protected)");
    gen->add_option("--config", config, "experiment config whose dataset section is used");
    gen->add_option("--dataset", dataset, "xor or local (without --config)")->check(CLI::IsMember({"xor", "local"}));
    gen->add_option("--n", n, "sample count (without --config)");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out, "output path (default stdout)");

    auto* run = app.add_subcommand("run", "k-fold cross-validation of every configured method");
    auto* swp = app.add_subcommand("sweep", "k-fold cross-validation over each method's sweep values");
    for (auto* sub : {run, swp}) {
        sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output path (default stdout)");
        sub->add_option("--seed", seed, "override fold and training seeds");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--folds-out", folds_out, "also write per-fold metrics (CSV) here");
    }

    auto* ev = app.add_subcommand("eval", "metrics for saved predictions (columns y_true,y_pred,protected)");
    ev->add_option("--input", input, "predictions CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--favorable", favorable, "favorable class id");
    ev->add_option("--out", out, "output path (default stdout)");
    ev->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(config, dataset, n, seed, out);
        if (ev->parsed()) return run_eval(input, favorable, out, format);
        const auto cfg = load_config(config, seed);
        const auto table = run->parsed() ? run_experiment(cfg) : sweep(cfg);
        write_table(table, out, format);
        if (!folds_out.empty()) emit_folds(table, folds_out);
        return report_errors(table);
    } catch (const fairglvq::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
