#include "fairglvq/metrics.hpp"

#include <cmath>

#include "fairglvq/error.hpp"

namespace fairglvq {

namespace {

void check_binary(std::size_t v, const char* what) {
    if (v > 1) throw UnsupportedError(std::string(what) + " must be binary (0/1), got " + std::to_string(v));
}

}  // namespace

GroupCounts GroupCounts::tally(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                               std::span<const std::size_t> groups) {
    if (y_true.size() != y_pred.size() || y_true.size() != groups.size())
        throw DimensionError("metric inputs differ in length");
    GroupCounts gc;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        check_binary(y_true[i], "true label");
        check_binary(y_pred[i], "predicted label");
        check_binary(groups[i], "protected group");
        ++gc.counts[groups[i]][y_true[i]][y_pred[i]];
    }
    return gc;
}

std::size_t GroupCounts::total() const {
    std::size_t t = 0;
    for (const auto& g : counts)
        for (const auto& y : g)
            for (auto c : y) t += c;
    return t;
}

double accuracy(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred) {
    if (y_true.size() != y_pred.size()) throw DimensionError("accuracy inputs differ in length");
    if (y_true.empty()) throw UndefinedMetricError("accuracy of an empty prediction set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

namespace {

double rate(std::size_t hits, std::size_t total, const char* what) {
    if (total == 0) throw UndefinedMetricError(what);
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

MetricValues evaluate_counts(const GroupCounts& gc, std::size_t favorable) {
    check_binary(favorable, "favorable label");
    const std::size_t n = gc.total();
    if (n == 0) throw UndefinedMetricError("no samples to evaluate");
    const auto& c = gc.counts;
    MetricValues m;
    std::size_t hits = 0;
    for (std::size_t g = 0; g < 2; ++g) hits += c[g][0][0] + c[g][1][1];
    m.accuracy = static_cast<double>(hits) / static_cast<double>(n);

    std::array<double, 2> positive_rate{}, true_positive_rate{};
    for (std::size_t g = 0; g < 2; ++g) {
        const std::size_t size = c[g][0][0] + c[g][0][1] + c[g][1][0] + c[g][1][1];
        positive_rate[g] = rate(c[g][0][favorable] + c[g][1][favorable], size,
                                "statistical parity: a protected group has no samples");
        const std::size_t fav_true = c[g][favorable][0] + c[g][favorable][1];
        true_positive_rate[g] = rate(c[g][favorable][favorable], fav_true,
                                     "equal opportunity: a protected group has no favorable-label samples");
    }
    m.sp_diff = std::abs(positive_rate[0] - positive_rate[1]);
    m.eo_diff = std::abs(true_positive_rate[0] - true_positive_rate[1]);
    return m;
}

double statistical_parity_diff(std::span<const std::size_t> y_pred, std::span<const std::size_t> groups,
                               std::size_t favorable) {
    if (y_pred.size() != groups.size()) throw DimensionError("metric inputs differ in length");
    std::array<std::size_t, 2> size{}, fav{};
    for (std::size_t i = 0; i < y_pred.size(); ++i) {
        check_binary(groups[i], "protected group");
        ++size[groups[i]];
        fav[groups[i]] += y_pred[i] == favorable ? 1 : 0;
    }
    const char* msg = "statistical parity: a protected group has no samples";
    return std::abs(rate(fav[0], size[0], msg) - rate(fav[1], size[1], msg));
}

double equal_opportunity_diff(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                              std::span<const std::size_t> groups, std::size_t favorable) {
    if (y_true.size() != y_pred.size() || y_true.size() != groups.size())
        throw DimensionError("metric inputs differ in length");
    std::array<std::size_t, 2> size{}, fav{};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        check_binary(groups[i], "protected group");
        if (y_true[i] != favorable) continue;
        ++size[groups[i]];
        fav[groups[i]] += y_pred[i] == favorable ? 1 : 0;
    }
    const char* msg = "equal opportunity: a protected group has no favorable-label samples";
    return std::abs(rate(fav[0], size[0], msg) - rate(fav[1], size[1], msg));
}

MetricValues evaluate_predictions(const Dataset& test, std::span<const std::size_t> y_pred, std::size_t favorable) {
    const auto y = test.labels();
    const auto s = test.groups();
    return evaluate_counts(GroupCounts::tally(y, y_pred, s), favorable);
}

MetricSummary summarize(std::span<const double> values) {
    MetricSummary out;
    if (values.empty()) return {std::nan(""), std::nan("")};
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

namespace {

template <typename Get>
MetricSummary summarize_field(const std::vector<MetricValues>& folds, Get get) {
    std::vector<double> v;
    v.reserve(folds.size());
    for (const auto& f : folds) v.push_back(get(f));
    return summarize(v);
}

}  // namespace

MetricSummary EvaluationReport::accuracy() const {
    return summarize_field(folds, [](const MetricValues& m) { return m.accuracy; });
}
MetricSummary EvaluationReport::sp_diff() const {
    return summarize_field(folds, [](const MetricValues& m) { return m.sp_diff; });
}
MetricSummary EvaluationReport::eo_diff() const {
    return summarize_field(folds, [](const MetricValues& m) { return m.eo_diff; });
}

}  // namespace fairglvq
