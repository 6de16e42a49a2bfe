#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "fairglvq/data.hpp"

namespace fairglvq {

/// Confusion counts split by protected group: counts[group][true][pred].
/// Binary labels and binary groups only.
struct GroupCounts {
    std::array<std::array<std::array<std::size_t, 2>, 2>, 2> counts{};

    static GroupCounts tally(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                             std::span<const std::size_t> groups);
    std::size_t total() const;
};

double accuracy(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred);

/// |P(pred = fav | s = 0) - P(pred = fav | s = 1)|. Throws
/// UndefinedMetricError if a group is absent.
double statistical_parity_diff(std::span<const std::size_t> y_pred, std::span<const std::size_t> groups,
                               std::size_t favorable);

/// Same rate difference restricted to samples whose true label is favorable.
double equal_opportunity_diff(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                              std::span<const std::size_t> groups, std::size_t favorable);

struct MetricValues {
    double accuracy = 0.0;
    double sp_diff = 0.0;
    double eo_diff = 0.0;

    bool operator==(const MetricValues&) const = default;
};

/// All three metrics from one set of counts.
MetricValues evaluate_counts(const GroupCounts& counts, std::size_t favorable);

template <typename F>
concept Classifier = requires(const F& f, std::span<const double> x) {
    { f(x) } -> std::convertible_to<std::size_t>;
};

std::vector<std::size_t> predict_all(const Classifier auto& clf, const Dataset& test) {
    std::vector<std::size_t> out;
    out.reserve(test.size());
    for (const auto& s : test.samples()) out.push_back(static_cast<std::size_t>(clf(std::span<const double>(s.features))));
    return out;
}

MetricValues evaluate_predictions(const Dataset& test, std::span<const std::size_t> y_pred, std::size_t favorable);

MetricValues evaluate(const Classifier auto& clf, const Dataset& test, std::size_t favorable) {
    const auto pred = predict_all(clf, test);
    return evaluate_predictions(test, pred, favorable);
}

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1); 0 for one fold
};

MetricSummary summarize(std::span<const double> values);

/// Per-fold metric values with their aggregates.
struct EvaluationReport {
    std::vector<MetricValues> folds;

    MetricSummary accuracy() const;
    MetricSummary sp_diff() const;
    MetricSummary eo_diff() const;
};

}  // namespace fairglvq
