#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairglvq/data.hpp"

namespace fairglvq {

/// Linear predictor of the protected attribute: group 1 iff w.x + b > 0.
struct LinearProbe {
    Vector weights;
    double bias = 0.0;

    std::size_t predict(std::span<const double> x) const;
    double accuracy(const Dataset& ds) const;
};

/// Logistic regression of the (binary) protected group on the features,
/// full-batch gradient descent from zero: 500 iterations, step 0.1.
LinearProbe fit_probe(const Dataset& ds);

/// Directions removed so far and their composed d x d projection
/// (row-major). Starts as the identity.
class ProjectionStack {
public:
    explicit ProjectionStack(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Vector>& directions() const noexcept { return directions_; }
    const std::vector<double>& composed() const noexcept { return composed_; }
    double at(std::size_t r, std::size_t c) const { return composed_[r * dim_ + c]; }

    /// Appends unit direction u and sets composed <- (I - u u^T) composed.
    void push(const Vector& u);

    /// The stack after only the first k directions (replays push, so it is
    /// bitwise equal to having stopped after k iterations).
    ProjectionStack prefix(std::size_t k) const;

    Vector apply(std::span<const double> x) const;

private:
    std::size_t dim_;
    std::vector<Vector> directions_;
    std::vector<double> composed_;
};

/// Normalizes the probe's weight vector (bias ignored) and pushes it.
/// Throws DegenerateProbeError for an all-zero weight vector.
ProjectionStack add_nullspace_iteration(const ProjectionStack& stack, const LinearProbe& probe);

/// Iterative null-space projection: `iterations` rounds of fitting a probe
/// on the currently projected data and projecting out its direction.
ProjectionStack fit_inp(const Dataset& ds, std::size_t iterations);

/// x -> composed * x for every sample; labels and groups unchanged.
Dataset apply_inp(const ProjectionStack& stack, const Dataset& ds);

std::string projection_to_json(const ProjectionStack& stack);
ProjectionStack projection_from_json(std::string_view text);

/// Always predicts the majority training class (lowest id on ties).
struct ConstantClassifier {
    std::size_t label = 0;
    std::size_t operator()(std::span<const double>) const noexcept { return label; }
};

ConstantClassifier constant_classifier(const Dataset& train);

}  // namespace fairglvq
