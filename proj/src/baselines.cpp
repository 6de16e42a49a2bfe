#include "fairglvq/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "fairglvq/error.hpp"
#include "json.hpp"

namespace fairglvq {

std::size_t LinearProbe::predict(std::span<const double> x) const {
    if (x.size() != weights.size()) throw DimensionError("probe dimension mismatch");
    double z = bias;
    for (std::size_t k = 0; k < x.size(); ++k) z += weights[k] * x[k];
    return z > 0.0 ? 1 : 0;
}

double LinearProbe::accuracy(const Dataset& ds) const {
    std::size_t hits = 0;
    for (const auto& s : ds.samples()) hits += predict(s.features) == s.group ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix feature_matrix(const Dataset& ds) {
    RowMatrix X(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.dim()));
    for (std::size_t i = 0; i < ds.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(ds[i].features.data(), static_cast<Eigen::Index>(ds.dim()));
    return X;
}

LinearProbe fit_probe(const RowMatrix& X, const Eigen::VectorXd& groups) {
    constexpr int kIterations = 500;
    constexpr double kStep = 0.1;
    const double inv_n = 1.0 / static_cast<double>(X.rows());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    double b = 0.0;
    Eigen::VectorXd r(X.rows());
    for (int it = 0; it < kIterations; ++it) {
        const Eigen::VectorXd z = (X * w).array() + b;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double p = z[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
            r[i] = p - groups[i];
        }
        w -= (kStep * inv_n) * (X.transpose() * r);
        b -= kStep * inv_n * r.sum();
    }
    return {Vector(w.data(), w.data() + w.size()), b};
}

Eigen::VectorXd group_vector(const Dataset& ds) {
    if (ds.num_groups() != 2) throw UnsupportedError("linear probes need a binary protected attribute");
    Eigen::VectorXd g(static_cast<Eigen::Index>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) g[static_cast<Eigen::Index>(i)] = static_cast<double>(ds[i].group);
    return g;
}

}  // namespace

LinearProbe fit_probe(const Dataset& ds) {
    const auto groups = group_vector(ds);
    return fit_probe(feature_matrix(ds), groups);
}

// ---------------------------------------------------------------------------

ProjectionStack::ProjectionStack(std::size_t dim) : dim_(dim), composed_(dim * dim, 0.0) {
    for (std::size_t i = 0; i < dim; ++i) composed_[i * dim + i] = 1.0;
}

void ProjectionStack::push(const Vector& u) {
    if (u.size() != dim_) throw DimensionError("projection direction dimension mismatch");
    // (I - u u^T) M = M - u (u^T M)
    Vector utm(dim_, 0.0);
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) utm[c] += u[r] * composed_[r * dim_ + c];
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) composed_[r * dim_ + c] -= u[r] * utm[c];
    directions_.push_back(u);
}

ProjectionStack ProjectionStack::prefix(std::size_t k) const {
    if (k > directions_.size()) throw ParameterError("projection prefix longer than the stack");
    ProjectionStack out(dim_);
    for (std::size_t i = 0; i < k; ++i) out.push(directions_[i]);
    return out;
}

Vector ProjectionStack::apply(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionError("projection dimension mismatch");
    Vector out(dim_, 0.0);
    for (std::size_t r = 0; r < dim_; ++r) {
        const double* row = composed_.data() + r * dim_;
        double s = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

ProjectionStack add_nullspace_iteration(const ProjectionStack& stack, const LinearProbe& probe) {
    double norm = 0.0;
    for (double v : probe.weights) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw DegenerateProbeError("probe weight vector is zero");
    Vector u = probe.weights;
    for (auto& v : u) v /= norm;
    ProjectionStack out = stack;
    out.push(u);
    return out;
}

ProjectionStack fit_inp(const Dataset& ds, std::size_t iterations) {
    if (iterations > ds.dim())
        throw ParameterError("INP iterations " + std::to_string(iterations) + " exceed dimension " +
                             std::to_string(ds.dim()));
    ProjectionStack stack(ds.dim());
    if (iterations == 0) return stack;
    const auto groups = group_vector(ds);
    // Projected data kept in step with the stack: X <- X (I - u u^T).
    RowMatrix X = feature_matrix(ds);
    for (std::size_t it = 0; it < iterations; ++it) {
        LinearProbe probe = fit_probe(X, groups);
        // Weights already lie in the projected subspace up to roundoff; drop the residue.
        probe.weights = stack.apply(probe.weights);
        stack = add_nullspace_iteration(stack, probe);
        const Eigen::Map<const Eigen::VectorXd> u(stack.directions().back().data(), X.cols());
        const Eigen::VectorXd proj = X * u;
        X.noalias() -= proj * u.transpose();
    }
    return stack;
}

Dataset apply_inp(const ProjectionStack& stack, const Dataset& ds) {
    if (stack.dim() != ds.dim()) throw DimensionError("projection and dataset dimensions differ");
    std::vector<Vector> feats;
    feats.reserve(ds.size());
    for (const auto& s : ds.samples()) feats.push_back(stack.apply(s.features));
    return ds.with_features(std::move(feats), ds.schema());
}

std::string projection_to_json(const ProjectionStack& stack) {
    nlohmann::json doc;
    doc["dim"] = stack.dim();
    doc["directions"] = stack.directions();
    doc["composed"] = stack.composed();
    return doc.dump();
}

ProjectionStack projection_from_json(std::string_view text) {
    try {
        auto doc = nlohmann::json::parse(text);
        const auto dim = doc.at("dim").get<std::size_t>();
        ProjectionStack stack(dim);
        for (const auto& u : doc.at("directions")) stack.push(u.get<Vector>());
        // The stored matrix is authoritative; replay only checks consistency.
        const auto composed = doc.at("composed").get<std::vector<double>>();
        if (composed.size() != dim * dim) throw DimensionError("composed matrix has wrong size");
        for (std::size_t i = 0; i < composed.size(); ++i)
            if (std::abs(composed[i] - stack.composed()[i]) > 1e-9)
                throw ParseError("composed matrix disagrees with directions", 0);
        return stack;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("projection document: ") + e.what(), 0);
    }
}

ConstantClassifier constant_classifier(const Dataset& train) {
    std::vector<std::size_t> counts(train.num_classes(), 0);
    for (const auto& s : train.samples()) ++counts[s.label];
    return {static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())};
}

}  // namespace fairglvq
