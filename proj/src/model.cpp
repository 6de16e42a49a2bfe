#include "fairglvq/model.hpp"

#include <cmath>
#include <limits>

#include "fairglvq/error.hpp"
#include "json.hpp"
#include "nearest.hpp"

namespace fairglvq {

PrototypeModel::PrototypeModel(std::vector<Prototype> prototypes, double beta)
    : prototypes_(std::move(prototypes)), beta_(beta) {
    if (prototypes_.size() < 2) throw ModelError("a prototype model needs at least two prototypes");
    if (!(beta_ > 0.0) || !std::isfinite(beta_)) throw ParameterError("activation beta must be positive");
    dim_ = prototypes_.front().w.size();
    std::size_t max_label = 0;
    for (const auto& p : prototypes_) {
        if (p.w.size() != dim_) throw DimensionError("prototypes have differing dimensions");
        for (double v : p.w)
            if (!std::isfinite(v)) throw ModelError("non-finite prototype coordinate");
        max_label = std::max(max_label, p.class_label);
    }
    num_classes_ = max_label + 1;
    std::vector<bool> seen(num_classes_, false);
    for (const auto& p : prototypes_) seen[p.class_label] = true;
    for (std::size_t c = 0; c < num_classes_; ++c)
        if (!seen[c]) throw ModelError("class " + std::to_string(c) + " has no prototype");
}

std::vector<std::size_t> PrototypeModel::pseudo_classes() const {
    std::vector<std::size_t> out;
    out.reserve(prototypes_.size());
    for (const auto& p : prototypes_) out.push_back(p.pseudo_class);
    return out;
}

double sq_dist(std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size())
        throw DimensionError("sq_dist: lengths " + std::to_string(x.size()) + " and " + std::to_string(w.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - w[k];
        s += diff * diff;
    }
    return s;
}

namespace detail {

RowMatrix prototype_matrix(const PrototypeModel& model) {
    RowMatrix m(static_cast<Eigen::Index>(model.size()), static_cast<Eigen::Index>(model.dim()));
    for (std::size_t j = 0; j < model.size(); ++j)
        for (std::size_t k = 0; k < model.dim(); ++k)
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = model[j].w[k];
    return m;
}

}  // namespace detail

using detail::prototype_matrix;

std::size_t nearest_index(const PrototypeModel& model, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.size(); ++j) {
        const double d = sq_dist(x, model[j].w);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

std::vector<std::size_t> nearest_indices(const PrototypeModel& model, std::span<const Sample> samples) {
    for (const auto& s : samples)
        if (s.features.size() != model.dim()) throw DimensionError("sample dimension does not match model");
    std::vector<std::size_t> out;
    if (samples.empty()) return out;
    detail::NearestSearch(samples).assign(prototype_matrix(model), out);
    return out;
}

std::size_t classify(const PrototypeModel& model, std::span<const double> x) {
    return model[nearest_index(model, x)].class_label;
}

MarginPair margin_pair(const PrototypeModel& model, std::span<const double> x, std::size_t target,
                       MarginMode mode, double alpha) {
    MarginPair p;
    double best_plus = std::numeric_limits<double>::infinity();
    double best_minus = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.size(); ++j) {
        const std::size_t lbl = mode == MarginMode::Class ? model[j].class_label : model[j].pseudo_class;
        const double d = sq_dist(x, model[j].w);
        if (lbl == target) {
            if (d < best_plus) {
                best_plus = d;
                p.idx_plus = j;
            }
        } else if (d < best_minus) {
            best_minus = d;
            p.idx_minus = j;
        }
    }
    if (p.idx_plus && p.idx_minus) {
        p.d_plus = best_plus;
        p.d_minus = best_minus;
        return p;
    }
    if (mode == MarginMode::Class)
        throw ModelError("class " + std::to_string(target) + " lacks a " +
                         (p.idx_plus ? "competing" : "matching") + " prototype");
    if (!(alpha > 1.0)) throw ParameterError("alpha must exceed 1");
    p.simulated = true;
    p.alpha = alpha;
    if (p.idx_plus) {
        p.d_plus = best_plus;
        p.d_minus = best_plus / alpha;
    } else {
        p.d_minus = best_minus;
        p.d_plus = alpha * best_minus;
    }
    return p;
}

double rel_margin(double d_plus, double d_minus) {
    const double denom = d_plus + d_minus;
    if (denom == 0.0) return 0.0;
    return (d_plus - d_minus) / denom;
}

double simulated_margin(double alpha) { return (alpha - 1.0) / (alpha + 1.0); }

double rel_margin(const MarginPair& p) {
    if (p.simulated && p.d_plus + p.d_minus != 0.0) return simulated_margin(p.alpha);
    return rel_margin(p.d_plus, p.d_minus);
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double swish(double x, double beta) { return x * sigmoid(beta * x); }

double swish_derivative(double x, double beta) {
    const double s = sigmoid(beta * x);
    return s + beta * x * s * (1.0 - s);
}

double glvq_cost(const PrototypeModel& model, std::span<const Sample> samples) {
    double e = 0.0;
    for (const auto& s : samples)
        e += swish(rel_margin(margin_pair(model, s.features, s.label, MarginMode::Class)), model.beta());
    return e;
}

double glvq_cost(const PrototypeModel& model, const Dataset& ds) { return glvq_cost(model, ds.samples()); }

double fair_cost(const PrototypeModel& model, std::span<const Sample> samples, double C, double alpha) {
    double e = 0.0;
    for (const auto& s : samples) {
        const double mu_class = rel_margin(margin_pair(model, s.features, s.label, MarginMode::Class));
        const double mu_fair = rel_margin(margin_pair(model, s.features, s.group, MarginMode::Pseudo, alpha));
        e += swish(mu_class, model.beta()) - C * swish(mu_fair, model.beta());
    }
    return e;
}

double fair_cost(const PrototypeModel& model, const Dataset& ds, double C, double alpha) {
    return fair_cost(model, ds.samples(), C, alpha);
}

std::string model_to_json(const PrototypeModel& model) {
    nlohmann::json doc;
    doc["dim"] = model.dim();
    doc["beta"] = model.beta();
    auto& arr = doc["prototypes"] = nlohmann::json::array();
    for (const auto& p : model.prototypes())
        arr.push_back({{"w", p.w}, {"class", p.class_label}, {"pseudo", p.pseudo_class}});
    return doc.dump();
}

PrototypeModel model_from_json(std::string_view text) {
    try {
        auto doc = nlohmann::json::parse(text);
        std::vector<Prototype> protos;
        for (const auto& p : doc.at("prototypes"))
            protos.push_back({p.at("w").get<Vector>(), p.at("class").get<std::size_t>(),
                              p.at("pseudo").get<std::size_t>()});
        PrototypeModel model(std::move(protos), doc.value("beta", 1.0));
        if (doc.contains("dim") && doc["dim"].get<std::size_t>() != model.dim())
            throw DimensionError("declared dim does not match prototypes");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what(), 0);
    }
}

}  // namespace fairglvq
