#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairglvq/data.hpp"

namespace fairglvq {

struct Prototype {
    Vector w;
    std::size_t class_label = 0;
    std::size_t pseudo_class = 0;  // majority protected group of the receptive field
};

/// A set of labelled prototypes classified by winner-takes-all.
///
/// Requires P >= 2, a common finite dimension and every class id from 0 up
/// to the largest label represented by at least one prototype. `beta` is the
/// swish steepness used by the cost functions.
class PrototypeModel {
public:
    explicit PrototypeModel(std::vector<Prototype> prototypes, double beta = 1.0);

    const std::vector<Prototype>& prototypes() const noexcept { return prototypes_; }
    const Prototype& operator[](std::size_t j) const { return prototypes_[j]; }
    std::size_t size() const noexcept { return prototypes_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    double beta() const noexcept { return beta_; }

    // Mutation hooks for the trainers. Labels are fixed; positions and
    // pseudo-classes move.
    Vector& position(std::size_t j) { return prototypes_.at(j).w; }
    void set_pseudo_class(std::size_t j, std::size_t s) { prototypes_.at(j).pseudo_class = s; }

    std::vector<std::size_t> pseudo_classes() const;

private:
    std::vector<Prototype> prototypes_;
    std::size_t dim_ = 0;
    std::size_t num_classes_ = 0;
    double beta_ = 1.0;
};

/// Squared Euclidean distance. Throws DimensionError on length mismatch.
double sq_dist(std::span<const double> x, std::span<const double> w);

/// argmin_j sq_dist(x, w_j); the lowest index wins ties.
std::size_t nearest_index(const PrototypeModel& model, std::span<const double> x);

/// nearest_index for every sample, using a contiguous copy of the prototypes.
std::vector<std::size_t> nearest_indices(const PrototypeModel& model, std::span<const Sample> samples);

std::size_t classify(const PrototypeModel& model, std::span<const double> x);

enum class MarginMode { Class, Pseudo };

/// Distances to the closest prototype agreeing (plus) and disagreeing
/// (minus) with the target, by class label or by pseudo-class.
struct MarginPair {
    double d_plus = 0.0;
    double d_minus = 0.0;
    std::optional<std::size_t> idx_plus;
    std::optional<std::size_t> idx_minus;
    bool simulated = false;
    double alpha = 0.0;  // set when simulated
};

/// In pseudo mode a missing side is simulated: d_minus := d_plus / alpha, or
/// d_plus := alpha * d_minus. In class mode a missing side is a ModelError.
MarginPair margin_pair(const PrototypeModel& model, std::span<const double> x, std::size_t target,
                       MarginMode mode, double alpha = 2.0);

/// (d+ - d-) / (d+ + d-), or 0 when both distances vanish. A simulated pair
/// yields simulated_margin(alpha) exactly.
double rel_margin(const MarginPair& p);
double rel_margin(double d_plus, double d_minus);

/// (alpha - 1) / (alpha + 1): the margin of any pair with one side simulated.
double simulated_margin(double alpha);

/// x * sigmoid(beta * x)
double swish(double x, double beta = 1.0);
double swish_derivative(double x, double beta = 1.0);

/// Sum over samples of swish(mu_class).
double glvq_cost(const PrototypeModel& model, std::span<const Sample> samples);
double glvq_cost(const PrototypeModel& model, const Dataset& ds);

/// Sum over samples of swish(mu_class) - C * swish(mu_fair), with the pseudo
/// margins taken against each sample's protected group.
double fair_cost(const PrototypeModel& model, std::span<const Sample> samples, double C, double alpha);
double fair_cost(const PrototypeModel& model, const Dataset& ds, double C, double alpha);

/// JSON document {"dim", "beta", "prototypes": [{"w", "class", "pseudo"}]}.
/// Doubles are written in shortest round-trip form, so parse(dump(m)) == m.
std::string model_to_json(const PrototypeModel& model);
PrototypeModel model_from_json(std::string_view text);

}  // namespace fairglvq
