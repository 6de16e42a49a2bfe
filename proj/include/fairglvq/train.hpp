#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "fairglvq/data.hpp"
#include "fairglvq/model.hpp"

namespace fairglvq {

/// How the averaged mini-batch gradients are turned into a step.
/// Mean: w -= lr * (G_class / n_class + G_fair / n_fair).
/// Sum: the same step times the batch size M, so lr acts as a per-sample rate.
enum class UpdateScale { Mean, Sum };

struct TrainConfig {
    std::size_t epochs = 250;       // number of mini-batch steps
    std::size_t batch_size = 250;
    double learning_rate = 0.005;
    double C = 0.0;                 // fairness regularization strength
    double alpha = 2.0;             // missing pseudo-class penalty, > 1
    std::size_t prototypes_per_class = 1;
    double init_perturbation = 0.01;
    std::uint64_t seed = 0;
    double beta = 1.0;              // swish steepness
    UpdateScale update_scale = UpdateScale::Mean;
};

// Throws ParameterError for out-of-range fields (M > n is checked at fit time).
void validate(const TrainConfig& cfg);

/// Mini-batch gradient sums for the class and fairness terms.
struct GradientAccumulator {
    GradientAccumulator(std::size_t num_prototypes, std::size_t dim);
    void reset();

    std::vector<Vector> g_class;
    std::vector<Vector> g_fair;
    std::size_t n_class = 0;
    std::size_t n_fair = 0;
};

struct TrainStep {
    std::size_t step = 0;
    double batch_cost = 0.0;     // E_fair over the batch, before the update
    double displacement = 0.0;   // l2 norm of all prototype moves this step
    std::uint64_t pseudo_hash = 0;
};

struct TrainLog {
    std::vector<TrainStep> steps;
};

void write_train_log_csv(const TrainLog& log, std::ostream& out);

/// FNV-1a over the pseudo-class vector.
std::uint64_t pseudo_class_hash(const PrototypeModel& model);

/// Lloyd's k-means from k distinct random points. Stops when no centre moves
/// by 1e-6 or after 100 iterations; empty clusters restart at the point
/// farthest from its centre.
std::vector<Vector> kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed);

/// Per-class k-means; pseudo-classes assigned by majority vote.
PrototypeModel init_glvq(const Dataset& ds, const TrainConfig& cfg);

/// k-means on all points, then one prototype per class at every centre with
/// Gaussian noise of std `init_perturbation`. Class-major order.
PrototypeModel init_fair(const Dataset& ds, const TrainConfig& cfg);

/// Adds one sample's gradient of E_fair to `acc` and returns its cost term.
///
/// The class pair always contributes to g_class and n_class += 2. With
/// `with_fair`, the pseudo pair contributes -C times its gradient to g_fair;
/// when one pseudo side is simulated its distance is held fixed, only the
/// surviving prototype moves and n_fair += 1 (otherwise += 2).
double grad_fair_step(const PrototypeModel& model, const Sample& sample, double C, double alpha,
                      GradientAccumulator& acc, bool with_fair = true);

/// Majority protected value of each receptive field over `ds` (ties: lowest
/// id); empty fields draw a group uniformly from `rng`.
void update_pseudo_classes(PrototypeModel& model, const Dataset& ds, std::mt19937_64& rng);
PrototypeModel update_pseudo_classes(const PrototypeModel& model, const Dataset& ds, std::uint64_t seed);

struct TrainResult {
    PrototypeModel model;
    TrainLog log;
};

/// FairGLVQ: N steps of w <- w - eta * (G_class / n_class + G_fair / n_fair)
/// on uniformly drawn batches (eta scaled by M under UpdateScale::Sum), then a
/// pseudo-class vote over all of `ds`.
TrainResult train_fairglvq(const Dataset& ds, const TrainConfig& cfg);
TrainResult train_fairglvq(const Dataset& ds, const TrainConfig& cfg, PrototypeModel initial);

/// Mini-batch GLVQ: same batches and update as above with the fairness
/// machinery switched off.
TrainResult train_glvq(const Dataset& ds, const TrainConfig& cfg);
TrainResult train_glvq(const Dataset& ds, const TrainConfig& cfg, PrototypeModel initial);

}  // namespace fairglvq
