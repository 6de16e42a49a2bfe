#include "fairglvq/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "fairglvq/error.hpp"
#include "format.hpp"
#include "nearest.hpp"
#include "rng.hpp"

namespace fairglvq {

void validate(const TrainConfig& cfg) {
    if (cfg.batch_size == 0) throw ParameterError("batch size must be positive");
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        throw ParameterError("learning rate must be positive");
    if (!(cfg.C >= 0.0) || !std::isfinite(cfg.C)) throw ParameterError("C must be nonnegative");
    if (!(cfg.alpha > 1.0) || !std::isfinite(cfg.alpha)) throw ParameterError("alpha must exceed 1");
    if (cfg.prototypes_per_class == 0) throw ParameterError("need at least one prototype per class");
    if (!(cfg.init_perturbation >= 0.0)) throw ParameterError("init perturbation must be nonnegative");
    if (!(cfg.beta > 0.0)) throw ParameterError("beta must be positive");
}

GradientAccumulator::GradientAccumulator(std::size_t num_prototypes, std::size_t dim)
    : g_class(num_prototypes, Vector(dim, 0.0)), g_fair(num_prototypes, Vector(dim, 0.0)) {}

void GradientAccumulator::reset() {
    for (auto& g : g_class) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : g_fair) std::fill(g.begin(), g.end(), 0.0);
    n_class = 0;
    n_fair = 0;
}

void write_train_log_csv(const TrainLog& log, std::ostream& out) {
    out << "step,cost,displacement,pseudo_hash\n";
    for (const auto& s : log.steps)
        out << s.step << ',' << detail::format_double(s.batch_cost) << ',' << detail::format_double(s.displacement)
            << ',' << s.pseudo_hash << '\n';
}

std::uint64_t pseudo_class_hash(const PrototypeModel& model) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& p : model.prototypes()) {
        auto v = static_cast<std::uint64_t>(p.pseudo_class);
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xFFU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

// ---------------------------------------------------------------------------

std::vector<Vector> kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.size();
    if (k == 0) throw ParameterError("k-means needs k >= 1");
    if (k > n) throw ParameterError("k-means: k = " + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
    const std::size_t d = points.front().size();
    for (const auto& p : points)
        if (p.size() != d) throw DimensionError("k-means points differ in dimension");

    auto rng = detail::make_rng(seed, detail::kKMeans);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<Vector> centers;
    for (std::size_t i = 0; i < k; ++i) centers.push_back(points[idx[i]]);

    const detail::NearestSearch search(points);
    std::vector<std::size_t> assign(n, 0);
    std::vector<double> dist(n, 0.0);
    for (int iter = 0; iter < 100; ++iter) {
        search.assign(detail::to_matrix(centers, d), assign, &dist);
        std::vector<Vector> next(k, Vector(d, 0.0));
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++count[assign[i]];
            for (std::size_t j = 0; j < d; ++j) next[assign[i]][j] += points[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) {
                for (auto& v : next[c]) v /= static_cast<double>(count[c]);
                continue;
            }
            auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            next[c] = points[far];
            dist[far] = -1.0;  // do not hand the same point to two empty clusters
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) movement = std::max(movement, std::sqrt(sq_dist(next[c], centers[c])));
        centers = std::move(next);
        if (movement < 1e-6) break;
    }
    return centers;
}

// ---------------------------------------------------------------------------

namespace {

void vote_pseudo_classes(PrototypeModel& model, const Dataset& ds, std::span<const std::size_t> winners,
                         std::mt19937_64& rng) {
    const std::size_t P = model.size();
    const std::size_t g = ds.num_groups();
    std::vector<std::size_t> counts(P * g, 0);
    for (std::size_t i = 0; i < winners.size(); ++i) ++counts[winners[i] * g + ds[i].group];
    std::uniform_int_distribution<std::size_t> any_group(0, g - 1);
    for (std::size_t j = 0; j < P; ++j) {
        const auto* row = counts.data() + j * g;
        const auto* top = std::max_element(row, row + g);  // first maximum -> lowest id
        if (*top == 0)
            model.set_pseudo_class(j, any_group(rng));
        else
            model.set_pseudo_class(j, static_cast<std::size_t>(top - row));
    }
}

}  // namespace

void update_pseudo_classes(PrototypeModel& model, const Dataset& ds, std::mt19937_64& rng) {
    const auto winners = nearest_indices(model, ds.samples());
    vote_pseudo_classes(model, ds, winners, rng);
}

PrototypeModel update_pseudo_classes(const PrototypeModel& model, const Dataset& ds, std::uint64_t seed) {
    PrototypeModel out = model;
    auto rng = detail::make_rng(seed, detail::kPseudo);
    update_pseudo_classes(out, ds, rng);
    return out;
}

namespace {

std::vector<Vector> class_points(const Dataset& ds, std::size_t label) {
    std::vector<Vector> pts;
    for (const auto& s : ds.samples())
        if (s.label == label) pts.push_back(s.features);
    return pts;
}

std::vector<Vector> all_points(const Dataset& ds) {
    std::vector<Vector> pts;
    pts.reserve(ds.size());
    for (const auto& s : ds.samples()) pts.push_back(s.features);
    return pts;
}

}  // namespace

PrototypeModel init_glvq(const Dataset& ds, const TrainConfig& cfg) {
    validate(cfg);
    std::vector<Prototype> protos;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        auto pts = class_points(ds, c);
        if (pts.size() < cfg.prototypes_per_class)
            throw ParameterError("class " + std::to_string(c) + " has " + std::to_string(pts.size()) +
                                 " samples, fewer than " + std::to_string(cfg.prototypes_per_class) +
                                 " prototypes");
        for (auto& center : kmeans(pts, cfg.prototypes_per_class, cfg.seed + c))
            protos.push_back({std::move(center), c, 0});
    }
    PrototypeModel model(std::move(protos), cfg.beta);
    auto rng = detail::make_rng(cfg.seed, detail::kPseudo);
    update_pseudo_classes(model, ds, rng);
    return model;
}

PrototypeModel init_fair(const Dataset& ds, const TrainConfig& cfg) {
    validate(cfg);
    const auto centers = kmeans(all_points(ds), cfg.prototypes_per_class, cfg.seed);
    auto noise_rng = detail::make_rng(cfg.seed, detail::kPerturbation);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<Prototype> protos;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
        for (const auto& center : centers) {
            Vector w = center;
            for (auto& v : w) v += cfg.init_perturbation * noise(noise_rng);
            protos.push_back({std::move(w), c, 0});
        }
    }
    PrototypeModel model(std::move(protos), cfg.beta);
    auto rng = detail::make_rng(cfg.seed, detail::kPseudo);
    update_pseudo_classes(model, ds, rng);
    return model;
}

// ---------------------------------------------------------------------------

namespace {

struct Nearest {
    std::size_t plus = 0, minus = 0;
    bool has_plus = false, has_minus = false;
};

// Adds scale * d mu / d w for the prototypes behind (d_plus, d_minus).
// A side whose index is absent is a held-constant simulated distance.
void add_margin_gradient(std::span<const double> x, const PrototypeModel& model, double d_plus, double d_minus,
                         const std::size_t* plus, const std::size_t* minus, double scale,
                         std::vector<Vector>& into) {
    const double denom = d_plus + d_minus;
    if (denom == 0.0) return;
    const double denom2 = denom * denom;
    // dmu/dd+ = 2 d- / s^2, dmu/dd- = -2 d+ / s^2, dd/dw = -2 (x - w)
    if (plus) {
        const double f = scale * (2.0 * d_minus / denom2) * -2.0;
        const auto& w = model[*plus].w;
        auto& g = into[*plus];
        for (std::size_t k = 0; k < x.size(); ++k) g[k] += f * (x[k] - w[k]);
    }
    if (minus) {
        const double f = scale * (-2.0 * d_plus / denom2) * -2.0;
        const auto& w = model[*minus].w;
        auto& g = into[*minus];
        for (std::size_t k = 0; k < x.size(); ++k) g[k] += f * (x[k] - w[k]);
    }
}

}  // namespace

double grad_fair_step(const PrototypeModel& model, const Sample& sample, double C, double alpha,
                      GradientAccumulator& acc, bool with_fair) {
    const std::size_t P = model.size();
    const auto& x = sample.features;
    if (x.size() != model.dim()) throw DimensionError("sample dimension does not match model");

    Nearest cls, fair;
    double dc_plus = 0, dc_minus = 0, df_plus = 0, df_minus = 0;
    for (std::size_t j = 0; j < P; ++j) {
        const double d = sq_dist(x, model[j].w);
        if (model[j].class_label == sample.label) {
            if (!cls.has_plus || d < dc_plus) {
                dc_plus = d;
                cls.plus = j;
                cls.has_plus = true;
            }
        } else if (!cls.has_minus || d < dc_minus) {
            dc_minus = d;
            cls.minus = j;
            cls.has_minus = true;
        }
        if (!with_fair) continue;
        if (model[j].pseudo_class == sample.group) {
            if (!fair.has_plus || d < df_plus) {
                df_plus = d;
                fair.plus = j;
                fair.has_plus = true;
            }
        } else if (!fair.has_minus || d < df_minus) {
            df_minus = d;
            fair.minus = j;
            fair.has_minus = true;
        }
    }
    if (!cls.has_plus || !cls.has_minus)
        throw ModelError("class " + std::to_string(sample.label) + " lacks a matching or competing prototype");

    const double beta = model.beta();
    const double mu_class = rel_margin(dc_plus, dc_minus);
    add_margin_gradient(x, model, dc_plus, dc_minus, &cls.plus, &cls.minus, swish_derivative(mu_class, beta),
                        acc.g_class);
    acc.n_class += 2;
    double cost = swish(mu_class, beta);
    if (!with_fair) return cost;

    const std::size_t* fp = fair.has_plus ? &fair.plus : nullptr;
    const std::size_t* fm = fair.has_minus ? &fair.minus : nullptr;
    if (!fair.has_minus) df_minus = df_plus / alpha;
    if (!fair.has_plus) df_plus = alpha * df_minus;
    const double mu_fair =
        (fp && fm) || df_plus + df_minus == 0.0 ? rel_margin(df_plus, df_minus) : simulated_margin(alpha);
    add_margin_gradient(x, model, df_plus, df_minus, fp, fm, -C * swish_derivative(mu_fair, beta), acc.g_fair);
    acc.n_fair += (fp && fm) ? 2 : 1;
    cost -= C * swish(mu_fair, beta);
    return cost;
}

// ---------------------------------------------------------------------------

namespace {

TrainResult run_training(const Dataset& ds, const TrainConfig& cfg, PrototypeModel model, bool fair) {
    validate(cfg);
    const std::size_t n = ds.size();
    if (cfg.batch_size > n)
        throw ParameterError("batch size " + std::to_string(cfg.batch_size) + " exceeds " + std::to_string(n) +
                             " training samples");
    if (model.dim() != ds.dim()) throw DimensionError("model and dataset dimensions differ");

    const std::size_t P = model.size();
    const std::size_t d = model.dim();
    auto batch_rng = detail::make_rng(cfg.seed, detail::kBatches);
    auto pseudo_rng = detail::make_rng(cfg.seed, detail::kPseudo + 100);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    const detail::NearestSearch search(ds.samples());
    std::vector<std::size_t> winners;

    const double rate = cfg.update_scale == UpdateScale::Sum
                            ? cfg.learning_rate * static_cast<double>(cfg.batch_size)
                            : cfg.learning_rate;
    GradientAccumulator acc(P, d);
    TrainLog log;
    log.steps.reserve(cfg.epochs);
    for (std::size_t step = 0; step < cfg.epochs; ++step) {
        acc.reset();
        // Partial Fisher-Yates: the first M slots become a uniform subset.
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(order[i], order[pick(batch_rng)]);
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < cfg.batch_size; ++i)
            cost += grad_fair_step(model, ds[order[i]], cfg.C, cfg.alpha, acc, fair);

        double moved = 0.0;
        for (std::size_t j = 0; j < P; ++j) {
            auto& w = model.position(j);
            for (std::size_t k = 0; k < d; ++k) {
                double g = 0.0;
                if (acc.n_class > 0) g += acc.g_class[j][k] / static_cast<double>(acc.n_class);
                if (fair && acc.n_fair > 0) g += acc.g_fair[j][k] / static_cast<double>(acc.n_fair);
                const double delta = rate * g;
                w[k] -= delta;
                moved += delta * delta;
            }
        }
        if (fair) {
            search.assign(detail::prototype_matrix(model), winners);
            vote_pseudo_classes(model, ds, winners, pseudo_rng);
        }
        log.steps.push_back({step, cost, std::sqrt(moved), pseudo_class_hash(model)});
    }
    return {std::move(model), std::move(log)};
}

}  // namespace

TrainResult train_fairglvq(const Dataset& ds, const TrainConfig& cfg) {
    return train_fairglvq(ds, cfg, init_fair(ds, cfg));
}

TrainResult train_fairglvq(const Dataset& ds, const TrainConfig& cfg, PrototypeModel initial) {
    return run_training(ds, cfg, std::move(initial), true);
}

TrainResult train_glvq(const Dataset& ds, const TrainConfig& cfg) {
    return train_glvq(ds, cfg, init_glvq(ds, cfg));
}

TrainResult train_glvq(const Dataset& ds, const TrainConfig& cfg, PrototypeModel initial) {
    return run_training(ds, cfg, std::move(initial), false);
}

}  // namespace fairglvq
