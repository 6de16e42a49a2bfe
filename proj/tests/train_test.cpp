#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "fairglvq/error.hpp"
#include "fairglvq/train.hpp"
#include "gradient_oracle.hpp"
#include "test_support.hpp"

using namespace fairglvq;
using namespace fairglvq::test;

namespace {

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.05;
    cfg.prototypes_per_class = 2;
    return cfg;
}

}  // namespace

TEST(GradFairStep, MatchesCentralDifferences) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> dim(1, 5), count(2, 6), classes(2, 3);
    std::uniform_real_distribution<double> cval(0.0, 3.0), aval(1.2, 5.0), bval(0.5, 2.0);
    const double h = 1e-5;
    int checked = 0, simulated_cases = 0;
    for (int attempt = 0; attempt < 400 && checked < 150; ++attempt) {
        const std::size_t d = dim(rng), P = count(rng), c = std::min(classes(rng), P);
        auto base = test::random_model(rng, P, d, c, 2);
        std::vector<Prototype> protos = base.prototypes();
        if (attempt % 3 == 0)
            for (auto& p : protos) p.pseudo_class = attempt % 2;  // force a simulated side
        const double beta = bval(rng);
        const PrototypeModel model(protos, beta);
        const auto s = test::random_sample(rng, d, c, 2);
        const double C = cval(rng), alpha = aval(rng);

        const Roles r = roles_of(protos, s);
        double frozen = 0.0;
        if (!r.f_minus) frozen = dist2(s.features, protos[*r.f_plus].w) / alpha;
        if (!r.f_plus) frozen = alpha * dist2(s.features, protos[*r.f_minus].w);

        GradientAccumulator acc(P, d);
        const double cost = grad_fair_step(model, s, C, alpha, acc);
        EXPECT_NEAR(cost, cost_oracle(protos, s, r, C, beta, frozen), 1e-12);
        EXPECT_EQ(acc.n_class, 2u);
        EXPECT_EQ(acc.n_fair, (r.f_plus && r.f_minus) ? 2u : 1u);

        double err2 = 0.0, ref2 = 0.0;
        bool stable = true;
        for (std::size_t j = 0; j < P && stable; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                auto up = protos, down = protos;
                up[j].w[k] += h;
                down[j].w[k] -= h;
                if (!same_roles(roles_of(up, s), r) || !same_roles(roles_of(down, s), r)) {
                    stable = false;
                    break;
                }
                const double fd =
                    (cost_oracle(up, s, r, C, beta, frozen) - cost_oracle(down, s, r, C, beta, frozen)) / (2 * h);
                const double an = acc.g_class[j][k] + acc.g_fair[j][k];
                err2 += (an - fd) * (an - fd);
                ref2 += fd * fd;
            }
        if (!stable || ref2 == 0.0) continue;
        EXPECT_LE(std::sqrt(err2 / ref2), 1e-5) << "instance " << attempt;
        ++checked;
        simulated_cases += (r.f_plus && r.f_minus) ? 0 : 1;
    }
    EXPECT_GE(checked, 100);
    EXPECT_GE(simulated_cases, 20);
}

TEST(GradFairStep, OnlyUpdateSetReceivesGradient) {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        auto m = test::random_model(rng, 6, 3, 2, 2);
        auto s = test::random_sample(rng, 3, 2, 2);
        const Roles r = roles_of(m.prototypes(), s);
        GradientAccumulator acc(6, 3);
        grad_fair_step(m, s, 1.0, 2.0, acc);
        for (std::size_t j = 0; j < 6; ++j) {
            const bool in_class = j == r.c_plus || j == r.c_minus;
            const bool in_fair = (r.f_plus && j == *r.f_plus) || (r.f_minus && j == *r.f_minus);
            if (!in_class) {
                for (double v : acc.g_class[j]) EXPECT_EQ(v, 0.0);
            }
            if (!in_fair) {
                for (double v : acc.g_fair[j]) EXPECT_EQ(v, 0.0);
            }
        }
    }
}

TEST(GradFairStep, ZeroCLeavesFairGradientZero) {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        auto m = test::random_model(rng, 5, 2, 2, 2);
        auto s = test::random_sample(rng, 2, 2, 2);
        GradientAccumulator with(5, 2), without(5, 2);
        const double a = grad_fair_step(m, s, 0.0, 2.0, with);
        const double b = grad_fair_step(m, s, 0.0, 2.0, without, false);
        EXPECT_EQ(a, b);
        EXPECT_EQ(with.g_class, without.g_class);
        for (const auto& g : with.g_fair)
            for (double v : g) EXPECT_EQ(v, 0.0);
    }
}

TEST(GradFairStep, AttractsCorrectRepelsWrong) {
    // With beta = 1, swish' > 0 on [-1, 1], so a descent step moves w+ toward
    // x and w- away from it.
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 200; ++rep) {
        auto m = test::random_model(rng, 4, 3, 2, 2);
        auto s = test::random_sample(rng, 3, 2, 2);
        const Roles r = roles_of(m.prototypes(), s);
        auto ds = Dataset({s}, 3, 2, 2);
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.batch_size = 1;
        cfg.learning_rate = 1e-3;
        const auto trained = train_glvq(ds, cfg, m).model;
        auto toward = [&](std::size_t j) {
            double dot = 0;
            for (std::size_t k = 0; k < 3; ++k) dot += (trained[j].w[k] - m[j].w[k]) * (s.features[k] - m[j].w[k]);
            return dot;
        };
        EXPECT_GT(toward(r.c_plus), 0.0);
        EXPECT_LT(toward(r.c_minus), 0.0);
    }
}

TEST(Kmeans, Examples) {
    std::vector<Vector> two{{0}, {10}};
    auto c = kmeans(two, 2, 0);
    std::sort(c.begin(), c.end());
    EXPECT_EQ(c, (std::vector<Vector>{{0}, {10}}));

    std::vector<Vector> same(5, Vector{1.5, -2});
    EXPECT_EQ(kmeans(same, 1, 3), (std::vector<Vector>{{1.5, -2}}));
    EXPECT_THROW(kmeans(two, 3, 0), ParameterError);
}

TEST(Kmeans, MatchesBruteForceOnTwoBlobs) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z(0.0, 0.3);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vector> pts;
        for (int i = 0; i < 12; ++i) pts.push_back({(i < 6 ? -3.0 : 3.0) + z(rng), z(rng)});
        // Exhaustive search over all 2-partitions for the minimum SSE.
        double best = INFINITY;
        std::vector<Vector> best_centers;
        for (unsigned mask = 1; mask < (1u << 12) - 1; ++mask) {
            Vector a(2, 0), b(2, 0);
            int na = 0, nb = 0;
            for (int i = 0; i < 12; ++i) {
                auto& t = (mask >> i & 1) ? a : b;
                ((mask >> i & 1) ? na : nb)++;
                t[0] += pts[i][0];
                t[1] += pts[i][1];
            }
            for (auto& v : a) v /= na;
            for (auto& v : b) v /= nb;
            double sse = 0;
            for (int i = 0; i < 12; ++i) sse += dist2(pts[i], (mask >> i & 1) ? a : b);
            if (sse < best) best = sse, best_centers = {a, b};
        }
        auto got = kmeans(pts, 2, rep);
        std::sort(got.begin(), got.end());
        std::sort(best_centers.begin(), best_centers.end());
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k) EXPECT_NEAR(got[c][k], best_centers[c][k], 1e-9);
    }
}

TEST(InitGlvq, OnePerClassIsClassMean) {
    auto ds = test::make_dataset({{0, 0}, {2, 0}, {5, 5}, {7, 9}}, {0, 0, 1, 1}, {0, 1, 0, 1});
    TrainConfig cfg;
    auto m = init_glvq(ds, cfg);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m[0].w, (Vector{1, 0}));
    EXPECT_EQ(m[1].w, (Vector{6, 7}));
    EXPECT_EQ(m[0].class_label, 0u);
    EXPECT_EQ(m[1].class_label, 1u);
}

TEST(InitGlvq, CountsDeterminismAndErrors) {
    std::mt19937_64 rng(13);
    auto ds = test::random_dataset(rng, 60, 3);
    TrainConfig cfg;
    cfg.prototypes_per_class = 2;
    auto a = init_glvq(ds, cfg);
    EXPECT_EQ(a.size(), 4u);
    EXPECT_EQ(model_to_json(a), model_to_json(init_glvq(ds, cfg)));
    cfg.prototypes_per_class = 40;
    EXPECT_THROW(init_glvq(ds, cfg), ParameterError);
}

TEST(InitFair, EveryClassAtEveryCentre) {
    auto ds = gen_local(400, 1);
    TrainConfig cfg;
    cfg.prototypes_per_class = 5;
    auto m = init_fair(ds, cfg);
    EXPECT_EQ(m.size(), 10u);
    cfg.init_perturbation = 0.0;
    auto exact = init_fair(ds, cfg);
    // Class-major order: prototype j of class 0 shares its centre with
    // prototype j of class 1.
    for (std::size_t j = 0; j < 5; ++j) {
        EXPECT_EQ(exact[j].class_label, 0u);
        EXPECT_EQ(exact[j + 5].class_label, 1u);
        EXPECT_EQ(exact[j].w, exact[j + 5].w);
        EXPECT_LT(sq_dist(m[j].w, exact[j].w), 0.01);
    }
}

TEST(UpdatePseudoClasses, MajorityTieAndEmpty) {
    std::vector<Prototype> protos{{{0}, 0, 1}, {{10}, 1, 1}, {{20}, 0, 0}, {{100}, 1, 1}};
    PrototypeModel m(protos);
    auto ds = test::make_dataset({{0}, {0.5}, {-0.5}, {10}, {11}}, {0, 0, 0, 1, 1}, {0, 0, 1, 0, 1});
    // prototype 0: {0,0,1} -> 0; prototype 1: {0,1} -> 0 (tie, lowest id).
    auto out = update_pseudo_classes(m, ds, 0);
    EXPECT_EQ(out[0].pseudo_class, 0u);
    EXPECT_EQ(out[1].pseudo_class, 0u);

    // Empty receptive fields (prototypes 2 and 3) draw uniformly.
    int ones = 0;
    const int seeds = 400;
    for (int s = 0; s < seeds; ++s) {
        auto r = update_pseudo_classes(m, ds, static_cast<std::uint64_t>(s));
        ASSERT_LE(r[2].pseudo_class, 1u);
        ones += static_cast<int>(r[2].pseudo_class);
    }
    EXPECT_NEAR(static_cast<double>(ones) / seeds, 0.5, 0.1);
}

TEST(UpdatePseudoClasses, PropertyBruteForceRecount) {
    std::mt19937_64 rng(14);
    for (int rep = 0; rep < 30; ++rep) {
        auto m = test::random_model(rng, 6, 2, 2, 3);
        auto ds = test::random_dataset(rng, 80, 2, 2, 3);
        auto out = update_pseudo_classes(m, ds, rep);
        for (std::size_t j = 0; j < m.size(); ++j) {
            std::vector<int> counts(3, 0);
            for (const auto& s : ds.samples()) {
                std::size_t best = 0;
                for (std::size_t q = 1; q < m.size(); ++q)
                    if (dist2(s.features, m[q].w) < dist2(s.features, m[best].w)) best = q;
                if (best == j) ++counts[s.group];
            }
            if (*std::max_element(counts.begin(), counts.end()) == 0) continue;
            const auto majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            EXPECT_EQ(out[j].pseudo_class, majority);
        }
    }
}

TEST(Training, ZeroCMatchesGlvqBitwise) {
    std::mt19937_64 rng(15);
    auto ds = test::random_dataset(rng, 120, 3);
    for (auto scale : {UpdateScale::Mean, UpdateScale::Sum}) {
        TrainConfig cfg = small_config();
        cfg.update_scale = scale;
        cfg.C = 0.0;
        const auto init = init_fair(ds, cfg);
        for (std::size_t steps : {1u, 7u, 30u}) {
            cfg.epochs = steps;
            auto fair = train_fairglvq(ds, cfg, init);
            auto plain = train_glvq(ds, cfg, init);
            for (std::size_t j = 0; j < init.size(); ++j) ASSERT_EQ(fair.model[j].w, plain.model[j].w);
            ASSERT_EQ(fair.log.steps.size(), steps);
            for (std::size_t t = 0; t < steps; ++t) {
                EXPECT_EQ(fair.log.steps[t].batch_cost, plain.log.steps[t].batch_cost);
                EXPECT_EQ(fair.log.steps[t].displacement, plain.log.steps[t].displacement);
            }
            std::vector<Prototype> a = fair.model.prototypes(), b = plain.model.prototypes();
            for (auto& p : a) p.pseudo_class = 0;
            for (auto& p : b) p.pseudo_class = 0;
            EXPECT_EQ(model_to_json(PrototypeModel(a)), model_to_json(PrototypeModel(b)));
        }
    }
}

TEST(Training, CostNonIncreasingFullBatchSmallStep) {
    std::mt19937_64 rng(16);
    auto ds = test::random_dataset(rng, 20, 2);
    TrainConfig cfg;
    cfg.batch_size = 20;
    cfg.learning_rate = 1e-4;
    cfg.epochs = 1;
    auto model = init_glvq(ds, cfg);
    double prev = glvq_cost(model, ds);
    for (int step = 0; step < 100; ++step) {
        model = train_glvq(ds, cfg, model).model;
        const double now = glvq_cost(model, ds);
        EXPECT_LE(now, prev + 1e-12 * std::abs(prev));
        prev = now;
    }
}

TEST(Training, SeparableOneDimensionalReachesPerfectTrainingAccuracy) {
    std::vector<Vector> xs;
    std::vector<std::size_t> ys, ss;
    for (int i = 0; i < 40; ++i) {
        xs.push_back({i < 20 ? -1.0 - 0.05 * i : 0.5 + 0.05 * i});
        ys.push_back(i < 20 ? 0 : 1);
        ss.push_back(i % 2);
    }
    auto ds = test::make_dataset(xs, ys, ss);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch_size = 10;
    auto m = train_glvq(ds, cfg).model;
    for (const auto& s : ds.samples()) EXPECT_EQ(classify(m, s.features), s.label);
}

TEST(Training, FiniteOnStandardizedData) {
    auto raw = gen_xor(1000, 2);
    auto ds = Standardizer::fit(raw).transform(raw);
    TrainConfig cfg;
    cfg.prototypes_per_class = 4;
    cfg.C = 1.25;
    auto r = train_fairglvq(ds, cfg);
    for (const auto& st : r.log.steps) EXPECT_TRUE(std::isfinite(st.batch_cost));
    for (const auto& p : r.model.prototypes())
        for (double v : p.w) EXPECT_TRUE(std::isfinite(v));
}

TEST(Training, ZeroStepsReturnsInitialisation) {
    std::mt19937_64 rng(17);
    auto ds = test::random_dataset(rng, 50, 2);
    TrainConfig cfg = small_config();
    cfg.epochs = 0;
    auto init = init_fair(ds, cfg);
    auto r = train_fairglvq(ds, cfg);
    EXPECT_EQ(model_to_json(r.model), model_to_json(init));
    EXPECT_TRUE(r.log.steps.empty());
}

TEST(Training, DeterministicLogs) {
    std::mt19937_64 rng(18);
    auto ds = test::random_dataset(rng, 100, 3);
    TrainConfig cfg = small_config();
    cfg.C = 1.0;
    auto a = train_fairglvq(ds, cfg), b = train_fairglvq(ds, cfg);
    std::ostringstream la, lb;
    write_train_log_csv(a.log, la);
    write_train_log_csv(b.log, lb);
    EXPECT_EQ(la.str(), lb.str());
    EXPECT_EQ(la.str().substr(0, la.str().find('\n')), "step,cost,displacement,pseudo_hash");
    EXPECT_EQ(model_to_json(a.model), model_to_json(b.model));
    cfg.seed = 1;
    EXPECT_NE(model_to_json(train_fairglvq(ds, cfg).model), model_to_json(a.model));
}

TEST(Training, ConfigErrors) {
    std::mt19937_64 rng(19);
    auto ds = test::random_dataset(rng, 10, 2);
    TrainConfig cfg;
    cfg.batch_size = 11;
    EXPECT_THROW(train_glvq(ds, cfg), ParameterError);
    cfg.batch_size = 5;
    cfg.alpha = 1.0;
    EXPECT_THROW(train_fairglvq(ds, cfg), ParameterError);
    cfg.alpha = 2.0;
    cfg.C = -1.0;
    EXPECT_THROW(train_fairglvq(ds, cfg), ParameterError);
}

TEST(Training, SumScaleEqualsMeanScaleWithBatchTimesRate) {
    std::mt19937_64 rng(20);
    auto ds = test::random_dataset(rng, 64, 2);
    TrainConfig mean = small_config();
    mean.C = 0.7;
    mean.batch_size = 8;
    mean.learning_rate = 0.08;
    TrainConfig sum = mean;
    sum.update_scale = UpdateScale::Sum;
    sum.learning_rate = 0.01;
    const auto init = init_fair(ds, mean);
    EXPECT_EQ(model_to_json(train_fairglvq(ds, mean, init).model), model_to_json(train_fairglvq(ds, sum, init).model));
}
