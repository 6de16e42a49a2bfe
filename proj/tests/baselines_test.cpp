#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fairglvq/baselines.hpp"
#include "fairglvq/error.hpp"
#include "fairglvq/experiment.hpp"
#include "fairglvq/metrics.hpp"
#include "test_support.hpp"

using namespace fairglvq;

namespace {

// Gaussian features; the group follows a noisy linear rule so every probe
// along the way has a nonzero direction.
Dataset linear_group_data(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> z;
    Vector v(d);
    for (auto& c : v) c = z(rng);
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        double dot = 0;
        for (std::size_t k = 0; k < d; ++k) {
            s.features.push_back(z(rng));
            dot += s.features.back() * v[k];
        }
        s.group = dot + 0.5 * z(rng) > 0 ? 1 : 0;
        s.label = z(rng) > 0 ? 1 : 0;
        samples.push_back(std::move(s));
    }
    samples[0].label = 0;
    samples[1].label = 1;
    return Dataset(std::move(samples), d, 2, 2);
}

Eigen::MatrixXd composed_matrix(const ProjectionStack& st) {
    const auto d = static_cast<Eigen::Index>(st.dim());
    Eigen::MatrixXd P(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) P(r, c) = st.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    return P;
}

Eigen::MatrixXd data_matrix(const Dataset& ds) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.dim()));
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.dim(); ++k)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = ds[i].features[k];
    return X;
}

double majority_rate(const Dataset& ds) {
    double ones = 0;
    for (const auto& s : ds.samples()) ones += static_cast<double>(s.group);
    return std::max(ones, static_cast<double>(ds.size()) - ones) / static_cast<double>(ds.size());
}

}  // namespace

TEST(Probe, SeparableOneDimensional) {
    std::vector<Vector> xs;
    std::vector<std::size_t> ys, ss;
    for (int i = 0; i < 40; ++i) {
        const double x = i < 20 ? -0.5 - 0.1 * i : 0.5 + 0.1 * (i - 20);
        xs.push_back({x});
        ss.push_back(x > 0 ? 1 : 0);
        ys.push_back(static_cast<std::size_t>(i % 2));
    }
    auto ds = test::make_dataset(xs, ys, ss);
    auto probe = fit_probe(ds);
    EXPECT_EQ(probe.accuracy(ds), 1.0);
    auto again = fit_probe(ds);
    EXPECT_EQ(again.weights, probe.weights);
    EXPECT_EQ(again.bias, probe.bias);
}

TEST(Probe, IndependentGroupGivesMajorityRate) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    std::bernoulli_distribution coin(0.7);
    std::vector<Sample> samples;
    for (int i = 0; i < 2000; ++i) samples.push_back({{z(rng), z(rng)}, std::size_t(i % 2), coin(rng) ? 1u : 0u});
    Dataset ds(samples, 2, 2, 2);
    EXPECT_NEAR(fit_probe(ds).accuracy(ds), majority_rate(ds), 0.05);
}

TEST(Probe, NeedsBinaryGroups) {
    std::mt19937_64 rng(4);
    EXPECT_THROW(fit_probe(test::random_dataset(rng, 30, 2, 2, 3)), UnsupportedError);
}

TEST(NullspaceIteration, AxisProjectionAndIdempotence) {
    ProjectionStack st(2);
    LinearProbe probe{{3.0, 0.0}, 1.0};
    auto one = add_nullspace_iteration(st, probe);
    EXPECT_EQ(one.apply(Vector{2.5, -4.0}), (Vector{0.0, -4.0}));
    auto twice = add_nullspace_iteration(one, probe);
    EXPECT_EQ(twice.composed(), one.composed());
    auto full = add_nullspace_iteration(twice, LinearProbe{{0.0, -2.0}, 0.0});
    for (double v : full.composed()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(add_nullspace_iteration(st, LinearProbe{{0.0, 0.0}, 1.0}), DegenerateProbeError);
}

TEST(NullspaceIteration, PropertyProjectionStaysSymmetricIdempotent) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d = 2 + rep % 6;
        ProjectionStack st(d);
        for (std::size_t k = 0; k < (rep % d) + 1; ++k) {
            Vector w(d);
            for (auto& v : w) v = z(rng);
            // INP probes live in the projected space, so their weights do too.
            st = add_nullspace_iteration(st, LinearProbe{st.apply(w), 0.0});
        }
        const auto P = composed_matrix(st);
        EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-8);
        for (const auto& u : st.directions()) {
            double norm = 0;
            for (double v : u) norm += v * v;
            EXPECT_NEAR(norm, 1.0, 1e-12);
        }
    }
}

TEST(Inp, ZeroIterationsIsIdentity) {
    std::mt19937_64 rng(6);
    auto ds = linear_group_data(rng, 100, 4);
    auto out = apply_inp(fit_inp(ds, 0), ds);
    for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(out[i].features, ds[i].features);
    EXPECT_THROW(fit_inp(ds, 5), ParameterError);
}

TEST(Inp, RemovesLinearlyEncodedGroup) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    std::vector<Sample> samples;
    for (int i = 0; i < 1000; ++i) {
        Vector x{z(rng), z(rng)};
        samples.push_back({x, std::size_t(i % 2), x[0] > 0 ? 1u : 0u});
    }
    Dataset ds(samples, 2, 2, 2);
    auto projected = apply_inp(fit_inp(ds, 1), ds);
    EXPECT_LE(fit_probe(projected).accuracy(projected), majority_rate(ds) + 0.05);
}

TEST(Inp, PropertyOrthogonalityAndRank) {
    std::mt19937_64 rng(8);
    for (std::size_t d : {3u, 5u, 8u}) {
        auto ds = linear_group_data(rng, 200, d);
        for (std::size_t k = 0; k <= d - 1; ++k) {
            const auto st = fit_inp(ds, k);
            const auto P = composed_matrix(st);
            EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-8);
            EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-8);
            const auto out = apply_inp(st, ds);
            for (const auto& u : st.directions())
                for (const auto& s : out.samples()) {
                    double dot = 0;
                    for (std::size_t c = 0; c < d; ++c) dot += s.features[c] * u[c];
                    EXPECT_LT(std::abs(dot), 1e-8);
                }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(data_matrix(out));
            const auto sv = svd.singularValues();
            Eigen::Index rank = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-6 * sv[0] ? 1 : 0;
            EXPECT_EQ(static_cast<std::size_t>(rank), d - k) << "d=" << d << " k=" << k;
        }
    }
}

TEST(Inp, PrefixReplaysExactly) {
    std::mt19937_64 rng(9);
    auto ds = linear_group_data(rng, 150, 5);
    const auto deep = fit_inp(ds, 4);
    for (std::size_t k = 0; k <= 4; ++k) EXPECT_EQ(deep.prefix(k).composed(), fit_inp(ds, k).composed());
}

TEST(Inp, ApplyEdgeCases) {
    std::mt19937_64 rng(10);
    auto ds = linear_group_data(rng, 20, 2);
    ProjectionStack zero(2);
    zero.push({1, 0});
    zero.push({0, 1});
    auto projected = apply_inp(zero, ds);
    for (const auto& s : projected.samples()) EXPECT_EQ(s.features, (Vector{0, 0}));
    EXPECT_THROW(apply_inp(ProjectionStack(3), ds), DimensionError);
    EXPECT_EQ(projected.labels(), ds.labels());
    EXPECT_EQ(projected.groups(), ds.groups());
}

TEST(Inp, JsonRoundTrip) {
    std::mt19937_64 rng(11);
    auto st = fit_inp(linear_group_data(rng, 100, 3), 2);
    auto back = projection_from_json(projection_to_json(st));
    EXPECT_EQ(back.composed(), st.composed());
    EXPECT_EQ(back.directions(), st.directions());
}

TEST(Inp, LocalDatasetOneProjectionKillsAccuracy) {
    ExperimentConfig cfg;
    cfg.dataset.generator = "local";
    cfg.dataset.name = "local";
    MethodSpec inp;
    inp.kind = MethodKind::Inp;
    inp.train.prototypes_per_class = 5;
    inp.train.update_scale = UpdateScale::Sum;
    inp.inp_iterations = 1;
    cfg.methods = {inp};
    auto table = run_experiment(cfg);
    ASSERT_TRUE(table.rows[0].error.empty()) << table.rows[0].error;
    EXPECT_NEAR(table.rows[0].acc.mean, 0.51, 0.05);
}

TEST(Constant, MajorityAndZeroGaps) {
    auto ds = test::make_dataset({{0}, {1}, {2}, {3}, {4}}, {1, 1, 0, 1, 0}, {0, 1, 0, 1, 1});
    auto clf = constant_classifier(ds);
    EXPECT_EQ(clf.label, 1u);
    auto tie = test::make_dataset({{0}, {1}}, {1, 0}, {0, 1});
    EXPECT_EQ(constant_classifier(tie).label, 0u);

    auto balanced = gen_xor(4000, 0);
    auto m = evaluate(constant_classifier(balanced), balanced, 1);
    EXPECT_NEAR(m.accuracy, 0.5, 0.02);
    EXPECT_EQ(m.sp_diff, 0.0);
    EXPECT_EQ(m.eo_diff, 0.0);
}

TEST(Constant, PropertyZeroGapsOnRandomData) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        auto ds = test::random_dataset(rng, 30 + rep, 2);
        for (std::size_t fav : {0u, 1u}) {
            auto m = evaluate(constant_classifier(ds), ds, fav);
            EXPECT_EQ(m.sp_diff, 0.0);
            EXPECT_EQ(m.eo_diff, 0.0);
        }
    }
}
