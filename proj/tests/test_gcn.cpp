#include <gtest/gtest.h>

#include <numeric>

#include "cgap/gcn.hpp"
#include "cgap/gradcheck.hpp"
#include "cgap/graph.hpp"
#include "oracles.hpp"

using namespace cgap;

TEST(InitNodeFeatures, BoundsFromHiddenDim) {
    Tensor2 f = init_node_features(4, 128, 1);
    EXPECT_EQ(f.rows, 4);
    EXPECT_EQ(f.cols, 128);
    for (double v : f.data) {
        EXPECT_GT(v, -0.0884);
        EXPECT_LT(v, 0.0884);
    }
}

TEST(InitNodeFeatures, SeedDeterminism) {
    EXPECT_TRUE(init_node_features(6, 16, 42) == init_node_features(6, 16, 42));
    EXPECT_FALSE(init_node_features(6, 16, 42) == init_node_features(6, 16, 43));
}

TEST(InitNodeFeatures, WidthOneUnitBound) {
    Tensor2 f = init_node_features(100, 1, 5);
    for (double v : f.data) {
        EXPECT_GT(v, -1.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(GcnLayer, IdentityChain) {
    Tape t;
    Var out = gcn_layer_forward(t, t.constant(identity(3)), t.constant(identity(3)),
                                t.constant(identity(3)), 0.0, false, nullptr);
    EXPECT_EQ(t.value(out), identity(3));
}

TEST(GcnLayer, HandComputedAverage) {
    Tape t;
    Var a_hat = t.constant(Tensor2::from({{0.5, 0.5}, {0.5, 0.5}}));
    Var out = gcn_layer_forward(t, a_hat, t.constant(identity(2)), t.constant(identity(2)), 0.0,
                                false, nullptr);
    EXPECT_LT(max_abs_diff(t.value(out), Tensor2::from({{0.5, 0.5}, {0.5, 0.5}})), 1e-15);
}

TEST(GcnLayer, ZeroWeightAnnihilates) {
    Tape t;
    Var out = gcn_layer_forward(t, t.constant(identity(2)), t.constant(Tensor2(2, 2, 3.0)),
                                t.constant(Tensor2(2, 2)), 0.0, false, nullptr);
    EXPECT_EQ(t.value(out), Tensor2(2, 2));
}

TEST(EncodeRegions, EmptyStackReturnsFeatures) {
    Tape t;
    Tensor2 f = init_node_features(3, 4, 9);
    Var out = encode_regions(t, t.constant(identity(3)), t.constant(f), {}, 0.0, false, nullptr);
    EXPECT_TRUE(t.value(out) == f);
}

TEST(EncodeRegions, MatchesIndependentMatrixProductOracle) {
    // 2-region path graph, K=2, no dropout.
    Tensor2 n_adj = Tensor2::from({{0, 1}, {1, 0}});
    NormalizedAdjacency a_hat = normalize_adjacency(n_adj);
    Tensor2 f = init_node_features(2, 5, 3);
    Tensor2 w0 = init_node_features(5, 5, 4);
    Tensor2 w1 = init_node_features(5, 5, 5);

    Tape t;
    Var out = encode_regions(t, t.constant(a_hat.matrix), t.constant(f),
                             {t.constant(w0), t.constant(w1)}, 0.0, false, nullptr);

    auto relu = [](Tensor2 m) {
        for (double& v : m.data) v = v > 0.0 ? v : 0.0;
        return m;
    };
    Tensor2 expect = relu(oracle::matmul(oracle::matmul(a_hat.matrix, f), w0));
    expect = relu(oracle::matmul(oracle::matmul(a_hat.matrix, expect), w1));
    EXPECT_LT(max_abs_diff(t.value(out), expect), 1e-12);
    EXPECT_TRUE(all_finite(t.value(out)));
}

TEST(EncodeRegions, InferenceDeterministicAndNonnegative) {
    NormalizedAdjacency a_hat = normalize_adjacency(Tensor2::from({{0, 1}, {1, 0}}));
    Tensor2 f = init_node_features(2, 8, 1);
    Tensor2 w = init_node_features(8, 8, 2);
    auto run = [&] {
        Tape t;
        Var out = encode_regions(t, t.constant(a_hat.matrix), t.constant(f), {t.constant(w)}, 0.5,
                                 false, nullptr);
        return t.value(out);
    };
    Tensor2 z1 = run(), z2 = run();
    EXPECT_TRUE(z1 == z2);
    for (double v : z1.data) EXPECT_GE(v, 0.0);
}

TEST(EncodeRegions, DropoutDrawsChangeTrainingOutput) {
    NormalizedAdjacency a_hat = normalize_adjacency(Tensor2::from({{0, 1}, {1, 0}}));
    Tensor2 f = init_node_features(2, 8, 1);
    Tensor2 w = init_node_features(8, 8, 2);
    auto run = [&](uint64_t seed) {
        Tape t;
        Rng rng(seed);
        Var out = encode_regions(t, t.constant(a_hat.matrix), t.constant(f), {t.constant(w)}, 0.5,
                                 true, &rng);
        return t.value(out);
    };
    EXPECT_TRUE(run(1) == run(1));
    EXPECT_FALSE(run(1) == run(2));
}

TEST(EncodeRegions, PermutationEquivariance) {
    // encode(P N P^T, P F) == P encode(N, F) on 5-node graphs.
    Tensor2 n_adj = Tensor2::from({{0, 1, 0, 0, 1},
                                   {1, 0, 1, 0, 0},
                                   {0, 1, 0, 1, 0},
                                   {0, 0, 1, 0, 1},
                                   {1, 0, 0, 1, 0}});
    std::vector<int> perm{3, 0, 4, 1, 2};
    Tensor2 p(5, 5);
    for (int i = 0; i < 5; ++i) p(i, perm[i]) = 1.0;

    Tensor2 f = init_node_features(5, 6, 11);
    Tensor2 w0 = init_node_features(6, 6, 12);
    Tensor2 w1 = init_node_features(6, 6, 13);

    auto encode = [&](const Tensor2& n, const Tensor2& feats) {
        Tape t;
        Var out = encode_regions(t, t.constant(normalize_adjacency(n).matrix), t.constant(feats),
                                 {t.constant(w0), t.constant(w1)}, 0.0, false, nullptr);
        return t.value(out);
    };

    Tensor2 permuted_n = oracle::matmul(oracle::matmul(p, n_adj), cgap::transpose(p));
    Tensor2 permuted_f = oracle::matmul(p, f);
    Tensor2 lhs = encode(permuted_n, permuted_f);
    Tensor2 rhs = oracle::matmul(p, encode(n_adj, f));
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10);
}

TEST(EncodeRegions, GradientCheck) {
    NormalizedAdjacency a_hat = normalize_adjacency(Tensor2::from({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}));
    ParamMap params{{"f", init_node_features(3, 4, 21)},
                    {"w0", init_node_features(4, 4, 22)},
                    {"w1", init_node_features(4, 4, 23)}};
    auto build = [&](Tape& t, const ParamMap& p) {
        Var z = encode_regions(t, t.constant(a_hat.matrix), t.leaf(p.at("f"), "f", true),
                               {t.leaf(p.at("w0"), "w0", true), t.leaf(p.at("w1"), "w1", true)}, 0.0,
                               false, nullptr);
        return t.sum_all(t.sqdiff(z, t.constant(Tensor2(3, 4, 0.1))));
    };
    FdCheckReport r = finite_difference_check(build, params);
    EXPECT_LT(r.max_rel_err, 1e-4) << "worst " << r.worst_param;
}
