#include <gtest/gtest.h>

#include "cgap/gradcheck.hpp"
#include "cgap/objectives.hpp"
#include "cgap/rng.hpp"
#include "oracles.hpp"

using namespace cgap;

namespace {

Tensor2 random_tensor(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor2 t(r, c);
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

}  // namespace

TEST(RegionEmbeddingLoss, EqualInputsGiveRegionCountExactly) {
    Tape t;
    Rng rng(1);
    Tensor2 z = random_tensor(5, 4, rng);
    Var loss = region_embedding_loss(t, t.constant(z), t.constant(z));
    EXPECT_DOUBLE_EQ(t.value(loss)(0, 0), 5.0);
}

TEST(RegionEmbeddingLoss, KnownDistance) {
    // one region at distance ln 2 -> exp(-ln 2) = 0.5
    Tape t;
    Tensor2 z(1, 1);
    Tensor2 e(1, 1);
    e(0, 0) = std::log(2.0);
    Var loss = region_embedding_loss(t, t.constant(e), t.constant(z));
    EXPECT_NEAR(t.value(loss)(0, 0), 0.5, 1e-15);
}

TEST(RegionEmbeddingLoss, RangeIsZeroToRegionCount) {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        Tape t;
        int n = 1 + static_cast<int>(rng.next_u64() % 6);
        Var loss = region_embedding_loss(t, t.constant(random_tensor(n, 3, rng, -5.0, 5.0)),
                                         t.constant(random_tensor(n, 3, rng, -5.0, 5.0)));
        EXPECT_GT(t.value(loss)(0, 0), 0.0);
        EXPECT_LE(t.value(loss)(0, 0), static_cast<double>(n));
    }
}

TEST(DecodeHeads, ZeroWeightsGiveUniformMobilityRows) {
    Tape t;
    int n = 3, d = 4;
    Rng rng(5);
    Var e = t.constant(random_tensor(n, d, rng));
    Var logits = decode_mobility_logits(t, e, t.constant(Tensor2(d, n)), t.constant(Tensor2(1, n)));
    Var pred = t.row_softmax(logits);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) EXPECT_NEAR(t.value(pred)(i, j), 1.0 / n, 1e-15);
}

TEST(DecodeHeads, IdentityCase) {
    Tape t;
    int n = 3;
    Var e = t.constant(identity(3));
    Var logits = decode_mobility_logits(t, e, t.constant(identity(3)), t.constant(Tensor2(1, n)));
    EXPECT_EQ(t.value(logits), identity(3));
}

TEST(DecodeHeads, MatchesAffineOracle) {
    Tape t;
    Rng rng(7);
    int n = 4, d = 3;
    Tensor2 e = random_tensor(n, d, rng);
    Tensor2 w = random_tensor(d, d, rng);
    Tensor2 b = random_tensor(1, d, rng);
    Var out = decode_poi(t, t.constant(e), t.constant(w), t.constant(b));
    Tensor2 expect = oracle::matmul(e, w);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) expect(i, j) += b(0, j);
    EXPECT_LT(max_abs_diff(t.value(out), expect), 1e-14);
}

TEST(MobilityDistribution, RowArithmetic) {
    Tensor2 m = Tensor2::from({{0, 2, 2}});
    Tensor2 pr = mobility_target(Tensor2::from({{0, 2, 2}, {1, 0, 0}, {0, 0, 3}}));
    EXPECT_DOUBLE_EQ(pr(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(pr(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(pr(0, 2), 0.5);
    EXPECT_DOUBLE_EQ(pr(1, 0), 1.0);
}

TEST(MobilityDistribution, SingleRegionSelfFlow) {
    Tensor2 pr = mobility_target(Tensor2::from({{5}}));
    EXPECT_DOUBLE_EQ(pr(0, 0), 1.0);
}

TEST(MobilityDistribution, RowsSumToOne) {
    Rng rng(9);
    Tensor2 m(6, 6);
    for (double& v : m.data) v = static_cast<double>(rng.next_u64() % 7);
    for (int i = 0; i < 6; ++i) m(i, i) += 1.0;
    Tensor2 pr = mobility_target(m);
    for (int i = 0; i < 6; ++i) {
        double s = 0.0;
        for (int j = 0; j < 6; ++j) {
            s += pr(i, j);
            EXPECT_GE(pr(i, j), 0.0);
            EXPECT_LE(pr(i, j), 1.0);
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(MobilityLoss, UniformCaseIsTwoLnTwo) {
    Tape t;
    Tensor2 pr = Tensor2::from({{0.5, 0.5}, {0.5, 0.5}});
    // zero logits -> softmax rows are exactly uniform
    Var loss = mobility_loss(t, t.constant(pr), t.constant(Tensor2(2, 2)));
    EXPECT_NEAR(t.value(loss)(0, 0), 2.0 * std::log(2.0), 1e-9);
}

TEST(MobilityLoss, PerfectPredictionLimit) {
    // One-hot targets and logits concentrating the same mass: loss -> 0.
    Tape t;
    Tensor2 pr = Tensor2::from({{1, 0}, {0, 1}});
    Tensor2 logits(2, 2);
    logits(0, 0) = 40.0;
    logits(1, 1) = 40.0;
    Var loss = mobility_loss(t, t.constant(pr), t.constant(logits));
    EXPECT_NEAR(t.value(loss)(0, 0), 0.0, 1e-9);
}

TEST(MobilityLoss, GibbsInequality) {
    // Cross entropy >= row entropies, equality iff predictions match.
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 3 + static_cast<int>(rng.next_u64() % 3);
        Tensor2 m(n, n);
        for (double& v : m.data) v = static_cast<double>(rng.next_u64() % 5);
        for (int i = 0; i < n; ++i) m(i, i) += 1.0;
        Tensor2 pr = mobility_target(m);

        double h_total = 0.0;
        for (int i = 0; i < n; ++i) {
            std::vector<double> row(n);
            for (int j = 0; j < n; ++j) row[j] = pr(i, j);
            h_total += entropy(row);
        }

        Tape t;
        Var loss = mobility_loss(t, t.constant(pr), t.constant(random_tensor(n, n, rng, -2.0, 2.0)));
        EXPECT_GE(t.value(loss)(0, 0), h_total - 1e-9);

        // Force predicted == true by feeding log-probabilities as logits.
        Tensor2 log_pr(n, n);
        for (size_t i = 0; i < pr.data.size(); ++i)
            log_pr.data[i] = std::log(std::max(pr.data[i], 1e-300));
        Tape t2;
        Var eq_loss = mobility_loss(t2, t2.constant(pr), t2.constant(log_pr));
        EXPECT_NEAR(t2.value(eq_loss)(0, 0), h_total, 1e-9);
    }
}

TEST(PoiLoss, SingleRegionUnitNormEmbedding) {
    Tape t;
    Tensor2 ratio = poi_ratio_target({2});
    Tensor2 p_hat(1, 2);
    p_hat(0, 0) = 0.6;
    p_hat(0, 1) = 0.8;  // norm^2 = 1
    Var loss = poi_loss(t, t.constant(ratio), t.constant(p_hat));
    EXPECT_NEAR(t.value(loss)(0, 0), 0.0, 1e-15);
}

TEST(PoiLoss, PairContributionScalarOracle) {
    // p = [2, 1], embeddings [1,0] and [1.25, 0]. Gram entries: G00=1,
    // G01=G10=1.25, G11=1.5625. Loss assembled by scalar arithmetic.
    Tape t;
    Tensor2 ratio = poi_ratio_target({2, 1});
    Tensor2 p_hat = Tensor2::from({{1.0, 0.0}, {1.25, 0.0}});
    double expect = 0.0;
    double g[2][2] = {{1.0, 1.25}, {1.25, 1.5625}};
    double p[2] = {2.0, 1.0};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double d = p[i] / p[j] - g[i][j];
            expect += d * d;
        }
    // The symmetric off-diagonal pair alone contributes (2-g)^2+(0.5-g)^2,
    // minimized at g=1.25 with value 1.125.
    EXPECT_NEAR((2.0 - 1.25) * (2.0 - 1.25) + (0.5 - 1.25) * (0.5 - 1.25), 1.125, 1e-15);
    Var loss = poi_loss(t, t.constant(ratio), t.constant(p_hat));
    EXPECT_NEAR(t.value(loss)(0, 0), expect, 1e-12);
}

TEST(PoiLoss, EqualCountsAllOnesGramIsZero) {
    Tape t;
    Tensor2 ratio = poi_ratio_target({3, 3, 3});
    Tensor2 p_hat(3, 2);
    for (int i = 0; i < 3; ++i) p_hat(i, 0) = 1.0;  // Gram all ones
    Var loss = poi_loss(t, t.constant(ratio), t.constant(p_hat));
    EXPECT_NEAR(t.value(loss)(0, 0), 0.0, 1e-15);
}

TEST(PoiLoss, ZeroCountsSubstituted) {
    Tensor2 ratio = poi_ratio_target({0, 2});
    EXPECT_DOUBLE_EQ(ratio(0, 1), 0.25);  // 0.5 / 2
    EXPECT_DOUBLE_EQ(ratio(1, 0), 4.0);   // 2 / 0.5
}

TEST(PoiLoss, OrthogonalRotationInvariance) {
    Rng rng(13);
    int n = 4, d = 2;
    Tensor2 p_hat = random_tensor(n, d, rng);
    Tensor2 ratio = poi_ratio_target({1, 2, 3, 4});
    double theta = 0.7;
    Tensor2 rot = Tensor2::from({{std::cos(theta), -std::sin(theta)}, {std::sin(theta), std::cos(theta)}});
    Tape t1, t2;
    double a = t1.value(poi_loss(t1, t1.constant(ratio), t1.constant(p_hat)))(0, 0);
    double b = t2.value(poi_loss(t2, t2.constant(ratio), t2.constant(oracle::matmul(p_hat, rot))))(0, 0);
    EXPECT_NEAR(a, b, 1e-9);
}

TEST(TotalLoss, BoundariesAndPaperSetting) {
    Tape t;
    Var l_r = t.constant(Tensor2::from({{2.0}}));
    Var l_mob = t.constant(Tensor2::from({{1.0}}));
    Var l_poi = t.constant(Tensor2::from({{1.0}}));
    EXPECT_DOUBLE_EQ(t.value(total_loss(t, l_r, l_mob, l_poi, 0.0))(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(t.value(total_loss(t, l_r, l_mob, l_poi, 1.0))(0, 0), 2.0);
    EXPECT_NEAR(t.value(total_loss(t, l_r, l_mob, l_poi, 0.3))(0, 0), 2.0, 1e-12);
}

TEST(TotalLoss, AffineInComponents) {
    Rng rng(15);
    for (int rep = 0; rep < 20; ++rep) {
        Tape t;
        double lr = rng.uniform(0.0, 3.0), lm = rng.uniform(0.0, 3.0), lp = rng.uniform(0.0, 3.0);
        double beta = rng.uniform01();
        Var v = total_loss(t, t.constant(Tensor2(1, 1, lr)), t.constant(Tensor2(1, 1, lm)),
                           t.constant(Tensor2(1, 1, lp)), beta);
        EXPECT_NEAR(t.value(v)(0, 0), beta * lr + (1.0 - beta) * (lm + lp), 1e-12);
    }
}

TEST(TotalLoss, BetaOutOfRangeRejected) {
    Tape t;
    Var one = t.constant(Tensor2(1, 1, 1.0));
    EXPECT_THROW(total_loss(t, one, one, one, -0.1), validation_error);
    EXPECT_THROW(total_loss(t, one, one, one, 1.1), validation_error);
}

TEST(Objectives, GradientCheckThroughAllLosses) {
    Rng rng(17);
    int n = 3, d = 3;
    Tensor2 z = random_tensor(n, d, rng);
    Tensor2 mob(n, n);
    for (double& v : mob.data) v = static_cast<double>(rng.next_u64() % 4);
    for (int i = 0; i < n; ++i) mob(i, i) += 1.0;
    Tensor2 pr = mobility_target(mob);
    Tensor2 ratio = poi_ratio_target({1, 2, 5});

    ParamMap params{{"e", random_tensor(n, d, rng)},
                    {"wm", random_tensor(d, n, rng)},
                    {"bm", random_tensor(1, n, rng)},
                    {"wp", random_tensor(d, d, rng)},
                    {"bp", random_tensor(1, d, rng)}};
    auto build = [&](Tape& t, const ParamMap& p) {
        Var e = t.leaf(p.at("e"), "e", true);
        Var l_r = region_embedding_loss(t, e, t.constant(z));
        Var logits = decode_mobility_logits(t, e, t.leaf(p.at("wm"), "wm", true), t.leaf(p.at("bm"), "bm", true));
        Var l_mob = mobility_loss(t, t.constant(pr), logits);
        Var poi_emb = decode_poi(t, e, t.leaf(p.at("wp"), "wp", true), t.leaf(p.at("bp"), "bp", true));
        Var l_poi = poi_loss(t, t.constant(ratio), poi_emb);
        return total_loss(t, l_r, l_mob, l_poi, 0.3);
    };
    FdCheckReport r = finite_difference_check(build, params);
    EXPECT_LT(r.max_rel_err, 1e-4) << "worst " << r.worst_param;
}
