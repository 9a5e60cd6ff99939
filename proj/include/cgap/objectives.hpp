#pragma once

#include <cmath>
#include <string>

#include "cgap/graph.hpp"
#include "cgap/tape.hpp"

namespace cgap {

// sum_i exp(-||e_i - z_i||_2). Implemented exactly as stated; note that
// minimizing it pushes E away from Z.
inline Var region_embedding_loss(Tape& t, Var e_hat, Var z) {
    Var distances = t.sqrt(t.row_sum(t.sqdiff(e_hat, z)));  // n x 1
    return t.sum_all(t.exp(t.scale(distances, -1.0)));
}

struct DecoderVars {
    Var mob_weight;  // d x n
    Var mob_bias;    // 1 x n
    Var poi_weight;  // d x d
    Var poi_bias;    // 1 x d
};

// Mobility head logits (n x n); rows become distributions via row_softmax.
inline Var decode_mobility_logits(Tape& t, Var e_hat, Var weight, Var bias) {
    int n = t.value(e_hat).rows;
    return t.add(t.matmul(e_hat, weight), t.tile_rows(bias, n));
}

// POI embedding head (n x d).
inline Var decode_poi(Tape& t, Var e_hat, Var weight, Var bias) {
    int n = t.value(e_hat).rows;
    return t.add(t.matmul(e_hat, weight), t.tile_rows(bias, n));
}

// Row-normalized true mobility distribution; every row of the input must
// have a positive sum (the loader/generator guarantee this for real data).
inline Tensor2 mobility_target(const Tensor2& mobility) {
    Tensor2 pr(mobility.rows, mobility.cols);
    for (int i = 0; i < mobility.rows; ++i) {
        auto row = mobility_distribution_row(mobility, i);
        for (int j = 0; j < mobility.cols; ++j) pr(i, j) = row[j];
    }
    return pr;
}

// Cross entropy sum_ij -Pr(j|i) log(Pr_hat(j|i)), with predicted rows taken as
// the softmax of the decoded logits (exp keeps flows positive before
// normalizing). 0 * log(.) terms vanish through the zero true probabilities.
inline Var mobility_loss(Tape& t, Var true_pr, Var mob_logits) {
    Var pred = t.row_softmax(mob_logits);
    return t.sum_all(t.mul(true_pr, t.scale(t.log_eps(pred), -1.0)));
}

// Target ratio matrix R[i,j] = p_i / p_j with zero counts replaced by 0.5.
inline Tensor2 poi_ratio_target(const std::vector<long long>& poi) {
    int n = static_cast<int>(poi.size());
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = poi[i] == 0 ? 0.5 : static_cast<double>(poi[i]);
    Tensor2 r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = p[i] / p[j];
    return r;
}

// sum_ij (p_i/p_j - p_hat_i . p_hat_j)^2
inline Var poi_loss(Tape& t, Var ratio_target, Var poi_embedding) {
    Var gram = t.matmul(poi_embedding, t.transpose(poi_embedding));
    return t.sum_all(t.sqdiff(ratio_target, gram));
}

struct LossBreakdown {
    double l_r = 0.0;
    double l_mob = 0.0;
    double l_poi = 0.0;
    double l_total = 0.0;
    double beta = 0.0;
};

// L = beta * L_r + (1 - beta) * (L_mob + L_poi). Vars for absent components
// may be invalid (ablations); they contribute zero.
inline Var total_loss(Tape& t, Var l_r, Var l_mob, Var l_poi, double beta) {
    if (beta < 0.0 || beta > 1.0) throw validation_error("total_loss: beta must be in [0,1]");
    Var task = l_mob.valid() && l_poi.valid() ? t.add(l_mob, l_poi)
               : l_mob.valid()                ? l_mob
               : l_poi.valid()                ? l_poi
                                              : t.constant(Tensor2(1, 1));
    return t.add(t.scale(l_r, beta), t.scale(task, 1.0 - beta));
}

}  // namespace cgap
