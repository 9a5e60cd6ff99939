#pragma once

#include <string>
#include <vector>

#include "cgap/graph.hpp"
#include "cgap/rng.hpp"
#include "cgap/tape.hpp"

namespace cgap {

// Learnable initial node features, i.i.d. uniform(-sqrt(1/d), sqrt(1/d)).
inline Tensor2 init_node_features(int n_regions, int d, uint64_t seed) {
    if (d < 1) throw validation_error("init_node_features: d must be >= 1");
    double bound = std::sqrt(1.0 / static_cast<double>(d));
    Rng rng(seed);
    Tensor2 f(n_regions, d);
    for (double& v : f.data) v = rng.uniform(-bound, bound);
    return f;
}

// Inverted dropout as a constant mask on the tape. No-op when rate == 0.
inline Var apply_dropout(Tape& t, Var x, double rate, Rng& rng) {
    if (rate == 0.0) return x;
    const Tensor2& v = t.value(x);
    Tensor2 mask(v.rows, v.cols);
    double keep = 1.0 - rate;
    for (double& m : mask.data) m = rng.uniform01() < keep ? 1.0 / keep : 0.0;
    return t.mul(x, t.constant(std::move(mask)));
}

// One message-passing layer: ReLU(A_hat H W), dropout on the output while
// training.
inline Var gcn_layer_forward(Tape& t, Var a_hat, Var h, Var w, double dropout, bool training, Rng* rng) {
    Var out = t.relu(t.matmul(t.matmul(a_hat, h), w));
    if (training && dropout > 0.0) out = apply_dropout(t, out, dropout, *rng);
    return out;
}

// Z = GNN(A, F): K stacked layers starting from H^(0) = F.
inline Var encode_regions(Tape& t, Var a_hat, Var features, const std::vector<Var>& layer_weights,
                          double dropout, bool training, Rng* rng) {
    Var h = features;
    for (Var w : layer_weights) h = gcn_layer_forward(t, a_hat, h, w, dropout, training, rng);
    return h;
}

}  // namespace cgap
