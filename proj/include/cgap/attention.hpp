#pragma once

#include <cmath>
#include <string>

#include "cgap/tape.hpp"

namespace cgap {

enum class AttentionMode { literal, gated, no_global };

inline AttentionMode attention_mode_from_string(const std::string& s) {
    if (s == "literal") return AttentionMode::literal;
    if (s == "gated") return AttentionMode::gated;
    if (s == "no_global") return AttentionMode::no_global;
    throw validation_error("unknown attention mode '" + s + "' (literal|gated|no_global)");
}

inline const char* to_string(AttentionMode m) {
    switch (m) {
        case AttentionMode::literal: return "literal";
        case AttentionMode::gated: return "gated";
        case AttentionMode::no_global: return "no_global";
    }
    return "?";
}

struct AttentionOutput {
    Var output;
    Var weights;  // row-stochastic attention weights
};

// softmax(Q K^T / sqrt(d)) V
inline AttentionOutput scaled_dot_attention(Tape& t, Var k, Var q, Var v) {
    const Tensor2 &kv = t.value(k), &qv = t.value(q), &vv = t.value(v);
    if (kv.rows != qv.rows || kv.cols != qv.cols || !kv.same_shape(vv))
        throw error("scaled_dot_attention: K/Q/V must share shape, got " + shape_str(kv) + ", " +
                    shape_str(qv) + ", " + shape_str(vv));
    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(qv.cols));
    Var weights = t.row_softmax(t.scale(t.matmul(q, t.transpose(k)), inv_sqrt_d));
    return {t.matmul(weights, v), weights};
}

struct GlobalAttentionVars {
    Var w_k;
    Var w_q;
    Var w_v;
};

struct FusionOutput {
    Var e_hat;
    Var weights;  // invalid in no_global mode
};

// Fuses the global feature h_g (1 x d) with the region embeddings Z.
//
// literal:   keys are the tiled h_g W_k; since every key row is identical the
//            attention weights are uniform and every output row collapses to
//            the column mean of Z W_v. Kept selectable for fidelity.
// gated:     per-region scores s_i = (q_i . k) / sqrt(d) against the single
//            global key k = h_g W_k, softmaxed over regions, added back as a
//            residual: e_i = v_i + n * a_i * k. Default for training.
// no_global: identity (the global feature is withheld).
inline FusionOutput fuse_global(Tape& t, Var z, Var h_g, const GlobalAttentionVars& p, AttentionMode mode) {
    if (mode == AttentionMode::no_global) return {z, Var{}};
    const Tensor2& zv = t.value(z);
    int n = zv.rows;
    if (t.value(h_g).rows != 1 || t.value(h_g).cols != zv.cols)
        throw error("fuse_global: h_g must be 1x" + std::to_string(zv.cols) + ", got " +
                    shape_str(t.value(h_g)));
    if (mode == AttentionMode::literal) {
        Var k_w = t.matmul(t.tile_rows(h_g, n), p.w_k);
        Var q_w = t.matmul(z, p.w_q);
        Var v_w = t.matmul(z, p.w_v);
        AttentionOutput out = scaled_dot_attention(t, k_w, q_w, v_w);
        return {out.output, out.weights};
    }
    Var k = t.matmul(h_g, p.w_k);  // 1 x d
    Var q = t.matmul(z, p.w_q);
    Var v = t.matmul(z, p.w_v);
    double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(zv.cols));
    Var scores = t.scale(t.matmul(q, t.transpose(k)), inv_sqrt_d);       // n x 1
    Var weights = t.transpose(t.row_softmax(t.transpose(scores)));      // softmax over regions
    Var e_hat = t.add(v, t.scale(t.matmul(weights, k), static_cast<double>(n)));
    return {e_hat, weights};
}

}  // namespace cgap
