#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgap/adam.hpp"
#include "cgap/attention.hpp"
#include "cgap/gcn.hpp"
#include "cgap/graph.hpp"
#include "cgap/objectives.hpp"
#include "cgap/pooling.hpp"

namespace cgap {

enum class DataMode { both, poi_only, mobility_only };

inline DataMode data_mode_from_string(const std::string& s) {
    if (s == "both") return DataMode::both;
    if (s == "poi_only") return DataMode::poi_only;
    if (s == "mobility_only") return DataMode::mobility_only;
    throw validation_error("unknown data mode '" + s + "' (both|poi_only|mobility_only)");
}

inline const char* to_string(DataMode m) {
    switch (m) {
        case DataMode::both: return "both";
        case DataMode::poi_only: return "poi_only";
        case DataMode::mobility_only: return "mobility_only";
    }
    return "?";
}

inline PoolMode pool_mode_from_string(const std::string& s) {
    if (s == "attention") return PoolMode::attention;
    if (s == "linear") return PoolMode::linear;
    throw validation_error("unknown pooling mode '" + s + "' (attention|linear)");
}

inline const char* to_string(PoolMode m) {
    return m == PoolMode::attention ? "attention" : "linear";
}

struct TrainingConfig {
    int d = 128;
    double learning_rate = 1e-3;
    int epochs = 2000;
    double dropout = 0.5;
    double beta = 0.3;
    int mu = 4;
    double alpha = 1.0;           // applied to every pooling layer
    std::vector<double> alphas;   // optional per-layer override
    int gcn_layers = 2;
    AttentionMode attention_mode = AttentionMode::gated;
    PoolMode pooling = PoolMode::attention;
    DataMode data_mode = DataMode::both;
    uint64_t seed = 0;
};

inline void validate_config(const TrainingConfig& c) {
    if (c.d < 1) throw validation_error("config: d must be >= 1");
    if (c.learning_rate <= 0.0) throw validation_error("config: learning rate must be positive");
    if (c.epochs < 0) throw validation_error("config: epochs must be >= 0");
    if (c.dropout < 0.0 || c.dropout >= 1.0) throw validation_error("config: dropout must be in [0,1)");
    if (c.beta < 0.0 || c.beta > 1.0) throw validation_error("config: beta must be in [0,1]");
    if (c.mu < 2) throw validation_error("config: mu must be >= 2");
    if (c.alpha <= 0.0) throw validation_error("config: alpha must be positive");
    for (double a : c.alphas)
        if (a <= 0.0) throw validation_error("config: per-layer alpha must be positive");
    if (c.gcn_layers < 0) throw validation_error("config: gcn_layers must be >= 0");
}

inline bool uses_mobility(const TrainingConfig& c) { return c.data_mode != DataMode::poi_only; }
inline bool uses_poi(const TrainingConfig& c) { return c.data_mode != DataMode::mobility_only; }

// Constant tensors shared by every epoch of a run.
struct TrainingData {
    NormalizedAdjacency a_hat;
    std::optional<Tensor2> mobility_pr;
    std::optional<Tensor2> poi_ratio;
    int pooling_depth = 0;
};

inline TrainingData prepare_training_data(const UrbanRegionGraph& g, const TrainingConfig& cfg) {
    validate_graph(g);
    validate_config(cfg);
    TrainingData td{normalize_adjacency(g.adjacency)};
    if (uses_mobility(cfg)) td.mobility_pr = mobility_target(g.mobility);
    if (uses_poi(cfg)) td.poi_ratio = poi_ratio_target(g.poi);
    td.pooling_depth = static_cast<int>(plan_partitions(g.adjacency, g.coords, cfg.mu).size());
    if (!cfg.alphas.empty() && static_cast<int>(cfg.alphas.size()) < td.pooling_depth)
        throw validation_error("config: " + std::to_string(cfg.alphas.size()) + " alphas for " +
                               std::to_string(td.pooling_depth) + " pooling layers");
    return td;
}

// Skips the loss targets; enough for embedding-only passes.
inline TrainingData prepare_inference_data(const UrbanRegionGraph& g, const TrainingConfig& cfg) {
    validate_graph(g);
    validate_config(cfg);
    TrainingData td{normalize_adjacency(g.adjacency)};
    td.pooling_depth = static_cast<int>(plan_partitions(g.adjacency, g.coords, cfg.mu).size());
    return td;
}

inline double layer_alpha(const TrainingConfig& cfg, int layer) {
    return cfg.alphas.empty() ? cfg.alpha : cfg.alphas[layer];
}

// All learnable tensors by stable name. Only tensors the configured modes
// actually use are allocated.
inline ParamMap init_params(const UrbanRegionGraph& g, const TrainingConfig& cfg, int pooling_depth) {
    int d = cfg.d;
    int n = g.n_regions;
    double bound = std::sqrt(1.0 / static_cast<double>(d));
    Rng rng(mix_seed(cfg.seed, 1));
    auto uniform_tensor = [&](int r, int c) {
        Tensor2 t(r, c);
        for (double& v : t.data) v = rng.uniform(-bound, bound);
        return t;
    };

    ParamMap p;
    p["features"] = init_node_features(n, d, mix_seed(cfg.seed, 0));
    for (int k = 0; k < cfg.gcn_layers; ++k) p["gcn." + std::to_string(k) + ".W"] = uniform_tensor(d, d);
    if (cfg.attention_mode != AttentionMode::no_global) {
        for (int l = 0; l < pooling_depth; ++l) {
            std::string base = "pool." + std::to_string(l) + ".";
            if (cfg.pooling == PoolMode::attention) {
                p[base + "Ws"] = uniform_tensor(d, d);
                p[base + "a"] = uniform_tensor(d, 1);
            } else {
                p[base + "L"] = uniform_tensor(d, d);
            }
            p[base + "W"] = uniform_tensor(d, d);
            p[base + "b"] = Tensor2(1, d);
        }
        p["attn.Wk"] = uniform_tensor(d, d);
        p["attn.Wq"] = uniform_tensor(d, d);
        p["attn.Wv"] = uniform_tensor(d, d);
    }
    if (uses_mobility(cfg)) {
        p["dec.mob.W"] = uniform_tensor(d, n);
        p["dec.mob.b"] = Tensor2(1, n);
    }
    if (uses_poi(cfg)) {
        p["dec.poi.W"] = uniform_tensor(d, d);
        p["dec.poi.b"] = Tensor2(1, d);
    }
    return p;
}

struct ModelForward {
    Var z;
    Var e_hat;
    Var h_g;
    Var l_r;
    Var l_mob;   // invalid when the mode drops mobility
    Var l_poi;   // invalid when the mode drops POI
    Var l_total;
    PoolingHierarchy hierarchy;
    LossBreakdown losses;
};

// Builds the whole computation for one pass: encode, pool, fuse, decode,
// losses. Leaves are created for every entry of `params`. Pass
// with_losses=false for embedding-only inference.
inline ModelForward build_model(Tape& t, const UrbanRegionGraph& g, const TrainingData& td,
                                const ParamMap& params, const TrainingConfig& cfg, bool training,
                                Rng* dropout_rng, bool with_losses = true) {
    std::map<std::string, Var> leaf;
    for (const auto& [name, tensor] : params) leaf[name] = t.leaf(tensor, name, true);

    ModelForward mf;
    Var a_hat = t.constant(td.a_hat.matrix);
    std::vector<Var> gcn_weights;
    for (int k = 0; k < cfg.gcn_layers; ++k) gcn_weights.push_back(leaf.at("gcn." + std::to_string(k) + ".W"));
    mf.z = encode_regions(t, a_hat, leaf.at("features"), gcn_weights, cfg.dropout, training, dropout_rng);

    if (cfg.attention_mode == AttentionMode::no_global) {
        // The pooling branch feeds only the withheld global feature; skip it.
        mf.h_g = Var{};
        mf.e_hat = mf.z;
    } else {
        std::vector<CgapLayerVars> layers;
        for (int l = 0; l < td.pooling_depth; ++l) {
            std::string base = "pool." + std::to_string(l) + ".";
            CgapLayerVars lv;
            if (cfg.pooling == PoolMode::attention) {
                lv.score_proj = leaf.at(base + "Ws");
                lv.score_vec = leaf.at(base + "a");
            } else {
                lv.linear_map = leaf.at(base + "L");
            }
            lv.transform = leaf.at(base + "W");
            lv.bias = leaf.at(base + "b");
            lv.alpha = layer_alpha(cfg, l);
            layers.push_back(lv);
        }
        Var a0 = t.constant(g.adjacency);
        PoolingResult pr = extract_global_feature(t, mf.z, a0, g.coords, layers, cfg.mu, cfg.pooling);
        mf.h_g = pr.h_g;
        mf.hierarchy = std::move(pr.hierarchy);
        GlobalAttentionVars attn{leaf.at("attn.Wk"), leaf.at("attn.Wq"), leaf.at("attn.Wv")};
        mf.e_hat = fuse_global(t, mf.z, mf.h_g, attn, cfg.attention_mode).e_hat;
    }

    if (!with_losses) return mf;

    mf.l_r = region_embedding_loss(t, mf.e_hat, mf.z);
    if (uses_mobility(cfg)) {
        Var logits = decode_mobility_logits(t, mf.e_hat, leaf.at("dec.mob.W"), leaf.at("dec.mob.b"));
        mf.l_mob = mobility_loss(t, t.constant(*td.mobility_pr), logits);
    }
    if (uses_poi(cfg)) {
        Var poi_emb = decode_poi(t, mf.e_hat, leaf.at("dec.poi.W"), leaf.at("dec.poi.b"));
        mf.l_poi = poi_loss(t, t.constant(*td.poi_ratio), poi_emb);
    }
    mf.l_total = total_loss(t, mf.l_r, mf.l_mob, mf.l_poi, cfg.beta);

    mf.losses.l_r = t.value(mf.l_r)(0, 0);
    mf.losses.l_mob = mf.l_mob.valid() ? t.value(mf.l_mob)(0, 0) : 0.0;
    mf.losses.l_poi = mf.l_poi.valid() ? t.value(mf.l_poi)(0, 0) : 0.0;
    mf.losses.l_total = t.value(mf.l_total)(0, 0);
    mf.losses.beta = cfg.beta;
    return mf;
}

}  // namespace cgap
