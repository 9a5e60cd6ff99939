#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "cgap/checkpoint.hpp"
#include "cgap/cluster.hpp"
#include "cgap/gradcheck.hpp"
#include "cgap/lasso.hpp"
#include "cgap/model.hpp"

namespace cgap {

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<LossBreakdown> log;  // one row per epoch, training-pass losses
    LossBreakdown initial_eval;      // dropout-off losses before the first update
    LossBreakdown final_eval;        // dropout-off losses after the last update
};

inline LossBreakdown eval_losses(const UrbanRegionGraph& g, const TrainingData& td, const ParamMap& params,
                                 const TrainingConfig& cfg) {
    Tape tape;
    return build_model(tape, g, td, params, cfg, /*training=*/false, nullptr).losses;
}

// Full-batch Adam for cfg.epochs steps. Deterministic given (graph, config).
inline TrainResult train(const UrbanRegionGraph& g, const TrainingConfig& cfg) {
    TrainingData td = prepare_training_data(g, cfg);
    ParamMap params = init_params(g, cfg, td.pooling_depth);
    AdamState adam(params, cfg.learning_rate);
    Rng dropout_rng(mix_seed(cfg.seed, 2));

    TrainResult result;
    result.initial_eval = eval_losses(g, td, params, cfg);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        try {
            Tape tape;
            ModelForward mf = build_model(tape, g, td, params, cfg, /*training=*/true, &dropout_rng);
            if (!std::isfinite(mf.losses.l_total))
                throw error("non-finite total loss " + std::to_string(mf.losses.l_total));
            tape.backward(mf.l_total);
            ParamMap grads = tape.gradients();
            adam_step(params, grads, adam);
            result.log.push_back(mf.losses);
        } catch (const error& e) {
            throw error("training aborted at epoch " + std::to_string(epoch) + ": " + e.what() +
                        (result.log.empty()
                             ? std::string()
                             : " (last losses: l_r=" + std::to_string(result.log.back().l_r) +
                                   " l_mob=" + std::to_string(result.log.back().l_mob) +
                                   " l_poi=" + std::to_string(result.log.back().l_poi) + ")"));
        }
    }
    result.final_eval = eval_losses(g, td, params, cfg);
    result.checkpoint = Checkpoint{1, cfg, std::move(params), result.final_eval, cfg.epochs};
    return result;
}

inline void check_checkpoint_matches(const Checkpoint& ckpt, const UrbanRegionGraph& g) {
    auto it = ckpt.params.find("features");
    if (it == ckpt.params.end()) throw validation_error("checkpoint: missing 'features'");
    if (it->second.rows != g.n_regions)
        throw validation_error("checkpoint trained on " + std::to_string(it->second.rows) +
                               " regions, dataset has " + std::to_string(g.n_regions));
    if (it->second.cols != ckpt.config.d) throw validation_error("checkpoint: feature width != config d");
}

// Inference pass (dropout off); returns the final region representation.
inline Tensor2 embed(const Checkpoint& ckpt, const UrbanRegionGraph& g) {
    check_checkpoint_matches(ckpt, g);
    TrainingData td = prepare_inference_data(g, ckpt.config);
    Tape tape;
    ModelForward mf =
        build_model(tape, g, td, ckpt.params, ckpt.config, /*training=*/false, nullptr, /*with_losses=*/false);
    return tape.value(mf.e_hat);
}

struct EmbedDetails {
    Tensor2 z;
    Tensor2 e_hat;
    PoolingHierarchy hierarchy;
};

inline EmbedDetails embed_with_details(const Checkpoint& ckpt, const UrbanRegionGraph& g) {
    check_checkpoint_matches(ckpt, g);
    TrainingData td = prepare_inference_data(g, ckpt.config);
    Tape tape;
    ModelForward mf =
        build_model(tape, g, td, ckpt.params, ckpt.config, /*training=*/false, nullptr, /*with_losses=*/false);
    return {tape.value(mf.z), tape.value(mf.e_hat), std::move(mf.hierarchy)};
}

inline int worker_count() {
    const char* env = std::getenv("CGAP_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v < 1 ? 1 : v;
}

template <typename Fn>
inline void run_indexed(int count, Fn&& fn) {
    int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct AblationRow {
    std::string variant;
    LossBreakdown final_loss;
    RegressionReport crime;
    RegressionReport checkin;
};

// Trains {full, CGAP(L), CGAP(No-G), poi_only, mobility_only} with a shared
// seed and evaluates both regression tasks on the frozen embeddings.
inline std::vector<AblationRow> run_ablation_suite(const UrbanRegionGraph& g, const DownstreamLabels& labels,
                                                   const TrainingConfig& base, double lambda = 0.01,
                                                   int folds = 5) {
    struct Variant {
        const char* name;
        TrainingConfig cfg;
    };
    std::vector<Variant> variants;
    {
        TrainingConfig c = base;
        variants.push_back({"full", c});
        c = base;
        c.pooling = PoolMode::linear;
        variants.push_back({"cgap_linear", c});
        c = base;
        c.attention_mode = AttentionMode::no_global;
        variants.push_back({"cgap_no_global", c});
        c = base;
        c.data_mode = DataMode::poi_only;
        variants.push_back({"poi_only", c});
        c = base;
        c.data_mode = DataMode::mobility_only;
        variants.push_back({"mobility_only", c});
    }

    std::vector<AblationRow> rows(variants.size());
    run_indexed(static_cast<int>(variants.size()), [&](int i) {
        TrainResult tr = train(g, variants[i].cfg);
        Tensor2 e = embed(tr.checkpoint, g);
        rows[i] = {variants[i].name, tr.final_eval,
                   evaluate_regression_task(e, labels.crime, lambda, folds, variants[i].cfg.seed),
                   evaluate_regression_task(e, labels.checkin, lambda, folds, variants[i].cfg.seed)};
    });
    return rows;
}

struct BetaSweepRow {
    double beta = 0.0;
    double crime_r2 = 0.0;
};

// Trains once per beta (shared seed) and reports crime-task R^2.
inline std::vector<BetaSweepRow> beta_sweep(const UrbanRegionGraph& g, const DownstreamLabels& labels,
                                            const TrainingConfig& base, const std::vector<double>& betas,
                                            double lambda = 0.01, int folds = 5) {
    for (double b : betas)
        if (b < 0.0 || b > 1.0) throw validation_error("beta_sweep: beta must be in [0,1]");
    std::vector<BetaSweepRow> rows(betas.size());
    run_indexed(static_cast<int>(betas.size()), [&](int i) {
        TrainingConfig cfg = base;
        cfg.beta = betas[i];
        TrainResult tr = train(g, cfg);
        Tensor2 e = embed(tr.checkpoint, g);
        rows[i] = {betas[i], evaluate_regression_task(e, labels.crime, lambda, folds, cfg.seed).r2};
    });
    return rows;
}

// Gradient check of the full model loss in the given configuration
// (dropout forced off).
inline FdCheckReport model_gradient_check(const UrbanRegionGraph& g, TrainingConfig cfg, double h = 1e-5) {
    cfg.dropout = 0.0;
    TrainingData td = prepare_training_data(g, cfg);
    ParamMap params = init_params(g, cfg, td.pooling_depth);
    auto build = [&](Tape& t, const ParamMap& p) {
        return build_model(t, g, td, p, cfg, /*training=*/false, nullptr).l_total;
    };
    return finite_difference_check(build, std::move(params), h);
}

}  // namespace cgap
