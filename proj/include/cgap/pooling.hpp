#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "cgap/graph.hpp"
#include "cgap/tape.hpp"

namespace cgap {

struct LayerPartition {
    int layer = 0;
    std::vector<int> membership;                   // node -> cluster id, contiguous from 0
    int n_clusters = 0;
    std::vector<std::array<double, 2>> centroids;  // mean member coordinates, fed to the next layer
};

enum class PoolMode { attention, linear };

// Greedy region growing: seeds are taken in node-id order and each cluster is
// grown over the adjacency support until it holds mu nodes or runs out of
// frontier; among frontier candidates the one nearest the running cluster
// centroid wins (ties by id). If the graph has no edges at all this would
// return the identity partition and the hierarchy could never shrink, so that
// case falls back to grouping each seed with its mu-1 nearest unassigned
// nodes.
inline LayerPartition partition_graph(const Tensor2& adjacency,
                                      const std::vector<std::array<double, 2>>& coords, int mu,
                                      int layer = 0) {
    if (adjacency.rows != adjacency.cols) throw error("partition_graph: adjacency must be square");
    int n = adjacency.rows;
    if (n < 1) throw error("partition_graph: empty graph");
    if (mu < 1) throw validation_error("partition_graph: mu must be >= 1");
    if (static_cast<int>(coords.size()) != n) throw error("partition_graph: coords length mismatch");

    LayerPartition part;
    part.layer = layer;
    part.membership.assign(n, -1);

    auto dist2 = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        double dx = a[0] - b[0], dy = a[1] - b[1];
        return dx * dx + dy * dy;
    };

    auto grow = [&](int seed, int cluster) {
        std::vector<int> members{seed};
        part.membership[seed] = cluster;
        std::array<double, 2> centroid = coords[seed];
        std::set<int> frontier;
        auto push_neighbors = [&](int u) {
            for (int v = 0; v < n; ++v)
                if (adjacency(u, v) > 0.0 && v != u && part.membership[v] < 0) frontier.insert(v);
        };
        push_neighbors(seed);
        while (static_cast<int>(members.size()) < mu && !frontier.empty()) {
            int best = -1;
            double best_d = 0.0;
            for (int v : frontier) {
                double d = dist2(coords[v], centroid);
                if (best < 0 || d < best_d || (d == best_d && v < best)) {
                    best = v;
                    best_d = d;
                }
            }
            frontier.erase(best);
            part.membership[best] = cluster;
            members.push_back(best);
            for (size_t a = 0; a < 2; ++a) {
                centroid[a] = 0.0;
                for (int m : members) centroid[a] += coords[m][a];
                centroid[a] /= static_cast<double>(members.size());
            }
            push_neighbors(best);
        }
        part.centroids.push_back(centroid);
    };

    for (int seed = 0; seed < n; ++seed) {
        if (part.membership[seed] >= 0) continue;
        grow(seed, part.n_clusters);
        ++part.n_clusters;
    }

    if (part.n_clusters == n && n > 1 && mu > 1) {
        // Edgeless layer: spatial fallback keeps the hierarchy strictly
        // shrinking.
        part.membership.assign(n, -1);
        part.n_clusters = 0;
        part.centroids.clear();
        for (int seed = 0; seed < n; ++seed) {
            if (part.membership[seed] >= 0) continue;
            std::vector<int> free;
            for (int v = 0; v < n; ++v)
                if (v != seed && part.membership[v] < 0) free.push_back(v);
            std::sort(free.begin(), free.end(), [&](int a, int b) {
                double da = dist2(coords[a], coords[seed]), db = dist2(coords[b], coords[seed]);
                return da != db ? da < db : a < b;
            });
            std::vector<int> members{seed};
            for (int t = 0; t < mu - 1 && t < static_cast<int>(free.size()); ++t) members.push_back(free[t]);
            std::array<double, 2> centroid = {0.0, 0.0};
            for (int m : members) {
                part.membership[m] = part.n_clusters;
                centroid[0] += coords[m][0];
                centroid[1] += coords[m][1];
            }
            centroid[0] /= static_cast<double>(members.size());
            centroid[1] /= static_cast<double>(members.size());
            part.centroids.push_back(centroid);
            ++part.n_clusters;
        }
    }
    return part;
}

// Per-layer CGAP parameters as tape leaves.
struct CgapLayerVars {
    Var score_proj;   // W_s, d x d   (attention mode)
    Var score_vec;    // a,   d x 1   (attention mode)
    Var linear_map;   // L,   d x d   (linear ablation)
    Var transform;    // W,   d x d
    Var bias;         // b,   1 x d
    double alpha = 1.0;
};

// score_u = a^T tanh(W_s^T z_u), computed for all nodes at once.
inline Var assignment_scores(Tape& t, Var z, Var score_proj, Var score_vec) {
    return t.matmul(t.tanh(t.matmul(z, score_proj)), score_vec);
}

// S: column c is a softmax over the members of cluster c, zero elsewhere.
inline Var assignment_matrix(Tape& t, Var z, const LayerPartition& part, Var score_proj, Var score_vec) {
    Var scores = assignment_scores(t, z, score_proj, score_vec);
    return t.assignment_softmax(scores, part.membership, part.n_clusters);
}

// Uniform within-cluster averaging matrix (constant, not learned).
inline Tensor2 uniform_assignment(const LayerPartition& part) {
    int n = static_cast<int>(part.membership.size());
    std::vector<int> count(part.n_clusters, 0);
    for (int m : part.membership) ++count[m];
    Tensor2 s(n, part.n_clusters);
    for (int u = 0; u < n; ++u) s(u, part.membership[u]) = 1.0 / static_cast<double>(count[part.membership[u]]);
    return s;
}

// X = alpha * S^T Z
inline Var pool_features(Tape& t, Var z, Var s, double alpha) {
    return t.scale(t.matmul(t.transpose(s), z), alpha);
}

// A^{l+1} = alpha * S^T A S
inline Var pool_adjacency(Tape& t, Var a, Var s, double alpha) {
    return t.scale(t.matmul(t.matmul(t.transpose(s), a), s), alpha);
}

// Linear-module ablation of the local attention unit: uniform averaging
// followed by a learnable map.
inline Var linear_pooling_ablation(Tape& t, Var z, const LayerPartition& part, Var linear_map, double alpha) {
    Var s = t.constant(uniform_assignment(part));
    return t.scale(t.matmul(t.matmul(t.transpose(s), z), linear_map), alpha);
}

struct CoarsenOutput {
    Var z_next;
    Var a_next;
    Var assignment;  // the S actually used (attention or uniform)
};

// One pooling layer: Z^{l+1} = ReLU(A^{l+1} X W + b).
inline CoarsenOutput coarsen_step(Tape& t, Var z, Var a, const LayerPartition& part,
                                  const CgapLayerVars& p, PoolMode mode) {
    Var s, x;
    if (mode == PoolMode::attention) {
        s = assignment_matrix(t, z, part, p.score_proj, p.score_vec);
        x = pool_features(t, z, s, p.alpha);
    } else {
        s = t.constant(uniform_assignment(part));
        x = t.scale(t.matmul(t.matmul(t.transpose(s), z), p.linear_map), p.alpha);
    }
    Var a_next = pool_adjacency(t, a, s, p.alpha);
    Var pre = t.add(t.matmul(t.matmul(a_next, x), p.transform), t.tile_rows(p.bias, part.n_clusters));
    return {t.relu(pre), a_next, s};
}

struct PoolingLayerSnapshot {
    LayerPartition partition;
    Tensor2 assignment;
    Tensor2 coarse_adjacency;
    Tensor2 coarse_embedding;
};

struct PoolingHierarchy {
    std::vector<PoolingLayerSnapshot> layers;
    Tensor2 global_feature;  // 1 x d
};

struct PoolingResult {
    Var h_g;
    PoolingHierarchy hierarchy;
};

// Coarsens (Z^0, A^0) layer by layer until one node remains; partitions are
// recomputed per layer from the coarsened adjacency support and the centroid
// cascade. A^0 is the original binary adjacency.
inline PoolingResult extract_global_feature(Tape& t, Var z0, Var a0,
                                            std::vector<std::array<double, 2>> coords,
                                            const std::vector<CgapLayerVars>& layer_params, int mu,
                                            PoolMode mode) {
    if (mu < 2) throw validation_error("extract_global_feature: mu must be >= 2");
    PoolingResult result;
    Var z = z0, a = a0;
    int layer = 0;
    while (t.value(z).rows > 1) {
        LayerPartition part = partition_graph(t.value(a), coords, mu, layer);
        if (layer >= static_cast<int>(layer_params.size()))
            throw error("extract_global_feature: parameter list too short, need layer " +
                        std::to_string(layer));
        CoarsenOutput out = coarsen_step(t, z, a, part, layer_params[layer], mode);
        coords = part.centroids;
        result.hierarchy.layers.push_back(
            {part, t.value(out.assignment), t.value(out.a_next), t.value(out.z_next)});
        z = out.z_next;
        a = out.a_next;
        ++layer;
    }
    result.h_g = z;
    result.hierarchy.global_feature = t.value(z);
    return result;
}

// Cluster-size cascade for a graph, without touching any tape. Used to size
// the per-layer parameter list and for the storage accounting report.
inline std::vector<LayerPartition> plan_partitions(const Tensor2& adjacency,
                                                   std::vector<std::array<double, 2>> coords, int mu) {
    std::vector<LayerPartition> plan;
    Tensor2 a = adjacency;
    int layer = 0;
    while (a.rows > 1) {
        LayerPartition part = partition_graph(a, coords, mu, layer++);
        if (part.n_clusters >= a.rows && a.rows > 1)
            throw error("plan_partitions: partition did not shrink");  // unreachable with mu >= 2
        // Coarse support: clusters are adjacent iff any member pair is.
        Tensor2 next(part.n_clusters, part.n_clusters);
        for (int u = 0; u < a.rows; ++u)
            for (int v = 0; v < a.cols; ++v)
                if (a(u, v) > 0.0) next(part.membership[u], part.membership[v]) = 1.0;
        coords = part.centroids;
        plan.push_back(std::move(part));
        a = std::move(next);
    }
    return plan;
}

struct MemoryAccountingReport {
    long long dense_entries = 0;  // sum over layers of n_l^2
    long long cgap_entries = 0;   // sum over layers of n_l * n_{l+1}
    double ratio = 1.0;
};

// Assignment storage of the masked hierarchy vs a dense per-layer assignment;
// the ratio lands near 1/mu.
inline MemoryAccountingReport memory_accounting(const UrbanRegionGraph& g, int mu, int max_depth = -1) {
    if (mu < 1) throw validation_error("memory_accounting: mu must be >= 1");
    MemoryAccountingReport report;
    if (mu == 1) {
        // No coarsening: the masked matrix is the identity-shaped n x n.
        long long n = g.n_regions;
        report.dense_entries = n * n;
        report.cgap_entries = n * n;
        report.ratio = 1.0;
        return report;
    }
    auto plan = plan_partitions(g.adjacency, g.coords, mu);
    int depth = max_depth < 0 ? static_cast<int>(plan.size())
                              : std::min<int>(max_depth, static_cast<int>(plan.size()));
    for (int l = 0; l < depth; ++l) {
        long long n_l = static_cast<long long>(plan[l].membership.size());
        long long n_next = plan[l].n_clusters;
        report.dense_entries += n_l * n_l;
        report.cgap_entries += n_l * n_next;
    }
    if (report.dense_entries > 0)
        report.ratio = static_cast<double>(report.cgap_entries) / static_cast<double>(report.dense_entries);
    return report;
}

}  // namespace cgap
