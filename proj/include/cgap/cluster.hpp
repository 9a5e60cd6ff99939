#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cgap/rng.hpp"
#include "cgap/tensor.hpp"

namespace cgap {

struct KMeansResult {
    std::vector<int> assignment;
    Tensor2 centers;
    double inertia = 0.0;
    int iterations = 0;
};

// Seeded k-means++ initialization followed by Lloyd iterations until the
// assignment is stable or 300 rounds pass.
inline KMeansResult kmeans_cluster(const Tensor2& x, int k, uint64_t seed) {
    int n = x.rows, d = x.cols;
    if (k < 1) throw validation_error("kmeans: k must be >= 1");
    if (k > n) throw validation_error("kmeans: k exceeds point count");

    auto dist2 = [&](int i, const Tensor2& centers, int c) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
            double diff = x(i, j) - centers(c, j);
            s += diff * diff;
        }
        return s;
    };

    Rng rng(mix_seed(seed, 101));
    Tensor2 centers(k, d);
    std::vector<double> min_d2(n, 0.0);
    {
        int first = rng.below(n);
        for (int j = 0; j < d; ++j) centers(0, j) = x(first, j);
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                double best = dist2(i, centers, 0);
                for (int cc = 1; cc < c; ++cc) best = std::min(best, dist2(i, centers, cc));
                min_d2[i] = best;
                total += best;
            }
            int pick = 0;
            if (total > 0.0) {
                double target = rng.uniform01() * total, acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += min_d2[i];
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = rng.below(n);
            }
            for (int j = 0; j < d; ++j) centers(c, j) = x(pick, j);
        }
    }

    KMeansResult result;
    result.assignment.assign(n, -1);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist2(i, centers, 0);
            for (int c = 1; c < k; ++c) {
                double dd = dist2(i, centers, c);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (result.assignment[i] != best) {
                result.assignment[i] = best;
                changed = true;
            }
        }
        result.iterations = iter + 1;
        if (!changed) break;

        Tensor2 next(k, d);
        std::vector<int> count(k, 0);
        for (int i = 0; i < n; ++i) {
            ++count[result.assignment[i]];
            for (int j = 0; j < d; ++j) next(result.assignment[i], j) += x(i, j);
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] == 0) {
                // Re-seed the empty cluster with the point farthest from its
                // current center (ties by lowest id).
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    double dd = dist2(i, centers, result.assignment[i]);
                    if (dd > far_d) {
                        far_d = dd;
                        far = i;
                    }
                }
                for (int j = 0; j < d; ++j) next(c, j) = x(far, j);
                count[c] = 1;
                continue;
            }
            for (int j = 0; j < d; ++j) next(c, j) /= count[c];
        }
        centers = std::move(next);
    }

    result.centers = centers;
    result.inertia = 0.0;
    for (int i = 0; i < n; ++i) result.inertia += dist2(i, centers, result.assignment[i]);
    return result;
}

struct ClusteringReport {
    double nmi = 0.0;
    double ari = 0.0;
    std::vector<int> assignment;
};

// NMI = I(U;V) / sqrt(H(U) H(V)), natural logs, 0 when either entropy is 0.
// ARI per the permutation-model adjustment of the Rand index.
inline ClusteringReport clustering_metrics(const std::vector<int>& pred, const std::vector<int>& truth) {
    size_t n = pred.size();
    if (truth.size() != n || n == 0) throw validation_error("clustering_metrics: length mismatch");

    auto relabel = [](const std::vector<int>& v) {
        std::vector<int> out(v.size());
        std::vector<int> ids;
        for (size_t i = 0; i < v.size(); ++i) {
            auto it = std::find(ids.begin(), ids.end(), v[i]);
            if (it == ids.end()) {
                ids.push_back(v[i]);
                out[i] = static_cast<int>(ids.size()) - 1;
            } else {
                out[i] = static_cast<int>(it - ids.begin());
            }
        }
        return std::pair{out, static_cast<int>(ids.size())};
    };
    auto [u, ku] = relabel(pred);
    auto [v, kv] = relabel(truth);

    std::vector<std::vector<long long>> table(ku, std::vector<long long>(kv, 0));
    std::vector<long long> row(ku, 0), col(kv, 0);
    for (size_t i = 0; i < n; ++i) {
        ++table[u[i]][v[i]];
        ++row[u[i]];
        ++col[v[i]];
    }

    double nd = static_cast<double>(n);
    double h_u = 0.0, h_v = 0.0, mi = 0.0;
    for (int a = 0; a < ku; ++a)
        if (row[a] > 0) h_u -= (row[a] / nd) * std::log(row[a] / nd);
    for (int b = 0; b < kv; ++b)
        if (col[b] > 0) h_v -= (col[b] / nd) * std::log(col[b] / nd);
    for (int a = 0; a < ku; ++a)
        for (int b = 0; b < kv; ++b)
            if (table[a][b] > 0)
                mi += (table[a][b] / nd) * std::log(nd * table[a][b] / (static_cast<double>(row[a]) * col[b]));

    ClusteringReport report;
    report.assignment = pred;
    report.nmi = (h_u > 0.0 && h_v > 0.0) ? mi / std::sqrt(h_u * h_v) : 0.0;
    report.nmi = std::clamp(report.nmi, 0.0, 1.0);

    auto choose2 = [](long long m) { return static_cast<double>(m) * (m - 1) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (int a = 0; a < ku; ++a)
        for (int b = 0; b < kv; ++b) sum_ij += choose2(table[a][b]);
    for (int a = 0; a < ku; ++a) sum_a += choose2(row[a]);
    for (int b = 0; b < kv; ++b) sum_b += choose2(col[b]);
    double total_pairs = choose2(static_cast<long long>(n));
    double expected = total_pairs > 0.0 ? sum_a * sum_b / total_pairs : 0.0;
    double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) {
        // Degenerate (e.g. both single-cluster): identical partitions score 1.
        report.ari = sum_ij == max_index ? 1.0 : 0.0;
    } else {
        report.ari = (sum_ij - expected) / (max_index - expected);
    }
    return report;
}

// Land-usage protocol: k-means with k = number of distinct true labels.
inline ClusteringReport evaluate_landuse(const Tensor2& embeddings, const std::vector<int>& landuse,
                                         uint64_t seed) {
    std::set<int> distinct(landuse.begin(), landuse.end());
    KMeansResult km = kmeans_cluster(embeddings, static_cast<int>(distinct.size()), seed);
    return clustering_metrics(km.assignment, landuse);
}

}  // namespace cgap
