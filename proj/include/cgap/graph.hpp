#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cgap/tensor.hpp"

namespace cgap {

// A city: regions with geographic adjacency, POI counts, directed mobility
// counts, and planar coordinates used for partitioning and generation.
struct UrbanRegionGraph {
    int n_regions = 0;
    Tensor2 adjacency;                             // n x n, binary, symmetric, zero diagonal
    std::vector<long long> poi;                    // per-region POI count, >= 0
    Tensor2 mobility;                              // n x n trip counts, >= 0
    std::vector<std::array<double, 2>> coords;     // per-region (x, y)

    bool operator==(const UrbanRegionGraph& o) const {
        return n_regions == o.n_regions && adjacency == o.adjacency && poi == o.poi &&
               mobility == o.mobility && coords == o.coords;
    }
};

// Evaluation-only targets; never fed into embedding training.
struct DownstreamLabels {
    std::vector<double> crime;
    std::vector<double> checkin;
    std::vector<int> landuse;

    bool operator==(const DownstreamLabels& o) const {
        return crime == o.crime && checkin == o.checkin && landuse == o.landuse;
    }
};

struct NormalizedAdjacency {
    Tensor2 matrix;
};

inline void validate_graph(const UrbanRegionGraph& g) {
    int n = g.n_regions;
    if (n < 1) throw validation_error("graph: needs at least one region");
    if (g.adjacency.rows != n || g.adjacency.cols != n)
        throw validation_error("graph: adjacency is " + shape_str(g.adjacency) + ", expected " +
                               std::to_string(n) + "x" + std::to_string(n));
    if (g.mobility.rows != n || g.mobility.cols != n)
        throw validation_error("graph: mobility is " + shape_str(g.mobility) + ", expected " +
                               std::to_string(n) + "x" + std::to_string(n));
    if (static_cast<int>(g.poi.size()) != n) throw validation_error("graph: poi length mismatch");
    if (static_cast<int>(g.coords.size()) != n) throw validation_error("graph: coords length mismatch");
    for (int i = 0; i < n; ++i) {
        if (g.adjacency(i, i) != 0.0) throw validation_error("graph: adjacency diagonal must be zero");
        if (g.poi[i] < 0) throw validation_error("graph: negative POI count at region " + std::to_string(i));
        for (int j = 0; j < n; ++j) {
            double a = g.adjacency(i, j);
            if (a != 0.0 && a != 1.0) throw validation_error("graph: adjacency entries must be 0/1");
            if (a != g.adjacency(j, i)) throw validation_error("graph: adjacency must be symmetric");
            if (g.mobility(i, j) < 0.0)
                throw validation_error("graph: negative mobility count at (" + std::to_string(i) + "," +
                                       std::to_string(j) + ")");
        }
    }
}

// D^{-1/2} (N + I) D^{-1/2}. The self-loop keeps every degree positive.
inline NormalizedAdjacency normalize_adjacency(const Tensor2& n_adj) {
    if (n_adj.rows != n_adj.cols) throw validation_error("normalize_adjacency: matrix must be square");
    int n = n_adj.rows;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (n_adj(i, j) != n_adj(j, i))
                throw validation_error("normalize_adjacency: input must be symmetric");

    Tensor2 a_tilde = n_adj;
    for (int i = 0; i < n; ++i) a_tilde(i, i) += 1.0;
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) {
        double deg = 0.0;
        for (int j = 0; j < n; ++j) deg += a_tilde(i, j);
        dinv[i] = 1.0 / std::sqrt(deg);
    }
    Tensor2 out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = dinv[i] * a_tilde(i, j) * dinv[j];
    return NormalizedAdjacency{std::move(out)};
}

// Largest-magnitude eigenvalue estimate via power iteration.
inline double power_iteration_radius(const Tensor2& m, int iters = 200) {
    if (m.rows != m.cols) throw error("power_iteration_radius: matrix must be square");
    int n = m.rows;
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double lambda = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> y(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) y[i] += m(i, j) * x[j];
        double norm = 0.0;
        for (double v : y) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
        lambda = norm;
    }
    return lambda;
}

// Row-normalized transition probabilities of a nonnegative count matrix.
inline std::vector<double> mobility_distribution_row(const Tensor2& m, int row) {
    if (row < 0 || row >= m.rows) throw error("mobility_distribution: row out of range");
    double total = 0.0;
    for (int j = 0; j < m.cols; ++j) total += m(row, j);
    if (total <= 0.0)
        throw validation_error("mobility_distribution: row " + std::to_string(row) +
                               " has no positive entries; fix the dataset (see loader validation)");
    std::vector<double> p(m.cols);
    for (int j = 0; j < m.cols; ++j) p[j] = m(row, j) / total;
    return p;
}

}  // namespace cgap
