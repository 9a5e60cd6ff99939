// Independent reference computations for the test suites. Everything here is
// written as straight-line loops against the mathematical definitions, on
// purpose not calling into the library paths it is used to check.
#pragma once

#include <cmath>
#include <vector>

#include "cgap/tensor.hpp"

namespace oracle {

inline cgap::Tensor2 matmul(const cgap::Tensor2& a, const cgap::Tensor2& b) {
    cgap::Tensor2 c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += a.data[i * a.cols + k] * b.data[k * b.cols + j];
            c.data[i * c.cols + j] = s;
        }
    return c;
}

inline std::vector<double> softmax(const std::vector<double>& x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    std::vector<double> e(x.size());
    double total = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        e[i] = std::exp(x[i] - m);
        total += e[i];
    }
    for (double& v : e) v /= total;
    return e;
}

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(cgap::Tensor2 a, std::vector<double> b) {
    int n = a.rows;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        for (int c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            double f = a(r, col) / a(col, col);
            for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
        x[r] = s / a(r, r);
    }
    return x;
}

// All set partitions of {0..n-1} as membership vectors with contiguous ids.
inline std::vector<std::vector<int>> all_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> membership(n, 0);
    auto rec = [&](auto&& self, int i, int max_used) -> void {
        if (i == n) {
            out.push_back(membership);
            return;
        }
        for (int c = 0; c <= max_used + 1; ++c) {
            membership[i] = c;
            self(self, i + 1, std::max(max_used, c));
        }
    };
    rec(rec, 1, 0);  // element 0 pinned to cluster 0
    return out;
}

// Rand-index bookkeeping by looping over every element pair.
struct PairCounts {
    long long same_same = 0;    // same cluster in both
    long long same_diff = 0;    // same in a, split in b
    long long diff_same = 0;
    long long diff_diff = 0;
};

inline PairCounts count_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    PairCounts pc;
    int n = static_cast<int>(a.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            bool sa = a[i] == a[j], sb = b[i] == b[j];
            if (sa && sb) ++pc.same_same;
            else if (sa) ++pc.same_diff;
            else if (sb) ++pc.diff_same;
            else ++pc.diff_diff;
        }
    return pc;
}

// Hubert-Arabie adjusted Rand index from raw pair counts.
inline double pair_count_ari(const std::vector<int>& a, const std::vector<int>& b) {
    PairCounts pc = count_pairs(a, b);
    double n_pairs = static_cast<double>(pc.same_same + pc.same_diff + pc.diff_same + pc.diff_diff);
    if (n_pairs == 0.0) return 1.0;
    double sum_ij = static_cast<double>(pc.same_same);
    double sum_a = static_cast<double>(pc.same_same + pc.same_diff);
    double sum_b = static_cast<double>(pc.same_same + pc.diff_same);
    double expected = sum_a * sum_b / n_pairs;
    double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return sum_ij == max_index ? 1.0 : 0.0;
    return (sum_ij - expected) / (max_index - expected);
}

// NMI from entropy definitions, natural log, sqrt normalization.
inline double entropy_nmi(const std::vector<int>& a, const std::vector<int>& b) {
    int n = static_cast<int>(a.size());
    int ka = 0, kb = 0;
    for (int v : a) ka = std::max(ka, v + 1);
    for (int v : b) kb = std::max(kb, v + 1);
    std::vector<std::vector<int>> joint(ka, std::vector<int>(kb, 0));
    std::vector<int> ca(ka, 0), cb(kb, 0);
    for (int i = 0; i < n; ++i) {
        ++joint[a[i]][b[i]];
        ++ca[a[i]];
        ++cb[b[i]];
    }
    double ha = 0.0, hb = 0.0, mi = 0.0;
    for (int x = 0; x < ka; ++x)
        if (ca[x]) ha -= (double(ca[x]) / n) * std::log(double(ca[x]) / n);
    for (int y = 0; y < kb; ++y)
        if (cb[y]) hb -= (double(cb[y]) / n) * std::log(double(cb[y]) / n);
    for (int x = 0; x < ka; ++x)
        for (int y = 0; y < kb; ++y)
            if (joint[x][y])
                mi += (double(joint[x][y]) / n) *
                      std::log(double(n) * joint[x][y] / (double(ca[x]) * cb[y]));
    if (ha == 0.0 || hb == 0.0) return 0.0;
    return mi / std::sqrt(ha * hb);
}

}  // namespace oracle
