#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "cgap/error.hpp"

namespace cgap {

// Dense row-major 2-D matrix of doubles. The single value type every other
// module computes with.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw error("Tensor2: negative shape");
    }

    static Tensor2 from(std::initializer_list<std::initializer_list<double>> rows_in) {
        Tensor2 t(static_cast<int>(rows_in.size()), rows_in.size() ? static_cast<int>(rows_in.begin()->size()) : 0);
        int r = 0;
        for (const auto& row : rows_in) {
            if (static_cast<int>(row.size()) != t.cols) throw error("Tensor2::from: ragged rows");
            int c = 0;
            for (double v : row) t(r, c++) = v;
            ++r;
        }
        return t;
    }

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Tensor2& o) const { return rows == o.rows && cols == o.cols && data == o.data; }
};

inline std::string shape_str(const Tensor2& t) {
    return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

inline bool all_finite(const Tensor2& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

// C = A * B, inner sum over k in ascending order.
inline Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
    if (a.cols != b.rows)
        throw error("matmul: inner dimensions differ, " + shape_str(a) + " * " + shape_str(b));
    Tensor2 c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

inline Tensor2 transpose(const Tensor2& a) {
    Tensor2 t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

inline Tensor2 identity(int n) {
    Tensor2 t(n, n);
    for (int i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

inline double max_abs_diff(const Tensor2& a, const Tensor2& b) {
    if (!a.same_shape(b)) throw error("max_abs_diff: shapes differ, " + shape_str(a) + " vs " + shape_str(b));
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace cgap
