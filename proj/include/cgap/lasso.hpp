#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cgap/graph.hpp"
#include "cgap/rng.hpp"
#include "cgap/tensor.hpp"

namespace cgap {

struct LassoFit {
    std::vector<double> coef;  // original feature space
    double intercept = 0.0;
    int sweeps = 0;
};

inline double soft_threshold(double x, double lambda) {
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

// Cyclic coordinate descent on (1/2n)||y - Xb - b0||^2 + lambda*||b||_1.
// Features are standardized internally (population variance; constant columns
// drop out) and the returned coefficients are mapped back to the original
// space, so prediction is a plain affine map and no test data ever enters the
// standardization.
inline LassoFit lasso_fit(const Tensor2& x, const std::vector<double>& y, double lambda) {
    int n = x.rows, p = x.cols;
    if (n < 2) throw validation_error("lasso_fit: need at least two samples");
    if (static_cast<int>(y.size()) != n) throw validation_error("lasso_fit: y length mismatch");
    if (!all_finite(x)) throw validation_error("lasso_fit: non-finite feature");
    for (double v : y)
        if (!std::isfinite(v)) throw validation_error("lasso_fit: non-finite target");
    if (lambda < 0.0) throw validation_error("lasso_fit: lambda must be >= 0");

    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < n; ++i) mean[j] += x(i, j);
        mean[j] /= n;
        for (int i = 0; i < n; ++i) sd[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
        sd[j] = std::sqrt(sd[j] / n);
    }
    double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;

    Tensor2 xs(n, p);
    std::vector<bool> active(p);
    for (int j = 0; j < p; ++j) {
        active[j] = sd[j] > 0.0;
        if (!active[j]) continue;
        for (int i = 0; i < n; ++i) xs(i, j) = (x(i, j) - mean[j]) / sd[j];
    }

    std::vector<double> beta(p, 0.0), residual(n);
    for (int i = 0; i < n; ++i) residual[i] = y[i] - y_mean;

    const double tol = 1e-8;
    const int max_sweeps = 10000;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
            if (!active[j]) continue;
            double rho = 0.0;
            for (int i = 0; i < n; ++i) rho += xs(i, j) * residual[i];
            rho = rho / n + beta[j];  // column variance is exactly 1
            double next = soft_threshold(rho, lambda);
            double delta = next - beta[j];
            if (delta != 0.0) {
                for (int i = 0; i < n; ++i) residual[i] -= xs(i, j) * delta;
                beta[j] = next;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < tol) {
            ++sweep;
            break;
        }
    }

    LassoFit fit;
    fit.sweeps = sweep;
    fit.coef.assign(p, 0.0);
    fit.intercept = y_mean;
    for (int j = 0; j < p; ++j) {
        if (!active[j]) continue;
        fit.coef[j] = beta[j] / sd[j];
        fit.intercept -= fit.coef[j] * mean[j];
    }
    return fit;
}

inline double lasso_predict(const LassoFit& fit, const Tensor2& x, int row) {
    double v = fit.intercept;
    for (int j = 0; j < x.cols; ++j) v += fit.coef[j] * x(row, j);
    return v;
}

struct RegressionMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
};

inline RegressionMetrics regression_metrics(const std::vector<double>& y_true,
                                            const std::vector<double>& y_pred) {
    size_t n = y_true.size();
    if (n < 2 || y_pred.size() != n) throw validation_error("regression_metrics: need equal lengths >= 2");
    double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / n;
    double sse = 0.0, sst = 0.0, abs_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double e = y_true[i] - y_pred[i];
        abs_sum += std::abs(e);
        sse += e * e;
        sst += (y_true[i] - mean) * (y_true[i] - mean);
    }
    if (sst == 0.0) throw validation_error("regression_metrics: zero-variance targets, R^2 undefined");
    return {abs_sum / n, std::sqrt(sse / n), 1.0 - sse / sst};
}

struct RegressionReport {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    int folds = 0;
    std::vector<RegressionMetrics> per_fold;
};

// Seeded K-fold cross-validation over regions on frozen embeddings.
inline RegressionReport evaluate_regression_task(const Tensor2& embeddings, const std::vector<double>& y,
                                                 double lambda, int folds, uint64_t seed) {
    int n = embeddings.rows;
    if (static_cast<int>(y.size()) != n) throw validation_error("evaluate_regression_task: label length mismatch");
    if (folds < 2) throw validation_error("evaluate_regression_task: need at least 2 folds");
    if (n < folds) throw validation_error("evaluate_regression_task: fewer regions than folds");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 77));
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    RegressionReport report;
    report.folds = folds;
    for (int f = 0; f < folds; ++f) {
        int lo = static_cast<int>(static_cast<long long>(f) * n / folds);
        int hi = static_cast<int>(static_cast<long long>(f + 1) * n / folds);
        std::vector<int> test(order.begin() + lo, order.begin() + hi);
        std::vector<int> train;
        for (int i = 0; i < n; ++i)
            if (i < lo || i >= hi) train.push_back(order[i]);

        Tensor2 x_train(static_cast<int>(train.size()), embeddings.cols);
        std::vector<double> y_train(train.size());
        for (size_t r = 0; r < train.size(); ++r) {
            for (int j = 0; j < embeddings.cols; ++j) x_train(static_cast<int>(r), j) = embeddings(train[r], j);
            y_train[r] = y[train[r]];
        }
        LassoFit fit = lasso_fit(x_train, y_train, lambda);

        std::vector<double> y_true(test.size()), y_pred(test.size());
        for (size_t r = 0; r < test.size(); ++r) {
            y_true[r] = y[test[r]];
            double v = fit.intercept;
            for (int j = 0; j < embeddings.cols; ++j) v += fit.coef[j] * embeddings(test[r], j);
            y_pred[r] = v;
        }
        report.per_fold.push_back(regression_metrics(y_true, y_pred));
    }
    for (const auto& m : report.per_fold) {
        report.mae += m.mae;
        report.rmse += m.rmse;
        report.r2 += m.r2;
    }
    report.mae /= folds;
    report.rmse /= folds;
    report.r2 /= folds;
    return report;
}

}  // namespace cgap
