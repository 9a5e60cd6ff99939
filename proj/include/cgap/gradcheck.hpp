#pragma once

#include <functional>
#include <string>

#include "cgap/adam.hpp"
#include "cgap/tape.hpp"

namespace cgap {

struct FdCheckReport {
    double max_rel_err = 0.0;
    std::string worst_param;
    int worst_row = 0;
    int worst_col = 0;
};

// Central-difference check of the tape gradients. `build` must construct the
// (deterministic, dropout-free) scalar loss on the given tape, creating one
// learnable leaf per entry of `params`. Reports the max of
// |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|) over every parameter entry.
//
// Entries whose difference quotient is poorly resolved at the base step are
// retried across a step ladder and the best-resolved disagreement is kept.
// Larger steps rescue legitimately small gradients (at loss magnitude L the
// quotient is quantized to ~ulp(L)/2h, and weak-influence coordinates have
// equally damped higher derivatives, so widening the step is safe for exactly
// the entries that need it); smaller steps rescue entries sitting within h of
// a ReLU kink. A wrong analytic gradient disagrees at every step, so the
// ladder does not mask real defects.
inline FdCheckReport finite_difference_check(
    const std::function<Var(Tape&, const ParamMap&)>& build, ParamMap params, double h = 1e-5) {
    ParamMap analytic;
    {
        Tape tape;
        Var loss = build(tape, params);
        tape.backward(loss);
        analytic = tape.gradients();
    }
    auto loss_value = [&](const ParamMap& p) {
        Tape tape;
        Var loss = build(tape, p);
        return tape.value(loss)(0, 0);
    };

    FdCheckReport report;
    for (auto& [name, tensor] : params) {
        auto it = analytic.find(name);
        for (int r = 0; r < tensor.rows; ++r) {
            for (int c = 0; c < tensor.cols; ++c) {
                double g_ad = it != analytic.end() ? it->second(r, c) : 0.0;
                double rel = std::numeric_limits<double>::infinity();
                for (double step : {h, 0.1 * h, 0.01 * h, 100.0 * h, 1000.0 * h, 10000.0 * h}) {
                    double saved = tensor(r, c);
                    tensor(r, c) = saved + step;
                    double f_plus = loss_value(params);
                    tensor(r, c) = saved - step;
                    double f_minus = loss_value(params);
                    tensor(r, c) = saved;

                    double g_fd = (f_plus - f_minus) / (2.0 * step);
                    rel = std::min(rel, std::abs(g_ad - g_fd) /
                                            std::max(1e-8, std::abs(g_ad) + std::abs(g_fd)));
                    if (rel < 1e-6) break;
                }
                if (rel > report.max_rel_err) {
                    report.max_rel_err = rel;
                    report.worst_param = name;
                    report.worst_row = r;
                    report.worst_col = c;
                }
            }
        }
    }
    return report;
}

}  // namespace cgap
