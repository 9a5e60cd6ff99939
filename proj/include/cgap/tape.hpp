#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cgap/tensor.hpp"

namespace cgap {

// Reverse-mode autodiff over Tensor2 values. Every operation appends a node,
// so the tape is topologically ordered by construction and backward() is a
// single reverse sweep. A tape belongs to one execution context.
class Tape {
  public:
    struct Var {
        int id = -1;
        bool valid() const { return id >= 0; }
    };

    enum class Op {
        Leaf,
        MatMul,
        Transpose,
        Add,
        Scale,
        Mul,
        Relu,
        Tanh,
        Sigmoid,
        RowSoftmax,
        TileRows,
        SumAll,
        RowSum,
        Exp,
        LogEps,
        SqDiff,
        Sqrt,
        AssignSoftmax,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        Tensor2 value;
        Tensor2 grad;
        bool learnable = false;
        std::string name;
        double scalar = 0.0;            // Scale factor / LogEps epsilon
        std::vector<int> membership;    // AssignSoftmax: node -> cluster
        int n_clusters = 0;
    };

    Var leaf(Tensor2 v, std::string name = "", bool learnable = false) {
        Node n{Op::Leaf};
        n.value = std::move(v);
        n.name = std::move(name);
        n.learnable = learnable;
        if (!all_finite(n.value)) throw error("leaf '" + n.name + "': non-finite entries");
        return push(std::move(n));
    }

    Var constant(Tensor2 v) { return leaf(std::move(v)); }

    Var matmul(Var x, Var y) {
        const Tensor2 &a = value(x), &b = value(y);
        if (a.cols != b.rows)
            throw error("matmul: inner dimensions differ, " + shape_str(a) + " * " + shape_str(b));
        Tensor2 out(a.rows, b.cols);
        for (int i = 0; i < a.rows; ++i)
            for (int j = 0; j < b.cols; ++j) {
                double s = 0.0;
                for (int k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
                out(i, j) = s;
            }
        return push_op(Op::MatMul, x, y, std::move(out), "matmul");
    }

    Var transpose(Var x) {
        return push_op(Op::Transpose, x, Var{}, cgap::transpose(value(x)), "transpose");
    }

    Var add(Var x, Var y) {
        const Tensor2 &a = value(x), &b = value(y);
        if (!a.same_shape(b)) throw error("add: shapes differ, " + shape_str(a) + " vs " + shape_str(b));
        Tensor2 out = a;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
        return push_op(Op::Add, x, y, std::move(out), "add");
    }

    Var scale(Var x, double c) {
        Tensor2 out = value(x);
        for (double& v : out.data) v *= c;
        Node n{Op::Scale};
        n.a = x.id;
        n.value = std::move(out);
        n.scalar = c;
        check(n.value, "scale");
        return push(std::move(n));
    }

    Var mul(Var x, Var y) {
        const Tensor2 &a = value(x), &b = value(y);
        if (!a.same_shape(b)) throw error("mul: shapes differ, " + shape_str(a) + " vs " + shape_str(b));
        Tensor2 out = a;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.data[i];
        return push_op(Op::Mul, x, y, std::move(out), "mul");
    }

    Var relu(Var x) {
        Tensor2 out = value(x);
        for (double& v : out.data) v = v > 0.0 ? v : 0.0;
        return push_op(Op::Relu, x, Var{}, std::move(out), "relu");
    }

    Var tanh(Var x) {
        Tensor2 out = value(x);
        for (double& v : out.data) v = std::tanh(v);
        return push_op(Op::Tanh, x, Var{}, std::move(out), "tanh");
    }

    Var sigmoid(Var x) {
        Tensor2 out = value(x);
        for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
        return push_op(Op::Sigmoid, x, Var{}, std::move(out), "sigmoid");
    }

    // Softmax over each row, max-shifted for stability.
    Var row_softmax(Var x) {
        Tensor2 out = value(x);
        for (int i = 0; i < out.rows; ++i) {
            double m = out(i, 0);
            for (int j = 1; j < out.cols; ++j) m = std::max(m, out(i, j));
            double s = 0.0;
            for (int j = 0; j < out.cols; ++j) {
                out(i, j) = std::exp(out(i, j) - m);
                s += out(i, j);
            }
            for (int j = 0; j < out.cols; ++j) out(i, j) /= s;
        }
        return push_op(Op::RowSoftmax, x, Var{}, std::move(out), "row_softmax");
    }

    // 1xd row tiled to n rows.
    Var tile_rows(Var x, int n) {
        const Tensor2& a = value(x);
        if (a.rows != 1) throw error("tile_rows: input must be a row vector, got " + shape_str(a));
        if (n < 1) throw error("tile_rows: row count must be positive");
        Tensor2 out(n, a.cols);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < a.cols; ++j) out(i, j) = a(0, j);
        return push_op(Op::TileRows, x, Var{}, std::move(out), "tile_rows");
    }

    Var sum_all(Var x) {
        const Tensor2& a = value(x);
        double s = 0.0;
        for (double v : a.data) s += v;
        Tensor2 out(1, 1);
        out(0, 0) = s;
        return push_op(Op::SumAll, x, Var{}, std::move(out), "sum_all");
    }

    Var row_sum(Var x) {
        const Tensor2& a = value(x);
        Tensor2 out(a.rows, 1);
        for (int i = 0; i < a.rows; ++i) {
            double s = 0.0;
            for (int j = 0; j < a.cols; ++j) s += a(i, j);
            out(i, 0) = s;
        }
        return push_op(Op::RowSum, x, Var{}, std::move(out), "row_sum");
    }

    Var exp(Var x) {
        Tensor2 out = value(x);
        for (double& v : out.data) v = std::exp(v);
        return push_op(Op::Exp, x, Var{}, std::move(out), "exp");
    }

    // log(x + eps); guards zero inputs.
    Var log_eps(Var x, double eps = 1e-12) {
        Tensor2 out = value(x);
        for (double& v : out.data) v = std::log(v + eps);
        Node n{Op::LogEps};
        n.a = x.id;
        n.value = std::move(out);
        n.scalar = eps;
        check(n.value, "log_eps");
        return push(std::move(n));
    }

    Var sqdiff(Var x, Var y) {
        const Tensor2 &a = value(x), &b = value(y);
        if (!a.same_shape(b)) throw error("sqdiff: shapes differ, " + shape_str(a) + " vs " + shape_str(b));
        Tensor2 out = a;
        for (size_t i = 0; i < out.data.size(); ++i) {
            double d = out.data[i] - b.data[i];
            out.data[i] = d * d;
        }
        return push_op(Op::SqDiff, x, y, std::move(out), "sqdiff");
    }

    Var sqrt(Var x) {
        Tensor2 out = value(x);
        for (double& v : out.data) {
            if (v < 0.0) throw error("sqrt: negative input");
            v = std::sqrt(v);
        }
        return push_op(Op::Sqrt, x, Var{}, std::move(out), "sqrt");
    }

    // Column-masked softmax: S[u,c] = softmax over the members of cluster c of
    // scores[u], and exactly 0 outside the cluster. Every column sums to 1.
    Var assignment_softmax(Var scores, const std::vector<int>& membership, int n_clusters) {
        const Tensor2& s = value(scores);
        if (s.cols != 1) throw error("assignment_softmax: scores must be a column, got " + shape_str(s));
        if (static_cast<int>(membership.size()) != s.rows)
            throw error("assignment_softmax: membership size " + std::to_string(membership.size()) +
                        " != node count " + std::to_string(s.rows));
        std::vector<int> cluster_size(n_clusters, 0);
        for (int m : membership) {
            if (m < 0 || m >= n_clusters) throw error("assignment_softmax: cluster id out of range");
            ++cluster_size[m];
        }
        for (int c = 0; c < n_clusters; ++c)
            if (cluster_size[c] == 0) throw error("assignment_softmax: empty cluster " + std::to_string(c));

        std::vector<double> cmax(n_clusters, -std::numeric_limits<double>::infinity());
        for (int u = 0; u < s.rows; ++u) cmax[membership[u]] = std::max(cmax[membership[u]], s(u, 0));
        std::vector<double> csum(n_clusters, 0.0);
        Tensor2 out(s.rows, n_clusters);
        for (int u = 0; u < s.rows; ++u) {
            int c = membership[u];
            out(u, c) = std::exp(s(u, 0) - cmax[c]);
            csum[c] += out(u, c);
        }
        for (int u = 0; u < s.rows; ++u) {
            int c = membership[u];
            out(u, c) /= csum[c];
        }
        Node n{Op::AssignSoftmax};
        n.a = scores.id;
        n.value = std::move(out);
        n.membership = membership;
        n.n_clusters = n_clusters;
        check(n.value, "assignment_softmax");
        return push(std::move(n));
    }

    const Tensor2& value(Var v) const { return at(v).value; }

    // Gradient of the given leaf after backward(). Empty tensor if untouched.
    const Tensor2& grad(Var v) const { return at(v).grad; }

    size_t size() const { return nodes_.size(); }

    void backward(Var loss) {
        const Node& ln = at(loss);
        if (ln.value.rows != 1 || ln.value.cols != 1)
            throw error("backward: loss must be 1x1, got " + shape_str(ln.value));
        for (Node& n : nodes_) n.grad = Tensor2();
        nodes_[loss.id].grad = Tensor2(1, 1, 1.0);

        for (int i = loss.id; i >= 0; --i) {
            Node& n = nodes_[i];
            if (n.grad.size() == 0) continue;  // not on the path to the loss
            accumulate(n);
        }
    }

    // name -> gradient for every learnable leaf (zero tensor if off-path).
    std::map<std::string, Tensor2> gradients() const {
        std::map<std::string, Tensor2> g;
        for (const Node& n : nodes_) {
            if (n.op != Op::Leaf || !n.learnable) continue;
            g[n.name] = n.grad.size() ? n.grad : Tensor2(n.value.rows, n.value.cols);
        }
        return g;
    }

  private:
    std::vector<Node> nodes_;

    const Node& at(Var v) const {
        if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) throw error("tape: invalid node id");
        return nodes_[v.id];
    }

    static void check(const Tensor2& t, const char* op) {
        if (!all_finite(t)) throw error(std::string(op) + ": non-finite output");
    }

    Var push(Node&& n) {
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    Var push_op(Op op, Var a, Var b, Tensor2&& out, const char* name) {
        check(out, name);
        Node n{op};
        n.a = a.id;
        n.b = b.id;
        n.value = std::move(out);
        return push(std::move(n));
    }

    Tensor2& grad_buf(int id) {
        Node& n = nodes_[id];
        if (n.grad.size() == 0) n.grad = Tensor2(n.value.rows, n.value.cols);
        return n.grad;
    }

    void accumulate(Node& n) {
        const Tensor2& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::MatMul: {
                const Tensor2 &a = nodes_[n.a].value, &b = nodes_[n.b].value;
                Tensor2& ga = grad_buf(n.a);
                for (int i = 0; i < a.rows; ++i)
                    for (int k = 0; k < a.cols; ++k) {
                        double s = 0.0;
                        for (int j = 0; j < b.cols; ++j) s += g(i, j) * b(k, j);
                        ga(i, k) += s;
                    }
                Tensor2& gb = grad_buf(n.b);
                for (int k = 0; k < b.rows; ++k)
                    for (int j = 0; j < b.cols; ++j) {
                        double s = 0.0;
                        for (int i = 0; i < a.rows; ++i) s += a(i, k) * g(i, j);
                        gb(k, j) += s;
                    }
                break;
            }
            case Op::Transpose: {
                Tensor2& ga = grad_buf(n.a);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) ga(j, i) += g(i, j);
                break;
            }
            case Op::Add: {
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
                Tensor2& gb = grad_buf(n.b);
                for (size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i];
                break;
            }
            case Op::Scale: {
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += n.scalar * g.data[i];
                break;
            }
            case Op::Mul: {
                const Tensor2 &a = nodes_[n.a].value, &b = nodes_[n.b].value;
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * b.data[i];
                Tensor2& gb = grad_buf(n.b);
                for (size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i] * a.data[i];
                break;
            }
            case Op::Relu: {
                // Subgradient 0 at inputs <= 0.
                const Tensor2& a = nodes_[n.a].value;
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    if (a.data[i] > 0.0) ga.data[i] += g.data[i];
                break;
            }
            case Op::Tanh: {
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    ga.data[i] += g.data[i] * (1.0 - n.value.data[i] * n.value.data[i]);
                break;
            }
            case Op::Sigmoid: {
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    ga.data[i] += g.data[i] * n.value.data[i] * (1.0 - n.value.data[i]);
                break;
            }
            case Op::RowSoftmax: {
                const Tensor2& y = n.value;
                Tensor2& ga = grad_buf(n.a);
                for (int i = 0; i < y.rows; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < y.cols; ++j) dot += g(i, j) * y(i, j);
                    for (int j = 0; j < y.cols; ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
                }
                break;
            }
            case Op::TileRows: {
                Tensor2& ga = grad_buf(n.a);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) ga(0, j) += g(i, j);
                break;
            }
            case Op::SumAll: {
                Tensor2& ga = grad_buf(n.a);
                for (double& v : ga.data) v += g(0, 0);
                break;
            }
            case Op::RowSum: {
                Tensor2& ga = grad_buf(n.a);
                for (int i = 0; i < ga.rows; ++i)
                    for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(i, 0);
                break;
            }
            case Op::Exp: {
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * n.value.data[i];
                break;
            }
            case Op::LogEps: {
                const Tensor2& a = nodes_[n.a].value;
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] / (a.data[i] + n.scalar);
                break;
            }
            case Op::SqDiff: {
                const Tensor2 &a = nodes_[n.a].value, &b = nodes_[n.b].value;
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    ga.data[i] += g.data[i] * 2.0 * (a.data[i] - b.data[i]);
                Tensor2& gb = grad_buf(n.b);
                for (size_t i = 0; i < g.data.size(); ++i)
                    gb.data[i] -= g.data[i] * 2.0 * (a.data[i] - b.data[i]);
                break;
            }
            case Op::Sqrt: {
                Tensor2& ga = grad_buf(n.a);
                for (size_t i = 0; i < g.data.size(); ++i)
                    ga.data[i] += g.data[i] / (2.0 * std::max(n.value.data[i], 1e-12));
                break;
            }
            case Op::AssignSoftmax: {
                const Tensor2& y = n.value;
                Tensor2& ga = grad_buf(n.a);
                std::vector<double> cdot(n.n_clusters, 0.0);
                for (int u = 0; u < y.rows; ++u) {
                    int c = n.membership[u];
                    cdot[c] += g(u, c) * y(u, c);
                }
                for (int u = 0; u < y.rows; ++u) {
                    int c = n.membership[u];
                    ga(u, 0) += y(u, c) * (g(u, c) - cdot[c]);
                }
                break;
            }
        }
    }
};

using Var = Tape::Var;

}  // namespace cgap
