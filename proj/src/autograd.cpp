#include "res/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "res/kernels.hpp"

namespace res::ag {

namespace {

bool g_grad_enabled = true;

Var make(Matrix v, std::vector<Var> parents) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    bool rg = false;
    if (g_grad_enabled) {
        for (const auto& p : parents) rg = rg || p->requires_grad;
    }
    n->requires_grad = rg;
    if (rg) {
        n->grad = Matrix::zeros(n->val.rows, n->val.cols);
        n->parents = std::move(parents);
    }
    return n;
}

void accum(Node* p, const Matrix& g) {
    if (!p->requires_grad) return;
    require(p->grad.rows == g.rows && p->grad.cols == g.cols, "gradient shape mismatch");
    real* dst = p->grad.a.data();
    const real* src = g.a.data();
    for (std::size_t i = 0; i < g.a.size(); ++i) dst[i] += src[i];
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Var constant(Matrix v) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    return n;
}

Var param(Matrix v) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    n->grad = Matrix::zeros(n->val.rows, n->val.cols);
    n->requires_grad = true;
    return n;
}

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
    const int m = trans_a ? a->val.cols : a->val.rows;
    const int n = trans_b ? b->val.rows : b->val.cols;
    Matrix out(m, n);
    kernels::matmul(a->val, b->val, out, trans_a, trans_b);
    Var y = make(std::move(out), {a, b});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* an = a.get();
        Node* bn = b.get();
        y->backprop = [yn, an, bn, trans_a, trans_b] {
            const Matrix& g = yn->grad;
            if (an->requires_grad) {
                if (!trans_a && !trans_b)
                    kernels::matmul(g, bn->val, an->grad, false, true, true);
                else if (trans_a && !trans_b)
                    kernels::matmul(bn->val, g, an->grad, false, true, true);
                else if (!trans_a && trans_b)
                    kernels::matmul(g, bn->val, an->grad, false, false, true);
                else
                    kernels::matmul(bn->val, g, an->grad, true, true, true);
            }
            if (bn->requires_grad) {
                if (!trans_a && !trans_b)
                    kernels::matmul(an->val, g, bn->grad, true, false, true);
                else if (trans_a && !trans_b)
                    kernels::matmul(an->val, g, bn->grad, false, false, true);
                else if (!trans_a && trans_b)
                    kernels::matmul(g, an->val, bn->grad, true, false, true);
                else
                    kernels::matmul(g, an->val, bn->grad, true, true, true);
            }
        };
    }
    return y;
}

Var add(const Var& a, const Var& b) {
    require(a->val.same_shape(b->val), "add: shape mismatch");
    Matrix out = a->val;
    const real* src = b->val.a.data();
    real* dst = out.a.data();
    for (std::size_t i = 0; i < out.a.size(); ++i) dst[i] += src[i];
    Var y = make(std::move(out), {a, b});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* an = a.get();
        Node* bn = b.get();
        y->backprop = [yn, an, bn] {
            accum(an, yn->grad);
            accum(bn, yn->grad);
        };
    }
    return y;
}

Var add_rowvec(const Var& x, const Var& b) {
    require(b->val.rows == 1 && b->val.cols == x->val.cols, "add_rowvec: b must be 1 x cols(x)");
    Matrix out = x->val;
    const real* bv = b->val.a.data();
    for (int i = 0; i < out.rows; ++i) {
        real* r = out.row(i);
        for (int j = 0; j < out.cols; ++j) r[j] += bv[j];
    }
    Var y = make(std::move(out), {x, b});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        Node* bn = b.get();
        y->backprop = [yn, xn, bn] {
            accum(xn, yn->grad);
            if (bn->requires_grad) {
                real* dst = bn->grad.row(0);
                for (int i = 0; i < yn->grad.rows; ++i) {
                    const real* r = yn->grad.row(i);
                    for (int j = 0; j < yn->grad.cols; ++j) dst[j] += r[j];
                }
            }
        };
    }
    return y;
}

Var scale(const Var& x, real s) {
    Matrix out = x->val;
    for (real& v : out.a) v *= s;
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn, s] {
            if (!xn->requires_grad) return;
            real* dst = xn->grad.a.data();
            const real* src = yn->grad.a.data();
            for (std::size_t i = 0; i < yn->grad.a.size(); ++i) dst[i] += s * src[i];
        };
    }
    return y;
}

Var slice_rows(const Var& x, int row0, int row1) {
    require(0 <= row0 && row0 < row1 && row1 <= x->val.rows, "slice_rows: bad range");
    Matrix out(row1 - row0, x->val.cols);
    std::copy(x->val.row(row0), x->val.row(row0) + out.a.size(), out.a.data());
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn, row0] {
            if (!xn->requires_grad) return;
            real* dst = xn->grad.row(row0);
            const real* src = yn->grad.a.data();
            for (std::size_t i = 0; i < yn->grad.a.size(); ++i) dst[i] += src[i];
        };
    }
    return y;
}

Var concat_rows(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_rows: empty input");
    const int cols = parts.front()->val.cols;
    int rows = 0;
    for (const auto& p : parts) {
        require(p->val.cols == cols, "concat_rows: column mismatch");
        rows += p->val.rows;
    }
    Matrix out(rows, cols);
    int at = 0;
    for (const auto& p : parts) {
        std::copy(p->val.a.begin(), p->val.a.end(), out.row(at));
        at += p->val.rows;
    }
    Var y = make(std::move(out), parts);
    if (y->requires_grad) {
        Node* yn = y.get();
        std::vector<Node*> ps;
        ps.reserve(parts.size());
        for (const auto& p : parts) ps.push_back(p.get());
        y->backprop = [yn, ps] {
            int at = 0;
            for (Node* p : ps) {
                if (p->requires_grad) {
                    real* dst = p->grad.a.data();
                    const real* src = yn->grad.row(at);
                    for (std::size_t i = 0; i < p->grad.a.size(); ++i) dst[i] += src[i];
                }
                at += p->val.rows;
            }
        };
    }
    return y;
}

Var slice_cols(const Var& x, int col0, int col1) {
    require(0 <= col0 && col0 < col1 && col1 <= x->val.cols, "slice_cols: bad range");
    Matrix out(x->val.rows, col1 - col0);
    for (int i = 0; i < out.rows; ++i)
        std::copy(x->val.row(i) + col0, x->val.row(i) + col1, out.row(i));
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn, col0] {
            if (!xn->requires_grad) return;
            for (int i = 0; i < yn->grad.rows; ++i) {
                real* dst = xn->grad.row(i) + col0;
                const real* src = yn->grad.row(i);
                for (int j = 0; j < yn->grad.cols; ++j) dst[j] += src[j];
            }
        };
    }
    return y;
}

Var concat_cols(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_cols: empty input");
    const int rows = parts.front()->val.rows;
    int cols = 0;
    for (const auto& p : parts) {
        require(p->val.rows == rows, "concat_cols: row mismatch");
        cols += p->val.cols;
    }
    Matrix out(rows, cols);
    int at = 0;
    for (const auto& p : parts) {
        for (int i = 0; i < rows; ++i)
            std::copy(p->val.row(i), p->val.row(i) + p->val.cols, out.row(i) + at);
        at += p->val.cols;
    }
    Var y = make(std::move(out), parts);
    if (y->requires_grad) {
        Node* yn = y.get();
        std::vector<Node*> ps;
        ps.reserve(parts.size());
        for (const auto& p : parts) ps.push_back(p.get());
        y->backprop = [yn, ps] {
            int at = 0;
            for (Node* p : ps) {
                if (p->requires_grad) {
                    for (int i = 0; i < p->grad.rows; ++i) {
                        real* dst = p->grad.row(i);
                        const real* src = yn->grad.row(i) + at;
                        for (int j = 0; j < p->grad.cols; ++j) dst[j] += src[j];
                    }
                }
                at += p->val.cols;
            }
        };
    }
    return y;
}

Var gather_rows(const Var& table, std::vector<int> indices) {
    require(!indices.empty(), "gather_rows: empty index list");
    for (int ix : indices)
        require(0 <= ix && ix < table->val.rows, "gather_rows: index out of range");
    Matrix out(static_cast<int>(indices.size()), table->val.cols);
    for (std::size_t i = 0; i < indices.size(); ++i)
        std::copy(table->val.row(indices[i]), table->val.row(indices[i]) + table->val.cols,
                  out.row(static_cast<int>(i)));
    Var y = make(std::move(out), {table});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* tn = table.get();
        y->backprop = [yn, tn, idx = std::move(indices)] {
            if (!tn->requires_grad) return;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                real* dst = tn->grad.row(idx[i]);
                const real* src = yn->grad.row(static_cast<int>(i));
                for (int j = 0; j < yn->grad.cols; ++j) dst[j] += src[j];
            }
        };
    }
    return y;
}

Var softmax_rows(const Var& x) {
    Matrix out(x->val.rows, x->val.cols);
    for (int i = 0; i < out.rows; ++i) {
        const real* r = x->val.row(i);
        real* o = out.row(i);
        real mx = r[0];
        for (int j = 1; j < out.cols; ++j) mx = std::max(mx, r[j]);
        real sum = 0;
        for (int j = 0; j < out.cols; ++j) {
            o[j] = std::exp(r[j] - mx);
            sum += o[j];
        }
        const real inv = 1.0 / sum;
        for (int j = 0; j < out.cols; ++j) o[j] *= inv;
    }
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn] {
            if (!xn->requires_grad) return;
            for (int i = 0; i < yn->val.rows; ++i) {
                const real* p = yn->val.row(i);
                const real* g = yn->grad.row(i);
                real* dst = xn->grad.row(i);
                real dot = 0;
                for (int j = 0; j < yn->val.cols; ++j) dot += p[j] * g[j];
                for (int j = 0; j < yn->val.cols; ++j) dst[j] += p[j] * (g[j] - dot);
            }
        };
    }
    return y;
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, real eps) {
    const int d = x->val.cols;
    require(gamma->val.rows == 1 && gamma->val.cols == d, "layer_norm: gamma must be 1 x d");
    require(beta->val.rows == 1 && beta->val.cols == d, "layer_norm: beta must be 1 x d");
    Matrix out(x->val.rows, d);
    Matrix xhat(x->val.rows, d);
    std::vector<real> inv_std(static_cast<std::size_t>(x->val.rows));
    const real* gv = gamma->val.row(0);
    const real* bv = beta->val.row(0);
    for (int i = 0; i < out.rows; ++i) {
        const real* r = x->val.row(i);
        real mean = 0;
        for (int j = 0; j < d; ++j) mean += r[j];
        mean /= d;
        real var = 0;
        for (int j = 0; j < d; ++j) {
            const real c = r[j] - mean;
            var += c * c;
        }
        var /= d;
        const real inv = 1.0 / std::sqrt(var + eps);
        inv_std[static_cast<std::size_t>(i)] = inv;
        real* xh = xhat.row(i);
        real* o = out.row(i);
        for (int j = 0; j < d; ++j) {
            xh[j] = (r[j] - mean) * inv;
            o[j] = gv[j] * xh[j] + bv[j];
        }
    }
    Var y = make(std::move(out), {x, gamma, beta});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        Node* gn = gamma.get();
        Node* bn = beta.get();
        y->backprop = [yn, xn, gn, bn, xh = std::move(xhat), inv = std::move(inv_std), d] {
            for (int i = 0; i < yn->grad.rows; ++i) {
                const real* g = yn->grad.row(i);
                const real* h = xh.row(i);
                if (bn->requires_grad) {
                    real* db = bn->grad.row(0);
                    for (int j = 0; j < d; ++j) db[j] += g[j];
                }
                if (gn->requires_grad) {
                    real* dg = gn->grad.row(0);
                    for (int j = 0; j < d; ++j) dg[j] += g[j] * h[j];
                }
                if (xn->requires_grad) {
                    const real* gv = gn->val.row(0);
                    real mean_dh = 0, mean_dh_h = 0;
                    for (int j = 0; j < d; ++j) {
                        const real dh = g[j] * gv[j];
                        mean_dh += dh;
                        mean_dh_h += dh * h[j];
                    }
                    mean_dh /= d;
                    mean_dh_h /= d;
                    real* dst = xn->grad.row(i);
                    const real s = inv[static_cast<std::size_t>(i)];
                    for (int j = 0; j < d; ++j) {
                        const real dh = g[j] * gv[j];
                        dst[j] += s * (dh - mean_dh - h[j] * mean_dh_h);
                    }
                }
            }
        };
    }
    return y;
}

Var gelu(const Var& x) {
    static const real kInvSqrt2 = 1.0 / std::sqrt(2.0);
    static const real kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
    Matrix out(x->val.rows, x->val.cols);
    for (std::size_t i = 0; i < out.a.size(); ++i) {
        const real v = x->val.a[i];
        out.a[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    }
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn] {
            if (!xn->requires_grad) return;
            for (std::size_t i = 0; i < yn->grad.a.size(); ++i) {
                const real v = xn->val.a[i];
                const real cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                const real pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                xn->grad.a[i] += yn->grad.a[i] * (cdf + v * pdf);
            }
        };
    }
    return y;
}

Var sigmoid(const Var& x) {
    Matrix out(x->val.rows, x->val.cols);
    for (std::size_t i = 0; i < out.a.size(); ++i) {
        const real v = x->val.a[i];
        if (v >= 0) {
            out.a[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
            const real e = std::exp(v);
            out.a[i] = e / (1.0 + e);
        }
    }
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn] {
            if (!xn->requires_grad) return;
            for (std::size_t i = 0; i < yn->grad.a.size(); ++i) {
                const real s = yn->val.a[i];
                xn->grad.a[i] += yn->grad.a[i] * s * (1.0 - s);
            }
        };
    }
    return y;
}

Var dropout(const Var& x, real rate, Rng& rng, bool training) {
    if (!training || rate <= 0.0) return x;
    require(rate < 1.0, "dropout: rate must be < 1");
    const real keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(x->val.rows, x->val.cols);
    for (real& m : mask.a) m = rng.uniform() >= rate ? keep_scale : 0.0;
    Matrix out(x->val.rows, x->val.cols);
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] = x->val.a[i] * mask.a[i];
    Var y = make(std::move(out), {x});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* xn = x.get();
        y->backprop = [yn, xn, m = std::move(mask)] {
            if (!xn->requires_grad) return;
            for (std::size_t i = 0; i < yn->grad.a.size(); ++i)
                xn->grad.a[i] += yn->grad.a[i] * m.a[i];
        };
    }
    return y;
}

Var bce_mean(const Var& probs, const Matrix& labels) {
    require(probs->val.same_shape(labels), "bce_mean: labels shape mismatch");
    constexpr real kLo = 1e-7;
    constexpr real kHi = 1.0 - 1e-7;
    const std::size_t count = probs->val.a.size();
    require(count > 0, "bce_mean: empty input");
    real total = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const real p = std::clamp(probs->val.a[i], kLo, kHi);
        const real t = labels.a[i];
        total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    }
    Matrix out(1, 1);
    out.at(0, 0) = total / static_cast<real>(count);
    Var y = make(std::move(out), {probs});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* pn = probs.get();
        y->backprop = [yn, pn, lab = labels, count] {
            if (!pn->requires_grad) return;
            const real g = yn->grad.at(0, 0) / static_cast<real>(count);
            for (std::size_t i = 0; i < count; ++i) {
                const real p = pn->val.a[i];
                if (p < kLo || p > kHi) continue;  // flat through the clamp
                const real t = lab.a[i];
                pn->grad.a[i] += g * (-t / p + (1.0 - t) / (1.0 - p));
            }
        };
    }
    return y;
}

Var softmax_ce(const Var& logits, int target) {
    require(logits->val.rows == 1, "softmax_ce: logits must be a single row");
    const int n = logits->val.cols;
    require(0 <= target && target < n, "softmax_ce: target out of range");
    const real* z = logits->val.row(0);
    real mx = z[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, z[j]);
    real sum = 0;
    for (int j = 0; j < n; ++j) sum += std::exp(z[j] - mx);
    const real lse = mx + std::log(sum);
    Matrix out(1, 1);
    out.at(0, 0) = lse - z[target];
    Var y = make(std::move(out), {logits});
    if (y->requires_grad) {
        Node* yn = y.get();
        Node* ln = logits.get();
        y->backprop = [yn, ln, target, lse, n] {
            if (!ln->requires_grad) return;
            const real g = yn->grad.at(0, 0);
            const real* z = ln->val.row(0);
            real* dst = ln->grad.row(0);
            for (int j = 0; j < n; ++j) {
                const real p = std::exp(z[j] - lse);
                dst[j] += g * (p - (j == target ? 1.0 : 0.0));
            }
        };
    }
    return y;
}

void backward(const Var& root, real seed) {
    require(root != nullptr, "backward: null root");
    require(root->val.rows == 1 && root->val.cols == 1, "backward: root must be a scalar");
    require(root->requires_grad, "backward: root does not require grad");
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root->grad.at(0, 0) += seed;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

void zero_grad(const std::vector<Var>& params) {
    for (const auto& p : params) p->grad.fill(0);
}

}  // namespace res::ag
