#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "res/common.hpp"
#include "res/tensor.hpp"

namespace res::ag {

// Define-by-run reverse-mode autodiff over Matrix values.
//
// Every op returns a Var (shared_ptr<Node>) holding the result, the parent
// links, and a closure that scatters this node's gradient into its parents.
// backward() seeds a scalar root and walks the tape in reverse topological
// order. Parameter gradients accumulate across calls until zero_grad().

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Matrix val;
    Matrix grad;
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void()> backprop;
};

// When grad mode is off, ops produce plain values: no parents, no closures.
// Used for evaluation passes where the tape would be dead weight.
bool grad_enabled();

struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool prev_;
};

Var constant(Matrix v);
Var param(Matrix v);

Var matmul(const Var& a, const Var& b, bool trans_a = false, bool trans_b = false);
Var add(const Var& a, const Var& b);
Var add_rowvec(const Var& x, const Var& b);  // b is 1 x cols, broadcast over rows
Var scale(const Var& x, real s);

Var slice_rows(const Var& x, int row0, int row1);  // [row0, row1)
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& x, int col0, int col1);  // [col0, col1)
Var concat_cols(const std::vector<Var>& parts);

// Embedding lookup: out.row(i) = table.row(indices[i]); backward scatter-adds.
Var gather_rows(const Var& table, std::vector<int> indices);

Var softmax_rows(const Var& x);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, real eps);
Var gelu(const Var& x);  // exact erf form
Var sigmoid(const Var& x);

// Inverted dropout. Identity when !training or rate == 0. The mask is drawn
// from rng element by element, in row-major order, on the calling thread.
Var dropout(const Var& x, real rate, Rng& rng, bool training);

// Mean binary cross-entropy over every element of probs, with probs clamped
// to [1e-7, 1 - 1e-7] before the logs. labels must match probs' shape.
Var bce_mean(const Var& probs, const Matrix& labels);

// Softmax cross-entropy of a 1 x N logit row against a target index.
Var softmax_ce(const Var& logits, int target);

// Seeds root->grad with `seed` (root must be 1x1) and runs the tape backward.
void backward(const Var& root, real seed = 1.0);

void zero_grad(const std::vector<Var>& params);

}  // namespace res::ag
