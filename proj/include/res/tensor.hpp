#pragma once

#include <vector>

#include "res/common.hpp"

namespace res {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 matrices.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<real> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    real* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const real* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    real& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    real at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return a.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    void fill(real v) { std::fill(a.begin(), a.end(), v); }

    static Matrix zeros(int r, int c) { return Matrix(r, c); }

    static Matrix randn(int r, int c, Rng& rng, real stddev) {
        Matrix m(r, c);
        for (real& v : m.a) v = rng.normal(0.0, stddev);
        return m;
    }

    bool all_finite() const {
        for (real v : a)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

} // namespace res
