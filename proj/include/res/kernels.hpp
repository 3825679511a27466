#pragma once

#include <functional>

#include "res/tensor.hpp"

namespace res::kernels {

// Thread control for the OpenMP kernels. 0 means use the OpenMP default.
void set_threads(int n);
int threads();
bool openmp_enabled();

// C = op(A) * op(B), optionally accumulating into C. Transposed operands are
// materialized once so the hot loop is always the row-major NN kernel, whose
// per-element addition order does not depend on the thread count: a parallel
// run and a serial run produce bit-identical results.
void matmul(const Matrix& A, const Matrix& B, Matrix& C, bool transA = false,
            bool transB = false, bool accumulate = false);

// Parallel loop over row indices [0, n). Work must be independent per row.
void parallel_rows(int n, const std::function<void(int)>& fn);

Matrix transpose(const Matrix& A);

namespace reference {
// Serial naive triple loop, kept as the comparison oracle for the parallel
// kernels and used by the kernel benchmark.
void matmul(const Matrix& A, const Matrix& B, Matrix& C, bool transA = false,
            bool transB = false, bool accumulate = false);
} // namespace reference

} // namespace res::kernels
