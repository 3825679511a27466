#include "res/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace res::kernels {

namespace {
int g_threads = 0;

void check_shapes(const Matrix& A, const Matrix& B, Matrix& C, bool transA, bool transB) {
    int m = transA ? A.cols : A.rows;
    int ka = transA ? A.rows : A.cols;
    int kb = transB ? B.cols : B.rows;
    int n = transB ? B.rows : B.cols;
    require(ka == kb, "matmul: inner dimensions differ (" + std::to_string(ka) + " vs " +
                          std::to_string(kb) + ")");
    require(C.rows == m && C.cols == n, "matmul: output shape mismatch");
}

// row-major NN kernel for one output row; inner j loop vectorizes, the
// k-accumulation order per element is fixed regardless of threading
inline void gemm_row(const real* arow, const Matrix& B, real* crow, int k, int n,
                     bool accumulate) {
    if (!accumulate)
        for (int j = 0; j < n; ++j) crow[j] = 0.0;
    for (int kk = 0; kk < k; ++kk) {
        real aik = arow[kk];
        const real* brow = B.row(kk);
        for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
}
} // namespace

void set_threads(int n) {
    g_threads = n;
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

int threads() {
#ifdef _OPENMP
    return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
    return 1;
#endif
}

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

Matrix transpose(const Matrix& A) {
    Matrix T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
    return T;
}

void matmul(const Matrix& A, const Matrix& B, Matrix& C, bool transA, bool transB,
            bool accumulate) {
    check_shapes(A, B, C, transA, transB);
    Matrix at_storage, bt_storage;
    const Matrix* a = &A;
    const Matrix* b = &B;
    if (transA) {
        at_storage = transpose(A);
        a = &at_storage;
    }
    if (transB) {
        bt_storage = transpose(B);
        b = &bt_storage;
    }
    const int m = a->rows, k = a->cols, n = b->cols;
    const bool heavy = static_cast<long>(m) * k * n > 16384;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (heavy && m > 1)
#endif
    for (int i = 0; i < m; ++i) gemm_row(a->row(i), *b, C.row(i), k, n, accumulate);
    (void)heavy;
}

void parallel_rows(int n, const std::function<void(int)>& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 4)
#endif
    for (int i = 0; i < n; ++i) fn(i);
}

namespace reference {

void matmul(const Matrix& A, const Matrix& B, Matrix& C, bool transA, bool transB,
            bool accumulate) {
    check_shapes(A, B, C, transA, transB);
    const int m = transA ? A.cols : A.rows;
    const int k = transA ? A.rows : A.cols;
    const int n = transB ? B.rows : B.cols;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            real acc = accumulate ? C.at(i, j) : 0.0;
            for (int kk = 0; kk < k; ++kk) {
                real av = transA ? A.at(kk, i) : A.at(i, kk);
                real bv = transB ? B.at(j, kk) : B.at(kk, j);
                acc += av * bv;
            }
            C.at(i, j) = acc;
        }
    }
}

} // namespace reference

} // namespace res::kernels
