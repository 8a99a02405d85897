#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chns/linear_solver.hpp"

// Small dense direct solver used as an oracle for the matrix-free Krylov
// solvers on grids small enough to assemble explicitly.

namespace chns {

/// Assembles the dense matrix of a linear operator by probing with unit
/// vectors (column-major storage: a[col * n + row]).
inline std::vector<double> operator_to_dense(const LinearOperator& op) {
    const std::size_t n = op.size;
    std::vector<double> a(n * n), e(n, 0.0), col(n);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        op.apply(e.data(), col.data());
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) a[j * n + i] = col[i];
    }
    return a;
}

/// Gaussian elimination with partial pivoting on a column-major matrix.
/// Throws on (numerical) singularity.
inline std::vector<double> dense_solve(std::vector<double> a,
                                       std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw std::invalid_argument("dense_solve: size mismatch");
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i) piv[i] = i;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t best = c;
        double mag = std::abs(a[c * n + c]);
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[c * n + r]) > mag) {
                mag = std::abs(a[c * n + r]);
                best = r;
            }
        if (mag == 0.0) throw std::runtime_error("dense_solve: singular matrix");
        if (best != c) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(a[j * n + c], a[j * n + best]);
            std::swap(b[c], b[best]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[c * n + r] / a[c * n + c];
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) a[j * n + r] -= f * a[j * n + c];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t j = ri + 1; j < n; ++j) acc -= a[j * n + ri] * x[j];
        x[ri] = acc / a[ri * n + ri];
    }
    return x;
}

/// Least-norm style solve for a singular-with-constants operator: pins the
/// mean by augmenting A with the rank-one term (1 1^T)/n, which leaves the
/// mean-zero solution of compatible systems unchanged.
inline std::vector<double> dense_solve_pinned(const LinearOperator& op,
                                              std::vector<double> b) {
    const std::size_t n = op.size;
    std::vector<double> a = operator_to_dense(op);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) a[j * n + i] += 1.0 / double(n);
    double mean = 0.0;
    for (double v : b) mean += v;
    mean /= double(n);
    for (auto& v : b) v -= mean;
    std::vector<double> x = dense_solve(std::move(a), std::move(b));
    mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(n);
    for (auto& v : x) v -= mean;
    return x;
}

}  // namespace chns
