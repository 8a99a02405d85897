#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Matrix-free Krylov solvers for the linear sub-solves of the Picard map
// and the pressure Poisson equation. Solvers are re-entrant: each solve
// owns its workspace. All reductions are plain sequential loops, so
// results are deterministic.

namespace chns {

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergenceError : SolveError {
    int iterations;
    double residual;
    NonConvergenceError(const std::string& what, int it, double res)
        : SolveError(what + " (iterations=" + std::to_string(it) +
                     ", residual=" + std::to_string(res) + ")"),
          iterations(it), residual(res) {}
};

struct BreakdownError : SolveError {
    using SolveError::SolveError;
};

struct IncompatibleRhsError : SolveError {
    using SolveError::SolveError;
};

/// Matrix-free linear operator on flat arrays.
struct LinearOperator {
    std::size_t size = 0;
    std::function<void(const double*, double*)> apply;
    bool symmetric = false;
    bool nullspace_constants = false;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // relative true residual at exit
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0.0L;
    for (std::size_t q = 0; q < a.size(); ++q) acc += (long double)a[q] * b[q];
    return double(acc);
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t q = 0; q < y.size(); ++q) y[q] += alpha * x[q];
}

inline void remove_mean(std::vector<double>& x) {
    long double acc = 0.0L;
    for (double v : x) acc += v;
    const double mean = double(acc / (long double)x.size());
    for (double& v : x) v -= mean;
}

inline double mean_abs_sum(const std::vector<double>& x) {
    long double acc = 0.0L;
    for (double v : x) acc += v;
    return std::abs(double(acc / (long double)x.size()));
}

inline double true_residual(const LinearOperator& op, const std::vector<double>& b,
                            const std::vector<double>& x, std::vector<double>& work) {
    op.apply(x.data(), work.data());
    for (std::size_t q = 0; q < b.size(); ++q) work[q] = b[q] - work[q];
    if (op.nullspace_constants) remove_mean(work);
    return norm2(work);
}

}  // namespace detail

/// Conjugate gradients for symmetric positive (semi)definite operators.
/// With a constants null space the rhs must be compatible (mean ~ 0); the
/// solution mean is pinned to 0. The returned residual is the true
/// residual, re-verified after the recursion finishes.
inline SolveStats cg_solve(const LinearOperator& op, const std::vector<double>& rhs,
                           std::vector<double>& x, double tol, int maxit) {
    const std::size_t n = op.size;
    if (rhs.size() != n)
        throw SolveError("cg_solve: rhs size mismatch");
    if (x.size() != n) x.assign(n, 0.0);

    std::vector<double> b = rhs;
    if (op.nullspace_constants) {
        const double bnorm0 = detail::norm2(b);
        if (detail::mean_abs_sum(b) > 1e-10 * std::max(1.0, bnorm0))
            throw IncompatibleRhsError(
                "cg_solve: rhs incompatible with constants null space");
        detail::remove_mean(b);
        detail::remove_mean(x);
    }

    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }

    std::vector<double> r(n), p(n), ap(n);
    op.apply(x.data(), ap.data());
    for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - ap[q];
    if (op.nullspace_constants) detail::remove_mean(r);
    p = r;
    double rr = detail::dot(r, r);

    int it = 0;
    for (; it < maxit; ++it) {
        if (std::sqrt(rr) <= tol * bnorm) break;
        op.apply(p.data(), ap.data());
        const double pap = detail::dot(p, ap);
        if (pap <= 0.0)
            throw BreakdownError("cg_solve: non-positive curvature (operator not SPD?)");
        const double alpha = rr / pap;
        detail::axpy(alpha, p, x);
        detail::axpy(-alpha, ap, r);
        if (op.nullspace_constants && (it % 50 == 49)) detail::remove_mean(r);
        const double rr_new = detail::dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t q = 0; q < n; ++q) p[q] = r[q] + beta * p[q];
    }

    if (op.nullspace_constants) detail::remove_mean(x);
    const double res = detail::true_residual(op, b, x, ap) / bnorm;
    if ((it >= maxit && res > tol) || res > 10.0 * tol)
        throw NonConvergenceError("cg_solve did not converge", it, res);
    return {it, res};
}

/// BiCGStab for general nonsingular operators. rho/omega breakdowns are
/// reported distinctly from plain non-convergence.
inline SolveStats bicgstab_solve(const LinearOperator& op, const std::vector<double>& rhs,
                                 std::vector<double>& x, double tol, int maxit) {
    const std::size_t n = op.size;
    if (rhs.size() != n)
        throw SolveError("bicgstab_solve: rhs size mismatch");
    if (x.size() != n) x.assign(n, 0.0);

    std::vector<double> b = rhs;
    if (op.nullspace_constants) {
        const double bnorm0 = detail::norm2(b);
        if (detail::mean_abs_sum(b) > 1e-10 * std::max(1.0, bnorm0))
            throw IncompatibleRhsError(
                "bicgstab_solve: rhs incompatible with constants null space");
        detail::remove_mean(b);
        detail::remove_mean(x);
    }

    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }

    std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), work(n);
    op.apply(x.data(), v.data());
    for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - v[q];
    if (op.nullspace_constants) detail::remove_mean(r);
    r0 = r;
    std::fill(v.begin(), v.end(), 0.0);

    double rho = 1.0, alpha = 1.0, omega = 1.0;
    const double tiny = 1e-300;

    int it = 0;
    for (; it < maxit; ++it) {
        if (detail::norm2(r) <= tol * bnorm) break;
        const double rho_new = detail::dot(r0, r);
        if (std::abs(rho_new) < tiny * bnorm * bnorm)
            throw BreakdownError("bicgstab_solve: rho breakdown");
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho_new / rho) * (alpha / omega);
            for (std::size_t q = 0; q < n; ++q)
                p[q] = r[q] + beta * (p[q] - omega * v[q]);
        }
        rho = rho_new;
        op.apply(p.data(), v.data());
        const double r0v = detail::dot(r0, v);
        if (std::abs(r0v) < tiny * bnorm * bnorm)
            throw BreakdownError("bicgstab_solve: r0.v breakdown");
        alpha = rho / r0v;
        for (std::size_t q = 0; q < n; ++q) s[q] = r[q] - alpha * v[q];
        if (detail::norm2(s) <= tol * bnorm) {
            detail::axpy(alpha, p, x);
            r = s;
            ++it;
            break;
        }
        op.apply(s.data(), t.data());
        const double tt = detail::dot(t, t);
        if (tt < tiny)
            throw BreakdownError("bicgstab_solve: omega breakdown");
        omega = detail::dot(t, s) / tt;
        if (std::abs(omega) < tiny)
            throw BreakdownError("bicgstab_solve: omega breakdown");
        for (std::size_t q = 0; q < n; ++q) {
            x[q] += alpha * p[q] + omega * s[q];
            r[q] = s[q] - omega * t[q];
        }
        if (op.nullspace_constants && (it % 50 == 49)) {
            detail::remove_mean(x);
            detail::remove_mean(r);
        }
    }

    if (op.nullspace_constants) detail::remove_mean(x);
    const double res = detail::true_residual(op, b, x, work) / bnorm;
    if ((it >= maxit && res > tol) || res > 10.0 * tol)
        throw NonConvergenceError("bicgstab_solve did not converge", it, res);
    return {it, res};
}

/// Randomized linearity probe: apply(a f + b g) vs a apply(f) + b apply(g).
inline bool linearity_probe(const LinearOperator& op, std::uint64_t seed = 1234,
                            double tol = 1e-12) {
    const std::size_t n = op.size;
    std::vector<double> f(n), g(n), fg(n), of(n), og(n), ofg(n);
    std::uint64_t state = seed ? seed : 1;
    auto next = [&state]() {
        state ^= state << 13; state ^= state >> 7; state ^= state << 17;
        return double(state % 2000001) / 1000000.0 - 1.0;
    };
    const double a = 0.7, b = -1.3;
    for (std::size_t q = 0; q < n; ++q) {
        f[q] = next();
        g[q] = next();
        fg[q] = a * f[q] + b * g[q];
    }
    op.apply(f.data(), of.data());
    op.apply(g.data(), og.data());
    op.apply(fg.data(), ofg.data());
    double err = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        err = std::max(err, std::abs(ofg[q] - (a * of[q] + b * og[q])));
        scale = std::max({scale, std::abs(of[q]), std::abs(og[q])});
    }
    return err <= tol * std::max(1.0, scale);
}

}  // namespace chns
