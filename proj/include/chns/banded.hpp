#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "chns/linear_solver.hpp"

// Banded LU factorization without pivoting, for the per-component momentum
// operators: they are strictly diagonally dominant (by the 1/k row term),
// so elimination without pivoting is stable. Assembly probes the
// matrix-free operator with impulse combs (impulses spaced farther apart
// than the bandwidth), needing only 2b+1 operator applications.

namespace chns {

class BandedLU {
public:
    /// Assembles and factors a banded operator with half-bandwidth `band`.
    BandedLU(const LinearOperator& op, std::int64_t band)
        : n_(std::int64_t(op.size)), b_(band), w_(2 * band + 1), a_(std::size_t(n_) * w_, 0.0) {
        std::vector<double> x(op.size, 0.0), y(op.size);
        const std::int64_t spacing = 2 * b_ + 1;
        for (std::int64_t off = 0; off < spacing && off < n_; ++off) {
            for (std::int64_t c = off; c < n_; c += spacing) x[std::size_t(c)] = 1.0;
            op.apply(x.data(), y.data());
            for (std::int64_t c = off; c < n_; c += spacing) {
                x[std::size_t(c)] = 0.0;
                const std::int64_t rlo = std::max<std::int64_t>(0, c - b_);
                const std::int64_t rhi = std::min(n_ - 1, c + b_);
                for (std::int64_t r = rlo; r <= rhi; ++r)
                    at(r, c) = y[std::size_t(r)];
            }
        }
        factor();
    }

    /// Estimated storage in bytes for a given size/bandwidth, for callers
    /// deciding between the direct and iterative paths.
    static std::size_t storage_bytes(std::size_t n, std::int64_t band) {
        return n * std::size_t(2 * band + 1) * sizeof(double);
    }

    void solve(const double* rhs, double* x) const {
        for (std::int64_t i = 0; i < n_; ++i) x[i] = rhs[i];
        // forward substitution with unit-diagonal L
        for (std::int64_t c = 0; c < n_; ++c) {
            const double xc = x[c];
            if (xc == 0.0) continue;
            const std::int64_t rhi = std::min(n_ - 1, c + b_);
            for (std::int64_t r = c + 1; r <= rhi; ++r) x[r] -= cat(r, c) * xc;
        }
        // back substitution with U
        for (std::int64_t c = n_ - 1; c >= 0; --c) {
            x[c] /= cat(c, c);
            const double xc = x[c];
            if (xc == 0.0) continue;
            const std::int64_t rlo = std::max<std::int64_t>(0, c - b_);
            for (std::int64_t r = rlo; r < c; ++r) x[r] -= cat(r, c) * xc;
        }
    }

private:
    // entry (r, c), stored column-major within the band
    double& at(std::int64_t r, std::int64_t c) {
        return a_[std::size_t(c) * std::size_t(w_) + std::size_t(r - c + b_)];
    }
    double cat(std::int64_t r, std::int64_t c) const {
        return a_[std::size_t(c) * std::size_t(w_) + std::size_t(r - c + b_)];
    }

    void factor() {
        for (std::int64_t c = 0; c < n_; ++c) {
            const double piv = at(c, c);
            if (piv == 0.0)
                throw std::runtime_error("BandedLU: zero pivot (operator not "
                                         "diagonally dominant?)");
            const std::int64_t rhi = std::min(n_ - 1, c + b_);
            for (std::int64_t r = c + 1; r <= rhi; ++r) {
                const double l = at(r, c) / piv;
                at(r, c) = l;
                if (l == 0.0) continue;
                const std::int64_t jhi = std::min(n_ - 1, c + b_);
                for (std::int64_t j = c + 1; j <= jhi; ++j)
                    at(r, j) -= l * at(c, j);
            }
        }
    }

    std::int64_t n_, b_, w_;
    std::vector<double> a_;
};

}  // namespace chns
