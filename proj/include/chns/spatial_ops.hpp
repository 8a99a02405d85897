#pragma once

#include "chns/grid.hpp"
#include "chns/truncation.hpp"

// Discrete differential operators on the MAC mesh: 2d+1-point Laplacian
// with zero-flux ghost closure, two-point face gradients, conservative
// divergence of face fluxes, monotone (upwind) advection fluxes and the
// chemotactic drift flux. Everything is in flux form with exactly zero
// boundary fluxes, so volume-weighted divergence sums telescope to zero.

namespace chns {

enum class AdvectionScheme { upwind, central };

namespace detail {

struct AxisWalk {
    std::int64_t stride;  // cell-index stride along the axis
    int extent;           // cells along the axis
    double h;
};

inline AxisWalk axis_walk(const Grid& g, int a) {
    std::int64_t stride = 1;
    if (a >= 1) stride = g.n[0];
    if (a == 2) stride = std::int64_t(g.n[0]) * g.n[1];
    return {stride, g.n[a], g.h[a]};
}

}  // namespace detail

/// Raw-array Laplacian with Neumann (zero-flux) ghost closure.
/// out is overwritten. Exact telescoping: the cell-volume-weighted sum of
/// the output is zero up to rounding.
inline void laplacian_neumann_raw(const Grid& g, const double* x, double* out) {
    const std::int64_t nc = g.cells();
    for (std::int64_t q = 0; q < nc; ++q) out[q] = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        const double inv_h2 = 1.0 / (w.h * w.h);
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const std::int64_t c = g.idx(i, j, k);
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    double acc = 0.0;
                    if (ca > 0) acc += x[c - w.stride] - x[c];
                    if (ca < w.extent - 1) acc += x[c + w.stride] - x[c];
                    out[c] += acc * inv_h2;
                }
    }
}

inline ScalarField laplacian_neumann(const ScalarField& f) {
    ScalarField out(f.grid);
    laplacian_neumann_raw(f.grid, f.v.data(), out.v.data());
    return out;
}

/// Two-point differences per interior face; boundary faces zero (Neumann).
inline FaceVectorField gradient_at_faces(const ScalarField& f) {
    const Grid& g = f.grid;
    FaceVectorField out(g, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        auto d = g.face_dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    if (ca == 0 || ca == g.n[a]) continue;
                    const std::int64_t right = g.idx(i, j, k);
                    out.comp[a][g.fidx(a, i, j, k)] =
                        (f.v[right] - f.v[right - w.stride]) / w.h;
                }
    }
    return out;
}

/// Per-cell net outflow of face fluxes divided by cell volume.
inline void divergence_of_fluxes_raw(const FaceVectorField& flux, double* out) {
    const Grid& g = flux.grid;
    const std::int64_t nc = g.cells();
    for (std::int64_t q = 0; q < nc; ++q) out[q] = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        const double inv_h = 1.0 / g.h[a];
        std::array<int, 3> step{a == 0, a == 1, a == 2};
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i) {
                    const double fl = flux.comp[a][g.fidx(a, i, j, k)];
                    const double fr = flux.comp[a][g.fidx(a, i + step[0], j + step[1], k + step[2])];
                    out[g.idx(i, j, k)] += (fr - fl) * inv_h;
                }
    }
}

inline ScalarField divergence_of_fluxes(const FaceVectorField& flux) {
    ScalarField out(flux.grid);
    divergence_of_fluxes_raw(flux, out.v.data());
    return out;
}

/// Face flux u_f * f_face with f_face upwind-selected (default) or the
/// centered two-point average. Boundary faces zero.
inline FaceVectorField advective_flux(const FaceVectorField& u, const ScalarField& f,
                                      AdvectionScheme scheme = AdvectionScheme::upwind) {
    const Grid& g = f.grid;
    FaceVectorField out(g, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        auto d = g.face_dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    if (ca == 0 || ca == g.n[a]) continue;
                    const std::int64_t fi = g.fidx(a, i, j, k);
                    const double uf = u.comp[a][fi];
                    const std::int64_t right = g.idx(i, j, k);
                    const double fl = f.v[right - w.stride];
                    const double fr = f.v[right];
                    double fv;
                    if (scheme == AdvectionScheme::upwind)
                        fv = uf >= 0.0 ? fl : fr;
                    else
                        fv = 0.5 * (fl + fr);
                    out.comp[a][fi] = uf * fv;
                }
    }
    return out;
}

/// Half-per-face split of the squared face gradients: each interior face
/// contributes (grad)^2/2 to its two cells, so that the volume-weighted
/// sum equals the face-based Dirichlet energy exactly. This exactness is
/// what makes the z-equation L^2 ledger telescope at the discrete level.
inline ScalarField gradsq_density(const ScalarField& f) {
    const Grid& g = f.grid;
    ScalarField out(g, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        auto d = g.face_dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    if (ca == 0 || ca == g.n[a]) continue;
                    const std::int64_t right = g.idx(i, j, k);
                    const double grad = (f.v[right] - f.v[right - w.stride]) / w.h;
                    const double half = 0.5 * grad * grad;
                    out.v[right] += half;
                    out.v[right - w.stride] += half;
                }
    }
    return out;
}

/// Chemotactic flux 2 T_alpha(zbar)_f (grad z_new)_f T^m(nbar)_f, with the
/// truncated density picked upwind with respect to the drift direction.
/// Upwinding the density promotes discrete nonnegativity of n.
inline FluxField chemotaxis_flux(const ScalarField& n_bar, const ScalarField& z_bar,
                                 const ScalarField& z_new, const TruncParams& tp) {
    const Grid& g = n_bar.grid;
    FluxField out(g, 0.0);
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        auto d = g.face_dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    if (ca == 0 || ca == g.n[a]) continue;
                    const std::int64_t right = g.idx(i, j, k);
                    const std::int64_t left = right - w.stride;
                    const double zf = 0.5 * (z_bar.v[left] + z_bar.v[right]);
                    const double grad = (z_new.v[right] - z_new.v[left]) / w.h;
                    const double drift = 2.0 * t_alpha(zf, tp.alpha) * grad;
                    const double nd = drift >= 0.0 ? n_bar.v[left] : n_bar.v[right];
                    out.comp[a][g.fidx(a, i, j, k)] = drift * t0m(nd, tp.m);
                }
    }
    return out;
}

/// Discrete divergence of a MAC velocity (fluxes are the raw face values).
inline ScalarField divergence(const FaceVectorField& u) {
    return divergence_of_fluxes(u);
}

/// Face-based Dirichlet energy sum_f vol * grad_f^2 of a cell field.
inline double dirichlet_energy(const ScalarField& f) {
    const Grid& g = f.grid;
    long double acc = 0.0L;
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        auto d = g.face_dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    if (ca == 0 || ca == g.n[a]) continue;
                    const std::int64_t right = g.idx(i, j, k);
                    const double grad = (f.v[right] - f.v[right - w.stride]) / w.h;
                    acc += (long double)grad * grad;
                }
    }
    return double(acc) * g.cell_volume();
}

/// Face-based p-sum of |grad f|^p (used by the initial-step guards).
inline double gradient_p_sum(const ScalarField& f, double p) {
    const Grid& g = f.grid;
    long double acc = 0.0L;
    for (int a = 0; a < g.dim; ++a) {
        const auto w = detail::axis_walk(g, a);
        auto d = g.face_dims(a);
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const int ca = (a == 0) ? i : (a == 1) ? j : k;
                    if (ca == 0 || ca == g.n[a]) continue;
                    const std::int64_t right = g.idx(i, j, k);
                    const double grad = (f.v[right] - f.v[right - w.stride]) / w.h;
                    acc += std::pow(std::abs(grad), p);
                }
    }
    return double(acc) * g.cell_volume();
}

/// Squared face-difference (H^1 seminorm) energy of a MAC velocity, with
/// Dirichlet walls: differences along the component's own axis use the
/// boundary faces directly, transverse wall differences use the mirrored
/// ghost value -u.
inline double velocity_gradient_sq(const FaceVectorField& u) {
    const Grid& g = u.grid;
    long double acc = 0.0L;
    for (int a = 0; a < g.dim; ++a) {
        auto d = g.face_dims(a);
        for (int b = 0; b < g.dim; ++b) {
            const double inv_h = 1.0 / g.h[b];
            std::array<int, 3> step{b == 0, b == 1, b == 2};
            for (int k = 0; k < d[2]; ++k)
                for (int j = 0; j < d[1]; ++j)
                    for (int i = 0; i < d[0]; ++i) {
                        const int cb = (b == 0) ? i : (b == 1) ? j : k;
                        const double xc = u.comp[a][g.fidx(a, i, j, k)];
                        if (b == a) {
                            if (cb == 0) continue;  // each own-axis gap once
                            const double xl = u.comp[a][g.fidx(a, i - step[0], j - step[1], k - step[2])];
                            const double grad = (xc - xl) * inv_h;
                            acc += (long double)grad * grad;
                        } else {
                            const int nb = d[b];
                            if (cb + 1 < nb) {
                                const double xr = u.comp[a][g.fidx(a, i + step[0], j + step[1], k + step[2])];
                                const double grad = (xr - xc) * inv_h;
                                acc += (long double)grad * grad;
                            }
                            // wall half-gaps: ghost = -u across the wall
                            if (cb == 0) {
                                const double grad = 2.0 * xc * inv_h;
                                acc += (long double)grad * grad * 0.5;
                            }
                            if (cb == nb - 1) {
                                const double grad = 2.0 * xc * inv_h;
                                acc += (long double)grad * grad * 0.5;
                            }
                        }
                    }
        }
    }
    return double(acc) * g.cell_volume();
}

}  // namespace chns
