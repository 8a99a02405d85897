#pragma once

#include <limits>
#include <memory>

#include "chns/banded.hpp"
#include "chns/grid.hpp"
#include "chns/linear_solver.hpp"
#include "chns/params.hpp"
#include "chns/spatial_ops.hpp"

// One linear velocity/pressure sub-solve of the Picard map: semi-implicit
// momentum with the chemotactic-gravity source T^m(nbar) grad Phi, plus
// incompressibility. Each velocity component lives on its own face grid
// and decouples in the momentum operator (the advecting field is the
// previous velocity); the divergence constraint couples them through the
// pressure, handled either by a non-incremental Chorin projection
// (momentum_solve + pressure_project) or by the Krylov Schur-complement
// solve used inside the Picard loop, which drives the full saddle-point
// residual to solver tolerance.

namespace chns {

struct FluidSubstepInput {
    const FaceVectorField& u_prev;
    const ScalarField& n_bar;
    const SimParams& params;
};

namespace detail {

/// Smallest relative residual a Krylov solve can reliably reach for a
/// backward-Euler operator scaled by 1/k: about eps * k * ||A||.
inline double krylov_floor(const Grid& g, double k, double umax) {
    double anorm = 1.0 / k;
    for (int a = 0; a < g.dim; ++a)
        anorm += 4.0 / (g.h[a] * g.h[a]) + 2.0 * umax / g.h[a];
    return 100.0 * std::numeric_limits<double>::epsilon() * k * anorm;
}

}  // namespace detail

/// Implicit operator for one velocity component on its face lattice:
/// v/k + upwind advection by the (frozen) previous velocity - Laplacian,
/// homogeneous Dirichlet walls. The advecting field is averaged onto the
/// control-volume boundary of the face grid, which keeps it discretely
/// divergence-free there (the average of two adjacent cell divergences),
/// so flux-form upwinding is purely dissipative.
struct MomentumComponentOperator {
    Grid grid;
    int axis = 0;
    double k = 1.0;
    // advecting velocity at control-volume boundaries of the face grid:
    // along the component's own axis the boundaries sit at cell centers,
    // transversally at cell edges/corners.
    std::vector<double> w_own;                    // cell lattice
    std::array<std::vector<double>, 3> w_edge;    // per transverse axis

    MomentumComponentOperator(const FaceVectorField& u_prev, int a, double dt)
        : grid(u_prev.grid), axis(a), k(dt) {
        const Grid& g = grid;
        w_own.assign(static_cast<std::size_t>(g.cells()), 0.0);
        std::array<int, 3> stepa{a == 0, a == 1, a == 2};
        for (int kk = 0; kk < g.n[2]; ++kk)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i)
                    w_own[g.idx(i, j, kk)] =
                        0.5 * (u_prev.comp[a][g.fidx(a, i, j, kk)] +
                               u_prev.comp[a][g.fidx(a, i + stepa[0], j + stepa[1], kk + stepa[2])]);
        for (int b = 0; b < g.dim; ++b) {
            if (b == a) continue;
            auto ed = g.n;
            ed[a] += 1;
            ed[b] += 1;
            w_edge[b].assign(std::size_t(ed[0]) * ed[1] * ed[2], 0.0);
            for (int kk = 0; kk < ed[2]; ++kk)
                for (int j = 0; j < ed[1]; ++j)
                    for (int i = 0; i < ed[0]; ++i) {
                        const int ea = (a == 0) ? i : (a == 1) ? j : kk;
                        if (ea == 0 || ea == g.n[a]) continue;  // unused edges
                        // average u_b over the two cells sharing this edge
                        // along axis a; the b coordinate is already a face
                        // coordinate of u_b.
                        int c0[3] = {i, j, kk};
                        c0[a] -= 1;  // left cell along a
                        const double ub_l = u_prev.comp[b][g.fidx(b, c0[0], c0[1], c0[2])];
                        const double ub_r = u_prev.comp[b][g.fidx(b, i, j, kk)];
                        w_edge[b][(std::size_t(kk) * ed[1] + j) * ed[0] + i] =
                            0.5 * (ub_l + ub_r);
                    }
        }
    }

    std::size_t size() const { return std::size_t(grid.face_count(axis)); }

    void apply(const double* x, double* out) const {
        const Grid& g = grid;
        const int a = axis;
        const auto d = g.face_dims(a);
        const std::int64_t sd[3] = {1, d[0], std::int64_t(d[0]) * d[1]};
        const double inv_k = 1.0 / k;
        for (int kk = 0; kk < d[2]; ++kk)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    const std::int64_t f = (std::int64_t(kk) * d[1] + j) * d[0] + i;
                    const int fc[3] = {i, j, kk};
                    const int ca = fc[a];
                    if (ca == 0 || ca == g.n[a]) {
                        out[f] = inv_k * x[f];  // Dirichlet slot, stays zero
                        continue;
                    }
                    double acc = inv_k * x[f];
                    // diffusion
                    for (int b = 0; b < g.dim; ++b) {
                        const double inv_h2 = 1.0 / (g.h[b] * g.h[b]);
                        if (b == a) {
                            acc -= (x[f + sd[b]] - 2.0 * x[f] + x[f - sd[b]]) * inv_h2;
                        } else {
                            const int cb = fc[b];
                            double lap;
                            if (cb == 0 && cb == g.n[b] - 1)
                                lap = -6.0 * x[f];  // single cell layer: both walls
                            else if (cb == 0)
                                lap = x[f + sd[b]] - 3.0 * x[f];
                            else if (cb == g.n[b] - 1)
                                lap = x[f - sd[b]] - 3.0 * x[f];
                            else
                                lap = x[f + sd[b]] - 2.0 * x[f] + x[f - sd[b]];
                            acc -= lap * inv_h2;
                        }
                    }
                    // upwind advection, flux form over the face-grid CV
                    {
                        // own axis: CV boundaries at the centers of the two
                        // cells adjacent to face ca (cells ca-1 and ca)
                        int cr[3] = {i, j, kk};
                        int cl[3] = {i, j, kk};
                        cl[a] -= 1;
                        const std::int64_t idx_r = (std::int64_t(cr[2]) * g.n[1] + cr[1]) * g.n[0] + cr[0];
                        const std::int64_t idx_l = (std::int64_t(cl[2]) * g.n[1] + cl[1]) * g.n[0] + cl[0];
                        const double wr = w_own[idx_r];
                        const double wl = w_own[idx_l];
                        const double fr = wr * (wr >= 0.0 ? x[f] : x[f + sd[a]]);
                        const double fl = wl * (wl >= 0.0 ? x[f - sd[a]] : x[f]);
                        acc += (fr - fl) / g.h[a];
                    }
                    for (int b = 0; b < g.dim; ++b) {
                        if (b == a) continue;
                        auto ed = g.n;
                        ed[a] += 1;
                        ed[b] += 1;
                        const std::int64_t es[3] = {1, ed[0], std::int64_t(ed[0]) * ed[1]};
                        const std::int64_t ebase =
                            (std::int64_t(kk) * ed[1] + j) * ed[0] + i;
                        const int cb = fc[b];
                        // wall edges (cb == 0 below, cb+1 == n[b] above) carry
                        // zero flux: no-slip walls
                        double flux_hi = 0.0, flux_lo = 0.0;
                        if (cb + 1 < g.n[b]) {
                            const double w = w_edge[b][ebase + es[b]];
                            flux_hi = w * (w >= 0.0 ? x[f] : x[f + sd[b]]);
                        }
                        if (cb >= 1) {
                            const double w = w_edge[b][ebase];
                            flux_lo = w * (w >= 0.0 ? x[f - sd[b]] : x[f]);
                        }
                        acc += (flux_hi - flux_lo) / g.h[b];
                    }
                    out[f] = acc;
                }
    }

    LinearOperator linear_operator() const {
        LinearOperator op;
        op.size = size();
        op.symmetric = false;
        op.apply = [this](const double* x, double* y) { this->apply(x, y); };
        return op;
    }
};

/// Source faces: centered average of T^m(nbar) times grad Phi at faces
/// (the source is not a transport term, so no upwinding).
inline FaceVectorField momentum_source(const ScalarField& n_bar, const SimParams& params) {
    const Grid& g = n_bar.grid;
    ScalarField tn(g);
    for (std::size_t q = 0; q < tn.v.size(); ++q)
        tn.v[q] = t0m(n_bar.v[q], params.trunc.m);
    FaceVectorField tn_face = interp_center_to_face(tn);
    FaceVectorField grad_phi = params.potential.gradient_at_faces_of(g);
    FaceVectorField out(g, 0.0);
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t q = 0; q < out.comp[a].size(); ++q)
            out.comp[a][q] = tn_face.comp[a][q] * grad_phi.comp[a][q];
    out.zero_boundary();
    return out;
}

/// Holds the per-time-step frozen pieces of the fluid sub-solve: the
/// component operators built from u^{i-1} and the u^{i-1}/k part of the
/// right-hand side.
class FluidSolver {
public:
    FluidSolver(const FaceVectorField& u_prev, const SimParams& params)
        : grid_(u_prev.grid), params_(&params), u_prev_(u_prev) {
        for (int a = 0; a < grid_.dim; ++a)
            ops_.emplace_back(u_prev, a, params.k);
        umax_ = max_abs(u_prev);
        // The component operators are fixed for the whole time step, and
        // the Schur-complement iteration applies their inverses many times
        // per Picard sweep; a banded direct factorization (stable without
        // pivoting: rows are strictly diagonally dominant by 1/k) makes
        // each of those inner solves exact and cheap. Fall back to Krylov
        // when the band storage would be excessive (large 3D grids).
        for (int a = 0; a < grid_.dim; ++a) {
            const auto d = grid_.face_dims(a);
            std::int64_t band = d[0];
            if (grid_.dim == 3) band = std::int64_t(d[0]) * d[1];
            if (BandedLU::storage_bytes(ops_[a].size(), band) <= std::size_t(1) << 26)
                lu_.push_back(std::make_unique<BandedLU>(ops_[a].linear_operator(), band));
            else
                lu_.push_back(nullptr);
        }
    }

    /// Tentative velocity: solves (1/k + adv - Lap) u* = source + u_prev/k
    /// componentwise. extra_rhs (e.g. -grad p) is optional.
    FaceVectorField momentum_solve(const ScalarField& n_bar,
                                   const FaceVectorField* extra_rhs = nullptr,
                                   const FaceVectorField* initial_guess = nullptr,
                                   double tol_override = 0.0) const {
        FaceVectorField rhs = momentum_source(n_bar, *params_);
        const double inv_k = 1.0 / params_->k;
        for (int a = 0; a < grid_.dim; ++a) {
            for (std::size_t q = 0; q < rhs.comp[a].size(); ++q) {
                rhs.comp[a][q] += u_prev_.comp[a][q] * inv_k;
                if (extra_rhs) rhs.comp[a][q] += extra_rhs->comp[a][q];
            }
        }
        rhs.zero_boundary();
        FaceVectorField u(grid_, 0.0);
        const double tol = solve_tol(tol_override > 0.0 ? tol_override
                                                        : params_->linsolve_tol);
        for (int a = 0; a < grid_.dim; ++a) {
            if (initial_guess) u.comp[a] = initial_guess->comp[a];
            bicgstab_solve(ops_[a].linear_operator(), rhs.comp[a], u.comp[a], tol,
                           params_->max_iters_for(rhs.comp[a].size()));
        }
        u.zero_boundary();
        return u;
    }

    /// Coupled velocity/pressure solve via BiCGStab on the pressure Schur
    /// complement S = D F^{-1} G, warm-started from (u, p). On return the
    /// momentum equation and the divergence constraint hold to solver
    /// tolerance, so the Picard fixed point satisfies the full scheme.
    void solve_coupled(const ScalarField& n_bar, FaceVectorField& u,
                       ScalarField& p) const {
        FaceVectorField f = momentum_source(n_bar, *params_);
        const double inv_k = 1.0 / params_->k;
        for (int a = 0; a < grid_.dim; ++a)
            for (std::size_t q = 0; q < f.comp[a].size(); ++q)
                f.comp[a][q] += u_prev_.comp[a][q] * inv_k;
        f.zero_boundary();

        // rhs of the Schur system: D F^{-1} f (warm-start the solve with u)
        FaceVectorField uf = u;
        for (int a = 0; a < grid_.dim; ++a)
            inner_solve(a, f.comp[a], uf.comp[a]);
        uf.zero_boundary();
        ScalarField schur_rhs = divergence_of_fluxes(uf);

        LinearOperator schur;
        schur.size = std::size_t(grid_.cells());
        schur.symmetric = false;
        schur.nullspace_constants = true;
        schur.apply = [this](const double* q, double* out) {
            ScalarField qf(grid_);
            std::copy(q, q + qf.v.size(), qf.v.begin());
            FaceVectorField gq = gradient_at_faces(qf);
            FaceVectorField w(grid_, 0.0);
            for (int a = 0; a < grid_.dim; ++a)
                inner_solve(a, gq.comp[a], w.comp[a]);
            w.zero_boundary();
            divergence_of_fluxes_raw(w, out);
        };

        bicgstab_solve(schur, schur_rhs.v, p.v, params_->linsolve_tol,
                       params_->max_iters_for(schur.size));

        // final velocity: F u = f - G p
        FaceVectorField gp = gradient_at_faces(p);
        FaceVectorField rhs = f;
        for (int a = 0; a < grid_.dim; ++a)
            for (std::size_t q = 0; q < rhs.comp[a].size(); ++q)
                rhs.comp[a][q] -= gp.comp[a][q];
        rhs.zero_boundary();
        for (int a = 0; a < grid_.dim; ++a)
            inner_solve(a, rhs.comp[a], u.comp[a]);
        u.zero_boundary();
    }

    /// One momentum-component solve inside the coupled iteration: direct
    /// when the factorization exists, Krylov otherwise.
    void inner_solve(int a, const std::vector<double>& rhs,
                     std::vector<double>& x) const {
        if (lu_[std::size_t(a)]) {
            lu_[std::size_t(a)]->solve(rhs.data(), x.data());
        } else {
            bicgstab_solve(ops_[a].linear_operator(), rhs, x,
                           solve_tol(params_->linsolve_tol * 1e-2),
                           params_->max_iters_for(rhs.size()));
        }
    }

    const MomentumComponentOperator& component_op(int a) const { return ops_[a]; }

private:
    double solve_tol(double want) const {
        return std::max(want, detail::krylov_floor(grid_, params_->k, umax_));
    }

    Grid grid_;
    const SimParams* params_;
    FaceVectorField u_prev_;
    std::vector<MomentumComponentOperator> ops_;
    std::vector<std::unique_ptr<BandedLU>> lu_;
    double umax_ = 0.0;
};

/// Spec-level momentum solve: tentative u* from u^{i-1} and the Picard
/// iterate nbar, without any pressure contribution.
inline FaceVectorField momentum_solve(const FluidSubstepInput& in) {
    FluidSolver solver(in.u_prev, in.params);
    return solver.momentum_solve(in.n_bar, nullptr, &in.u_prev);
}

/// Non-incremental Chorin projection: solves the Neumann Poisson problem
/// Lap phi = div(u*)/k (compatible because boundary fluxes vanish), then
/// u = u* - k grad phi with phi mean-pinned to zero.
inline std::pair<FaceVectorField, ScalarField> pressure_project(
    const FaceVectorField& u_star, double k, double tol = 1e-10, int maxit = 0) {
    const Grid& g = u_star.grid;
    ScalarField div_u = divergence_of_fluxes(u_star);
    std::vector<double> rhs(div_u.v.size());
    for (std::size_t q = 0; q < rhs.size(); ++q) rhs[q] = -div_u.v[q] / k;

    LinearOperator op;
    op.size = rhs.size();
    op.symmetric = true;
    op.nullspace_constants = true;
    op.apply = [&g](const double* x, double* out) {
        laplacian_neumann_raw(g, x, out);
        for (std::int64_t q = 0; q < g.cells(); ++q) out[q] = -out[q];
    };

    ScalarField phi(g, 0.0);
    cg_solve(op, rhs, phi.v, tol, maxit > 0 ? maxit : int(10 * rhs.size()));

    FaceVectorField grad_phi = gradient_at_faces(phi);
    FaceVectorField u = u_star;
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t q = 0; q < u.comp[a].size(); ++q)
            u.comp[a][q] -= k * grad_phi.comp[a][q];
    u.zero_boundary();
    return {std::move(u), std::move(phi)};
}

}  // namespace chns
