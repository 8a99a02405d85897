#pragma once

#include "chns/fluid_step.hpp"
#include "chns/grid.hpp"
#include "chns/linear_solver.hpp"
#include "chns/params.hpp"
#include "chns/spatial_ops.hpp"
#include "chns/truncation.hpp"

// The two scalar sub-solves of the Picard map, in the order z then n.
// Both are backward Euler with homogeneous Neumann walls; the lagged
// Picard iterates (z_bar, n_bar) carry every nonlinearity, so each solve
// is a fixed linear system.

namespace chns {

/// Solves the z sub-problem
///   (1/k + (s/2) G^m(nbar) - Lap) z
///     = alpha^2 (s/2) G^m(nbar) / T_alpha(zbar)
///       + |grad zbar|^2 / T_alpha(zbar) + z_prev/k - u . grad zbar.
/// The reaction coefficient is nonnegative, so the operator is SPD and CG
/// applies. Advection is evaluated on the lagged iterate (in conservative
/// upwind form), which at the Picard fixed point coincides with the
/// implicit scheme.
inline ScalarField z_solve(const ScalarField& z_prev, const ScalarField& z_bar,
                           const ScalarField& n_bar, const FaceVectorField& u,
                           const SimParams& params) {
    const Grid& g = z_prev.grid;
    const TruncParams& tp = params.trunc;
    const std::size_t nc = z_prev.v.size();

    std::vector<double> gm(nc);
    for (std::size_t q = 0; q < nc; ++q)
        gm[q] = 0.5 * tp.s * g0m(n_bar.v[q], tp.m, tp.s);

    ScalarField gsq = gradsq_density(z_bar);
    ScalarField adv = divergence_of_fluxes(advective_flux(u, z_bar, params.advection));

    std::vector<double> rhs(nc);
    const double a2 = tp.alpha * tp.alpha;
    for (std::size_t q = 0; q < nc; ++q) {
        const double tz = t_alpha(z_bar.v[q], tp.alpha);
        rhs[q] = a2 * gm[q] / tz + gsq.v[q] / tz + z_prev.v[q] / params.k -
                 adv.v[q];
    }

    LinearOperator op;
    op.size = nc;
    op.symmetric = true;
    op.apply = [&g, &gm, &params](const double* x, double* out) {
        laplacian_neumann_raw(g, x, out);
        for (std::size_t q = 0; q < gm.size(); ++q)
            out[q] = x[q] / params.k + gm[q] * x[q] - out[q];
    };

    ScalarField z = z_bar;  // warm start
    const double tol = std::max(params.linsolve_tol,
                                detail::krylov_floor(g, params.k, max_abs(u)));
    cg_solve(op, rhs, z.v, tol, params.max_iters_for(nc));
    return z;
}

/// Solves the n sub-problem
///   (1/k + u . grad - Lap) n = n_prev/k - div(chi),
/// where chi is the chemotactic flux 2 T^m(nbar) T_alpha(zbar) grad z_new
/// with the density upwinded along the drift. Both the advective flux and
/// chi vanish on boundary faces and the Laplacian is conservative, so the
/// row-sum identity 1^T A = (1/k) 1^T holds exactly and cell mass is
/// conserved up to the linear-solve residual; the solve therefore runs at
/// a much tighter tolerance than the other systems.
inline ScalarField n_solve(const ScalarField& n_prev, const ScalarField& n_bar,
                           const ScalarField& z_bar, const ScalarField& z_new,
                           const FaceVectorField& u, const SimParams& params) {
    const Grid& g = n_prev.grid;
    const std::size_t nc = n_prev.v.size();

    ScalarField chi_div = divergence_of_fluxes(
        chemotaxis_flux(n_bar, z_bar, z_new, params.trunc));

    std::vector<double> rhs(nc);
    for (std::size_t q = 0; q < nc; ++q)
        rhs[q] = n_prev.v[q] / params.k - chi_div.v[q];

    const bool nonconservative = params.nonconservative_n_flux;
    std::array<ScalarField, 3> u_cc;
    if (nonconservative) u_cc = interp_face_to_center(u);

    LinearOperator op;
    op.size = nc;
    op.symmetric = false;
    op.apply = [&g, &u, &params, nonconservative, &u_cc](const double* x,
                                                         double* out) {
        ScalarField xf(g);
        std::copy(x, x + xf.v.size(), xf.v.begin());
        laplacian_neumann_raw(g, x, out);
        if (!nonconservative) {
            ScalarField adv =
                divergence_of_fluxes(advective_flux(u, xf, params.advection));
            for (std::size_t q = 0; q < xf.v.size(); ++q)
                out[q] = x[q] / params.k + adv.v[q] - out[q];
        } else {
            // negative-control variant: pointwise advective form built from
            // cell-centered velocities and central one-sided gradients; it is
            // consistent but not divergence-form, so mass is not conserved.
            for (int a = 0; a < g.dim; ++a) {
                const auto w = detail::axis_walk(g, a);
                for (int kk = 0; kk < g.n[2]; ++kk)
                    for (int j = 0; j < g.n[1]; ++j)
                        for (int i = 0; i < g.n[0]; ++i) {
                            const std::int64_t c = g.idx(i, j, kk);
                            const int ca = (a == 0) ? i : (a == 1) ? j : kk;
                            double grad;
                            if (ca == 0)
                                grad = (x[c + w.stride] - x[c]) / w.h;
                            else if (ca == w.extent - 1)
                                grad = (x[c] - x[c - w.stride]) / w.h;
                            else
                                grad = (x[c + w.stride] - x[c - w.stride]) /
                                       (2.0 * w.h);
                            // accumulated negatively here; the final line
                            // flips the sign of everything but x/k
                            out[c] -= u_cc[a].v[c] * grad;
                        }
            }
            for (std::size_t q = 0; q < xf.v.size(); ++q)
                out[q] = x[q] / params.k - out[q];
        }
    };

    ScalarField n = n_bar;  // warm start
    const double tol = std::max(params.linsolve_tol * 1e-3,
                                detail::krylov_floor(g, params.k, max_abs(u)));
    bicgstab_solve(op, rhs, n.v, tol, params.max_iters_for(nc));
    return n;
}

}  // namespace chns
