#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "chns/fluid_step.hpp"
#include "chns/grid.hpp"
#include "chns/params.hpp"
#include "chns/scalar_steps.hpp"
#include "chns/spatial_ops.hpp"

// One backward-Euler step of the coupled scheme, resolved by Picard
// iteration on the decoupled sub-problems in the order u -> z -> n. The
// iteration freezes (nbar, zbar) from the previous sweep, so every
// sub-solve is linear; at the fixed point the full implicit scheme holds
// up to the linear-solver tolerance.

namespace chns {

struct PicardReport {
    int iterations = 0;
    bool converged = false;
    double update_norm = 0.0;
    double max_eq_residual = 0.0;  // worst relative equation residual
    int substeps = 1;              // > 1 when the adaptive retry halved k
};

/// Builds the initial state: z = sqrt(c0 + alpha^2), u0 projected onto the
/// discretely divergence-free space, zero pressure.
inline State init_state(const ScalarField& n0, const ScalarField& c0,
                        const FaceVectorField& u0, const SimParams& params) {
    if (min_value(n0) < 0.0)
        throw std::invalid_argument("init_state: initial density has negative cells");
    if (min_value(c0) < 0.0)
        throw std::invalid_argument("init_state: initial oxygen has negative cells");
    if (!(n0.grid == c0.grid) || !(n0.grid == u0.grid))
        throw std::invalid_argument("init_state: fields on different grids");

    State st{ScalarField(n0.grid), ScalarField(n0.grid), FaceVectorField(n0.grid, 0.0),
             ScalarField(n0.grid, 0.0)};
    st.n = n0;
    const double a2 = params.trunc.alpha * params.trunc.alpha;
    for (std::size_t q = 0; q < c0.v.size(); ++q)
        st.z.v[q] = std::sqrt(c0.v[q] + a2);

    FaceVectorField u_in = u0;
    u_in.zero_boundary();
    if (max_abs(u_in) > 0.0) {
        auto [u_div_free, phi] = pressure_project(u_in, 1.0, params.linsolve_tol);
        (void)phi;
        st.u = std::move(u_div_free);
    } else {
        st.u = std::move(u_in);
    }
    st.step = 0;
    st.time = 0.0;
    st.z_prev_max = max_value(st.z);
    return st;
}

/// Checks the k-size guards on the initial data and returns a warning
/// string per violated guard (empty vector if all hold). Norms use the
/// discrete face gradients and the discrete Laplacian as the second-order
/// piece of the H^2 norm.
inline std::vector<std::string> validate_initial_step(const State& st,
                                                      const SimParams& params) {
    std::vector<std::string> warnings;
    const double s = params.trunc.s;
    const double k = params.k;

    double n_guard;
    if (s < 2.0) {
        const double p = 5.0 * s / (s + 3.0);
        double lp = 0.0;
        for (double v : st.n.v) lp += std::pow(std::abs(v), p);
        lp *= st.n.grid.cell_volume();
        const double w1p = lp + gradient_p_sum(st.n, p);
        n_guard = k * std::pow(std::pow(w1p, 1.0 / p), p);
    } else {
        const double h1 = l2_sq(st.n) + dirichlet_energy(st.n);
        n_guard = k * h1;
    }
    if (n_guard > 1.0)
        warnings.push_back("initial-step guard violated: k * |n0|_W1p exceeds 1 (" +
                           std::to_string(n_guard) + ")");

    ScalarField lap_z = laplacian_neumann(st.z);
    const double h2 = l2_sq(st.z) + dirichlet_energy(st.z) + l2_sq(lap_z);
    if (k * h2 > 1.0)
        warnings.push_back("initial-step guard violated: k * |z0|_H2^2 exceeds 1 (" +
                           std::to_string(k * h2) + ")");

    const double v2 = velocity_gradient_sq(st.u);
    if (k * v2 > 1.0)
        warnings.push_back("initial-step guard violated: k * |u0|_V^2 exceeds 1 (" +
                           std::to_string(k * v2) + ")");
    return warnings;
}

namespace detail {

inline double rel_linf_diff(const std::vector<double>& a,
                            const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) {
        num = std::max(num, std::abs(a[q] - b[q]));
        den = std::max(den, std::abs(b[q]));
    }
    return num / (1.0 + den);
}

/// L-inf of a residual vector divided by the largest magnitude among the
/// equation's additive terms, so that "small" means small relative to the
/// equation's own scale.
inline double rel_residual(const std::vector<double>& r,
                           std::initializer_list<const std::vector<double>*> terms) {
    double rn = 0.0;
    for (double v : r) rn = std::max(rn, std::abs(v));
    if (rn == 0.0) return 0.0;
    double scale = 0.0;
    for (const auto* t : terms)
        for (double v : *t) scale = std::max(scale, std::abs(v));
    return rn / std::max(scale, 1e-30);
}

}  // namespace detail

/// Relative equation residuals of a candidate new state against the
/// previous one: {n equation, z equation, momentum, divergence}.
inline std::array<double, 4> equation_residuals(const State& prev,
                                                const State& next,
                                                const SimParams& params) {
    const Grid& g = prev.n.grid;
    const TruncParams& tp = params.trunc;
    const std::size_t nc = prev.n.v.size();
    std::array<double, 4> out{};

    {  // density equation
        ScalarField lap = laplacian_neumann(next.n);
        ScalarField adv = divergence_of_fluxes(
            advective_flux(next.u, next.n, params.advection));
        ScalarField chi = divergence_of_fluxes(
            chemotaxis_flux(next.n, next.z, next.z, tp));
        // the equation is solved as (n/k + ...) = n_prev/k, so the relative
        // residual is measured against that system's term scale
        std::vector<double> tk(nc), r(nc);
        for (std::size_t q = 0; q < nc; ++q) {
            tk[q] = std::max(std::abs(next.n.v[q]), std::abs(prev.n.v[q])) /
                    params.k;
            r[q] = (next.n.v[q] - prev.n.v[q]) / params.k + adv.v[q] -
                   lap.v[q] + chi.v[q];
        }
        out[0] = detail::rel_residual(r, {&tk, &adv.v, &lap.v, &chi.v});
    }
    {  // oxygen-variable equation
        ScalarField lap = laplacian_neumann(next.z);
        ScalarField adv = divergence_of_fluxes(
            advective_flux(next.u, next.z, params.advection));
        ScalarField gsq = gradsq_density(next.z);
        std::vector<double> tk(nc), rea(nc), src(nc), r(nc);
        const double a2 = tp.alpha * tp.alpha;
        for (std::size_t q = 0; q < nc; ++q) {
            const double gm = 0.5 * tp.s * g0m(next.n.v[q], tp.m, tp.s);
            const double tz = t_alpha(next.z.v[q], tp.alpha);
            tk[q] = std::max(std::abs(next.z.v[q]), std::abs(prev.z.v[q])) /
                    params.k;
            rea[q] = gm * next.z.v[q];
            src[q] = a2 * gm / tz + gsq.v[q] / tz;
            r[q] = (next.z.v[q] - prev.z.v[q]) / params.k + adv.v[q] -
                   lap.v[q] + rea[q] - src[q];
        }
        out[1] = detail::rel_residual(r, {&tk, &adv.v, &lap.v, &rea, &src});
    }
    {  // momentum: F u + G p - source - u_prev/k on interior faces
        FluidSolver fs(prev.u, params);
        FaceVectorField f = momentum_source(next.n, params);
        FaceVectorField gp = gradient_at_faces(next.p);
        double worst = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            std::vector<double> fu(next.u.comp[a].size());
            fs.component_op(a).apply(next.u.comp[a].data(), fu.data());
            const auto d = g.face_dims(a);
            std::vector<double> r(fu.size(), 0.0), rhs(fu.size(), 0.0);
            for (int kk = 0; kk < d[2]; ++kk)
                for (int j = 0; j < d[1]; ++j)
                    for (int i = 0; i < d[0]; ++i) {
                        const int fc[3] = {i, j, kk};
                        if (fc[a] == 0 || fc[a] == g.n[a]) continue;
                        const std::int64_t q = g.fidx(a, i, j, kk);
                        rhs[q] = f.comp[a][q] + prev.u.comp[a][q] / params.k;
                        r[q] = fu[q] + gp.comp[a][q] - rhs[q];
                    }
            worst = std::max(worst, detail::rel_residual(r, {&fu, &gp.comp[a], &rhs}));
        }
        out[2] = worst;
    }
    {  // divergence constraint, relative to the velocity scale implied by the
        // momentum data: the projection removes divergence down to solver
        // tolerance of the *tentative* velocity, which stays O(k·|source|)
        // even when the final velocity is annihilated by the pressure.
        ScalarField div = divergence_of_fluxes(next.u);
        double rn = max_abs(div);
        if (rn == 0.0) {
            out[3] = 0.0;
        } else {
            double hmin = g.h[0];
            for (int a = 1; a < g.dim; ++a) hmin = std::min(hmin, g.h[a]);
            FaceVectorField f = momentum_source(next.n, params);
            double uscale = std::max(max_abs(next.u), max_abs(prev.u));
            uscale = std::max(uscale, params.k * max_abs(f));
            out[3] = rn / std::max(uscale * 2.0 * g.dim / hmin, 1e-30);
        }
    }
    return out;
}

/// One Picard-resolved time step. Throws std::runtime_error if the Picard
/// iteration fails to converge and the adaptive retry is disabled.
inline PicardReport advance_step(State& st, const SimParams& params,
                                 int depth = 0) {
    const State prev = st;
    FluidSolver fluid(prev.u, params);

    ScalarField n_bar = prev.n;
    ScalarField z_bar = prev.z;
    FaceVectorField u = prev.u;
    ScalarField p = prev.p;
    ScalarField z_new(prev.n.grid), n_new(prev.n.grid);

    PicardReport rep;
    const double omega = params.relaxation;
    for (int it = 1; it <= params.picard_max_iter; ++it) {
        rep.iterations = it;
        fluid.solve_coupled(n_bar, u, p);
        z_new = z_solve(prev.z, z_bar, n_bar, u, params);
        n_new = n_solve(prev.n, n_bar, z_bar, z_new, u, params);

        const double dn = detail::rel_linf_diff(n_new.v, n_bar.v);
        const double dz = detail::rel_linf_diff(z_new.v, z_bar.v);
        rep.update_norm = std::max(dn, dz);

        if (omega >= 1.0) {
            n_bar = n_new;
            z_bar = z_new;
        } else {
            for (std::size_t q = 0; q < n_bar.v.size(); ++q) {
                n_bar.v[q] += omega * (n_new.v[q] - n_bar.v[q]);
                z_bar.v[q] += omega * (z_new.v[q] - z_bar.v[q]);
            }
        }
        if (rep.update_norm <= params.picard_tol && it >= 2) {
            rep.converged = true;
            // one more fluid sweep so the momentum equation holds against
            // the final density iterate, not the previous one
            fluid.solve_coupled(n_bar, u, p);
            break;
        }
    }

    if (!rep.converged) {
        // retried once with k/2: the step is re-done as two half-steps so
        // the outer run still advances by k
        if (params.adaptive && depth < 1) {
            SimParams half = params;
            half.k = 0.5 * params.k;
            PicardReport r1 = advance_step(st, half, depth + 1);
            PicardReport r2 = advance_step(st, half, depth + 1);
            rep.iterations = r1.iterations + r2.iterations;
            rep.converged = r1.converged && r2.converged;
            rep.update_norm = std::max(r1.update_norm, r2.update_norm);
            rep.max_eq_residual = std::max(r1.max_eq_residual, r2.max_eq_residual);
            rep.substeps = r1.substeps + r2.substeps;
            st.step = prev.step + 1;  // counts as one step of the outer run
            return rep;
        }
        throw std::runtime_error(
            "Picard iteration failed to converge in " +
            std::to_string(params.picard_max_iter) + " sweeps (update norm " +
            std::to_string(rep.update_norm) + ")");
    }

    st.n = std::move(n_new);
    st.z = std::move(z_new);
    st.u = std::move(u);
    st.p = std::move(p);
    st.z_prev_max = max_value(prev.z);
    st.step = prev.step + 1;
    st.time = prev.time + params.k;

    const auto res = equation_residuals(prev, st, params);
    rep.max_eq_residual = std::max(std::max(res[0], res[1]), std::max(res[2], res[3]));
    return rep;
}

}  // namespace chns
