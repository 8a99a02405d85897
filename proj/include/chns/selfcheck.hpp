#pragma once

#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chns/dense.hpp"
#include "chns/diagnostics.hpp"
#include "chns/fluid_step.hpp"
#include "chns/mms.hpp"
#include "chns/scalar_steps.hpp"
#include "chns/timestepper.hpp"
#include "chns/truncation.hpp"

// Fast named property suite behind the `check` CLI subcommand: one
// representative property per module, each well under a few seconds.

namespace chns {

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

namespace selfcheck {

inline CheckResult truncation_branches() {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> us(1.01, 4.0);
    std::uniform_real_distribution<double> ux(-2.0, 20.0);
    std::uniform_real_distribution<double> um(0.5, 15.0);
    for (int t = 0; t < 200000; ++t) {
        const double s = us(rng), m = um(rng), x = ux(rng);
        const double alpha = 0.5 * std::min(1.0, 2.0 / s);
        if (t_alpha(x, alpha) != std::max(x, alpha))
            return {"truncation-branches", false, "t_alpha branch"};
        if (t0m(x, m) != std::min(std::max(x, 0.0), m))
            return {"truncation-branches", false, "t0m branch"};
        if (x > 0.0) {
            const double lhs = g0m_prime(x, m, s);
            const double rhs = t0m(x, m) * std::pow(x, s - 2.0);
            if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs)))
                return {"truncation-branches", false, "derivative identity"};
        }
        const double q = 1.0 + (s - 1.0) * 0.5;
        if (!comparison_holds(x, s, q, m) || !comparison_holds(x, s, s, m))
            return {"truncation-branches", false, "comparison inequality"};
    }
    return {"truncation-branches", true, ""};
}

inline CheckResult gronwall_recursion() {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> ur(0.01, 2.0);
    for (int t = 0; t < 200; ++t) {
        const double k = ur(rng), lambda = ur(rng), c = ur(rng), a0 = ur(rng);
        double a = a0;
        const int nsteps = 40;
        for (int i = 0; i < nsteps; ++i) a = (a + k * c) / (1.0 + lambda * k);
        const double bound = gronwall_bound(a0, lambda, c, k, nsteps);
        if (std::abs(a - bound) > 1e-12 * std::max(1.0, bound))
            return {"gronwall-recursion", false, "equality case mismatch"};
    }
    return {"gronwall-recursion", true, ""};
}

inline CheckResult gradsq_summation_by_parts() {
    Grid g = Grid::make(2, {9, 7}, {1.3, 0.8});
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    ScalarField f(g);
    for (auto& v : f.v) v = ur(rng);
    const double lhs = integral(gradsq_density(f));
    const double rhs = dirichlet_energy(f);
    const bool ok = std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs);
    return {"gradsq-summation-by-parts", ok, ""};
}

inline CheckResult flux_divergence_conservative() {
    Grid g = Grid::make(2, {8, 6}, {1.0, 2.0});
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    FaceVectorField flux(g, 0.0);
    for (int a = 0; a < g.dim; ++a)
        for (auto& v : flux.comp[a]) v = ur(rng);
    flux.zero_boundary();
    const double total = integral(divergence_of_fluxes(flux));
    return {"flux-divergence-conservative", std::abs(total) <= 1e-12, ""};
}

inline CheckResult laplacian_mms_order() {
    MmsStudy s = mms_spatial_study({16, 32, 64}, false);
    for (double o : s.orders)
        if (o < 1.8) return {"laplacian-mms-order", false, "order below 1.8"};
    return {"laplacian-mms-order", true, ""};
}

inline CheckResult heat_solve_mms_order() {
    MmsStudy s = mms_spatial_study({16, 32, 64}, true);
    for (double o : s.orders)
        if (o < 1.8) return {"heat-solve-mms-order", false, "order below 1.8"};
    return {"heat-solve-mms-order", true, ""};
}

inline CheckResult cg_dense_oracle() {
    Grid g = Grid::make(2, {5, 4}, {1.0, 1.0});
    const double k = 0.05;
    LinearOperator op;
    op.size = std::size_t(g.cells());
    op.symmetric = true;
    op.apply = [&g, k](const double* x, double* out) {
        laplacian_neumann_raw(g, x, out);
        for (std::int64_t q = 0; q < g.cells(); ++q) out[q] = x[q] / k - out[q];
    };
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    std::vector<double> b(op.size);
    for (auto& v : b) v = ur(rng);
    std::vector<double> x(op.size, 0.0);
    cg_solve(op, b, x, 1e-13, 1000);
    std::vector<double> ref = dense_solve(operator_to_dense(op), b);
    for (std::size_t q = 0; q < x.size(); ++q)
        if (std::abs(x[q] - ref[q]) > 1e-8)
            return {"cg-dense-oracle", false, "mismatch vs direct solve"};
    return {"cg-dense-oracle", true, ""};
}

inline CheckResult momentum_dense_oracle() {
    Grid g = Grid::make(2, {5, 4}, {1.0, 1.0});
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    FaceVectorField u_prev(g, 0.0);
    for (int a = 0; a < g.dim; ++a)
        for (auto& v : u_prev.comp[a]) v = ur(rng);
    u_prev.zero_boundary();
    for (int a = 0; a < g.dim; ++a) {
        MomentumComponentOperator mop(u_prev, a, 0.05);
        LinearOperator op = mop.linear_operator();
        std::vector<double> b(op.size);
        for (auto& v : b) v = ur(rng);
        std::vector<double> x(op.size, 0.0);
        bicgstab_solve(op, b, x, 1e-13, 2000);
        std::vector<double> ref = dense_solve(operator_to_dense(op), b);
        for (std::size_t q = 0; q < x.size(); ++q)
            if (std::abs(x[q] - ref[q]) > 1e-8)
                return {"momentum-dense-oracle", false, "mismatch vs direct solve"};
    }
    return {"momentum-dense-oracle", true, ""};
}

inline CheckResult projection_idempotent() {
    Grid g = Grid::make(2, {12, 10}, {1.0, 1.0});
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    FaceVectorField u(g, 0.0);
    for (int a = 0; a < g.dim; ++a)
        for (auto& v : u.comp[a]) v = ur(rng);
    u.zero_boundary();
    auto [u1, p1] = pressure_project(u, 0.1, 1e-12);
    auto [u2, p2] = pressure_project(u1, 0.1, 1e-12);
    (void)p1;
    (void)p2;
    double diff = 0.0;
    for (int a = 0; a < g.dim; ++a)
        for (std::size_t q = 0; q < u1.comp[a].size(); ++q)
            diff = std::max(diff, std::abs(u2.comp[a][q] - u1.comp[a][q]));
    return {"projection-idempotent", diff <= 1e-9, ""};
}

inline CheckResult zero_data_fixed_point() {
    Grid g = Grid::make(2, {8, 8}, {1.0, 1.0});
    TruncParams tp(TruncParams::default_alpha(2.0), 1e6, 2.0);
    SimParams params(tp, 0.01);
    State st = init_state(ScalarField(g, 0.0), ScalarField(g, 0.0),
                          FaceVectorField(g, 0.0), params);
    const double alpha = tp.alpha;
    advance_step(st, params);
    double dev = std::max(max_abs(st.n), max_abs(st.u));
    for (double v : st.z.v) dev = std::max(dev, std::abs(v - std::sqrt(alpha * alpha)));
    return {"zero-data-fixed-point", dev <= 1e-11, ""};
}

inline CheckResult homogeneous_oracle() {
    Grid g = Grid::make(2, {8, 8}, {1.0, 1.0});
    TruncParams tp(TruncParams::default_alpha(2.0), 1e6, 2.0);
    SimParams params(tp, 0.02);
    params.picard_tol = 1e-12;
    const double n0 = 1.5, c0 = 1.0;
    State st = init_state(ScalarField(g, n0), ScalarField(g, c0),
                          FaceVectorField(g, 0.0), params);
    // scalar recursion for the spatially constant trajectory: n stays n0;
    // z solves (1/k + G) z = G alpha^2 / z_prev-like terms -- but with
    // fully converged Picard the constant z satisfies the implicit scalar
    // relation, reproduced here by its own Picard loop.
    const double gm = 0.5 * tp.s * g0m(n0, tp.m, tp.s);
    const double a2 = tp.alpha * tp.alpha;
    double z_ref = std::sqrt(c0 + a2);
    for (int i = 0; i < 5; ++i) {
        advance_step(st, params);
        double zbar = z_ref;
        for (int it = 0; it < 400; ++it)
            zbar = (a2 * gm / std::max(zbar, tp.alpha) + z_ref / params.k) /
                   (1.0 / params.k + gm);
        z_ref = zbar;
        double dev = 0.0;
        for (double v : st.z.v) dev = std::max(dev, std::abs(v - z_ref));
        for (double v : st.n.v) dev = std::max(dev, std::abs(v - n0));
        if (dev > 1e-8)
            return {"homogeneous-oracle", false,
                    "step " + std::to_string(i + 1) + " deviates"};
    }
    return {"homogeneous-oracle", true, ""};
}

inline CheckResult deterministic_rerun() {
    auto run_once = [](std::vector<double>& out) {
        Grid g = Grid::make(2, {16, 16}, {1.0, 1.0});
        TruncParams tp(TruncParams::default_alpha(2.0), 1e6, 2.0);
        SimParams params(tp, 0.01);
        params.potential = PotentialSpec::linear({0.0, -1.0, 0.0});
        ScalarField n0(g);
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                const double dx = g.center(0, i) - 0.5, dy = g.center(1, j) - 0.5;
                n0.v[g.idx(i, j, 0)] = 2.0 * std::exp(-(dx * dx + dy * dy) / 0.02);
            }
        State st = init_state(n0, ScalarField(g, 1.0), FaceVectorField(g, 0.0),
                              params);
        for (int i = 0; i < 3; ++i) advance_step(st, params);
        out = st.n.v;
        out.insert(out.end(), st.z.v.begin(), st.z.v.end());
        for (int a = 0; a < g.dim; ++a)
            out.insert(out.end(), st.u.comp[a].begin(), st.u.comp[a].end());
    };
    std::vector<double> r1, r2;
    run_once(r1);
    run_once(r2);
    const bool ok = r1.size() == r2.size() &&
                    std::memcmp(r1.data(), r2.data(), r1.size() * sizeof(double)) == 0;
    return {"deterministic-rerun", ok, ok ? "" : "reruns differ bitwise"};
}

}  // namespace selfcheck

/// Runs the whole named suite, printing one line per check. Returns true
/// when everything passes.
inline bool run_selfcheck(std::ostream& os) {
    using Fn = CheckResult (*)();
    const Fn checks[] = {
        selfcheck::truncation_branches,  selfcheck::gronwall_recursion,
        selfcheck::gradsq_summation_by_parts,
        selfcheck::flux_divergence_conservative,
        selfcheck::laplacian_mms_order,  selfcheck::heat_solve_mms_order,
        selfcheck::cg_dense_oracle,      selfcheck::momentum_dense_oracle,
        selfcheck::projection_idempotent, selfcheck::zero_data_fixed_point,
        selfcheck::homogeneous_oracle,   selfcheck::deterministic_rerun,
    };
    bool all = true;
    for (Fn fn : checks) {
        CheckResult r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {"(exception)", false, e.what()};
        }
        os << (r.passed ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.detail.empty()) os << "  (" << r.detail << ")";
        os << "\n";
        all = all && r.passed;
    }
    return all;
}

}  // namespace chns
