#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "chns/dense.hpp"
#include "chns/fluid_step.hpp"
#include "chns/spatial_ops.hpp"
#include "doctest.h"

using namespace chns;

static SimParams make_params(double k = 0.01) {
    SimParams p(TruncParams(0.1, 100.0, 2.0), k);
    p.linsolve_tol = 1e-12;
    return p;
}

static FaceVectorField random_velocity(const Grid& g, unsigned seed,
                                       double amp = 1.0) {
    FaceVectorField u(g, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(-amp, amp);
    for (int a = 0; a < g.dim; ++a)
        for (auto& x : u.comp[a]) x = ur(rng);
    u.zero_boundary();
    return u;
}

TEST_CASE("zero data is a fixed point of the momentum solve") {
    Grid g = Grid::make(2, {12, 12, 1}, {1.0, 1.0, 1.0});
    SimParams params = make_params();
    FaceVectorField u0(g, 0.0);
    ScalarField n(g, 1.0);
    // potential is zero by default, so the source vanishes
    FaceVectorField u = momentum_solve({u0, n, params});
    CHECK(max_abs(u) <= 1e-13);
}

TEST_CASE("pressure projection is idempotent and removes divergence") {
    Grid g = Grid::make(2, {16, 16, 1}, {1.0, 1.0, 1.0});
    FaceVectorField u_star = random_velocity(g, 1);
    const double k = 0.01;
    auto [u, phi] = pressure_project(u_star, k, 1e-12);
    CHECK(max_abs(divergence_of_fluxes(u)) <= 10.0 * 1e-10);
    // projecting again must not move the field
    auto [u2, phi2] = pressure_project(u, k, 1e-12);
    double diff = 0.0;
    for (int a = 0; a < 2; ++a)
        for (std::size_t q = 0; q < u.comp[a].size(); ++q)
            diff = std::max(diff, std::abs(u2.comp[a][q] - u.comp[a][q]));
    CHECK(diff <= 1e-10);
    CHECK(u.max_abs_boundary() == 0.0);
}

TEST_CASE("projection annihilates pure discrete gradients") {
    Grid g = Grid::make(2, {12, 12, 1}, {1.0, 1.0, 1.0});
    ScalarField p(g);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    for (auto& x : p.v) x = ur(rng);
    FaceVectorField gp = gradient_at_faces(p);
    gp.zero_boundary();
    auto [u, phi] = pressure_project(gp, 1.0, 1e-13);
    CHECK(max_abs(u) <= 1e-9);
}

/// Discretely divergence-free velocity with no tangential slip at the walls,
/// built from node values of psi = sin^2(pi x) sin^2(pi y) / (2 pi).
static FaceVectorField stream_velocity(const Grid& g, double amp = 1.0) {
    auto psi = [&](int i, int j) {
        const double sx = std::sin(M_PI * i * g.h[0]);
        const double sy = std::sin(M_PI * j * g.h[1]);
        return amp * sx * sx * sy * sy / (2.0 * M_PI);
    };
    FaceVectorField u(g, 0.0);
    for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i <= g.n[0]; ++i)
            u.at(0, i, j) = (psi(i, j + 1) - psi(i, j)) / g.h[1];
    for (int j = 0; j <= g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i)
            u.at(1, i, j) = -(psi(i + 1, j) - psi(i, j)) / g.h[0];
    u.zero_boundary();
    return u;
}

TEST_CASE("momentum operator matches dense oracle and is diagonally dominant") {
    Grid g = Grid::make(2, {6, 6, 1}, {1.0, 1.0, 1.0});
    SimParams params = make_params(0.02);
    FaceVectorField u_prev = stream_velocity(g, 0.5);
    for (int a = 0; a < 2; ++a) {
        MomentumComponentOperator op(u_prev, a, params.k);
        auto dense = operator_to_dense(op.linear_operator());
        const std::size_t n = op.size();
        // dense solve vs Krylov
        std::vector<double> rhs(n);
        std::mt19937_64 rng(40 + unsigned(a));
        std::uniform_real_distribution<double> ur(-1.0, 1.0);
        for (auto& x : rhs) x = ur(rng);
        std::vector<double> xk(n, 0.0);
        bicgstab_solve(op.linear_operator(), rhs, xk, 1e-13, 10000);
        auto xd = dense_solve(dense, rhs);
        for (std::size_t q = 0; q < n; ++q)
            CHECK(std::abs(xk[q] - xd[q]) <= 1e-8);
        // strict diagonal dominance by at least 1/k on every row
        for (std::size_t r = 0; r < n; ++r) {
            double diag = dense[r + r * n], off = 0.0;
            for (std::size_t c = 0; c < n; ++c)
                if (c != r) off += std::abs(dense[r + c * n]);
            CHECK(diag - off >= 1.0 / params.k - 1e-9);
        }
    }
}

TEST_CASE("banded direct solve agrees with the dense oracle") {
    Grid g = Grid::make(2, {8, 8, 1}, {1.0, 1.0, 1.0});
    SimParams params = make_params();
    FaceVectorField u_prev = random_velocity(g, 5, 0.3);
    MomentumComponentOperator op(u_prev, 1, params.k);
    const auto d = g.face_dims(1);
    BandedLU lu(op.linear_operator(), d[0]);
    auto dense = operator_to_dense(op.linear_operator());
    std::vector<double> rhs(op.size());
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    for (auto& x : rhs) x = ur(rng);
    std::vector<double> xb(op.size(), 0.0);
    lu.solve(rhs.data(), xb.data());
    auto xd = dense_solve(dense, rhs);
    for (std::size_t q = 0; q < op.size(); ++q)
        CHECK(std::abs(xb[q] - xd[q]) <= 1e-10);
}

TEST_CASE("coupled solve enforces momentum equation and divergence constraint") {
    Grid g = Grid::make(2, {16, 16, 1}, {1.0, 1.0, 1.0});
    SimParams params = make_params();
    params.potential = PotentialSpec::linear({0.0, -1.0, 0.0});
    ScalarField n(g);
    for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i)
            n(i, j) = 1.0 + 0.5 * std::cos(M_PI * g.center(0, i));
    FaceVectorField u_prev = random_velocity(g, 7, 0.1);
    // project u_prev so it is a legitimate previous velocity
    u_prev = pressure_project(u_prev, params.k, 1e-13).first;

    FluidSolver fs(u_prev, params);
    FaceVectorField u(g, 0.0);
    ScalarField p(g, 0.0);
    fs.solve_coupled(n, u, p);

    // divergence-free up to solver tolerance, relative to the velocity scale
    CHECK(max_abs(divergence_of_fluxes(u)) <=
          1e-7 * std::max(max_abs(u), 1e-30) / g.h[0]);

    // momentum residual F u + G p - f small on interior faces
    FaceVectorField f = momentum_source(n, params);
    FaceVectorField gp = gradient_at_faces(p);
    for (int a = 0; a < 2; ++a) {
        std::vector<double> fu(u.comp[a].size());
        fs.component_op(a).apply(u.comp[a].data(), fu.data());
        const auto d = g.face_dims(a);
        double worst = 0.0;
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                const int ca = (a == 0) ? i : j;
                if (ca == 0 || ca == g.n[a]) continue;
                const std::int64_t q = g.fidx(a, i, j, 0);
                const double rhs = f.comp[a][q] + u_prev.comp[a][q] / params.k;
                worst = std::max(worst, std::abs(fu[q] + gp.comp[a][q] - rhs));
            }
        const double scale = std::max(1.0 / params.k, max_abs(f));
        CHECK(worst <= 1e-7 * scale);
    }
}

TEST_CASE("momentum solve is first-order consistent in time") {
    // advect-diffuse a smooth velocity with no source; compare one step of
    // size k against two steps of size k/2. With the projection splitting
    // the mismatch shrinks at least linearly in k.
    Grid g = Grid::make(2, {24, 24, 1}, {1.0, 1.0, 1.0});
    ScalarField n(g, 1.0);
    auto step = [&](const FaceVectorField& u0, double k) {
        SimParams p = make_params(k);
        FluidSolver fs(u0, p);
        FaceVectorField u = fs.momentum_solve(n, nullptr, &u0);
        return pressure_project(u, k, 1e-13).first;
    };
    // divergence-free initial data with no tangential slip at the walls, so
    // there is no initial layer and the step-splitting error is clean O(k^2)
    FaceVectorField u0 = stream_velocity(g);

    auto err_at = [&](double k) {
        FaceVectorField big = step(u0, k);
        FaceVectorField half = step(step(u0, k / 2), k / 2);
        double e = 0.0;
        for (int a = 0; a < 2; ++a)
            for (std::size_t q = 0; q < big.comp[a].size(); ++q)
                e = std::max(e, std::abs(big.comp[a][q] - half.comp[a][q]));
        return e;
    };
    const double e1 = err_at(0.02), e2 = err_at(0.01);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 0.8);
}

TEST_CASE("with zero potential the velocity decays monotonically") {
    Grid g = Grid::make(2, {16, 16, 1}, {1.0, 1.0, 1.0});
    SimParams params = make_params(0.05);
    ScalarField n(g, 1.0);
    FaceVectorField u = random_velocity(g, 11, 0.5);
    u = pressure_project(u, params.k, 1e-13).first;
    double prev = l2_sq(u);
    for (int it = 0; it < 5; ++it) {
        FluidSolver fs(u, params);
        ScalarField p(g, 0.0);
        fs.solve_coupled(n, u, p);
        const double cur = l2_sq(u);
        CHECK(cur <= prev * (1.0 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("krylov floor reflects the operator norm scale") {
    Grid g = Grid::make(2, {64, 64, 1}, {1.0, 1.0, 1.0});
    const double f = detail::krylov_floor(g, 1e-2, 1.0);
    CHECK(f > 0.0);
    CHECK(f < 1e-8);
}
