#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "chns/mms.hpp"
#include "chns/spatial_ops.hpp"
#include "chns/truncation.hpp"
#include "doctest.h"

using namespace chns;

static Grid g2(int n = 8) { return Grid::make(2, {n, n, 1}, {1.0, 1.0, 1.0}); }

static ScalarField random_field(const Grid& g, unsigned seed, double lo = -1.0,
                                double hi = 1.0) {
    ScalarField f(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(lo, hi);
    for (auto& x : f.v) x = ur(rng);
    return f;
}

static FaceVectorField random_velocity(const Grid& g, unsigned seed) {
    FaceVectorField u(g, 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    for (int a = 0; a < g.dim; ++a)
        for (auto& x : u.comp[a]) x = ur(rng);
    u.zero_boundary();
    return u;
}

/// Divergence-free velocity from a stream function psi at grid nodes:
/// u = d(psi)/dy, v = -d(psi)/dx evaluated by node differences.
static FaceVectorField stream_velocity(const Grid& g) {
    auto psi = [&](int i, int j) {
        const double x = i * g.h[0], y = j * g.h[1];
        return std::sin(M_PI * x) * std::sin(M_PI * y) +
               0.3 * std::sin(2 * M_PI * x) * std::sin(3 * M_PI * y);
    };
    FaceVectorField u(g, 0.0);
    for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i <= g.n[0]; ++i)
            u.at(0, i, j) = (psi(i, j + 1) - psi(i, j)) / g.h[1];
    for (int j = 0; j <= g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i)
            u.at(1, i, j) = -(psi(i + 1, j) - psi(i, j)) / g.h[0];
    u.zero_boundary();  // psi vanishes on the walls, so this is a no-op
    return u;
}

TEST_CASE("laplacian_neumann: hand stencil on a 3x3 grid") {
    Grid g = Grid::make(2, {3, 3, 1}, {3.0, 3.0, 1.0});  // h = 1
    ScalarField f(g, 0.0);
    f(1, 1) = 1.0;
    ScalarField lap = laplacian_neumann(f);
    CHECK(lap(1, 1) == doctest::Approx(-4.0));
    CHECK(lap(0, 1) == doctest::Approx(1.0));
    CHECK(lap(2, 1) == doctest::Approx(1.0));
    CHECK(lap(1, 0) == doctest::Approx(1.0));
    CHECK(lap(1, 2) == doctest::Approx(1.0));
    CHECK(lap(0, 0) == doctest::Approx(0.0));
    // constants are annihilated (Neumann walls)
    ScalarField c(g, 4.2);
    CHECK(max_abs(laplacian_neumann(c)) <= 1e-14);
}

TEST_CASE("laplacian_neumann is symmetric and conservative") {
    Grid g = g2();
    ScalarField x = random_field(g, 1), y = random_field(g, 2);
    ScalarField lx = laplacian_neumann(x), ly = laplacian_neumann(y);
    long double xy = 0.0L, yx = 0.0L, sum = 0.0L;
    for (std::size_t q = 0; q < x.v.size(); ++q) {
        xy += (long double)x.v[q] * ly.v[q];
        yx += (long double)y.v[q] * lx.v[q];
        sum += lx.v[q];
    }
    CHECK(std::abs(double(xy - yx)) <= 1e-12 * std::abs(double(xy)));
    CHECK(std::abs(double(sum)) <= 1e-12);  // row sums of the adjoint vanish
}

TEST_CASE("laplacian has M-matrix sign structure") {
    Grid g = g2(5);
    // probe columns: -Lap must have positive diagonal, nonpositive off-diagonal
    for (int col : {0, 7, 12, 24}) {
        ScalarField e(g, 0.0);
        e.v[std::size_t(col)] = 1.0;
        ScalarField le = laplacian_neumann(e);
        for (std::size_t r = 0; r < le.v.size(); ++r) {
            if (int(r) == col)
                CHECK(-le.v[r] > 0.0);
            else
                CHECK(-le.v[r] <= 0.0);
        }
    }
}

TEST_CASE("gradient_at_faces / divergence_of_fluxes summation by parts") {
    Grid g = g2();
    ScalarField p = random_field(g, 3);
    FaceVectorField u = random_velocity(g, 4);
    // <grad p, u>_faces = -<p, div u>_cells exactly (boundary faces are zero)
    FaceVectorField gp = gradient_at_faces(p);
    ScalarField du = divergence_of_fluxes(u);
    long double lhs = 0.0L, rhs = 0.0L;
    for (int a = 0; a < 2; ++a)
        for (std::size_t q = 0; q < u.comp[a].size(); ++q)
            lhs += (long double)gp.comp[a][q] * u.comp[a][q];
    for (std::size_t q = 0; q < p.v.size(); ++q)
        rhs += (long double)p.v[q] * du.v[q];
    CHECK(std::abs(double(lhs + rhs)) <= 1e-12 * std::max(1.0, std::abs(double(lhs))));
}

TEST_CASE("divergence_of_fluxes of any zero-boundary flux sums to zero") {
    Grid g = g2(9);
    FaceVectorField flux = random_velocity(g, 5);
    ScalarField div = divergence_of_fluxes(flux);
    long double sum = 0.0L;
    for (double x : div.v) sum += x;
    CHECK(std::abs(double(sum)) * g.cell_volume() <= 1e-14);
}

TEST_CASE("advective_flux: upwind picks the donor cell") {
    Grid g = Grid::make(2, {4, 1, 1}, {4.0, 1.0, 1.0});
    ScalarField f(g, 0.0);
    f(1, 0) = 2.0;
    f(2, 0) = 5.0;
    FaceVectorField u(g, 0.0);
    u.at(0, 2, 0) = 1.0;  // face between cells 1 and 2, flow to the right
    FluxField fl = advective_flux(u, f, AdvectionScheme::upwind);
    CHECK(fl.at(0, 2, 0) == doctest::Approx(2.0));  // donor is cell 1
    u.at(0, 2, 0) = -1.0;
    fl = advective_flux(u, f, AdvectionScheme::upwind);
    CHECK(fl.at(0, 2, 0) == doctest::Approx(-5.0));  // donor is cell 2
    // central flux averages
    u.at(0, 2, 0) = 1.0;
    fl = advective_flux(u, f, AdvectionScheme::central);
    CHECK(fl.at(0, 2, 0) == doctest::Approx(3.5));
}

TEST_CASE("advection by a divergence-free field preserves constants") {
    Grid g = g2(16);
    FaceVectorField u = stream_velocity(g);
    CHECK(max_abs(divergence_of_fluxes(u)) <= 1e-11);
    ScalarField c(g, 3.0);
    ScalarField adv = divergence_of_fluxes(advective_flux(u, c, AdvectionScheme::upwind));
    CHECK(max_abs(adv) <= 1e-10);
}

TEST_CASE("gradsq_density: summation identity against dirichlet_energy") {
    Grid g = g2(7);
    ScalarField f = random_field(g, 6, 0.5, 2.0);
    ScalarField gsq = gradsq_density(f);
    CHECK(integral(gsq) == doctest::Approx(dirichlet_energy(f)).epsilon(1e-12));
    // nonnegative by construction
    for (double x : gsq.v) CHECK(x >= 0.0);
}

TEST_CASE("chemotaxis_flux vanishes on walls and on constant z") {
    Grid g = g2();
    TruncParams tp(0.1, 100.0, 2.0);
    ScalarField n = random_field(g, 8, 0.0, 3.0);
    ScalarField z(g, 0.7);
    FluxField chi = chemotaxis_flux(n, z, z, tp);
    CHECK(max_abs(chi) <= 1e-14);  // grad z = 0 everywhere
    ScalarField z2 = random_field(g, 9, 0.2, 1.0);
    FluxField chi2 = chemotaxis_flux(n, z2, z2, tp);
    CHECK(chi2.max_abs_boundary() == 0.0);
    // truncation bounds the flux: |chi| <= 2 T^m(max neighbor n) T(z_f) |grad z|
    FaceVectorField gz = gradient_at_faces(z2);
    FaceVectorField zf = interp_center_to_face(z2);
    FaceVectorField nmax(g, 0.0);
    {
        for (int a = 0; a < 2; ++a) {
            auto d = g.face_dims(a);
            std::array<int, 3> st{a == 0, a == 1, a == 2};
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    int ca = (a == 0) ? i : j;
                    if (ca == 0 || ca == g.n[a]) continue;
                    nmax.comp[a][g.fidx(a, i, j, 0)] =
                        std::max(n.v[g.idx(i - st[0], j - st[1], 0)],
                                 n.v[g.idx(i, j, 0)]);
                }
        }
    }
    for (int a = 0; a < 2; ++a)
        for (std::size_t q = 0; q < chi2.comp[a].size(); ++q) {
            const double cap = 2.0 * t0m(nmax.comp[a][q], tp.m) *
                               t_alpha(zf.comp[a][q], tp.alpha) *
                               std::abs(gz.comp[a][q]) * (1.0 + 1e-12);
            CHECK(std::abs(chi2.comp[a][q]) <= cap + 1e-14);
        }
}

TEST_CASE("MMS: laplacian and heat solve converge at second order") {
    MmsStudy lap = mms_spatial_study({16, 32, 64}, false);
    for (double o : lap.orders) CHECK(o >= 1.8);
    MmsStudy heat = mms_spatial_study({16, 32, 64}, true);
    for (double o : heat.orders) CHECK(o >= 1.8);
}

TEST_CASE("velocity_gradient_sq scales quadratically") {
    Grid g = g2();
    FaceVectorField u = random_velocity(g, 10);
    const double e1 = velocity_gradient_sq(u);
    for (int a = 0; a < 2; ++a)
        for (auto& x : u.comp[a]) x *= 2.0;
    CHECK(velocity_gradient_sq(u) == doctest::Approx(4.0 * e1).epsilon(1e-12));
}
