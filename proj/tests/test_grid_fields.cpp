#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "chns/grid.hpp"
#include "doctest.h"

using namespace chns;

static Grid g2() { return Grid::make(2, {8, 6, 1}, {2.0, 1.5, 1.0}); }

TEST_CASE("grid construction and geometry") {
    Grid g = g2();
    CHECK(g.cells() == 48);
    CHECK(g.h[0] == doctest::Approx(0.25));
    CHECK(g.h[1] == doctest::Approx(0.25));
    CHECK(g.cell_volume() == doctest::Approx(0.0625));
    CHECK(g.domain_volume() == doctest::Approx(3.0));
    CHECK(g.center(0, 0) == doctest::Approx(0.125));
    CHECK(g.face_count(0) == 9 * 6);
    CHECK(g.face_count(1) == 8 * 7);
    CHECK_THROWS_AS(Grid::make(0, {4, 4, 1}, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(2, {0, 4, 1}, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(2, {4, 4, 1}, {1, -1, 1}), std::invalid_argument);
}

TEST_CASE("indexing is row-major with x fastest") {
    Grid g = g2();
    CHECK(g.idx(0, 0, 0) == 0);
    CHECK(g.idx(1, 0, 0) == 1);
    CHECK(g.idx(0, 1, 0) == 8);
    ScalarField f(g);
    f(3, 2) = 7.0;
    CHECK(f.v[g.idx(3, 2, 0)] == 7.0);
    FaceVectorField u(g, 0.0);
    u.at(0, 4, 1) = 2.0;
    CHECK(u.comp[0][g.fidx(0, 4, 1, 0)] == 2.0);
}

TEST_CASE("zero_boundary clears exactly the wall faces") {
    Grid g = g2();
    FaceVectorField u(g, 1.0);
    u.zero_boundary();
    CHECK(u.max_abs_boundary() == 0.0);
    // interior faces untouched
    CHECK(u.at(0, 1, 0) == 1.0);
    CHECK(u.at(1, 0, 1) == 1.0);
    int zeros = 0;
    for (int a = 0; a < 2; ++a)
        for (double x : u.comp[a]) zeros += (x == 0.0);
    CHECK(zeros == 2 * 6 + 2 * 8);  // two wall layers per axis
}

TEST_CASE("reductions") {
    Grid g = g2();
    ScalarField f(g, 2.0);
    f(0, 0) = -5.0;
    CHECK(max_abs(f) == 5.0);
    CHECK(min_value(f) == -5.0);
    CHECK(max_value(f) == 2.0);
    CHECK(integral(f) == doctest::Approx((2.0 * 47 - 5.0) * g.cell_volume()));
    CHECK(l2_sq(f) == doctest::Approx((4.0 * 47 + 25.0) * g.cell_volume()));
    CHECK_FALSE(has_nan(f));
    f(1, 1) = std::nan("");
    CHECK(has_nan(f));
}

TEST_CASE("integral uses extended-precision accumulation") {
    Grid g = Grid::make(2, {64, 64, 1}, {1.0, 1.0, 1.0});
    ScalarField f(g);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (auto& x : f.v) x = ur(rng);
    // shuffling the summands must not change the reported integral
    ScalarField f2 = f;
    std::reverse(f2.v.begin(), f2.v.end());
    CHECK(integral(f) == integral(f2));
}

TEST_CASE("derive_c inverts the z substitution") {
    Grid g = g2();
    const double alpha = 0.1;
    ScalarField c0(g);
    for (std::size_t q = 0; q < c0.v.size(); ++q) c0.v[q] = 0.01 * double(q);
    ScalarField z(g);
    for (std::size_t q = 0; q < z.v.size(); ++q)
        z.v[q] = std::sqrt(c0.v[q] + alpha * alpha);
    ScalarField c = derive_c(z, alpha);
    for (std::size_t q = 0; q < c.v.size(); ++q)
        CHECK(c.v[q] == doctest::Approx(c0.v[q]).epsilon(1e-14));
}

TEST_CASE("center-to-face interpolation is exact on constants and linears") {
    Grid g = g2();
    ScalarField cst(g, 3.25);
    FaceVectorField fc = interp_center_to_face(cst);
    CHECK(max_abs(fc) == doctest::Approx(3.25));
    for (int a = 0; a < 2; ++a)
        for (double x : fc.comp[a]) CHECK(x == doctest::Approx(3.25));

    // a field linear in x: interior x-faces get the exact midpoint value
    ScalarField lin(g);
    for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) lin(i, j) = g.center(0, i);
    FaceVectorField fl = interp_center_to_face(lin);
    for (int j = 0; j < g.n[1]; ++j)
        for (int i = 1; i < g.n[0]; ++i)
            CHECK(fl.at(0, i, j) == doctest::Approx(i * g.h[0]).epsilon(1e-14));
}

TEST_CASE("face-to-center averaging is exact on constants away from walls") {
    Grid g = g2();
    FaceVectorField u(g, 2.0);
    auto cc = interp_face_to_center(u);
    for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i) {
            CHECK(cc[0](i, j) == doctest::Approx(2.0));
            CHECK(cc[1](i, j) == doctest::Approx(2.0));
        }
}

TEST_CASE("3d grid round trip") {
    Grid g = Grid::make(3, {4, 3, 5}, {1.0, 1.0, 1.0});
    CHECK(g.cells() == 60);
    ScalarField f(g);
    f(2, 1, 4) = 9.0;
    CHECK(f.v[g.idx(2, 1, 4)] == 9.0);
    FaceVectorField u(g, 1.0);
    u.zero_boundary();
    CHECK(u.max_abs_boundary() == 0.0);
    CHECK(u.at(2, 1, 1, 2) == 1.0);
}
