#pragma once

#include <cmath>
#include <vector>

#include "chns/grid.hpp"
#include "chns/linear_solver.hpp"
#include "chns/spatial_ops.hpp"

// Manufactured-solution refinement studies. The manufactured field
// cos(pi x) cos(pi y) is even across every wall of the unit square, so the
// mirror ghost closure of the Neumann Laplacian commits no extra boundary
// error and the clean O(h^2) interior order is observable.

namespace chns {

inline double observed_order(double err_coarse, double err_fine, double ratio = 2.0) {
    return std::log(err_coarse / err_fine) / std::log(ratio);
}

namespace detail {

inline ScalarField cos_product(const Grid& g) {
    ScalarField f(g);
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
                double v = std::cos(M_PI * g.center(0, i) / g.length[0]);
                if (g.dim > 1) v *= std::cos(M_PI * g.center(1, j) / g.length[1]);
                if (g.dim > 2) v *= std::cos(M_PI * g.center(2, k) / g.length[2]);
                f.v[g.idx(i, j, k)] = v;
            }
    return f;
}

inline double cos_eigenvalue(const Grid& g) {
    double lam = 0.0;
    for (int a = 0; a < g.dim; ++a)
        lam += (M_PI / g.length[a]) * (M_PI / g.length[a]);
    return lam;  // -Lap u = lam * u for the cosine product
}

}  // namespace detail

/// Max-norm truncation error of the discrete Neumann Laplacian against
/// the cosine-product eigenfunction on an nc^2 unit square.
inline double mms_laplacian_error(int nc) {
    Grid g = Grid::make(2, {nc, nc}, {1.0, 1.0});
    ScalarField u = detail::cos_product(g);
    ScalarField lap = laplacian_neumann(u);
    const double lam = detail::cos_eigenvalue(g);
    double err = 0.0;
    for (std::size_t q = 0; q < u.v.size(); ++q)
        err = std::max(err, std::abs(lap.v[q] + lam * u.v[q]));
    return err;
}

/// Max-norm solution error of one backward-Euler heat sub-solve
/// (1/k - Lap) u = f with manufactured right-hand side, solved by CG far
/// below the discretization error.
inline double mms_heat_solve_error(int nc, double k = 1e-2) {
    Grid g = Grid::make(2, {nc, nc}, {1.0, 1.0});
    ScalarField exact = detail::cos_product(g);
    const double lam = detail::cos_eigenvalue(g);
    std::vector<double> rhs(exact.v.size());
    for (std::size_t q = 0; q < rhs.size(); ++q)
        rhs[q] = (1.0 / k + lam) * exact.v[q];

    LinearOperator op;
    op.size = rhs.size();
    op.symmetric = true;
    op.apply = [&g, k](const double* x, double* out) {
        laplacian_neumann_raw(g, x, out);
        for (std::int64_t q = 0; q < g.cells(); ++q)
            out[q] = x[q] / k - out[q];
    };
    std::vector<double> x(rhs.size(), 0.0);
    cg_solve(op, rhs, x, 1e-13, int(10 * rhs.size()));

    double err = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q)
        err = std::max(err, std::abs(x[q] - exact.v[q]));
    return err;
}

struct MmsStudy {
    std::vector<int> resolutions;
    std::vector<double> errors;
    std::vector<double> orders;  // between consecutive refinements
};

inline MmsStudy mms_spatial_study(std::vector<int> resolutions,
                                  bool heat_solve) {
    MmsStudy s;
    s.resolutions = std::move(resolutions);
    for (int nc : s.resolutions)
        s.errors.push_back(heat_solve ? mms_heat_solve_error(nc)
                                      : mms_laplacian_error(nc));
    for (std::size_t i = 1; i < s.errors.size(); ++i)
        s.orders.push_back(observed_order(
            s.errors[i - 1], s.errors[i],
            double(s.resolutions[i]) / double(s.resolutions[i - 1])));
    return s;
}

}  // namespace chns
