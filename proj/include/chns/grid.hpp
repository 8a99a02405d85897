#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Rectangular MAC-staggered mesh and the field containers housing the
// unknowns of the scheme: cell-centered scalars (n, z, P) and face-normal
// velocity components. Fields are value-like; reads are freely shareable,
// writers need exclusive access.

namespace chns {

struct Grid {
    int dim = 2;
    std::array<int, 3> n{1, 1, 1};          // cells per axis (1 beyond dim)
    std::array<double, 3> length{1, 1, 1};  // domain lengths
    std::array<double, 3> h{1, 1, 1};       // spacings

    static Grid make(int dim, std::array<int, 3> cells,
                     std::array<double, 3> lengths) {
        if (dim < 1 || dim > 3)
            throw std::invalid_argument("Grid: dim must be 1, 2 or 3");
        Grid g;
        g.dim = dim;
        for (int a = 0; a < dim; ++a) {
            if (cells[a] <= 0)
                throw std::invalid_argument("Grid: cell counts must be positive");
            if (!(lengths[a] > 0.0))
                throw std::invalid_argument("Grid: lengths must be positive");
            g.n[a] = cells[a];
            g.length[a] = lengths[a];
            g.h[a] = lengths[a] / cells[a];
        }
        return g;
    }

    std::int64_t cells() const {
        return std::int64_t(n[0]) * n[1] * n[2];
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim; ++a) v *= h[a];
        return v;
    }

    double domain_volume() const { return cell_volume() * double(cells()); }

    std::int64_t idx(int i, int j, int k) const {
        return (std::int64_t(k) * n[1] + j) * n[0] + i;
    }

    /// Cell-center coordinate along axis a for index i: (i + 1/2) h.
    double center(int a, int i) const { return (i + 0.5) * h[a]; }

    /// Dimensions of the face lattice of axis a (one extra layer along a).
    std::array<int, 3> face_dims(int a) const {
        auto d = n;
        d[a] += 1;
        return d;
    }

    std::int64_t face_count(int a) const {
        auto d = face_dims(a);
        return std::int64_t(d[0]) * d[1] * d[2];
    }

    std::int64_t fidx(int a, int i, int j, int k) const {
        auto d = face_dims(a);
        return (std::int64_t(k) * d[1] + j) * d[0] + i;
    }

    bool operator==(const Grid&) const = default;
};

/// Cell-centered real field, row-major (x fastest).
struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double init = 0.0)
        : grid(g), v(static_cast<std::size_t>(g.cells()), init) {}

    double& operator()(int i, int j, int k = 0) { return v[grid.idx(i, j, k)]; }
    double operator()(int i, int j, int k = 0) const { return v[grid.idx(i, j, k)]; }

    std::size_t size() const { return v.size(); }
};

/// Face-normal components on the MAC lattice, one array per axis,
/// boundary faces included. When holding a velocity u the boundary faces
/// are exactly 0 (homogeneous Dirichlet).
struct FaceVectorField {
    Grid grid;
    std::array<std::vector<double>, 3> comp;

    FaceVectorField() = default;
    explicit FaceVectorField(const Grid& g, double init = 0.0) : grid(g) {
        for (int a = 0; a < g.dim; ++a)
            comp[a].assign(static_cast<std::size_t>(g.face_count(a)), init);
    }

    double& at(int a, int i, int j, int k = 0) { return comp[a][grid.fidx(a, i, j, k)]; }
    double at(int a, int i, int j, int k = 0) const { return comp[a][grid.fidx(a, i, j, k)]; }

    /// Zeroes every face lying on the domain boundary (coordinate 0 or n[a]
    /// along its own axis).
    void zero_boundary() {
        for (int a = 0; a < grid.dim; ++a) {
            auto d = grid.face_dims(a);
            for (int k = 0; k < d[2]; ++k)
                for (int j = 0; j < d[1]; ++j)
                    for (int i = 0; i < d[0]; ++i) {
                        int ca = (a == 0) ? i : (a == 1) ? j : k;
                        if (ca == 0 || ca == grid.n[a])
                            comp[a][grid.fidx(a, i, j, k)] = 0.0;
                    }
        }
    }

    double max_abs_boundary() const {
        double mx = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            auto d = grid.face_dims(a);
            for (int k = 0; k < d[2]; ++k)
                for (int j = 0; j < d[1]; ++j)
                    for (int i = 0; i < d[0]; ++i) {
                        int ca = (a == 0) ? i : (a == 1) ? j : k;
                        if (ca == 0 || ca == grid.n[a])
                            mx = std::max(mx, std::abs(comp[a][grid.fidx(a, i, j, k)]));
                    }
        }
        return mx;
    }
};

/// Alias used when a face field carries fluxes rather than velocities.
using FluxField = FaceVectorField;

// ---- small reductions -----------------------------------------------------

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const ScalarField& f) { return max_abs(f.v); }

inline double max_abs(const FaceVectorField& f) {
    double m = 0.0;
    for (int a = 0; a < f.grid.dim; ++a) m = std::max(m, max_abs(f.comp[a]));
    return m;
}

inline double min_value(const ScalarField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::min(m, x);
    return m;
}

inline double max_value(const ScalarField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::max(m, x);
    return m;
}

inline bool has_nan(const std::vector<double>& v) {
    for (double x : v)
        if (std::isnan(x)) return true;
    return false;
}

inline bool has_nan(const ScalarField& f) { return has_nan(f.v); }

inline bool has_nan(const FaceVectorField& f) {
    for (int a = 0; a < f.grid.dim; ++a)
        if (has_nan(f.comp[a])) return true;
    return false;
}

/// Volume-weighted integral over cells, accumulated in extended precision
/// so that conservation ledgers are not polluted by summation noise.
inline double integral(const ScalarField& f) {
    long double acc = 0.0L;
    for (double x : f.v) acc += x;
    return double(acc * f.grid.cell_volume());
}

/// Volume-weighted L^2 norm squared of a cell field.
inline double l2_sq(const ScalarField& f) {
    long double acc = 0.0L;
    for (double x : f.v) acc += (long double)x * x;
    return double(acc * f.grid.cell_volume());
}

/// MAC L^2 norm squared of a face field (each face value weighted by one
/// cell volume; boundary faces carry zeros for velocities).
inline double l2_sq(const FaceVectorField& u) {
    long double acc = 0.0L;
    for (int a = 0; a < u.grid.dim; ++a)
        for (double x : u.comp[a]) acc += (long double)x * x;
    return double(acc * u.grid.cell_volume());
}

// ---- derived chemical field ------------------------------------------------

/// c = z^2 - alpha^2 cellwise. c is never evolved: the z-formulation is the
/// ground truth and c is reconstructed on demand.
inline ScalarField derive_c(const ScalarField& z, double alpha) {
    ScalarField c(z.grid);
    for (std::size_t q = 0; q < z.v.size(); ++q)
        c.v[q] = z.v[q] * z.v[q] - alpha * alpha;
    return c;
}

// ---- center/face interpolation ---------------------------------------------

/// Two-point averages of a cell field onto all face lattices. Boundary
/// faces take the adjacent cell value (one-sided), so constants are exact.
inline FaceVectorField interp_center_to_face(const ScalarField& f) {
    const Grid& g = f.grid;
    FaceVectorField out(g);
    for (int a = 0; a < g.dim; ++a) {
        auto d = g.face_dims(a);
        std::array<int, 3> step{a == 0, a == 1, a == 2};
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i) {
                    int ca = (a == 0) ? i : (a == 1) ? j : k;
                    double val;
                    if (ca == 0) {
                        val = f.v[g.idx(i, j, k)];
                    } else if (ca == g.n[a]) {
                        val = f.v[g.idx(i - step[0], j - step[1], k - step[2])];
                    } else {
                        val = 0.5 * (f.v[g.idx(i - step[0], j - step[1], k - step[2])] +
                                     f.v[g.idx(i, j, k)]);
                    }
                    out.comp[a][g.fidx(a, i, j, k)] = val;
                }
    }
    return out;
}

/// Per-axis averages of face values back to cell centers.
inline std::array<ScalarField, 3> interp_face_to_center(const FaceVectorField& u) {
    const Grid& g = u.grid;
    std::array<ScalarField, 3> out;
    for (int a = 0; a < g.dim; ++a) {
        out[a] = ScalarField(g);
        std::array<int, 3> step{a == 0, a == 1, a == 2};
        for (int k = 0; k < g.n[2]; ++k)
            for (int j = 0; j < g.n[1]; ++j)
                for (int i = 0; i < g.n[0]; ++i)
                    out[a].v[g.idx(i, j, k)] =
                        0.5 * (u.comp[a][g.fidx(a, i, j, k)] +
                               u.comp[a][g.fidx(a, i + step[0], j + step[1], k + step[2])]);
    }
    return out;
}

}  // namespace chns
