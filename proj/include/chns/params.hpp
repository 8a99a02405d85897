#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "chns/grid.hpp"
#include "chns/spatial_ops.hpp"
#include "chns/truncation.hpp"

namespace chns {

/// Gravitational/chemotactic potential Phi (a W^{1,inf} datum). Supported
/// kinds: identically zero, linear Phi = g.x (so grad Phi == g exactly),
/// or cell values read from a text file with the gradient formed by face
/// differences.
struct PotentialSpec {
    enum class Kind { zero, linear, fromfile };
    Kind kind = Kind::zero;
    std::array<double, 3> g{0, 0, 0};
    std::string path;

    static PotentialSpec zero() { return {}; }

    static PotentialSpec linear(std::array<double, 3> grad) {
        PotentialSpec p;
        p.kind = Kind::linear;
        p.g = grad;
        return p;
    }

    static PotentialSpec fromfile(std::string file) {
        PotentialSpec p;
        p.kind = Kind::fromfile;
        p.path = std::move(file);
        return p;
    }

    ScalarField values_at_cells(const Grid& grid) const {
        ScalarField phi(grid, 0.0);
        switch (kind) {
            case Kind::zero:
                break;
            case Kind::linear:
                for (int k = 0; k < grid.n[2]; ++k)
                    for (int j = 0; j < grid.n[1]; ++j)
                        for (int i = 0; i < grid.n[0]; ++i) {
                            double val = g[0] * grid.center(0, i);
                            if (grid.dim > 1) val += g[1] * grid.center(1, j);
                            if (grid.dim > 2) val += g[2] * grid.center(2, k);
                            phi.v[grid.idx(i, j, k)] = val;
                        }
                break;
            case Kind::fromfile: {
                std::ifstream in(path);
                if (!in)
                    throw std::runtime_error("PotentialSpec: cannot open " + path);
                for (auto& val : phi.v)
                    if (!(in >> val))
                        throw std::runtime_error(
                            "PotentialSpec: too few values in " + path);
                break;
            }
        }
        return phi;
    }

    /// grad Phi sampled at faces. For the linear kind this is exactly g on
    /// every face (including boundary faces, where it multiplies Dirichlet
    /// velocity values and is inert).
    FaceVectorField gradient_at_faces_of(const Grid& grid) const {
        switch (kind) {
            case Kind::zero:
                return FaceVectorField(grid, 0.0);
            case Kind::linear: {
                FaceVectorField out(grid, 0.0);
                for (int a = 0; a < grid.dim; ++a)
                    for (auto& val : out.comp[a]) val = g[a];
                return out;
            }
            case Kind::fromfile:
                return gradient_at_faces(values_at_cells(grid));
        }
        return FaceVectorField(grid, 0.0);
    }
};

/// All scalar scheme parameters for one run.
struct SimParams {
    TruncParams trunc;
    double k;                       // time step
    double t_end = 0.0;
    double picard_tol = 1e-9;
    int picard_max_iter = 200;
    double linsolve_tol = 1e-10;
    int linsolve_max_iter = 0;      // 0 -> 10 * unknowns
    double bound_tol = 1e-8;
    PotentialSpec potential;
    double energy_weight_u = 1.0;   // the role of C1 in the energy a_i
    double energy_weight_n = 1.0;   // the role of the unnamed C for s < 2
    AdvectionScheme advection = AdvectionScheme::upwind;
    bool adaptive = false;          // single k-halving retry on Picard failure
    double relaxation = 1.0;        // Picard under-relaxation omega in (0,1]
    bool nonconservative_n_flux = false;  // negative-control option for tests
    // dissipation term weights, default 1; the boundedness check is
    // scale-invariant in these, so any positive choice is admissible
    double w_grad_n = 1.0;
    double w_grad_u = 1.0;
    double w_d2z = 1.0;
    double w_quartic = 1.0;
    double w_gm = 1.0;

    SimParams(TruncParams tp, double dt) : trunc(tp), k(dt) {
        if (!(k > 0.0))
            throw std::invalid_argument("SimParams: time step must be > 0");
    }

    int max_iters_for(std::size_t unknowns) const {
        return linsolve_max_iter > 0 ? linsolve_max_iter
                                     : int(10 * unknowns);
    }
};

/// One time level of the scheme. c is derived, never stored.
struct State {
    ScalarField n;
    ScalarField z;
    FaceVectorField u;
    ScalarField p;
    long step = 0;
    double time = 0.0;
    double z_prev_max = 0.0;  // max of z at the previous level, for bound checks
};

}  // namespace chns
