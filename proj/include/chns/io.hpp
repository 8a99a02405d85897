#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chns/diagnostics.hpp"
#include "chns/grid.hpp"
#include "chns/params.hpp"

// Result persistence: the diagnostics CSV (17 significant digits, so
// doubles round-trip exactly), VTK legacy ASCII snapshots, and the binary
// CHFL0001 checkpoint with bitwise state round-trip.

namespace chns {

inline std::string csv_header() {
    return "step,time,mass_n,min_n,min_z,max_z,l2_z_sq,cum_z_increments,"
           "grad_z_cum,energy_a,dissipation_d,picard_iters,max_eq_residual";
}

inline std::string csv_row(const DiagnosticsRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%d,%.17g",
                  r.step, r.time, r.mass_n, r.min_n, r.min_z, r.max_z,
                  r.l2_z_sq, r.cum_z_increments, r.grad_z_cum, r.energy_a,
                  r.dissipation_d, r.picard_iters, r.max_eq_residual);
    return std::string(buf);
}

inline DiagnosticsRecord parse_csv_row(const std::string& line) {
    DiagnosticsRecord r;
    long step;
    int iters;
    const int got = std::sscanf(
        line.c_str(),
        "%ld,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d,%lg", &step, &r.time,
        &r.mass_n, &r.min_n, &r.min_z, &r.max_z, &r.l2_z_sq,
        &r.cum_z_increments, &r.grad_z_cum, &r.energy_a, &r.dissipation_d,
        &iters, &r.max_eq_residual);
    if (got != 13)
        throw std::runtime_error("malformed diagnostics CSV row: " + line);
    r.step = step;
    r.picard_iters = iters;
    return r;
}

/// VTK legacy ASCII STRUCTURED_POINTS snapshot with cell data: scalars n,
/// c (derived from z), z, p and the cell-averaged velocity vector.
inline void write_vtk_snapshot(const std::string& path, const State& st,
                               const TruncParams& tp) {
    const Grid& g = st.n.grid;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out.precision(17);
    out << "# vtk DataFile Version 3.0\n";
    out << "chemofluid snapshot step " << st.step << " time " << st.time << "\n";
    out << "ASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS";
    for (int a = 0; a < 3; ++a) out << " " << (a < g.dim ? g.n[a] + 1 : 1);
    out << "\nORIGIN 0 0 0\nSPACING";
    for (int a = 0; a < 3; ++a) out << " " << (a < g.dim ? g.h[a] : 1.0);
    out << "\nCELL_DATA " << g.cells() << "\n";

    auto scalars = [&](const char* name, const std::vector<double>& v) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double x : v) out << x << "\n";
    };
    scalars("n", st.n.v);
    ScalarField c = derive_c(st.z, tp.alpha);
    scalars("c", c.v);
    scalars("z", st.z.v);
    scalars("p", st.p.v);

    auto ucc = interp_face_to_center(st.u);
    out << "VECTORS velocity double\n";
    for (std::int64_t q = 0; q < g.cells(); ++q) {
        for (int a = 0; a < 3; ++a)
            out << (a < g.dim ? ucc[a].v[std::size_t(q)] : 0.0)
                << (a < 2 ? ' ' : '\n');
    }
    if (!out) throw std::runtime_error("write failed for snapshot: " + path);
}

namespace detail {

template <class T>
void put_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get_raw(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace detail

/// Binary checkpoint. Multi-byte values are written in the host byte
/// order, which on every supported target is little-endian.
inline void write_checkpoint(const std::string& path, const State& st,
                             const SimParams& params) {
    const Grid& g = st.n.grid;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write("CHFL0001", 8);
    detail::put_raw(out, std::uint32_t{1});
    detail::put_raw(out, std::uint32_t(g.dim));
    for (int a = 0; a < g.dim; ++a) detail::put_raw(out, std::uint32_t(g.n[a]));
    for (int a = 0; a < g.dim; ++a) detail::put_raw(out, double(g.length[a]));
    detail::put_raw(out, params.trunc.s);
    detail::put_raw(out, params.trunc.alpha);
    detail::put_raw(out, params.trunc.m);
    detail::put_raw(out, params.k);
    detail::put_raw(out, st.time);
    detail::put_raw(out, std::uint64_t(st.step));
    auto put_arr = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  std::streamsize(v.size() * sizeof(double)));
    };
    put_arr(st.n.v);
    put_arr(st.z.v);
    put_arr(st.p.v);
    for (int a = 0; a < g.dim; ++a) put_arr(st.u.comp[a]);
    if (!out) throw std::runtime_error("write failed for checkpoint: " + path);
}

struct CheckpointData {
    Grid grid;
    double s, alpha, m, k, time;
    std::uint64_t step;
    State state;
};

inline CheckpointData read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "CHFL0001", 8) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path);
    std::uint32_t version = 0, dim = 0;
    detail::get_raw(in, version);
    if (version != 1)
        throw std::runtime_error("unsupported checkpoint version " +
                                 std::to_string(version) + " in " + path);
    detail::get_raw(in, dim);
    if (dim < 1 || dim > 3)
        throw std::runtime_error("corrupt checkpoint (dim) in " + path);
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    for (std::uint32_t a = 0; a < dim; ++a) {
        std::uint32_t v;
        detail::get_raw(in, v);
        cells[a] = int(v);
    }
    for (std::uint32_t a = 0; a < dim; ++a) detail::get_raw(in, lengths[a]);

    const Grid grid = Grid::make(int(dim), cells, lengths);
    CheckpointData cp{grid, 0, 0, 0, 0, 0, 0,
                      State{ScalarField(grid), ScalarField(grid),
                            FaceVectorField(grid, 0.0), ScalarField(grid)}};
    detail::get_raw(in, cp.s);
    detail::get_raw(in, cp.alpha);
    detail::get_raw(in, cp.m);
    detail::get_raw(in, cp.k);
    detail::get_raw(in, cp.time);
    detail::get_raw(in, cp.step);
    auto get_arr = [&](std::vector<double>& v) {
        in.read(reinterpret_cast<char*>(v.data()),
                std::streamsize(v.size() * sizeof(double)));
    };
    get_arr(cp.state.n.v);
    get_arr(cp.state.z.v);
    get_arr(cp.state.p.v);
    for (std::uint32_t a = 0; a < dim; ++a) get_arr(cp.state.u.comp[a]);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    cp.state.step = long(cp.step);
    cp.state.time = cp.time;
    cp.state.z_prev_max = max_value(cp.state.z);
    return cp;
}

}  // namespace chns
