#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chns/grid.hpp"
#include "chns/params.hpp"

// Line-oriented run configuration: one `section.key = value` per line,
// `#` comments, blank lines ignored. Unknown keys are errors so typos
// cannot silently fall back to defaults.

namespace chns {

struct InitialFieldSpec {
    enum class Kind { constant, gaussian, file };
    Kind kind = Kind::constant;
    double value = 0.0;                  // constant
    std::array<double, 3> center{0, 0, 0};  // gaussian
    double width = 0.1;
    double amplitude = 1.0;
    std::string path;                    // file

    static InitialFieldSpec constant(double v) {
        InitialFieldSpec s;
        s.value = v;
        return s;
    }

    std::string serialize(int dim) const {
        std::ostringstream os;
        os.precision(17);
        switch (kind) {
            case Kind::constant:
                os << "constant:" << value;
                break;
            case Kind::gaussian:
                os << "gaussian:";
                for (int a = 0; a < dim; ++a) os << center[a] << ",";
                os << width << "," << amplitude;
                break;
            case Kind::file:
                os << "file:" << path;
                break;
        }
        return os.str();
    }
};

struct OutputConfig {
    std::string directory = "out";
    int csv_every = 1;
    int snapshot_every = 0;    // 0 disables
    int checkpoint_every = 0;  // 0 disables
    bool vtk = true;
    bool checkpoint_format = true;
};

struct RunConfig {
    // grid block
    int dim = 2;
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    // params block
    double s = 2.0;
    double alpha = -1.0;  // < 0 means "default 0.1 * min(1, 2/s)"
    double m = 1e6;
    double k = 1e-2;
    double t_end = 1.0;
    double picard_tol = 1e-9;
    int picard_max_iter = 200;
    double linsolve_tol = 1e-10;
    int linsolve_max_iter = 0;
    double bound_tol = 1e-8;
    double energy_weight_u = 1.0;
    double energy_weight_n = 1.0;
    std::string advection = "upwind";
    bool adaptive = false;
    double relaxation = 1.0;
    bool nonconservative_n_flux = false;
    // initial block
    InitialFieldSpec n0 = InitialFieldSpec::constant(0.0);
    InitialFieldSpec c0 = InitialFieldSpec::constant(0.0);
    InitialFieldSpec u0 = InitialFieldSpec::constant(0.0);
    // potential block
    std::string potential_kind = "zero";
    std::array<double, 3> potential_gradient{0, 0, 0};
    std::string potential_path;
    // output block
    OutputConfig output;

    double resolved_alpha() const {
        return alpha >= 0.0 ? alpha : TruncParams::default_alpha(s);
    }

    Grid make_grid() const { return Grid::make(dim, cells, lengths); }

    SimParams make_params() const {
        TruncParams tp(resolved_alpha(), m, s);
        SimParams p(tp, k);
        p.t_end = t_end;
        p.picard_tol = picard_tol;
        p.picard_max_iter = picard_max_iter;
        p.linsolve_tol = linsolve_tol;
        p.linsolve_max_iter = linsolve_max_iter;
        p.bound_tol = bound_tol;
        p.energy_weight_u = energy_weight_u;
        p.energy_weight_n = energy_weight_n;
        p.advection = advection == "central" ? AdvectionScheme::central
                                             : AdvectionScheme::upwind;
        p.adaptive = adaptive;
        p.relaxation = relaxation;
        p.nonconservative_n_flux = nonconservative_n_flux;
        if (potential_kind == "linear")
            p.potential = PotentialSpec::linear(potential_gradient);
        else if (potential_kind == "file")
            p.potential = PotentialSpec::fromfile(potential_path);
        else
            p.potential = PotentialSpec::zero();
        return p;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct ConfigCursor {
    std::string value;
    int line;
};

inline double to_double(const ConfigCursor& c, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(c.value, &pos);
        while (pos < c.value.size() && std::isspace((unsigned char)c.value[pos])) ++pos;
        if (pos != c.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config line " + std::to_string(c.line) +
                                 ": key '" + key + "' needs a number, got '" +
                                 c.value + "'");
    }
}

inline int to_int(const ConfigCursor& c, const std::string& key) {
    double v = to_double(c, key);
    int i = int(v);
    if (double(i) != v)
        throw std::runtime_error("config line " + std::to_string(c.line) +
                                 ": key '" + key + "' needs an integer");
    return i;
}

inline bool to_bool(const ConfigCursor& c, const std::string& key) {
    if (c.value == "true" || c.value == "1" || c.value == "on") return true;
    if (c.value == "false" || c.value == "0" || c.value == "off") return false;
    throw std::runtime_error("config line " + std::to_string(c.line) +
                             ": key '" + key + "' needs true/false");
}

inline std::vector<double> to_doubles(const ConfigCursor& c, const std::string& key) {
    std::istringstream is(c.value);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof() || out.empty())
        throw std::runtime_error("config line " + std::to_string(c.line) +
                                 ": key '" + key + "' needs numbers");
    return out;
}

inline InitialFieldSpec to_initial(const ConfigCursor& c, const std::string& key,
                                   int dim) {
    const std::string& v = c.value;
    auto err = [&](const std::string& what) {
        return std::runtime_error("config line " + std::to_string(c.line) +
                                  ": key '" + key + "': " + what);
    };
    std::size_t colon = v.find(':');
    if (colon == std::string::npos)
        throw err("expected constant:<v>, gaussian:<center...,width,amplitude>, "
                  "or file:<path>");
    const std::string head = v.substr(0, colon);
    const std::string rest = trim(v.substr(colon + 1));
    InitialFieldSpec spec;
    if (head == "constant") {
        spec.kind = InitialFieldSpec::Kind::constant;
        spec.value = to_double({rest, c.line}, key);
    } else if (head == "gaussian") {
        spec.kind = InitialFieldSpec::Kind::gaussian;
        std::vector<double> nums;
        std::istringstream is(rest);
        std::string tok;
        while (std::getline(is, tok, ','))
            nums.push_back(to_double({trim(tok), c.line}, key));
        if (int(nums.size()) != dim + 2)
            throw err("gaussian needs " + std::to_string(dim + 2) +
                      " comma-separated numbers (center per axis, width, amplitude)");
        for (int a = 0; a < dim; ++a) spec.center[a] = nums[a];
        spec.width = nums[dim];
        spec.amplitude = nums[dim + 1];
        if (!(spec.width > 0.0)) throw err("gaussian width must be > 0");
    } else if (head == "file") {
        spec.kind = InitialFieldSpec::Kind::file;
        spec.path = rest;
        if (!std::ifstream(spec.path))
            throw err("file not found: " + spec.path);
    } else {
        throw err("unknown initial kind '" + head + "'");
    }
    return spec;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    std::map<std::string, detail::ConfigCursor> kv;
    {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected 'section.key = value'");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty() || key.find('.') == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": key must be 'section.key'");
            if (kv.count(key))
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": duplicate key '" + key + "'");
            kv[key] = {value, lineno};
        }
    }

    RunConfig cfg;
    auto take = [&](const std::string& key) -> const detail::ConfigCursor* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };
    std::vector<std::string> seen;
    auto use = [&](const std::string& key) -> const detail::ConfigCursor* {
        const auto* c = take(key);
        if (c) seen.push_back(key);
        return c;
    };

    // grid block first: dim steers parsing of vector-valued keys
    if (const auto* c = use("grid.dim")) cfg.dim = detail::to_int(*c, "grid.dim");
    if (cfg.dim < 1 || cfg.dim > 3)
        throw std::runtime_error("config: grid.dim must be 1, 2, or 3");
    if (const auto* c = use("grid.cells")) {
        auto v = detail::to_doubles(*c, "grid.cells");
        if (int(v.size()) != cfg.dim)
            throw std::runtime_error("config: grid.cells needs " +
                                     std::to_string(cfg.dim) + " entries");
        for (int a = 0; a < cfg.dim; ++a) {
            cfg.cells[a] = int(v[a]);
            if (double(cfg.cells[a]) != v[a] || cfg.cells[a] < 1)
                throw std::runtime_error("config: grid.cells entries must be positive integers");
        }
    }
    if (const auto* c = use("grid.lengths")) {
        auto v = detail::to_doubles(*c, "grid.lengths");
        if (int(v.size()) != cfg.dim)
            throw std::runtime_error("config: grid.lengths needs " +
                                     std::to_string(cfg.dim) + " entries");
        for (int a = 0; a < cfg.dim; ++a) cfg.lengths[a] = v[a];
    }

    if (const auto* c = use("params.s")) cfg.s = detail::to_double(*c, "params.s");
    if (const auto* c = use("params.alpha")) cfg.alpha = detail::to_double(*c, "params.alpha");
    if (const auto* c = use("params.m")) cfg.m = detail::to_double(*c, "params.m");
    if (const auto* c = use("params.k")) cfg.k = detail::to_double(*c, "params.k");
    if (const auto* c = use("params.t_end")) cfg.t_end = detail::to_double(*c, "params.t_end");
    if (const auto* c = use("params.picard_tol")) cfg.picard_tol = detail::to_double(*c, "params.picard_tol");
    if (const auto* c = use("params.picard_max_iter")) cfg.picard_max_iter = detail::to_int(*c, "params.picard_max_iter");
    if (const auto* c = use("params.linsolve_tol")) cfg.linsolve_tol = detail::to_double(*c, "params.linsolve_tol");
    if (const auto* c = use("params.linsolve_max_iter")) cfg.linsolve_max_iter = detail::to_int(*c, "params.linsolve_max_iter");
    if (const auto* c = use("params.bound_tol")) cfg.bound_tol = detail::to_double(*c, "params.bound_tol");
    if (const auto* c = use("params.energy_weight_u")) cfg.energy_weight_u = detail::to_double(*c, "params.energy_weight_u");
    if (const auto* c = use("params.energy_weight_n")) cfg.energy_weight_n = detail::to_double(*c, "params.energy_weight_n");
    if (const auto* c = use("params.advection")) {
        cfg.advection = c->value;
        if (cfg.advection != "upwind" && cfg.advection != "central")
            throw std::runtime_error("config line " + std::to_string(c->line) +
                                     ": params.advection must be upwind or central");
    }
    if (const auto* c = use("params.adaptive")) cfg.adaptive = detail::to_bool(*c, "params.adaptive");
    if (const auto* c = use("params.relaxation")) cfg.relaxation = detail::to_double(*c, "params.relaxation");
    if (const auto* c = use("params.nonconservative_n_flux"))
        cfg.nonconservative_n_flux = detail::to_bool(*c, "params.nonconservative_n_flux");

    if (const auto* c = use("initial.n0")) cfg.n0 = detail::to_initial(*c, "initial.n0", cfg.dim);
    if (const auto* c = use("initial.c0")) cfg.c0 = detail::to_initial(*c, "initial.c0", cfg.dim);
    if (const auto* c = use("initial.u0")) cfg.u0 = detail::to_initial(*c, "initial.u0", cfg.dim);

    if (const auto* c = use("potential.kind")) {
        cfg.potential_kind = c->value;
        if (cfg.potential_kind != "zero" && cfg.potential_kind != "linear" &&
            cfg.potential_kind != "file")
            throw std::runtime_error("config line " + std::to_string(c->line) +
                                     ": potential.kind must be zero, linear, or file");
    }
    if (const auto* c = use("potential.gradient")) {
        auto v = detail::to_doubles(*c, "potential.gradient");
        if (int(v.size()) != cfg.dim)
            throw std::runtime_error("config: potential.gradient needs " +
                                     std::to_string(cfg.dim) + " entries");
        for (int a = 0; a < cfg.dim; ++a) cfg.potential_gradient[a] = v[a];
    }
    if (const auto* c = use("potential.path")) {
        cfg.potential_path = c->value;
        if (!std::ifstream(cfg.potential_path))
            throw std::runtime_error("config line " + std::to_string(c->line) +
                                     ": potential file not found: " + cfg.potential_path);
    }

    if (const auto* c = use("output.directory")) cfg.output.directory = c->value;
    if (const auto* c = use("output.csv_every")) cfg.output.csv_every = detail::to_int(*c, "output.csv_every");
    if (const auto* c = use("output.snapshot_every")) cfg.output.snapshot_every = detail::to_int(*c, "output.snapshot_every");
    if (const auto* c = use("output.checkpoint_every")) cfg.output.checkpoint_every = detail::to_int(*c, "output.checkpoint_every");
    if (const auto* c = use("output.formats")) {
        cfg.output.vtk = false;
        cfg.output.checkpoint_format = false;
        std::istringstream is(c->value);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = detail::trim(tok);
            if (tok == "vtk") cfg.output.vtk = true;
            else if (tok == "checkpoint") cfg.output.checkpoint_format = true;
            else
                throw std::runtime_error("config line " + std::to_string(c->line) +
                                         ": unknown output format '" + tok + "'");
        }
    }

    // unknown keys are errors
    for (const auto& [key, cur] : kv)
        if (std::find(seen.begin(), seen.end(), key) == seen.end())
            throw std::runtime_error("config line " + std::to_string(cur.line) +
                                     ": unknown key '" + key + "'");

    // cross-field validation
    if (!(cfg.s > 1.0))
        throw std::runtime_error("config: params.s must be > 1 (the energy "
                                 "arguments need s > 1)");
    const double amax = std::min(1.0, 2.0 / cfg.s);
    if (cfg.alpha >= 0.0 && !(cfg.alpha > 0.0 && cfg.alpha < amax)) {
        std::ostringstream os;
        os << "config: alpha must be < min(1, 2/s) = " << amax << " and > 0";
        throw std::runtime_error(os.str());
    }
    if (!(cfg.m > 0.0)) throw std::runtime_error("config: params.m must be > 0");
    if (!(cfg.k > 0.0)) throw std::runtime_error("config: params.k must be > 0");
    if (!(cfg.t_end >= 0.0)) throw std::runtime_error("config: params.t_end must be >= 0");
    if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0))
        throw std::runtime_error("config: params.relaxation must be in (0, 1]");
    if (cfg.output.csv_every < 1)
        throw std::runtime_error("config: output.csv_every must be >= 1");
    if (cfg.potential_kind == "file" && cfg.potential_path.empty())
        throw std::runtime_error("config: potential.kind = file needs potential.path");
    cfg.make_grid();    // validates cells/lengths
    cfg.make_params();  // validates the parameter invariants

    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "grid.dim = " << cfg.dim << "\n";
    os << "grid.cells =";
    for (int a = 0; a < cfg.dim; ++a) os << " " << cfg.cells[a];
    os << "\ngrid.lengths =";
    for (int a = 0; a < cfg.dim; ++a) os << " " << cfg.lengths[a];
    os << "\n";
    os << "params.s = " << cfg.s << "\n";
    if (cfg.alpha >= 0.0) os << "params.alpha = " << cfg.alpha << "\n";
    os << "params.m = " << cfg.m << "\n";
    os << "params.k = " << cfg.k << "\n";
    os << "params.t_end = " << cfg.t_end << "\n";
    os << "params.picard_tol = " << cfg.picard_tol << "\n";
    os << "params.picard_max_iter = " << cfg.picard_max_iter << "\n";
    os << "params.linsolve_tol = " << cfg.linsolve_tol << "\n";
    os << "params.linsolve_max_iter = " << cfg.linsolve_max_iter << "\n";
    os << "params.bound_tol = " << cfg.bound_tol << "\n";
    os << "params.energy_weight_u = " << cfg.energy_weight_u << "\n";
    os << "params.energy_weight_n = " << cfg.energy_weight_n << "\n";
    os << "params.advection = " << cfg.advection << "\n";
    os << "params.adaptive = " << (cfg.adaptive ? "true" : "false") << "\n";
    os << "params.relaxation = " << cfg.relaxation << "\n";
    if (cfg.nonconservative_n_flux)
        os << "params.nonconservative_n_flux = true\n";
    os << "initial.n0 = " << cfg.n0.serialize(cfg.dim) << "\n";
    os << "initial.c0 = " << cfg.c0.serialize(cfg.dim) << "\n";
    os << "initial.u0 = " << cfg.u0.serialize(cfg.dim) << "\n";
    os << "potential.kind = " << cfg.potential_kind << "\n";
    if (cfg.potential_kind == "linear") {
        os << "potential.gradient =";
        for (int a = 0; a < cfg.dim; ++a) os << " " << cfg.potential_gradient[a];
        os << "\n";
    }
    if (cfg.potential_kind == "file")
        os << "potential.path = " << cfg.potential_path << "\n";
    os << "output.directory = " << cfg.output.directory << "\n";
    os << "output.csv_every = " << cfg.output.csv_every << "\n";
    os << "output.snapshot_every = " << cfg.output.snapshot_every << "\n";
    os << "output.checkpoint_every = " << cfg.output.checkpoint_every << "\n";
    os << "output.formats = ";
    bool first = true;
    if (cfg.output.vtk) { os << "vtk"; first = false; }
    if (cfg.output.checkpoint_format) os << (first ? "" : ",") << "checkpoint";
    os << "\n";
    return os.str();
}

/// Materializes a scalar initial spec on a grid.
inline ScalarField build_scalar_initial(const InitialFieldSpec& spec, const Grid& g) {
    ScalarField f(g, 0.0);
    switch (spec.kind) {
        case InitialFieldSpec::Kind::constant:
            for (auto& v : f.v) v = spec.value;
            break;
        case InitialFieldSpec::Kind::gaussian:
            for (int k = 0; k < g.n[2]; ++k)
                for (int j = 0; j < g.n[1]; ++j)
                    for (int i = 0; i < g.n[0]; ++i) {
                        double r2 = 0.0;
                        const int c[3] = {i, j, k};
                        for (int a = 0; a < g.dim; ++a) {
                            const double d = g.center(a, c[a]) - spec.center[a];
                            r2 += d * d;
                        }
                        f.v[g.idx(i, j, k)] =
                            spec.amplitude *
                            std::exp(-r2 / (2.0 * spec.width * spec.width));
                    }
            break;
        case InitialFieldSpec::Kind::file: {
            std::ifstream in(spec.path);
            if (!in) throw std::runtime_error("cannot open initial data file: " + spec.path);
            for (auto& v : f.v)
                if (!(in >> v))
                    throw std::runtime_error("too few values in initial data file: " +
                                             spec.path);
            break;
        }
    }
    return f;
}

/// Materializes the velocity initial spec: constant (componentwise value,
/// normally 0; walls forced to 0) or file with the components' face arrays
/// concatenated in axis order.
inline FaceVectorField build_velocity_initial(const InitialFieldSpec& spec,
                                              const Grid& g) {
    FaceVectorField u(g, 0.0);
    switch (spec.kind) {
        case InitialFieldSpec::Kind::constant:
            for (int a = 0; a < g.dim; ++a)
                for (auto& v : u.comp[a]) v = spec.value;
            break;
        case InitialFieldSpec::Kind::gaussian:
            throw std::runtime_error("initial.u0 does not support gaussian");
        case InitialFieldSpec::Kind::file: {
            std::ifstream in(spec.path);
            if (!in) throw std::runtime_error("cannot open initial data file: " + spec.path);
            for (int a = 0; a < g.dim; ++a)
                for (auto& v : u.comp[a])
                    if (!(in >> v))
                        throw std::runtime_error("too few values in initial data file: " +
                                                 spec.path);
            break;
        }
    }
    u.zero_boundary();
    return u;
}

}  // namespace chns
