// Command-line driver: run / mms / sweep / check / resume.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chns/chns.hpp"
#include "chns/selfcheck.hpp"

namespace fs = std::filesystem;

namespace {

std::string output_root() {
    const char* env = std::getenv("CHNS_OUTPUT_ROOT");
    return env ? std::string(env) : std::string();
}

std::string resolve_out_dir(const std::string& configured) {
    const std::string root = output_root();
    if (root.empty() || fs::path(configured).is_absolute()) return configured;
    return (fs::path(root) / configured).string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int do_run(const std::string& config_path, const std::string& out_override) {
    chns::RunConfig cfg = chns::parse_config_file(config_path);
    const std::string out = out_override.empty()
                                ? resolve_out_dir(cfg.output.directory)
                                : out_override;
    chns::Simulation sim(cfg, out);
    sim.start();
    const bool ok = sim.run();
    std::cout << "run: " << sim.records().size() - 1 << " steps, output in "
              << out << "\n";
    std::cout << "RESULT " << (ok ? "pass" : "fail ledger-violations") << "\n";
    return ok ? 0 : 1;
}

int do_resume(const std::string& checkpoint, double t_end_override) {
    const std::string dir = fs::path(checkpoint).parent_path().string();
    chns::RunConfig cfg =
        chns::parse_config_file((fs::path(dir) / "config.txt").string());
    chns::Simulation sim(cfg, dir);
    sim.resume(checkpoint);
    const bool ok = sim.run(t_end_override);
    std::cout << "resume: continued to step " << sim.state().step << "\n";
    std::cout << "RESULT " << (ok ? "pass" : "fail ledger-violations") << "\n";
    return ok ? 0 : 1;
}

// Observed temporal order from homogeneous-consumption runs at k, k/2,
// k/4: the spatially constant trajectory has the exact solution
// c(T) = c0 exp(-n0^s T), and backward Euler should land within O(k).
int do_mms(const std::string& config_path) {
    chns::RunConfig cfg = chns::parse_config_file(config_path);

    chns::MmsStudy lap = chns::mms_spatial_study({16, 32, 64}, false);
    chns::MmsStudy heat = chns::mms_spatial_study({16, 32, 64}, true);
    std::cout << "spatial study (discrete Laplacian):\n";
    for (std::size_t i = 0; i < lap.resolutions.size(); ++i)
        std::cout << "  n = " << lap.resolutions[i] << "  err = " << lap.errors[i]
                  << (i ? "  order = " + std::to_string(lap.orders[i - 1]) : "")
                  << "\n";
    std::cout << "spatial study (heat sub-solve):\n";
    for (std::size_t i = 0; i < heat.resolutions.size(); ++i)
        std::cout << "  n = " << heat.resolutions[i] << "  err = "
                  << heat.errors[i]
                  << (i ? "  order = " + std::to_string(heat.orders[i - 1]) : "")
                  << "\n";

    const double n0 = cfg.n0.kind == chns::InitialFieldSpec::Kind::constant &&
                              cfg.n0.value > 0.0
                          ? cfg.n0.value
                          : 1.0;
    const double c0 = cfg.c0.kind == chns::InitialFieldSpec::Kind::constant &&
                              cfg.c0.value > 0.0
                          ? cfg.c0.value
                          : 1.0;
    const double T = cfg.t_end > 0.0 ? cfg.t_end : 1.0;
    chns::Grid g = chns::Grid::make(2, {8, 8}, {1.0, 1.0});
    chns::TruncParams tp(cfg.resolved_alpha(), cfg.m, cfg.s);
    std::vector<double> errs;
    std::vector<double> ks = {cfg.k, cfg.k / 2.0, cfg.k / 4.0};
    for (double k : ks) {
        chns::SimParams params(tp, k);
        params.picard_tol = 1e-12;
        chns::State st = chns::init_state(chns::ScalarField(g, n0),
                                          chns::ScalarField(g, c0),
                                          chns::FaceVectorField(g, 0.0), params);
        const long steps = std::lround(T / k);
        for (long i = 0; i < steps; ++i) chns::advance_step(st, params);
        const double c_num = st.z.v[0] * st.z.v[0] - tp.alpha * tp.alpha;
        const double c_exact = c0 * std::exp(-std::pow(n0, cfg.s) * T);
        errs.push_back(std::abs(c_num - c_exact));
    }
    std::cout << "temporal study (homogeneous consumption, T = " << T << "):\n";
    bool temporal_ok = true;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        std::cout << "  k = " << ks[i] << "  err = " << errs[i];
        if (i) {
            const double order = chns::observed_order(errs[i - 1], errs[i]);
            std::cout << "  order = " << order;
            if (order < 0.8) temporal_ok = false;
        }
        std::cout << "\n";
    }

    bool spatial_ok = true;
    for (double o : lap.orders) spatial_ok = spatial_ok && o >= 1.8;
    for (double o : heat.orders) spatial_ok = spatial_ok && o >= 1.8;
    const bool ok = spatial_ok && temporal_ok;
    std::cout << "RESULT " << (ok ? "pass" : "fail order-below-gate") << "\n";
    return ok ? 0 : 1;
}

int do_sweep(const std::string& config_path, const std::string& vary) {
    const std::size_t eq = vary.find('=');
    if (eq == std::string::npos || (vary.substr(0, eq) != "m" && vary.substr(0, eq) != "k"))
        throw CLI::ValidationError("--vary", "expected m=v1,v2,... or k=v1,v2,...");
    const std::string which = vary.substr(0, eq);
    std::vector<double> values;
    {
        std::istringstream is(vary.substr(eq + 1));
        std::string tok;
        while (std::getline(is, tok, ',')) values.push_back(std::stod(tok));
    }
    if (values.size() < 2)
        throw CLI::ValidationError("--vary", "need at least two values");

    chns::RunConfig base = chns::parse_config_file(config_path);
    const std::string root = resolve_out_dir(base.output.directory);
    std::vector<std::string> csvs;
    for (double v : values) {
        chns::RunConfig cfg = base;
        if (which == "m") cfg.m = v;
        else cfg.k = v;
        std::ostringstream sub;
        sub << which << "_" << v;
        const std::string dir = (fs::path(root) / sub.str()).string();
        chns::Simulation sim(cfg, dir);
        sim.start();
        const bool ok = sim.run();
        std::cout << "sweep " << which << " = " << v << ": "
                  << (ok ? "ledgers pass" : "LEDGER VIOLATIONS") << ", output in "
                  << dir << "\n";
        csvs.push_back(sim.path("diagnostics.csv"));
    }
    if (which == "m") {
        bool identical = true;
        const std::string ref = read_file(csvs.front());
        for (std::size_t i = 1; i < csvs.size(); ++i)
            identical = identical && (read_file(csvs[i]) == ref);
        std::cout << "truncation-inactivity: outputs "
                  << (identical ? "identical" : "differ") << " across m values\n";
    }
    std::cout << "RESULT pass\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-grid chemotaxis-Navier-Stokes solver"};
    app.require_subcommand(1);

    std::string config_path, out_override, checkpoint, vary;
    double t_end_override = -1.0;

    auto* run = app.add_subcommand("run", "run a simulation from a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_override, "override the output directory");

    auto* mms = app.add_subcommand("mms", "refinement studies printing observed orders");
    mms->add_option("config", config_path, "config file")->required();

    auto* sweep = app.add_subcommand("sweep", "parameter sweep over m or k");
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("--vary", vary, "m=v1,v2,... or k=v1,v2,...")->required();

    auto* check = app.add_subcommand("check", "run the built-in property suite");

    auto* resume = app.add_subcommand("resume", "continue a run from a checkpoint");
    resume->add_option("checkpoint", checkpoint, "checkpoint file")->required();
    resume->add_option("--t-end", t_end_override, "new end time");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(config_path, out_override);
        if (mms->parsed()) return do_mms(config_path);
        if (sweep->parsed()) return do_sweep(config_path, vary);
        if (check->parsed()) {
            const bool ok = chns::run_selfcheck(std::cout);
            std::cout << "RESULT " << (ok ? "pass" : "fail property-suite") << "\n";
            return ok ? 0 : 1;
        }
        if (resume->parsed()) return do_resume(checkpoint, t_end_override);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cout << "RESULT fail " << e.what() << "\n";
        return 2;
    }
    return 0;
}
