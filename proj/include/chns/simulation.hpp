#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "chns/config.hpp"
#include "chns/diagnostics.hpp"
#include "chns/io.hpp"
#include "chns/timestepper.hpp"

// Drives a full run: builds the initial state from a RunConfig, steps to
// t_end, and writes the diagnostics CSV plus optional snapshots and
// checkpoints into the run directory. A run directory always receives a
// config.txt copy so a checkpoint can be resumed without the original
// config file.

namespace chns {

class Simulation {
public:
    Simulation(RunConfig cfg, std::string out_dir)
        : cfg_(std::move(cfg)),
          out_dir_(std::move(out_dir)),
          grid_(cfg_.make_grid()),
          params_(cfg_.make_params()) {}

    /// Fresh start from the configured initial data. Writes config.txt,
    /// the CSV header, and the step-0 row.
    void start() {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir_);
        {
            std::ofstream cf(path("config.txt"));
            cf << serialize_config(cfg_);
        }
        ScalarField n0 = build_scalar_initial(cfg_.n0, grid_);
        ScalarField c0 = build_scalar_initial(cfg_.c0, grid_);
        FaceVectorField u0 = build_velocity_initial(cfg_.u0, grid_);
        state_ = init_state(n0, c0, u0, params_);
        z0_sq_l2_sq_ = squared_field_l2_sq(state_.z);
        for (const auto& w : validate_initial_step(state_, params_))
            std::cerr << "warning: " << w << "\n";
        records_.clear();
        records_.push_back(initial_record(state_, params_));
        csv_.open(path("diagnostics.csv"), std::ios::trunc);
        if (!csv_) throw std::runtime_error("cannot write " + path("diagnostics.csv"));
        csv_ << csv_header() << "\n" << csv_row(records_.back()) << "\n";
        csv_.flush();
    }

    /// Resume from a checkpoint living in an existing run directory: the
    /// state comes from the checkpoint, the cumulative CSV columns from the
    /// rows already on disk (exact, since rows carry 17 digits), and rows
    /// past the checkpoint step are dropped so the resumed CSV is
    /// byte-identical to an uninterrupted run.
    void resume(const std::string& checkpoint_path) {
        CheckpointData cp = read_checkpoint(checkpoint_path);
        if (!(cp.grid == grid_))
            throw std::runtime_error("checkpoint grid does not match config");
        if (cp.s != params_.trunc.s || cp.alpha != params_.trunc.alpha ||
            cp.m != params_.trunc.m || cp.k != params_.k)
            throw std::runtime_error("checkpoint parameters do not match config");
        state_ = std::move(cp.state);

        std::ifstream in(path("diagnostics.csv"));
        if (!in)
            throw std::runtime_error("resume needs " + path("diagnostics.csv"));
        std::vector<std::string> kept;
        std::string line;
        std::getline(in, line);  // header
        records_.clear();
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            DiagnosticsRecord r = parse_csv_row(line);
            if (r.step > state_.step) break;
            records_.push_back(r);
            kept.push_back(line);
        }
        if (records_.empty() || records_.back().step != state_.step)
            throw std::runtime_error(
                "diagnostics.csv has no row for the checkpoint step; cannot "
                "restore cumulative ledgers");
        // rebuild the sharp gradient-ledger cap ||z0^2||^2 from the
        // configured initial oxygen, with the same floating-point steps as
        // a fresh start; fall back to the record-only bound if the initial
        // data is no longer reachable (e.g. file: spec whose file is gone)
        try {
            ScalarField c0 = build_scalar_initial(cfg_.c0, grid_);
            ScalarField z0(grid_);
            const double a2 = params_.trunc.alpha * params_.trunc.alpha;
            for (std::size_t q = 0; q < c0.v.size(); ++q)
                z0.v[q] = std::sqrt(c0.v[q] + a2);
            z0_sq_l2_sq_ = squared_field_l2_sq(z0);
        } catch (const std::exception&) {
            z0_sq_l2_sq_ = -1.0;
        }

        csv_.open(path("diagnostics.csv"), std::ios::trunc);
        csv_ << csv_header() << "\n";
        for (const auto& l : kept) csv_ << l << "\n";
        csv_.flush();
    }

    /// Steps until t_end (config value unless overridden). Returns false
    /// if any ledger check failed.
    bool run(double t_end_override = -1.0) {
        const double t_end = t_end_override >= 0.0 ? t_end_override : params_.t_end;
        const long total = std::lround(t_end / params_.k);
        while (state_.step < total) {
            State prev = state_;
            PicardReport rep = advance_step(state_, params_);
            records_.push_back(make_record(prev, state_, params_, rep.iterations,
                                           rep.max_eq_residual, &records_.back()));
            if (state_.step % cfg_.output.csv_every == 0 || state_.step == total) {
                csv_ << csv_row(records_.back()) << "\n";
                csv_.flush();
            }
            if (cfg_.output.snapshot_every > 0 && cfg_.output.vtk &&
                state_.step % cfg_.output.snapshot_every == 0)
                write_vtk_snapshot(numbered("snapshot", state_.step, ".vtk"),
                                   state_, params_.trunc);
            if (cfg_.output.checkpoint_every > 0 && cfg_.output.checkpoint_format &&
                state_.step % cfg_.output.checkpoint_every == 0)
                write_checkpoint(numbered("checkpoint", state_.step, ".chk"),
                                 state_, params_);
        }
        if (cfg_.output.checkpoint_format)
            write_checkpoint(path("final.chk"), state_, params_);

        LedgerReport ledger = z0_sq_l2_sq_ >= 0.0
                                  ? ledger_check(records_, params_, z0_sq_l2_sq_)
                                  : ledger_check(records_, params_);
        for (const auto& v : ledger.violations)
            std::cerr << "ledger violation at step " << v.step << ": " << v.check
                      << " value " << v.value << " bound " << v.bound << "\n";
        return ledger.passed();
    }

    const State& state() const { return state_; }
    const std::vector<DiagnosticsRecord>& records() const { return records_; }
    const SimParams& params() const { return params_; }
    const Grid& grid() const { return grid_; }

    std::string path(const std::string& name) const {
        return (std::filesystem::path(out_dir_) / name).string();
    }

private:
    static double squared_field_l2_sq(const ScalarField& z) {
        ScalarField z2 = z;
        for (auto& v : z2.v) v *= v;
        return l2_sq(z2);
    }

    std::string numbered(const std::string& stem, long step,
                         const std::string& ext) const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "_%06ld", step);
        return path(stem + buf + ext);
    }

    RunConfig cfg_;
    std::string out_dir_;
    Grid grid_;
    SimParams params_;
    State state_;
    std::vector<DiagnosticsRecord> records_;
    std::ofstream csv_;
    double z0_sq_l2_sq_ = -1.0;
};

}  // namespace chns
