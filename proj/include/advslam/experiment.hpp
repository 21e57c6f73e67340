#ifndef ADVSLAM_EXPERIMENT_HPP
#define ADVSLAM_EXPERIMENT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "advslam/config.hpp"
#include "advslam/pipeline.hpp"

namespace advslam {

struct RunReport {
    ExperimentConfig config;  // resolved echo; re-running it reproduces the run
    SequenceRunResult run;
    Trajectory estimated;     // untracked frames filled
    AteReport ate;            // meaningful only when has_ground_truth
    bool has_ground_truth = false;
    CoverageStats coverage;
    /// untracked fraction over the frames after the bootstrap keyframe
    double untracked = 0.0;
};

/// Executes the configured pipeline end to end (no files written).
RunReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.txt, per_frame.csv, ate.csv, trajectory_est.txt and
/// trajectory_gt.txt into out_dir. Every file is written atomically
/// (write-then-rename).
void write_run_report(const RunReport& report, const std::filesystem::path& out_dir);

struct SweepCell {
    std::string schedule;
    double epsilon = 0.0;
    bool ok = false;
    std::string error;
    double mean_ate = 0.0;
    double rmse = 0.0;
    double max_ate = 0.0;
    double untracked = 0.0;
    double frame_coverage = 0.0;
};

/// One run per (schedule, epsilon) cell plus a shared baseline row. Cell
/// failures are recorded, not fatal. Per-cell reports are written under
/// out_dir; the table goes to out_dir/sweep.csv.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const std::vector<double>& eps_list,
                                 const std::vector<std::string>& schedules,
                                 const std::filesystem::path& out_dir, bool write_cells = true);

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::filesystem::path& path);

/// Origin-aligned (x, y) series per run directory, ground truth first; the z
/// coordinate is suppressed.
void emit_trajectory2d(const std::vector<std::filesystem::path>& run_dirs,
                       const std::filesystem::path& out_csv);

/// Per-frame timeline (frame, exec_time, moving_avg, ate, attacked) plus a
/// separate index of contiguous attacked spans.
void emit_timeline(const std::filesystem::path& run_dir, const std::filesystem::path& out_csv,
                   const std::filesystem::path& out_spans);

/// Atomic text write shared by every emitter.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace advslam

#endif
