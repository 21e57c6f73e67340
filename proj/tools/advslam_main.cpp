// Command-line front end: run / sweep / baseline / plotdata / synth.
// Exit codes: 0 success, 1 config error, 2 data error, 3 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "advslam/experiment.hpp"
#include "advslam/synthetic.hpp"

namespace {

bool verbose() {
    const char* v = std::getenv("ADVSLAM_VERBOSE");
    return v != nullptr && std::string(v) != "0";
}

void info(const std::string& msg) {
    if (verbose()) std::cerr << "[advslam] " << msg << "\n";
}

std::vector<double> parse_double_list(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(std::stod(tok));
        }
    }
    return out;
}

std::vector<std::string> parse_string_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) out.push_back(tok);
        }
    }
    return out;
}

void print_summary(const advslam::RunReport& r) {
    std::printf("frames              %zu\n", r.run.results.size());
    if (r.has_ground_truth) {
        std::printf("ate_mean            %.6f m\n", r.ate.mean);
        std::printf("ate_rmse            %.6f m\n", r.ate.rmse);
        std::printf("ate_max             %.6f m\n", r.ate.max);
    } else {
        std::printf("ate                 (no ground truth)\n");
    }
    std::printf("untracked_fraction  %.4f\n", r.untracked);
    std::printf("frames_attacked     %.4f\n", r.coverage.frame_fraction);
    std::printf("pixels_attacked     %.4f\n", r.coverage.pixel_fraction);
}

int run_verb(const std::string& config_path, bool force_baseline) {
    advslam::ExperimentConfig cfg = advslam::parse_experiment_config(config_path);
    if (force_baseline) {
        cfg.target = advslam::AttackTarget::None;
        cfg.with_baseline = false;
    }
    info("running " + cfg.output_dir);
    const advslam::RunReport report = advslam::run_experiment(cfg);
    advslam::write_run_report(report, cfg.output_dir);
    print_summary(report);

    if (cfg.with_baseline && cfg.target != advslam::AttackTarget::None) {
        advslam::ExperimentConfig base = cfg;
        base.target = advslam::AttackTarget::None;
        base.with_baseline = false;
        info("running baseline companion");
        const advslam::RunReport baseline = advslam::run_experiment(base);
        advslam::write_run_report(baseline, std::filesystem::path(cfg.output_dir) / "baseline");
        if (report.has_ground_truth && baseline.has_ground_truth && baseline.ate.mean > 0) {
            std::printf("baseline_ate_mean   %.6f m\n", baseline.ate.mean);
            std::printf("ate_ratio           %.3f\n", report.ate.mean / baseline.ate.mean);
        }
    }
    std::printf("report written to %s\n", cfg.output_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-box adversarial attacks on an RGB-D tracking pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_path, kind = "trajectory2d";
    std::vector<std::string> eps_items, schedule_items, run_dirs;

    auto* run_cmd = app.add_subcommand("run", "execute one configured experiment");
    run_cmd->add_option("config", config_path, "experiment config file")->required();

    auto* baseline_cmd = app.add_subcommand("baseline", "execute the attack-free pipeline");
    baseline_cmd->add_option("config", config_path, "experiment config file")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "run a (schedule x epsilon) grid");
    sweep_cmd->add_option("config", config_path, "experiment config file")->required();
    sweep_cmd->add_option("--eps", eps_items, "epsilon values (comma separated)")->required();
    sweep_cmd->add_option("--schedules", schedule_items, "schedules (comma separated)")->required();

    auto* plot_cmd = app.add_subcommand("plotdata", "emit plot-ready CSV from run reports");
    plot_cmd->add_option("rundir", run_dirs, "run report directories")->required();
    plot_cmd->add_option("--kind", kind, "trajectory2d | timeline");
    plot_cmd->add_option("-o,--out", out_path, "output CSV path")->required();

    auto* synth_cmd = app.add_subcommand("synth", "materialize the synthetic sequence as TUM files");
    synth_cmd->add_option("config", config_path, "experiment config file")->required();
    synth_cmd->add_option("-o,--out", out_path, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return run_verb(config_path, false);
        if (baseline_cmd->parsed()) return run_verb(config_path, true);

        if (sweep_cmd->parsed()) {
            const advslam::ExperimentConfig cfg = advslam::parse_experiment_config(config_path);
            const auto eps = parse_double_list(eps_items);
            const auto schedules = parse_string_list(schedule_items);
            const auto cells = advslam::run_sweep(cfg, eps, schedules, cfg.output_dir);
            std::printf("%-22s %8s %12s %12s %12s\n", "schedule", "eps", "mean_ate", "untracked",
                        "coverage");
            for (const auto& c : cells) {
                if (c.ok) {
                    std::printf("%-22s %8.3f %12.6f %12.4f %12.4f\n", c.schedule.c_str(),
                                c.epsilon, c.mean_ate, c.untracked, c.frame_coverage);
                } else {
                    std::printf("%-22s %8.3f FAILED: %s\n", c.schedule.c_str(), c.epsilon,
                                c.error.c_str());
                }
            }
            std::printf("sweep table written to %s/sweep.csv\n", cfg.output_dir.c_str());
            return 0;
        }

        if (plot_cmd->parsed()) {
            std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
            if (kind == "trajectory2d") {
                advslam::emit_trajectory2d(dirs, out_path);
            } else if (kind == "timeline") {
                if (dirs.size() != 1) {
                    throw advslam::ConfigError("timeline plotdata takes exactly one run directory");
                }
                advslam::emit_timeline(dirs[0], out_path,
                                       std::filesystem::path(out_path).replace_extension(
                                           ".spans.csv"));
            } else {
                throw advslam::ConfigError("unknown plot kind '" + kind + "'");
            }
            std::printf("plot data written to %s\n", out_path.c_str());
            return 0;
        }

        if (synth_cmd->parsed()) {
            const advslam::ExperimentConfig cfg = advslam::parse_experiment_config(config_path);
            const auto seq = advslam::generate_synthetic_sequence(cfg.synthetic);
            advslam::write_synthetic_tum(seq, out_path, cfg.depth_factor);
            std::printf("synthetic sequence (%zu frames) written to %s\n", seq.frames.size(),
                        out_path.c_str());
            return 0;
        }
    } catch (const advslam::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const advslam::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 3;
}
