#include "advslam/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace advslam {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot create " + tmp.string());
        out << content;
        if (!out) throw DataError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::string format_trajectory_tum(const Trajectory& t) {
    std::string out = "# timestamp tx ty tz qx qy qz qw\n";
    char buf[192];
    for (size_t i = 0; i < t.size(); ++i) {
        const Pose& p = t.poses[i];
        Eigen::Quaterniond q(p.R);
        q.normalize();
        if (q.w() < 0) q.coeffs() = -q.coeffs();
        std::snprintf(buf, sizeof(buf), "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                      t.timestamps[i], p.t.x(), p.t.y(), p.t.z(), q.x(), q.y(), q.z(), q.w());
        out += buf;
    }
    return out;
}

std::string sanitize_cell_name(const std::string& schedule, double eps) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_eps%.3f", schedule.c_str(), eps);
    std::string s = buf;
    for (char& c : s) {
        if (c == '(' || c == ')' || c == '/') c = '_';
    }
    return s;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    RunReport report;
    report.config = cfg;

    std::unique_ptr<FrameSource> source;
    if (cfg.dataset == DatasetKind::Synthetic) {
        source = make_synthetic_source(generate_synthetic_sequence(cfg.synthetic),
                                       cfg.synthetic.intrinsics);
    } else {
        const SequenceManifest manifest =
            load_tum_sequence(cfg.tum_path, cfg.association_tolerance);
        source = make_tum_source(manifest, cfg.depth_factor, cfg.tum_intrinsics);
    }

    SurrogateModel model;
    if (cfg.target != AttackTarget::None) {
        model = cfg.weights_path.empty()
                    ? SurrogateModel::seeded(Architecture::desk_default(), cfg.surrogate_seed)
                    : SurrogateModel::load_weights(cfg.weights_path);
    }

    RegionSet regions;
    Schedule schedule = parse_schedule(cfg.schedule_text);
    schedule.window = cfg.schedule_window;
    if (!cfg.regions_path.empty()) {
        regions = load_regions(cfg.regions_path);
        schedule.regions = &regions;
    }

    report.run = run_sequence(*source, cfg.target == AttackTarget::None ? nullptr : &model,
                              cfg.attack, cfg.target, schedule, cfg.frontend, cfg.estimator,
                              cfg.timing);

    report.estimated = fill_untracked(report.run.results);
    if (report.run.results.size() > 1) {
        // frames after the bootstrap keyframe
        const std::vector<TrackingResult> tail(report.run.results.begin() + 1,
                                               report.run.results.end());
        report.untracked = untracked_fraction(tail);
    }

    report.has_ground_truth = report.run.ground_truth.size() >= 3;
    if (report.has_ground_truth) {
        report.ate =
            compute_ate(report.estimated, report.run.ground_truth, cfg.association_tolerance);
        report.ate.untracked = report.untracked;
    }

    std::vector<char> attacked;
    std::vector<double> fractions;
    for (const auto& l : report.run.log) {
        attacked.push_back(l.attacked ? 1 : 0);
        fractions.push_back(l.pixel_fraction);
    }
    report.coverage = coverage_from_flags(attacked, fractions);
    return report;
}

void write_run_report(const RunReport& report, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    char buf[256];

    // per_frame.csv
    {
        std::string csv =
            "frame,timestamp,attacked,pixel_fraction,target_label,tracked,features,matches,"
            "inliers,exec_time,moving_avg,ate\n";
        std::map<double, double> ate_by_ts;
        for (size_t i = 0; i < report.ate.timestamps.size(); ++i) {
            ate_by_ts[report.ate.timestamps[i]] = report.ate.errors[i];
        }
        for (const auto& l : report.run.log) {
            const auto it = ate_by_ts.find(l.timestamp);
            std::snprintf(buf, sizeof(buf), "%d,%.6f,%d,%.6f,%d,%d,%d,%d,%d,%.9f,%.9f,",
                          l.frame, l.timestamp, l.attacked ? 1 : 0, l.pixel_fraction,
                          l.target_label, l.tracked ? 1 : 0, l.features, l.matches, l.inliers,
                          l.exec_time, l.moving_average);
            csv += buf;
            if (it != ate_by_ts.end()) {
                std::snprintf(buf, sizeof(buf), "%.9f", it->second);
                csv += buf;
            } else {
                csv += "nan";
            }
            csv += "\n";
        }
        write_text_atomic(out_dir / "per_frame.csv", csv);
    }

    // ate.csv: timestamp, error, tracked flag
    {
        std::string csv = "timestamp,error,tracked\n";
        std::map<double, bool> tracked_by_ts;
        for (const auto& r : report.run.results) {
            tracked_by_ts[r.timestamp] = r.outcome == TrackOutcome::Tracked;
        }
        for (size_t i = 0; i < report.ate.timestamps.size(); ++i) {
            const auto it = tracked_by_ts.find(report.ate.timestamps[i]);
            std::snprintf(buf, sizeof(buf), "%.6f,%.9f,%d\n", report.ate.timestamps[i],
                          report.ate.errors[i], it != tracked_by_ts.end() && it->second ? 1 : 0);
            csv += buf;
        }
        write_text_atomic(out_dir / "ate.csv", csv);
    }

    write_text_atomic(out_dir / "trajectory_est.txt", format_trajectory_tum(report.estimated));
    if (report.has_ground_truth) {
        write_text_atomic(out_dir / "trajectory_gt.txt",
                          format_trajectory_tum(report.run.ground_truth));
    }

    // report.txt: config echo + summary block
    {
        std::ostringstream os;
        os << serialize_config(report.config);
        os << "\n[summary]\n";
        os << "frames = " << report.run.results.size() << "\n";
        std::snprintf(buf, sizeof(buf), "%.9f", report.has_ground_truth ? report.ate.mean : NAN);
        os << "ate_mean = " << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.9f", report.has_ground_truth ? report.ate.rmse : NAN);
        os << "ate_rmse = " << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.9f", report.has_ground_truth ? report.ate.max : NAN);
        os << "ate_max = " << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.9f", report.untracked);
        os << "untracked_fraction = " << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.9f", report.coverage.frame_fraction);
        os << "frames_attacked_fraction = " << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.9f", report.coverage.pixel_fraction);
        os << "mean_attacked_pixel_fraction = " << buf << "\n";
        os << "ground_truth = " << (report.has_ground_truth ? "yes" : "no") << "\n";
        os << "label_convention = surrogate-self-prediction\n";
        if (report.has_ground_truth) {
            const Pose& a = report.ate.alignment;
            Eigen::Quaterniond q(a.R);
            q.normalize();
            if (q.w() < 0) q.coeffs() = -q.coeffs();
            std::snprintf(buf, sizeof(buf), "%.9f %.9f %.9f %.9f %.9f %.9f %.9f", a.t.x(), a.t.y(),
                          a.t.z(), q.x(), q.y(), q.z(), q.w());
            os << "ate_alignment = " << buf << "\n";
        }
        write_text_atomic(out_dir / "report.txt", os.str());
    }
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const std::vector<double>& eps_list,
                                 const std::vector<std::string>& schedules, const fs::path& out_dir,
                                 bool write_cells) {
    if (eps_list.empty() || schedules.empty()) {
        throw ConfigError("sweep needs at least one epsilon and one schedule");
    }
    std::vector<SweepCell> cells;

    // shared baseline row
    {
        ExperimentConfig cfg = base;
        cfg.target = AttackTarget::None;
        cfg.with_baseline = false;
        SweepCell cell;
        cell.schedule = "baseline";
        cell.epsilon = 0.0;
        try {
            const RunReport r = run_experiment(cfg);
            cell.ok = true;
            cell.mean_ate = r.ate.mean;
            cell.rmse = r.ate.rmse;
            cell.max_ate = r.ate.max;
            cell.untracked = r.untracked;
            cell.frame_coverage = 0.0;
            if (write_cells) write_run_report(r, out_dir / "baseline");
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
        cells.push_back(cell);
    }

    for (const std::string& schedule : schedules) {
        for (double eps : eps_list) {
            ExperimentConfig cfg = base;
            cfg.schedule_text = schedule;
            cfg.attack.epsilon = eps;
            cfg.with_baseline = false;
            SweepCell cell;
            cell.schedule = schedule;
            cell.epsilon = eps;
            try {
                const RunReport r = run_experiment(cfg);
                cell.ok = true;
                cell.mean_ate = r.ate.mean;
                cell.rmse = r.ate.rmse;
                cell.max_ate = r.ate.max;
                cell.untracked = r.untracked;
                cell.frame_coverage = r.coverage.frame_fraction;
                if (write_cells) write_run_report(r, out_dir / sanitize_cell_name(schedule, eps));
            } catch (const std::exception& e) {
                cell.error = e.what();  // failed cells are marked, the sweep continues
            }
            cells.push_back(cell);
        }
    }
    write_sweep_csv(cells, out_dir / "sweep.csv");
    return cells;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, const fs::path& path) {
    std::string csv = "schedule,epsilon,ok,mean_ate,rmse,max_ate,untracked,frame_coverage,error\n";
    char buf[256];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf), "%s,%.4f,%d,%.9f,%.9f,%.9f,%.9f,%.9f,%s\n",
                      c.schedule.c_str(), c.epsilon, c.ok ? 1 : 0, c.mean_ate, c.rmse, c.max_ate,
                      c.untracked, c.frame_coverage, c.error.c_str());
        csv += buf;
    }
    write_text_atomic(path, csv);
}

void emit_trajectory2d(const std::vector<fs::path>& run_dirs, const fs::path& out_csv) {
    if (run_dirs.empty()) throw ConfigError("trajectory plot needs at least one run directory");
    std::string csv = "series,timestamp,x,y\n";
    char buf[160];

    auto append_series = [&](const std::string& name, const std::vector<GroundTruthEntry>& entries) {
        if (entries.empty()) return;
        // origin alignment: express every pose relative to the first one
        const Pose origin = entries.front().pose.inverse();
        for (const auto& e : entries) {
            const Eigen::Vector3d p = origin * (e.pose.t);
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%.9f,%.9f\n", name.c_str(), e.timestamp,
                          p.x(), p.y());
            csv += buf;
        }
    };

    const fs::path gt_file = run_dirs.front() / "trajectory_gt.txt";
    if (fs::exists(gt_file)) append_series("ground_truth", load_tum_trajectory(gt_file));
    for (const auto& dir : run_dirs) {
        const fs::path est = dir / "trajectory_est.txt";
        if (!fs::exists(est)) throw DataError("no trajectory_est.txt under " + dir.string());
        append_series(dir.filename().string(), load_tum_trajectory(est));
    }
    write_text_atomic(out_csv, csv);
}

void emit_timeline(const fs::path& run_dir, const fs::path& out_csv, const fs::path& out_spans) {
    std::ifstream in(run_dir / "per_frame.csv");
    if (!in) throw DataError("no per_frame.csv under " + run_dir.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty per_frame.csv");
    std::string csv = "frame,exec_time,moving_avg,ate,attacked\n";
    std::string spans = "span,start_frame,end_frame\n";

    int span_id = 0, span_start = -1, prev_frame = -1;
    bool prev_attacked = false;
    char buf[160];
    auto close_span = [&](int end_frame) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d\n", span_id++, span_start, end_frame);
        spans += buf;
        span_start = -1;
    };

    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) cols.push_back(col);
        if (cols.size() < 12) throw DataError("malformed per_frame.csv row: " + line);
        const int frame = std::stoi(cols[0]);
        const bool attacked = cols[2] == "1";
        csv += cols[0] + "," + cols[9] + "," + cols[10] + "," + cols[11] + "," + cols[2] + "\n";
        if (attacked && span_start < 0) span_start = frame;
        if (!attacked && span_start >= 0) close_span(prev_frame);
        prev_frame = frame;
        prev_attacked = attacked;
    }
    if (prev_attacked && span_start >= 0) close_span(prev_frame);
    write_text_atomic(out_csv, csv);
    write_text_atomic(out_spans, spans);
}

}  // namespace advslam
