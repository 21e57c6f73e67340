#ifndef ADVSLAM_METRICS_HPP
#define ADVSLAM_METRICS_HPP

#include <vector>

#include "advslam/core.hpp"
#include "advslam/odometry.hpp"

namespace advslam {

struct Trajectory {
    std::vector<double> timestamps;
    std::vector<Pose> poses;

    size_t size() const { return timestamps.size(); }
};

/// Applies the untracked-frame fill rule: an untracked frame inherits the pose
/// of the most recent tracked frame; leading untracked frames inherit the
/// first tracked pose. Errors when nothing was tracked.
Trajectory fill_untracked(const std::vector<TrackingResult>& results);

/// count(untracked) / count(all).
double untracked_fraction(const std::vector<TrackingResult>& results);

/// Least-squares rigid alignment mapping the estimated points onto the
/// ground-truth points (6-DoF, no scale: RGB-D trajectories are metric).
/// Errors with fewer than 3 pairs or a fully degenerate (single-point)
/// configuration.
Pose align_rigid(const std::vector<Eigen::Vector3d>& estimated,
                 const std::vector<Eigen::Vector3d>& ground_truth);

struct AteReport {
    std::vector<double> timestamps;   // associated estimated timestamps
    std::vector<double> errors;       // per-frame translational error, meters
    double mean = 0.0;
    double rmse = 0.0;
    double max = 0.0;
    double untracked = 0.0;           // filled by the caller from the run results
    Pose alignment;                   // estimated -> ground truth
    size_t pairs = 0;
};

/// Associates the trajectories by nearest timestamp within the tolerance,
/// aligns the estimated positions to ground truth with align_rigid and reports
/// per-frame errors ||g_i - (R e_i + t)||.
AteReport compute_ate(const Trajectory& estimated, const Trajectory& ground_truth,
                      double tolerance_s);

}  // namespace advslam

#endif
