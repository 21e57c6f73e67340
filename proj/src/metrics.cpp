#include "advslam/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "advslam/dataset.hpp"

namespace advslam {

Trajectory fill_untracked(const std::vector<TrackingResult>& results) {
    const auto first_tracked =
        std::find_if(results.begin(), results.end(),
                     [](const TrackingResult& r) { return r.outcome == TrackOutcome::Tracked; });
    if (first_tracked == results.end()) {
        throw DataError("cannot fill untracked frames: no frame was ever tracked");
    }
    Trajectory t;
    t.timestamps.reserve(results.size());
    t.poses.reserve(results.size());
    Pose last = first_tracked->pose;  // leading untracked frames take the first tracked pose
    for (const auto& r : results) {
        if (r.outcome == TrackOutcome::Tracked) last = r.pose;
        t.timestamps.push_back(r.timestamp);
        t.poses.push_back(last);
    }
    return t;
}

double untracked_fraction(const std::vector<TrackingResult>& results) {
    if (results.empty()) throw DataError("untracked fraction of an empty result list");
    size_t untracked = 0;
    for (const auto& r : results) {
        if (r.outcome == TrackOutcome::Untracked) ++untracked;
    }
    return static_cast<double>(untracked) / results.size();
}

Pose align_rigid(const std::vector<Eigen::Vector3d>& estimated,
                 const std::vector<Eigen::Vector3d>& ground_truth) {
    if (estimated.size() != ground_truth.size() || estimated.size() < 3) {
        throw DataError("rigid alignment needs >= 3 associated pairs");
    }
    Eigen::Vector3d ce = Eigen::Vector3d::Zero(), cg = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < estimated.size(); ++i) {
        ce += estimated[i];
        cg += ground_truth[i];
    }
    ce /= static_cast<double>(estimated.size());
    cg /= static_cast<double>(ground_truth.size());

    double spread = 0.0;
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < estimated.size(); ++i) {
        const Eigen::Vector3d e = estimated[i] - ce;
        const Eigen::Vector3d g = ground_truth[i] - cg;
        H += e * g.transpose();
        spread += e.squaredNorm();
    }
    if (spread < 1e-24) throw DataError("rigid alignment is degenerate: estimated points coincide");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d R = svd.matrixV() * svd.matrixU().transpose();
    if (R.determinant() < 0) {
        Eigen::Matrix3d V = svd.matrixV();
        V.col(2) *= -1.0;
        R = V * svd.matrixU().transpose();
    }
    Pose p;
    p.R = R;
    p.t = cg - R * ce;
    return p;
}

AteReport compute_ate(const Trajectory& estimated, const Trajectory& ground_truth,
                      double tolerance_s) {
    const auto pairs = associate_timestamps(estimated.timestamps, ground_truth.timestamps,
                                            tolerance_s);
    if (pairs.size() < 3) {
        throw DataError("ATE needs >= 3 timestamp-associated pose pairs, got " +
                        std::to_string(pairs.size()));
    }
    std::vector<Eigen::Vector3d> est_pts, gt_pts;
    est_pts.reserve(pairs.size());
    gt_pts.reserve(pairs.size());
    for (auto [i, j] : pairs) {
        est_pts.push_back(estimated.poses[i].t);
        gt_pts.push_back(ground_truth.poses[j].t);
    }

    AteReport report;
    report.alignment = align_rigid(est_pts, gt_pts);
    report.pairs = pairs.size();

    double sum = 0.0, sum_sq = 0.0;
    for (size_t k = 0; k < pairs.size(); ++k) {
        const double err = (gt_pts[k] - (report.alignment.R * est_pts[k] + report.alignment.t)).norm();
        report.timestamps.push_back(estimated.timestamps[pairs[k].first]);
        report.errors.push_back(err);
        sum += err;
        sum_sq += err * err;
        report.max = std::max(report.max, err);
    }
    report.mean = sum / static_cast<double>(pairs.size());
    report.rmse = std::sqrt(sum_sq / static_cast<double>(pairs.size()));
    return report;
}

}  // namespace advslam
