#include "advslam/odometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace advslam {

std::optional<Eigen::Vector3d> back_project(const Keypoint& kp, const DepthFrame& depth,
                                            const Intrinsics& K) {
    const int xi = std::clamp(static_cast<int>(std::lround(kp.x)), 0, depth.width - 1);
    const int yi = std::clamp(static_cast<int>(std::lround(kp.y)), 0, depth.height - 1);
    const double d = depth.at(xi, yi);
    if (d <= 0.0) return std::nullopt;
    return Eigen::Vector3d(d * (kp.x - K.cx) / K.fx, d * (kp.y - K.cy) / K.fy, d);
}

Pose fit_rigid_procrustes(const std::vector<Eigen::Vector3d>& src,
                          const std::vector<Eigen::Vector3d>& dst) {
    if (src.size() != dst.size() || src.size() < 3) {
        throw DataError("rigid fit needs >= 3 correspondences");
    }
    Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= static_cast<double>(src.size());
    cd /= static_cast<double>(dst.size());

    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
        H += (src[i] - cs) * (dst[i] - cd).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d R = svd.matrixV() * svd.matrixU().transpose();
    if (R.determinant() < 0) {
        Eigen::Matrix3d V = svd.matrixV();
        V.col(2) *= -1.0;
        R = V * svd.matrixU().transpose();
    }
    Pose p;
    p.R = R;
    p.t = cd - R * cs;
    return p;
}

namespace {

inline bool collinear(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      const Eigen::Vector3d& c) {
    return (b - a).cross(c - a).squaredNorm() < 1e-20;
}

}  // namespace

RigidEstimate estimate_rigid(const std::vector<Eigen::Vector3d>& src,
                             const std::vector<Eigen::Vector3d>& dst,
                             const EstimatorConfig& cfg, uint64_t seed) {
    RigidEstimate est;
    const int n = static_cast<int>(src.size());
    if (n < 3 || src.size() != dst.size()) return est;

    std::mt19937_64 rng(seed);
    const double r2 = cfg.inlier_radius * cfg.inlier_radius;

    std::vector<int> best_inliers;
    std::vector<Eigen::Vector3d> sample_src(3), sample_dst(3);
    std::vector<int> current;
    current.reserve(n);

    for (int iter = 0; iter < cfg.ransac_iterations; ++iter) {
        int i0 = -1, i1 = -1, i2 = -1;
        bool have_sample = false;
        for (int attempt = 0; attempt < 32 && !have_sample; ++attempt) {
            i0 = static_cast<int>(rng() % n);
            i1 = static_cast<int>(rng() % n);
            i2 = static_cast<int>(rng() % n);
            if (i0 == i1 || i0 == i2 || i1 == i2) continue;
            if (collinear(src[i0], src[i1], src[i2])) continue;  // degenerate, resample
            have_sample = true;
        }
        if (!have_sample) continue;

        sample_src[0] = src[i0];
        sample_src[1] = src[i1];
        sample_src[2] = src[i2];
        sample_dst[0] = dst[i0];
        sample_dst[1] = dst[i1];
        sample_dst[2] = dst[i2];
        const Pose candidate = fit_rigid_procrustes(sample_src, sample_dst);

        current.clear();
        for (int j = 0; j < n; ++j) {
            if ((dst[j] - (candidate.R * src[j] + candidate.t)).squaredNorm() <= r2) {
                current.push_back(j);
            }
        }
        est.point_evals += static_cast<size_t>(n);
        if (current.size() > best_inliers.size()) best_inliers = current;
    }

    if (static_cast<int>(best_inliers.size()) < std::max(3, cfg.min_inliers)) return est;

    std::vector<Eigen::Vector3d> in_src, in_dst;
    in_src.reserve(best_inliers.size());
    in_dst.reserve(best_inliers.size());
    for (int j : best_inliers) {
        in_src.push_back(src[j]);
        in_dst.push_back(dst[j]);
    }
    est.pose = fit_rigid_procrustes(in_src, in_dst);
    est.inliers = std::move(best_inliers);
    est.ok = true;
    return est;
}

Tracker::Tracker(const FrontendConfig& fcfg, const EstimatorConfig& ecfg, const Intrinsics& K)
    : fcfg_(fcfg), ecfg_(ecfg), K_(K), pattern_(SamplingPattern::seeded(fcfg.pattern_seed)) {}

Tracker::Keyframe Tracker::make_keyframe(const FeatureSet& features, const DepthFrame& depth,
                                         const Pose& pose) const {
    Keyframe kf;
    kf.features = features;
    kf.pose = pose;
    kf.points.reserve(features.keypoints.size());
    for (const auto& kp : features.keypoints) kf.points.push_back(back_project(kp, depth, K_));
    return kf;
}

TrackingResult Tracker::track(const ImageFrame& rgb, const DepthFrame& depth) {
    const auto t0 = std::chrono::steady_clock::now();
    TrackingResult res;
    res.timestamp = rgb.timestamp;

    const std::vector<double> gray = to_grayscale(rgb);
    const FeatureSet features = detect_features(gray, rgb.width, rgb.height, fcfg_, pattern_);
    res.features = static_cast<int>(features.keypoints.size());
    double work = static_cast<double>(rgb.pixel_count()) + 64.0 * res.features;

    if (!keyframe_) {
        keyframe_ = make_keyframe(features, depth, Pose{});
        last_pose_ = Pose{};
        res.outcome = TrackOutcome::Tracked;
        res.pose = last_pose_;
        res.inliers = static_cast<int>(keyframe_->points.size());
    } else {
        const MatchSet matches = match_features(keyframe_->features, features,
                                                fcfg_.match_max_distance, fcfg_.match_ratio);
        res.matches = static_cast<int>(matches.size());
        work += 2.0 * static_cast<double>(keyframe_->features.descriptors.size()) *
                static_cast<double>(features.descriptors.size()) / 16.0;

        std::vector<Eigen::Vector3d> src, dst;  // src: current frame, dst: keyframe
        src.reserve(matches.size());
        dst.reserve(matches.size());
        for (const Match& m : matches) {
            const auto& kf_point = keyframe_->points[m.a];
            if (!kf_point) continue;
            const auto cur_point = back_project(features.keypoints[m.b], depth, K_);
            if (!cur_point) continue;
            src.push_back(*cur_point);
            dst.push_back(*kf_point);
        }

        const RigidEstimate est =
            estimate_rigid(src, dst, ecfg_, mix_seed(ecfg_.seed, frame_counter_));
        work += 10.0 * static_cast<double>(est.point_evals);

        if (est.ok) {
            // est.pose maps current-camera coordinates into keyframe-camera
            // coordinates, so the world pose composes directly.
            const Pose world = keyframe_->pose * est.pose;
            res.outcome = TrackOutcome::Tracked;
            res.pose = world;
            res.inliers = static_cast<int>(est.inliers.size());
            last_pose_ = world;

            const double moved = (world.t - keyframe_->pose.t).norm();
            if (res.inliers < ecfg_.refresh_inliers || moved > ecfg_.refresh_translation) {
                keyframe_ = make_keyframe(features, depth, world);
                ++keyframe_refreshes_;
                work += 5000.0;
            }
        } else {
            res.outcome = TrackOutcome::Untracked;
            res.pose = last_pose_;
            res.inliers = 0;
        }
    }

    ++frame_counter_;
    res.work_units = work;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.exec_time = res.wall_seconds;  // the pipeline overrides per its timing mode
    return res;
}

}  // namespace advslam
