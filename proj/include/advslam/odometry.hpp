#ifndef ADVSLAM_ODOMETRY_HPP
#define ADVSLAM_ODOMETRY_HPP

#include <optional>
#include <vector>

#include "advslam/core.hpp"
#include "advslam/frontend.hpp"

namespace advslam {

struct EstimatorConfig {
    int ransac_iterations = 500;
    double inlier_radius = 0.02;   // meters
    int min_inliers = 15;          // tracking-failure criterion
    int refresh_inliers = 40;      // keyframe refresh thresholds
    double refresh_translation = 0.15;
    uint64_t seed = 13;
};

/// Lifts a keypoint to camera coordinates using the nearest depth pixel;
/// nullopt when the depth is invalid.
std::optional<Eigen::Vector3d> back_project(const Keypoint& kp, const DepthFrame& depth,
                                            const Intrinsics& K);

/// Closed-form least-squares rigid fit src -> dst (orthogonal Procrustes via
/// SVD, determinant-corrected against reflections).
Pose fit_rigid_procrustes(const std::vector<Eigen::Vector3d>& src,
                          const std::vector<Eigen::Vector3d>& dst);

struct RigidEstimate {
    bool ok = false;
    Pose pose;                 // maps src coordinates into dst coordinates
    std::vector<int> inliers;  // indices into the correspondence list
    size_t point_evals = 0;    // work counter for the timing proxy
};

/// 3-point RANSAC with Procrustes inner fits, refined on the best inlier set.
/// Degenerate (collinear) samples are redrawn. Fails when fewer than 3
/// correspondences exist or the best inlier count is below min_inliers.
/// Deterministic for a given seed.
RigidEstimate estimate_rigid(const std::vector<Eigen::Vector3d>& src,
                             const std::vector<Eigen::Vector3d>& dst,
                             const EstimatorConfig& cfg, uint64_t seed);

enum class TrackOutcome { Tracked, Untracked };

struct TrackingResult {
    double timestamp = 0.0;
    TrackOutcome outcome = TrackOutcome::Untracked;
    Pose pose;  // last known pose when untracked
    int inliers = 0;
    int matches = 0;
    int features = 0;
    double exec_time = 0.0;     // seconds, per the run's timing mode
    double wall_seconds = 0.0;  // measured
    double work_units = 0.0;    // deterministic work counter
};

/// Frame-to-keyframe RGB-D tracker. The first call bootstraps the keyframe at
/// the identity pose; afterwards each frame is matched against the keyframe,
/// both sides are back-projected and a robust rigid pose is estimated.
/// Failures are data (Untracked), never exceptions; an untracked frame leaves
/// the keyframe and last pose untouched.
class Tracker {
public:
    Tracker(const FrontendConfig& fcfg, const EstimatorConfig& ecfg, const Intrinsics& K);

    TrackingResult track(const ImageFrame& rgb, const DepthFrame& depth);

    bool bootstrapped() const { return keyframe_.has_value(); }
    const Pose& last_pose() const { return last_pose_; }
    int keyframe_refreshes() const { return keyframe_refreshes_; }

private:
    struct Keyframe {
        FeatureSet features;
        std::vector<std::optional<Eigen::Vector3d>> points;
        Pose pose;
    };
    Keyframe make_keyframe(const FeatureSet& features, const DepthFrame& depth, const Pose& pose) const;

    FrontendConfig fcfg_;
    EstimatorConfig ecfg_;
    Intrinsics K_;
    SamplingPattern pattern_;
    std::optional<Keyframe> keyframe_;
    Pose last_pose_;
    uint64_t frame_counter_ = 0;
    int keyframe_refreshes_ = 0;
};

}  // namespace advslam

#endif
