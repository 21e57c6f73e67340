#include <doctest.h>

#include "advslam/odometry.hpp"
#include "advslam/synthetic.hpp"
#include "test_util.hpp"

using namespace advslam;
using namespace advslam::test;

namespace {

// correspondences under a known rigid motion with a fraction of outliers
struct Instance {
    std::vector<Eigen::Vector3d> src, dst;
    Pose truth;
};

Instance make_instance(std::mt19937_64& rng, int n, double outlier_fraction) {
    Instance inst;
    inst.truth = random_pose(rng);
    const int outliers = static_cast<int>(n * outlier_fraction);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d p = random_point(rng);
        inst.src.push_back(p);
        if (i < n - outliers) {
            inst.dst.push_back(inst.truth.R * p + inst.truth.t);
        } else {
            inst.dst.push_back(random_point(rng, 3.0));
        }
    }
    return inst;
}

double rotation_error(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
    return (a.transpose() * b - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE_BEGIN("odometry");

TEST_CASE("back projection follows the pinhole model") {
    DepthFrame depth;
    depth.width = 640;
    depth.height = 480;
    depth.depth.assign(static_cast<size_t>(640) * 480, 0.0);
    const Intrinsics K{500, 500, 320, 240};

    depth.at(320, 240) = 2.0;
    const auto center = back_project({320, 240, 1.0}, depth, K);
    REQUIRE(center.has_value());
    CHECK(center->x() == 0.0);
    CHECK(center->y() == 0.0);
    CHECK(center->z() == 2.0);

    depth.at(420, 240) = 1.0;
    const auto off = back_project({420, 240, 1.0}, depth, K);
    REQUIRE(off.has_value());
    CHECK(off->x() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(off->y() == doctest::Approx(0.0));
    CHECK(off->z() == doctest::Approx(1.0));

    CHECK_FALSE(back_project({5, 5, 1.0}, depth, K).has_value());  // invalid depth
}

TEST_CASE("procrustes fit recovers an exact rigid motion") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Instance inst = make_instance(rng, 12, 0.0);
        const Pose fit = fit_rigid_procrustes(inst.src, inst.dst);
        CHECK(rotation_error(fit.R, inst.truth.R) < 1e-12);
        CHECK((fit.t - inst.truth.t).norm() < 1e-12);
        CHECK(is_valid_rotation(fit.R, 1e-12));
    }
}

TEST_CASE("procrustes never returns a reflection") {
    // a near-planar cloud mapped through a rigid motion still yields det +1
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Eigen::Vector3d> src, dst;
        const Pose truth = random_pose(rng);
        for (int i = 0; i < 10; ++i) {
            Eigen::Vector3d p = random_point(rng);
            p.z() = 1e-9 * p.z();
            src.push_back(p);
            dst.push_back(truth.R * p + truth.t);
        }
        const Pose fit = fit_rigid_procrustes(src, dst);
        CHECK(fit.R.determinant() > 0.0);
        CHECK(is_valid_rotation(fit.R, 1e-9));
    }
}

TEST_CASE("already aligned correspondences give the identity with all inliers") {
    std::mt19937_64 rng(7);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(random_point(rng));
    EstimatorConfig cfg;
    cfg.min_inliers = 3;
    const RigidEstimate est = estimate_rigid(pts, pts, cfg, 1);
    REQUIRE(est.ok);
    CHECK(est.inliers.size() == pts.size());
    CHECK(rotation_error(est.pose.R, Eigen::Matrix3d::Identity()) < 1e-12);
    CHECK(est.pose.t.norm() < 1e-12);
}

TEST_CASE("noiseless construct-and-recover is exact to 1e-9") {
    std::mt19937_64 rng(11);
    EstimatorConfig cfg;
    cfg.min_inliers = 3;
    cfg.ransac_iterations = 100;
    for (int trial = 0; trial < 100; ++trial) {
        const Instance inst = make_instance(rng, 20, 0.0);
        const RigidEstimate est = estimate_rigid(inst.src, inst.dst, cfg, trial);
        REQUIRE(est.ok);
        CHECK(rotation_error(est.pose.R, inst.truth.R) < 1e-9);
        CHECK((est.pose.t - inst.truth.t).norm() < 1e-9);
    }
}

TEST_CASE("60 percent outliers are rejected by seeded RANSAC") {
    std::mt19937_64 rng(13);
    EstimatorConfig cfg;
    cfg.ransac_iterations = 500;
    cfg.inlier_radius = 0.02;
    cfg.min_inliers = 10;
    int recovered = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        const Instance inst = make_instance(rng, 50, 0.6);
        const RigidEstimate est = estimate_rigid(inst.src, inst.dst, cfg, 1000 + trial);
        if (!est.ok) continue;
        if (rotation_error(est.pose.R, inst.truth.R) < 1e-6 &&
            (est.pose.t - inst.truth.t).norm() < 1e-6) {
            ++recovered;
        }
    }
    CHECK(recovered >= trials * 99 / 100);
}

TEST_CASE("estimation fails cleanly below three correspondences") {
    EstimatorConfig cfg;
    std::vector<Eigen::Vector3d> two = {{0, 0, 0}, {1, 0, 0}};
    CHECK_FALSE(estimate_rigid(two, two, cfg, 1).ok);
    CHECK_FALSE(estimate_rigid({}, {}, cfg, 1).ok);
}

TEST_CASE("estimation is deterministic in the seed") {
    std::mt19937_64 rng(17);
    const Instance inst = make_instance(rng, 40, 0.4);
    EstimatorConfig cfg;
    cfg.min_inliers = 5;
    const RigidEstimate a = estimate_rigid(inst.src, inst.dst, cfg, 99);
    const RigidEstimate b = estimate_rigid(inst.src, inst.dst, cfg, 99);
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    CHECK(a.inliers == b.inliers);
    CHECK(a.pose.R == b.pose.R);
    CHECK(a.pose.t == b.pose.t);
}

TEST_CASE("estimate_rigid commutes with rigid changes of both frames") {
    // src' = Gs src, dst' = Gd dst  =>  pose' = Gd pose Gs^-1 (noiseless)
    std::mt19937_64 rng(19);
    EstimatorConfig cfg;
    cfg.min_inliers = 3;
    for (int trial = 0; trial < 20; ++trial) {
        const Instance inst = make_instance(rng, 15, 0.0);
        const Pose gs = random_pose(rng), gd = random_pose(rng);
        std::vector<Eigen::Vector3d> src2, dst2;
        for (size_t i = 0; i < inst.src.size(); ++i) {
            src2.push_back(gs.R * inst.src[i] + gs.t);
            dst2.push_back(gd.R * inst.dst[i] + gd.t);
        }
        const RigidEstimate base = estimate_rigid(inst.src, inst.dst, cfg, trial);
        const RigidEstimate moved = estimate_rigid(src2, dst2, cfg, trial);
        REQUIRE(base.ok);
        REQUIRE(moved.ok);
        const Pose expected = gd * base.pose * gs.inverse();
        CHECK(rotation_error(moved.pose.R, expected.R) < 1e-9);
        CHECK((moved.pose.t - expected.t).norm() < 1e-9);
    }
}

TEST_CASE("a static synthetic sequence tracks every frame near the identity") {
    SyntheticConfig scfg;
    scfg.frame_count = 6;
    scfg.width = 160;
    scfg.height = 120;
    scfg.intrinsics = {130, 130, 79.5, 59.5};
    scfg.trajectory = "static";
    const SyntheticSequence seq = generate_synthetic_sequence(scfg);

    FrontendConfig fcfg;
    fcfg.grid_cell = 8;
    fcfg.max_features = 400;
    EstimatorConfig ecfg;
    Tracker tracker(fcfg, ecfg, scfg.intrinsics);
    for (int i = 0; i < scfg.frame_count; ++i) {
        const TrackingResult r = tracker.track(seq.frames[i], seq.depths[i]);
        CHECK(r.outcome == TrackOutcome::Tracked);
        CHECK(r.pose.t.norm() < 1e-3);  // < 1 mm
        if (i > 0) CHECK(r.inliers >= ecfg.min_inliers);
    }
}

TEST_CASE("pure noise after a valid keyframe is untracked and keeps state intact") {
    SyntheticConfig scfg;
    scfg.frame_count = 2;
    scfg.width = 160;
    scfg.height = 120;
    scfg.intrinsics = {130, 130, 79.5, 59.5};
    scfg.trajectory = "static";
    const SyntheticSequence seq = generate_synthetic_sequence(scfg);

    FrontendConfig fcfg;
    fcfg.grid_cell = 8;
    fcfg.max_features = 400;
    EstimatorConfig ecfg;
    Tracker tracker(fcfg, ecfg, scfg.intrinsics);
    CHECK(tracker.track(seq.frames[0], seq.depths[0]).outcome == TrackOutcome::Tracked);

    std::mt19937_64 rng(23);
    const ImageFrame noise = random_frame(rng, 160, 120, 3, seq.frames[1].timestamp);
    const TrackingResult bad = tracker.track(noise, seq.depths[1]);
    CHECK(bad.outcome == TrackOutcome::Untracked);
    CHECK(bad.pose.t == tracker.last_pose().t);

    // the keyframe was not replaced: the clean frame still tracks
    const TrackingResult good = tracker.track(seq.frames[1], seq.depths[1]);
    CHECK(good.outcome == TrackOutcome::Tracked);
    CHECK(good.pose.t.norm() < 1e-3);
}

TEST_CASE("tracked poses satisfy the SE(3) invariants") {
    SyntheticConfig scfg;
    scfg.frame_count = 12;
    scfg.width = 160;
    scfg.height = 120;
    scfg.intrinsics = {130, 130, 79.5, 59.5};
    const SyntheticSequence seq = generate_synthetic_sequence(scfg);

    FrontendConfig fcfg;
    fcfg.grid_cell = 8;
    fcfg.max_features = 400;
    Tracker tracker(fcfg, EstimatorConfig{}, scfg.intrinsics);
    for (int i = 0; i < scfg.frame_count; ++i) {
        const TrackingResult r = tracker.track(seq.frames[i], seq.depths[i]);
        if (r.outcome == TrackOutcome::Tracked) CHECK(is_valid_rotation(r.pose.R, 1e-9));
    }
}

TEST_SUITE_END();
