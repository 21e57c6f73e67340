#include <doctest.h>

#include "advslam/metrics.hpp"
#include "ate_oracle.hpp"
#include "test_util.hpp"

using namespace advslam;
using namespace advslam::test;

namespace {

TrackingResult tracked_at(double ts, const Eigen::Vector3d& t) {
    TrackingResult r;
    r.timestamp = ts;
    r.outcome = TrackOutcome::Tracked;
    r.pose.t = t;
    return r;
}

TrackingResult untracked_at(double ts) {
    TrackingResult r;
    r.timestamp = ts;
    r.outcome = TrackOutcome::Untracked;
    return r;
}

Trajectory random_trajectory(std::mt19937_64& rng, int n) {
    Trajectory t;
    for (int i = 0; i < n; ++i) {
        t.timestamps.push_back(i * 0.1);
        t.poses.push_back(random_pose(rng));
    }
    return t;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("the untracked fill rule copies the most recent tracked pose") {
    const Eigen::Vector3d p1(1, 0, 0), p2(2, 0, 0);
    const std::vector<TrackingResult> results = {tracked_at(0.0, p1), untracked_at(0.1),
                                                 untracked_at(0.2), tracked_at(0.3, p2)};
    const Trajectory t = fill_untracked(results);
    REQUIRE(t.size() == 4);
    CHECK(t.poses[0].t == p1);
    CHECK(t.poses[1].t == p1);
    CHECK(t.poses[2].t == p1);
    CHECK(t.poses[3].t == p2);
    CHECK(t.timestamps == std::vector<double>{0.0, 0.1, 0.2, 0.3});
}

TEST_CASE("leading untracked frames take the first tracked pose") {
    const Eigen::Vector3d p1(0.5, -1, 2);
    const Trajectory t = fill_untracked({untracked_at(0.0), tracked_at(0.1, p1)});
    REQUIRE(t.size() == 2);
    CHECK(t.poses[0].t == p1);
    CHECK(t.poses[1].t == p1);
}

TEST_CASE("a fully tracked list passes through unchanged; a fully untracked one errors") {
    const std::vector<TrackingResult> results = {tracked_at(0.0, {1, 2, 3}),
                                                 tracked_at(0.1, {4, 5, 6})};
    const Trajectory t = fill_untracked(results);
    CHECK(t.poses[0].t == Eigen::Vector3d(1, 2, 3));
    CHECK(t.poses[1].t == Eigen::Vector3d(4, 5, 6));

    CHECK_THROWS_AS(fill_untracked({untracked_at(0.0), untracked_at(0.1)}), DataError);
}

TEST_CASE("untracked fraction is count over total") {
    CHECK(untracked_fraction({tracked_at(0, {0, 0, 0}), tracked_at(1, {0, 0, 0})}) == 0.0);
    CHECK(untracked_fraction({untracked_at(0), untracked_at(1), untracked_at(2),
                              tracked_at(3, {0, 0, 0})}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(untracked_fraction({}), DataError);
}

TEST_CASE("alignment of identical point sets is the identity") {
    std::mt19937_64 rng(3);
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(random_point(rng));
    const Pose a = align_rigid(pts, pts);
    CHECK((a.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(a.t.norm() < 1e-12);
}

TEST_CASE("alignment recovers a known rigid motion to 1e-9") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Pose truth = random_pose(rng);
        std::vector<Eigen::Vector3d> est, gt;
        for (int i = 0; i < 12; ++i) {
            const Eigen::Vector3d p = random_point(rng);
            est.push_back(p);
            gt.push_back(truth.R * p + truth.t);
        }
        const Pose a = align_rigid(est, gt);
        CHECK((a.R - truth.R).cwiseAbs().maxCoeff() < 1e-9);
        CHECK((a.t - truth.t).norm() < 1e-9);
    }
}

TEST_CASE("no random rigid candidate beats the closed-form alignment") {
    std::mt19937_64 rng(7);
    std::vector<Eigen::Vector3d> est, gt;
    for (int i = 0; i < 15; ++i) {
        est.push_back(random_point(rng));
        gt.push_back(random_point(rng));
    }
    const Pose best = align_rigid(est, gt);
    const double best_residual = alignment_residual(best, est, gt);
    for (int i = 0; i < 10000; ++i) {
        const Pose candidate = random_pose(rng, 2.0);
        CHECK(alignment_residual(candidate, est, gt) >= best_residual - 1e-12);
    }
}

TEST_CASE("alignment needs three pairs and some spread") {
    std::vector<Eigen::Vector3d> two = {{0, 0, 0}, {1, 1, 1}};
    CHECK_THROWS_AS(align_rigid(two, two), DataError);
    std::vector<Eigen::Vector3d> coincident(5, Eigen::Vector3d(1, 2, 3));
    CHECK_THROWS_AS(align_rigid(coincident, coincident), DataError);
}

TEST_CASE("identical trajectories give zero ATE") {
    std::mt19937_64 rng(9);
    const Trajectory t = random_trajectory(rng, 20);
    const AteReport r = compute_ate(t, t, 0.02);
    CHECK(r.pairs == 20);
    CHECK(r.mean < 1e-12);
    CHECK(r.rmse < 1e-12);
    CHECK(r.max < 1e-12);
}

TEST_CASE("a constant offset is absorbed by the alignment") {
    std::mt19937_64 rng(11);
    Trajectory gt = random_trajectory(rng, 15);
    Trajectory est = gt;
    for (auto& p : est.poses) p.t += Eigen::Vector3d(0.7, -0.3, 1.1);
    const AteReport r = compute_ate(est, gt, 0.02);
    CHECK(r.mean < 1e-12);
    CHECK(r.max < 1e-12);
}

TEST_CASE("the three-pose toy example matches the brute-force oracle to 1e-9") {
    Trajectory gt, est;
    const Eigen::Vector3d gt_pts[3] = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const Eigen::Vector3d est_pts[3] = {{0, 0, 0}, {1, 0, 0}, {2, 1, 0}};
    for (int i = 0; i < 3; ++i) {
        gt.timestamps.push_back(i);
        est.timestamps.push_back(i);
        Pose g, e;
        g.t = gt_pts[i];
        e.t = est_pts[i];
        gt.poses.push_back(g);
        est.poses.push_back(e);
    }
    const AteReport r = compute_ate(est, gt, 0.02);
    const OracleAte oracle =
        oracle_ate({est_pts[0], est_pts[1], est_pts[2]}, {gt_pts[0], gt_pts[1], gt_pts[2]});
    REQUIRE(r.errors.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.errors[i] - oracle.errors[i]) < 1e-9);
    CHECK(std::abs(r.mean - oracle.mean) < 1e-9);
    CHECK(std::abs(r.rmse - oracle.rmse) < 1e-9);
    CHECK(std::abs(r.max - oracle.max) < 1e-9);
}

TEST_CASE("compute_ate matches the Horn-quaternion oracle on random pairs") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 5 + static_cast<int>(rng() % 20);
        const Trajectory gt = random_trajectory(rng, n);
        Trajectory est = gt;
        for (auto& p : est.poses) p.t += random_point(rng, 0.2);

        const AteReport r = compute_ate(est, gt, 0.02);
        std::vector<Eigen::Vector3d> est_pts, gt_pts;
        for (int i = 0; i < n; ++i) {
            est_pts.push_back(est.poses[i].t);
            gt_pts.push_back(gt.poses[i].t);
        }
        const OracleAte oracle = oracle_ate(est_pts, gt_pts);
        CHECK(std::abs(r.mean - oracle.mean) < 1e-9);
        CHECK(std::abs(r.rmse - oracle.rmse) < 1e-9);
        CHECK(std::abs(r.max - oracle.max) < 1e-9);
    }
}

TEST_CASE("ATE is invariant under a rigid transform of the estimated trajectory") {
    std::mt19937_64 rng(17);
    const Trajectory gt = random_trajectory(rng, 25);
    Trajectory est = gt;
    for (auto& p : est.poses) p.t += random_point(rng, 0.1);
    const AteReport base = compute_ate(est, gt, 0.02);

    const Pose g = random_pose(rng, 2.0);
    Trajectory moved = est;
    for (auto& p : moved.poses) {
        p.t = g.R * p.t + g.t;
        p.R = g.R * p.R;
    }
    const AteReport after = compute_ate(moved, gt, 0.02);
    REQUIRE(base.errors.size() == after.errors.size());
    for (size_t i = 0; i < base.errors.size(); ++i) {
        CHECK(std::abs(base.errors[i] - after.errors[i]) < 1e-9);
    }
}

TEST_CASE("subsampled association of a trajectory against itself is zero") {
    std::mt19937_64 rng(19);
    const Trajectory gt = random_trajectory(rng, 40);
    Trajectory sparse;
    for (size_t i = 0; i < gt.size(); i += 3) {
        sparse.timestamps.push_back(gt.timestamps[i]);
        sparse.poses.push_back(gt.poses[i]);
    }
    const AteReport r = compute_ate(sparse, gt, 0.02);
    CHECK(r.pairs == sparse.size());
    CHECK(r.mean < 1e-12);
}

TEST_CASE("insufficient associations are an error") {
    std::mt19937_64 rng(21);
    const Trajectory gt = random_trajectory(rng, 10);
    Trajectory far;
    for (int i = 0; i < 10; ++i) {
        far.timestamps.push_back(100.0 + i);
        far.poses.push_back(Pose{});
    }
    CHECK_THROWS_AS(compute_ate(far, gt, 0.02), DataError);
}

TEST_SUITE_END();
