#include <doctest.h>

#include "advslam/metrics.hpp"
#include "advslam/synthetic.hpp"
#include "test_util.hpp"

using namespace advslam;
using namespace advslam::test;

namespace {

SyntheticConfig small_config() {
    SyntheticConfig cfg;
    cfg.frame_count = 4;
    cfg.width = 96;
    cfg.height = 72;
    cfg.intrinsics = {80.0, 80.0, 47.5, 35.5};
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("synthetic");

TEST_CASE("a static camera renders identical frames") {
    SyntheticConfig cfg = small_config();
    cfg.trajectory = "static";
    cfg.frame_count = 2;
    const SyntheticSequence seq = generate_synthetic_sequence(cfg);
    CHECK(seq.frames[0].pixels == seq.frames[1].pixels);
    CHECK(seq.depths[0].depth == seq.depths[1].depth);
}

TEST_CASE("rendering is deterministic given the config") {
    const SyntheticConfig cfg = small_config();
    const SyntheticSequence a = generate_synthetic_sequence(cfg);
    const SyntheticSequence b = generate_synthetic_sequence(cfg);
    for (int i = 0; i < cfg.frame_count; ++i) {
        CHECK(a.frames[i].pixels == b.frames[i].pixels);
        CHECK(a.depths[i].depth == b.depths[i].depth);
    }
}

TEST_CASE("ground truth poses are valid SE(3) for every frame") {
    SyntheticConfig cfg = small_config();
    cfg.frame_count = 40;
    const SyntheticSequence seq = generate_synthetic_sequence(cfg);
    for (const auto& gt : seq.ground_truth) {
        CHECK(is_valid_rotation(gt.pose.R, 1e-9));
        CHECK(gt.pose.t.allFinite());
    }
}

TEST_CASE("pure x translation shifts the image opposite to the motion") {
    // single fronto-parallel wall at z = 2.6 m; integer-shift cross-correlation
    // is the oracle for the expected pixel offset fx * dx / z
    SyntheticConfig cfg = small_config();
    cfg.scene = "wall";
    const double dx = 0.13;  // meters -> 80 * 0.13 / 2.6 = 4.0 px
    Pose p0, p1;
    p1.t.x() = dx;

    ImageFrame f0, f1;
    DepthFrame d0, d1;
    render_synthetic_frame(cfg, p0, 0.0, f0, d0);
    render_synthetic_frame(cfg, p1, 0.1, f1, d1);

    const auto g0 = to_grayscale(f0);
    const auto g1 = to_grayscale(f1);
    const int w = cfg.width, h = cfg.height;

    int best_shift = 0;
    double best_score = -1e300;
    for (int shift = -8; shift <= 8; ++shift) {
        double score = 0.0;
        for (int y = 10; y < h - 10; ++y) {
            for (int x = 12; x < w - 12; ++x) {
                score += g0[static_cast<size_t>(y) * w + x] *
                         g1[static_cast<size_t>(y) * w + (x + shift)];
            }
        }
        if (score > best_score) {
            best_score = score;
            best_shift = shift;
        }
    }
    // camera moved +x, so content appears shifted by -4 px in frame 1: a world
    // point at column x in frame 0 sits at column x - 4 in frame 1
    CHECK(best_shift == -4);
}

TEST_CASE("depth equals the analytic plane distance at the principal point") {
    SyntheticConfig cfg = small_config();
    cfg.scene = "wall";
    ImageFrame f;
    DepthFrame d;
    render_synthetic_frame(cfg, Pose{}, 0.0, f, d);
    // the center ray of the principal-point pixel hits the wall head on
    const int cx = static_cast<int>(cfg.intrinsics.cx);
    const int cy = static_cast<int>(cfg.intrinsics.cy);
    CHECK(d.at(cx, cy) == doctest::Approx(2.6).epsilon(1e-6));
}

TEST_CASE("the scripted ground truth scores zero ATE against itself") {
    SyntheticConfig cfg = small_config();
    cfg.frame_count = 30;
    const SyntheticSequence seq = generate_synthetic_sequence(cfg);
    Trajectory t;
    for (const auto& gt : seq.ground_truth) {
        t.timestamps.push_back(gt.timestamp);
        t.poses.push_back(gt.pose);
    }
    const AteReport r = compute_ate(t, t, 0.02);
    CHECK(r.mean < 1e-12);
    CHECK(r.max < 1e-12);
}

TEST_CASE("degenerate trajectories are rejected") {
    SyntheticConfig cfg = small_config();
    cfg.amplitude = 50.0;  // walks through the walls
    CHECK_THROWS_AS(generate_synthetic_sequence(cfg), DataError);

    SyntheticConfig two = small_config();
    two.frame_count = 1;
    CHECK_THROWS_AS(generate_synthetic_sequence(two), ConfigError);
}

TEST_CASE("the materialized TUM directory loads back through the dataset module") {
    SyntheticConfig cfg = small_config();
    cfg.frame_count = 5;
    const SyntheticSequence seq = generate_synthetic_sequence(cfg);
    const auto dir = scratch_dir("synth_tum");
    write_synthetic_tum(seq, dir, 5000.0);

    const SequenceManifest m = load_tum_sequence(dir, 0.02);
    CHECK(m.associations.size() == 5);
    for (const auto& assoc : m.associations) CHECK(assoc.gt >= 0);

    const ImageFrame decoded = decode_rgb(dir / m.rgb[0].path);
    CHECK(decoded.width == cfg.width);
    // pixels survive the 8-bit quantization
    for (size_t i = 0; i < decoded.pixels.size(); ++i) {
        CHECK(std::abs(decoded.pixels[i] - seq.frames[0].pixels[i]) <= 0.5 / 255.0 + 1e-12);
    }

    const DepthFrame depth = decode_depth(dir / m.depth[0].path, 5000.0);
    for (size_t i = 0; i < depth.depth.size(); ++i) {
        CHECK(std::abs(depth.depth[i] - seq.depths[0].depth[i]) <= 0.5 / 5000.0 + 1e-12);
    }

    // quaternion round trip keeps the poses
    for (size_t i = 0; i < m.ground_truth.size(); ++i) {
        const Eigen::Matrix3d diff =
            m.ground_truth[i].pose.R.transpose() * seq.ground_truth[i].pose.R;
        CHECK((diff - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_SUITE_END();
