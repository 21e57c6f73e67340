#ifndef ADVSLAM_SYNTHETIC_HPP
#define ADVSLAM_SYNTHETIC_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "advslam/core.hpp"
#include "advslam/dataset.hpp"

namespace advslam {

/// Scripted camera path and textured multi-plane scene for deterministic
/// desk-scale runs. The rendered ground truth is exactly the scripted
/// trajectory, so metric oracles can be checked end to end without dataset
/// downloads.
struct SyntheticConfig {
    int frame_count = 200;
    int width = 160;
    int height = 120;
    Intrinsics intrinsics{130.0, 130.0, 79.5, 59.5};
    uint64_t texture_seed = 7;
    std::string scene = "room";       // room | wall
    std::string trajectory = "sweep"; // static | sweep | forward
    double amplitude = 0.25;          // meters of lateral motion
    double yaw_amplitude = 0.04;      // radians
    double fps = 30.0;
};

struct SyntheticSequence {
    std::vector<ImageFrame> frames;
    std::vector<DepthFrame> depths;
    std::vector<GroundTruthEntry> ground_truth;
};

/// Camera-to-world pose of frame i under the scripted trajectory.
Pose scripted_pose(const SyntheticConfig& cfg, int frame_index);

/// Renders the full sequence. Deterministic given the config; errors if the
/// trajectory leaves the free interior of the scene or frame_count < 2.
SyntheticSequence generate_synthetic_sequence(const SyntheticConfig& cfg);

/// Renders a single frame at an arbitrary pose (used by tests).
void render_synthetic_frame(const SyntheticConfig& cfg, const Pose& camera_to_world,
                            double timestamp, ImageFrame& rgb, DepthFrame& depth);

/// Materializes the sequence as a TUM-format directory (rgb/, depth/, rgb.txt,
/// depth.txt, groundtruth.txt) so the dataset loader can ingest it.
void write_synthetic_tum(const SyntheticSequence& seq, const std::filesystem::path& out_dir,
                         double depth_factor);

}  // namespace advslam

#endif
