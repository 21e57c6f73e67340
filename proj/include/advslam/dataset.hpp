#ifndef ADVSLAM_DATASET_HPP
#define ADVSLAM_DATASET_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advslam/core.hpp"

namespace advslam {

struct SequenceEntry {
    double timestamp = 0.0;
    std::string path;  // relative to the sequence root
};

struct GroundTruthEntry {
    double timestamp = 0.0;
    Pose pose;
};

/// Indices into the rgb/depth/ground-truth entry lists; gt == -1 when no
/// ground-truth entry fell within the association tolerance.
struct Association {
    int rgb = -1;
    int depth = -1;
    int gt = -1;
};

struct SequenceManifest {
    std::filesystem::path root;
    std::vector<SequenceEntry> rgb;
    std::vector<SequenceEntry> depth;
    std::vector<GroundTruthEntry> ground_truth;
    std::vector<Association> associations;
};

/// Parses rgb.txt, depth.txt and groundtruth.txt under root (TUM list format)
/// and associates the three streams by greedy nearest timestamp, each target
/// used at most once. RGB frames without a depth partner within the tolerance
/// are dropped; a missing ground-truth partner leaves gt == -1.
SequenceManifest load_tum_sequence(const std::filesystem::path& root, double tolerance_s);

/// Greedy nearest-timestamp matching between two sorted stamp lists. Returns
/// pairs of indices (a, b), sorted by a's timestamp.
std::vector<std::pair<int, int>> associate_timestamps(const std::vector<double>& a,
                                                      const std::vector<double>& b,
                                                      double tolerance_s);

/// Parses a TUM trajectory file (timestamp tx ty tz qx qy qz qw per line).
std::vector<GroundTruthEntry> load_tum_trajectory(const std::filesystem::path& path);

struct Box {
    int x = 0, y = 0, w = 0, h = 0;
};

/// Clamps a box to the frame; the result may be empty (w or h == 0).
Box clamp_box(const Box& b, int frame_w, int frame_h);

/// Axis-aligned attack regions keyed by frame timestamp.
class RegionSet {
public:
    void add(double timestamp, const Box& box);
    /// Boxes for the frame whose key is nearest to ts within the key tolerance
    /// (1e-4 s); empty when no frame entry exists.
    const std::vector<Box>& boxes_for(double ts) const;
    bool empty() const { return by_timestamp_.empty(); }
    size_t frame_count() const { return by_timestamp_.size(); }
    const std::map<double, std::vector<Box>>& entries() const { return by_timestamp_; }

private:
    std::map<double, std::vector<Box>> by_timestamp_;
};

/// Text file, one line per box: "timestamp x y w h".
RegionSet load_regions(const std::filesystem::path& path);

/// 8-bit PNG, 1 or 3 channels, normalized to [0,1].
ImageFrame decode_rgb(const std::filesystem::path& path);
void encode_rgb(const ImageFrame& frame, const std::filesystem::path& path);

/// 16-bit grayscale PNG; meters = raw / depth_factor, raw 0 stays invalid.
DepthFrame decode_depth(const std::filesystem::path& path, double depth_factor);
void encode_depth(const DepthFrame& frame, const std::filesystem::path& path, double depth_factor);

}  // namespace advslam

#endif
