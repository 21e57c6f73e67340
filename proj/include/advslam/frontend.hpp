#ifndef ADVSLAM_FRONTEND_HPP
#define ADVSLAM_FRONTEND_HPP

#include <filesystem>
#include <vector>

#include "advslam/core.hpp"
#include "advslam/kernels.hpp"

namespace advslam {

struct FrontendConfig {
    double corner_threshold = 0.06;  // normalized intensity contrast
    int max_features = 1000;
    int grid_cell = 32;              // one keypoint kept per cell
    int match_max_distance = 64;     // Hamming
    double match_ratio = 0.8;        // Lowe ratio, strict
    uint64_t pattern_seed = 17;
};

struct Keypoint {
    double x = 0, y = 0;
    double response = 0;
};

struct FeatureSet {
    std::vector<Keypoint> keypoints;
    std::vector<Descriptor> descriptors;
    int dropped_border = 0;  // keypoints discarded for lying too close to the border
};

struct Match {
    int a = -1, b = -1;
    int distance = 0;
};
using MatchSet = std::vector<Match>;

/// 256 seeded intensity-pair offsets, shared across every frame of a run.
class SamplingPattern {
public:
    static SamplingPattern seeded(uint64_t seed);
    /// Patch half-extent plus smoothing margin; keypoints closer than this to
    /// the border cannot be described.
    static constexpr int border_margin() { return 15; }

    struct Pair {
        int8_t x1, y1, x2, y2;
    };
    const std::array<Pair, 256>& pairs() const { return pairs_; }

private:
    std::array<Pair, 256> pairs_{};
};

/// Segment-test corners with per-grid-cell non-maximum suppression. At most
/// max_features, ordered by (cell, response); deterministic.
std::vector<Keypoint> detect_keypoints(const std::vector<double>& gray, int w, int h,
                                       const FrontendConfig& cfg);

/// BRIEF-style descriptors on a box-smoothed patch. Keypoints inside the
/// border margin are dropped and counted.
FeatureSet compute_descriptors(const std::vector<double>& gray, int w, int h,
                               std::vector<Keypoint> keypoints, const SamplingPattern& pattern);

/// detect + describe.
FeatureSet detect_features(const std::vector<double>& gray, int w, int h,
                           const FrontendConfig& cfg, const SamplingPattern& pattern);

/// Nearest/second-nearest Hamming matching with the ratio test and a
/// mutual-best cross check. Accepted matches are unique in both index sets.
MatchSet match_features(const FeatureSet& a, const FeatureSet& b, int max_distance, double ratio);

/// Debug dump, one line per feature: x y response hex-descriptor.
void dump_features(const FeatureSet& features, const std::filesystem::path& path);

}  // namespace advslam

#endif
