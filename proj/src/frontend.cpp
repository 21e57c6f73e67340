#include "advslam/frontend.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

namespace advslam {

SamplingPattern SamplingPattern::seeded(uint64_t seed) {
    SamplingPattern p;
    std::mt19937_64 rng(seed);
    auto next_offset = [&rng]() {
        // uniform in [-12, 12] from raw engine bits
        return static_cast<int8_t>(static_cast<int>(rng() % 25) - 12);
    };
    for (auto& pair : p.pairs_) {
        pair.x1 = next_offset();
        pair.y1 = next_offset();
        pair.x2 = next_offset();
        pair.y2 = next_offset();
    }
    return p;
}

std::vector<Keypoint> detect_keypoints(const std::vector<double>& gray, int w, int h,
                                       const FrontendConfig& cfg) {
    std::vector<double> response;
    kernels::corner_response(gray, w, h, cfg.corner_threshold, response);

    const int cell = std::max(1, cfg.grid_cell);
    const int cells_x = (w + cell - 1) / cell;
    const int cells_y = (h + cell - 1) / cell;
    // strongest corner per grid cell; earliest pixel wins ties
    std::vector<int> winner(static_cast<size_t>(cells_x) * cells_y, -1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double r = response[static_cast<size_t>(y) * w + x];
            if (r <= 0.0) continue;
            const size_t ci = static_cast<size_t>(y / cell) * cells_x + x / cell;
            const int prev = winner[ci];
            if (prev < 0 || r > response[static_cast<size_t>(prev)]) {
                winner[ci] = y * w + x;
            }
        }
    }

    struct Candidate {
        size_t cell_idx;
        int pixel;
        double response;
    };
    std::vector<Candidate> candidates;
    for (size_t ci = 0; ci < winner.size(); ++ci) {
        if (winner[ci] < 0) continue;
        candidates.push_back({ci, winner[ci], response[static_cast<size_t>(winner[ci])]});
    }
    if (static_cast<int>(candidates.size()) > cfg.max_features) {
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.response != b.response) return a.response > b.response;
            return a.cell_idx < b.cell_idx;
        });
        candidates.resize(cfg.max_features);
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) { return a.cell_idx < b.cell_idx; });
    }

    std::vector<Keypoint> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        out.push_back({static_cast<double>(c.pixel % w), static_cast<double>(c.pixel / w),
                       c.response});
    }
    return out;
}

namespace {

// 5x5 box mean around (x, y); the caller guarantees the margin
inline double smoothed(const std::vector<double>& gray, int w, int x, int y) {
    double sum = 0.0;
    for (int dy = -2; dy <= 2; ++dy) {
        const double* row = &gray[static_cast<size_t>(y + dy) * w + x];
        for (int dx = -2; dx <= 2; ++dx) sum += row[dx];
    }
    return sum / 25.0;
}

}  // namespace

FeatureSet compute_descriptors(const std::vector<double>& gray, int w, int h,
                               std::vector<Keypoint> keypoints, const SamplingPattern& pattern) {
    FeatureSet out;
    const int margin = SamplingPattern::border_margin();
    for (const Keypoint& kp : keypoints) {
        const int x = static_cast<int>(std::lround(kp.x));
        const int y = static_cast<int>(std::lround(kp.y));
        if (x < margin || y < margin || x >= w - margin || y >= h - margin) {
            ++out.dropped_border;
            continue;
        }
        Descriptor d{};
        const auto& pairs = pattern.pairs();
        for (int bit = 0; bit < 256; ++bit) {
            const auto& p = pairs[bit];
            const double a = smoothed(gray, w, x + p.x1, y + p.y1);
            const double b = smoothed(gray, w, x + p.x2, y + p.y2);
            if (a < b) d[bit >> 6] |= uint64_t{1} << (bit & 63);
        }
        out.keypoints.push_back(kp);
        out.descriptors.push_back(d);
    }
    return out;
}

FeatureSet detect_features(const std::vector<double>& gray, int w, int h,
                           const FrontendConfig& cfg, const SamplingPattern& pattern) {
    return compute_descriptors(gray, w, h, detect_keypoints(gray, w, h, cfg), pattern);
}

MatchSet match_features(const FeatureSet& a, const FeatureSet& b, int max_distance, double ratio) {
    MatchSet matches;
    if (a.descriptors.empty() || b.descriptors.empty()) return matches;

    std::vector<kernels::Nearest2> ab, ba;
    kernels::hamming_knn2(a.descriptors, b.descriptors, ab);
    kernels::hamming_knn2(b.descriptors, a.descriptors, ba);

    for (int i = 0; i < static_cast<int>(ab.size()); ++i) {
        const auto& n = ab[i];
        if (n.best < 0 || n.best_dist > max_distance) continue;
        if (n.second_dist != std::numeric_limits<int>::max() &&
            !(n.best_dist < ratio * n.second_dist)) {
            continue;
        }
        if (ba[n.best].best != i) continue;  // mutual best
        matches.push_back({i, n.best, n.best_dist});
    }
    return matches;
}

void dump_features(const FeatureSet& features, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot create feature dump: " + path.string());
    out << "# x y response descriptor\n";
    char buf[96];
    for (size_t i = 0; i < features.keypoints.size(); ++i) {
        const auto& kp = features.keypoints[i];
        std::snprintf(buf, sizeof(buf), "%.2f %.2f %.6f ", kp.x, kp.y, kp.response);
        out << buf;
        for (int word = 3; word >= 0; --word) {
            std::snprintf(buf, sizeof(buf), "%016llx",
                          static_cast<unsigned long long>(features.descriptors[i][word]));
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace advslam
