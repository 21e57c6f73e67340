#ifndef ADVSLAM_TEST_UTIL_HPP
#define ADVSLAM_TEST_UTIL_HPP

#include <filesystem>
#include <random>
#include <string>

#include "advslam/core.hpp"

namespace advslam::test {

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * u01(rng);
}

inline Eigen::Vector3d random_point(std::mt19937_64& rng, double extent = 1.0) {
    return {uniform(rng, -extent, extent), uniform(rng, -extent, extent),
            uniform(rng, -extent, extent)};
}

/// Uniform-ish random rotation from a random axis and angle.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    Eigen::Vector3d axis = random_point(rng);
    while (axis.norm() < 1e-6) axis = random_point(rng);
    axis.normalize();
    const double angle = uniform(rng, -M_PI, M_PI);
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline Pose random_pose(std::mt19937_64& rng, double translation_extent = 1.0) {
    Pose p;
    p.R = random_rotation(rng);
    p.t = random_point(rng, translation_extent);
    return p;
}

inline ImageFrame random_frame(std::mt19937_64& rng, int w, int h, int channels,
                               double timestamp = 0.0) {
    ImageFrame f;
    f.timestamp = timestamp;
    f.width = w;
    f.height = h;
    f.channels = channels;
    f.pixels.resize(static_cast<size_t>(w) * h * channels);
    for (auto& v : f.pixels) v = u01(rng);
    return f;
}

/// Unique scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("advslam_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace advslam::test

#endif
