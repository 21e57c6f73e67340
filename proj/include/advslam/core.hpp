#ifndef ADVSLAM_CORE_HPP
#define ADVSLAM_CORE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace advslam {

// Error taxonomy mirrored by the CLI exit codes: ConfigError -> 1, DataError -> 2,
// anything else -> 3.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Timestamped pixel grid, values in [0,1]. Layout is row-major with channels
/// interleaved: pixels[(y*width + x)*channels + c].
struct ImageFrame {
    double timestamp = 0.0;
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 or 3
    std::vector<double> pixels;

    double at(int x, int y, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double& at(int x, int y, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
    bool shape_matches(const ImageFrame& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

/// Per-pixel depth in meters; 0 marks an invalid measurement.
struct DepthFrame {
    double timestamp = 0.0;
    int width = 0;
    int height = 0;
    std::vector<double> depth;

    double at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return depth[static_cast<size_t>(y) * width + x]; }
};

/// Rigid body transform. Maps points from the local frame to the parent frame:
/// p_parent = R * p_local + t.
struct Pose {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();

    Pose inverse() const { return {R.transpose(), -(R.transpose() * t)}; }
    Pose operator*(const Pose& o) const { return {R * o.R, R * o.t + t}; }
    Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return R * p + t; }
};

/// Checks R^T R = I and det R = +1 within tol.
bool is_valid_rotation(const Eigen::Matrix3d& R, double tol = 1e-9);

/// Pinhole camera intrinsics in pixels.
struct Intrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
};

/// CHW tensor of doubles, the working type of the surrogate network.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), data(static_cast<size_t>(c_) * h_ * w_, 0.0) {}

    size_t size() const { return data.size(); }
    double at(int ci, int y, int x) const {
        return data[(static_cast<size_t>(ci) * h + y) * w + x];
    }
    double& at(int ci, int y, int x) {
        return data[(static_cast<size_t>(ci) * h + y) * w + x];
    }
    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

/// sign with sign(0) = 0, the convention used by the perturbation update.
inline double sign0(double v) { return (v > 0.0) - (v < 0.0); }

/// Adds a bounded delta to x and clamps the result to [lo,hi], then nudges the
/// result by ulps until the roundtrip difference (result - x) computed in
/// double stays within [-bound, bound]. The L-inf contract on adversarial
/// outputs is asserted exactly by tests, so the rounding of x+d must not be
/// allowed to overshoot the bound.
double apply_bounded_delta(double x, double d, double bound, double lo, double hi);

/// splitmix64, used to derive per-frame RNG streams from a global seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Luminance conversion, 0.299 R + 0.587 G + 0.114 B. Single-channel input is
/// passed through.
std::vector<double> to_grayscale(const ImageFrame& frame);

/// Whether OpenMP kernels run parallel. On by default; the serial reference
/// implementations in kernels.hpp ignore this.
void set_parallel_enabled(bool enabled);
bool parallel_enabled();

}  // namespace advslam

#endif
