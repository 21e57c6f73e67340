#include "advslam/core.hpp"

#include <algorithm>
#include <atomic>

namespace advslam {

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel_enabled(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

bool is_valid_rotation(const Eigen::Matrix3d& R, double tol) {
    const Eigen::Matrix3d err = R.transpose() * R - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(R.determinant() - 1.0) <= tol;
}

double apply_bounded_delta(double x, double d, double bound, double lo, double hi) {
    d = std::clamp(d, -bound, bound);
    double y = std::clamp(x + d, lo, hi);
    // x is inside [lo,hi], so nudging y toward x keeps it inside too.
    while (y - x > bound) y = std::nextafter(y, x);
    while (x - y > bound) y = std::nextafter(y, x);
    return y;
}

std::vector<double> to_grayscale(const ImageFrame& frame) {
    const size_t n = frame.pixel_count();
    std::vector<double> gray(n);
    if (frame.channels == 1) {
        gray = frame.pixels;
    } else {
        for (size_t i = 0; i < n; ++i) {
            const double* p = &frame.pixels[i * frame.channels];
            gray[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        }
    }
    return gray;
}

}  // namespace advslam
