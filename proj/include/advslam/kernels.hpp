#ifndef ADVSLAM_KERNELS_HPP
#define ADVSLAM_KERNELS_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "advslam/core.hpp"

namespace advslam {

/// NCHW weight tensor (output channel, input channel, kernel row, kernel col).
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), data(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0) {}

    size_t size() const { return data.size(); }
    double at(int ni, int ci, int y, int x) const {
        return data[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
    }
    double& at(int ni, int ci, int y, int x) {
        return data[((static_cast<size_t>(ni) * c + ci) * h + y) * w + x];
    }
};

using Descriptor = std::array<uint64_t, 4>;  // 256-bit binary descriptor

namespace kernels {

/// Result of a 2-nearest-neighbour Hamming query.
struct Nearest2 {
    int best = -1;
    int best_dist = std::numeric_limits<int>::max();
    int second_dist = std::numeric_limits<int>::max();
};

int conv_out_extent(int in, int k, int stride, int pad);

// Parallel kernels. Every output element is computed independently with the
// same inner arithmetic as the serial reference, so results are bitwise equal
// to ref:: regardless of thread count.
void conv2d_forward(const Tensor& in, const Tensor4& w, const std::vector<double>& bias,
                    int stride, int pad, Tensor& out);
void conv2d_backward_input(const Tensor& gout, const Tensor4& w, int stride, int pad,
                           Tensor& gin);
void conv2d_backward_weights(const Tensor& in, const Tensor& gout, int stride, int pad,
                             Tensor4& gw, std::vector<double>& gbias);
void resize_bilinear(const std::vector<double>& src, int sw, int sh, int channels,
                     std::vector<double>& dst, int dw, int dh);
void hamming_knn2(const std::vector<Descriptor>& queries, const std::vector<Descriptor>& refs,
                  std::vector<Nearest2>& out);
/// FAST-style segment-test corner response (16-pixel circle, arc >= 9).
/// Response is the total contrast along the longest qualifying arc; 0 where
/// the test fails or within the 3 px border.
void corner_response(const std::vector<double>& gray, int w, int h, double threshold,
                     std::vector<double>& response);

// Serial reference implementations, kept for the kernel equivalence tests and
// the benchmark target.
namespace ref {
void conv2d_forward(const Tensor& in, const Tensor4& w, const std::vector<double>& bias,
                    int stride, int pad, Tensor& out);
void conv2d_backward_input(const Tensor& gout, const Tensor4& w, int stride, int pad,
                           Tensor& gin);
void conv2d_backward_weights(const Tensor& in, const Tensor& gout, int stride, int pad,
                             Tensor4& gw, std::vector<double>& gbias);
void resize_bilinear(const std::vector<double>& src, int sw, int sh, int channels,
                     std::vector<double>& dst, int dw, int dh);
void hamming_knn2(const std::vector<Descriptor>& queries, const std::vector<Descriptor>& refs,
                  std::vector<Nearest2>& out);
void corner_response(const std::vector<double>& gray, int w, int h, double threshold,
                     std::vector<double>& response);
}  // namespace ref

}  // namespace kernels
}  // namespace advslam

#endif
