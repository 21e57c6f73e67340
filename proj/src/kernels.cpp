#include "advslam/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace advslam::kernels {

int conv_out_extent(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

namespace {

inline double conv_cell(const Tensor& in, const Tensor4& w, const std::vector<double>& bias,
                        int stride, int pad, int oc, int oy, int ox) {
    double acc = bias[oc];
    for (int ic = 0; ic < in.c; ++ic) {
        for (int ky = 0; ky < w.h; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < w.w; ++kx) {
                const int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= in.w) continue;
                acc += in.at(ic, iy, ix) * w.at(oc, ic, ky, kx);
            }
        }
    }
    return acc;
}

// Gather form of the input gradient: accumulate over the output cells whose
// receptive field covers (ic, iy, ix).
inline double conv_input_grad_cell(const Tensor& gout, const Tensor4& w, int stride, int pad,
                                   int ic, int iy, int ix) {
    double acc = 0.0;
    for (int oc = 0; oc < gout.c; ++oc) {
        for (int ky = 0; ky < w.h; ++ky) {
            const int num_y = iy + pad - ky;
            if (num_y < 0 || num_y % stride != 0) continue;
            const int oy = num_y / stride;
            if (oy >= gout.h) continue;
            for (int kx = 0; kx < w.w; ++kx) {
                const int num_x = ix + pad - kx;
                if (num_x < 0 || num_x % stride != 0) continue;
                const int ox = num_x / stride;
                if (ox >= gout.w) continue;
                acc += gout.at(oc, oy, ox) * w.at(oc, ic, ky, kx);
            }
        }
    }
    return acc;
}

inline void conv_weight_grad_channel(const Tensor& in, const Tensor& gout, int stride, int pad,
                                     int kh, int kw, int oc, Tensor4& gw, std::vector<double>& gbias) {
    double bacc = 0.0;
    for (int oy = 0; oy < gout.h; ++oy)
        for (int ox = 0; ox < gout.w; ++ox) bacc += gout.at(oc, oy, ox);
    gbias[oc] = bacc;

    for (int ic = 0; ic < in.c; ++ic) {
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                double acc = 0.0;
                for (int oy = 0; oy < gout.h; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= in.h) continue;
                    for (int ox = 0; ox < gout.w; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix < 0 || ix >= in.w) continue;
                        acc += gout.at(oc, oy, ox) * in.at(ic, iy, ix);
                    }
                }
                gw.at(oc, ic, ky, kx) = acc;
            }
        }
    }
}

inline void resize_cell(const std::vector<double>& src, int sw, int sh, int channels,
                        std::vector<double>& dst, int dw, int dh, int y, int x) {
    const double sx = (x + 0.5) * static_cast<double>(sw) / dw - 0.5;
    const double sy = (y + 0.5) * static_cast<double>(sh) / dh - 0.5;
    const double cx = std::clamp(sx, 0.0, static_cast<double>(sw - 1));
    const double cy = std::clamp(sy, 0.0, static_cast<double>(sh - 1));
    const int x0 = static_cast<int>(cx);
    const int y0 = static_cast<int>(cy);
    const int x1 = std::min(x0 + 1, sw - 1);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double fx = cx - x0;
    const double fy = cy - y0;
    for (int c = 0; c < channels; ++c) {
        const double v00 = src[(static_cast<size_t>(y0) * sw + x0) * channels + c];
        const double v01 = src[(static_cast<size_t>(y0) * sw + x1) * channels + c];
        const double v10 = src[(static_cast<size_t>(y1) * sw + x0) * channels + c];
        const double v11 = src[(static_cast<size_t>(y1) * sw + x1) * channels + c];
        const double top = v00 + (v01 - v00) * fx;
        const double bot = v10 + (v11 - v10) * fx;
        dst[(static_cast<size_t>(y) * dw + x) * channels + c] = top + (bot - top) * fy;
    }
}

inline int hamming(const Descriptor& a, const Descriptor& b) {
    int d = 0;
    for (int i = 0; i < 4; ++i) d += std::popcount(a[i] ^ b[i]);
    return d;
}

inline Nearest2 knn2_cell(const Descriptor& q, const std::vector<Descriptor>& refs) {
    Nearest2 r;
    for (int j = 0; j < static_cast<int>(refs.size()); ++j) {
        const int d = hamming(q, refs[j]);
        if (d < r.best_dist) {
            r.second_dist = r.best_dist;
            r.best_dist = d;
            r.best = j;
        } else if (d < r.second_dist) {
            r.second_dist = d;
        }
    }
    return r;
}

// FAST-16 offsets, radius-3 Bresenham circle in clockwise order.
constexpr int kCircle[16][2] = {
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},  {2, 2},  {1, 3},
    {0, 3},  {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
};
// 9 of 16, the usual segment-test arc; a right-angle corner subtends only
// ~11 circle points, so arc 12 would miss it.
constexpr int kMinArc = 9;

inline double corner_cell(const std::vector<double>& gray, int w, int y, int x, double threshold) {
    const double c = gray[static_cast<size_t>(y) * w + x];
    double diff[16];
    for (int i = 0; i < 16; ++i) {
        diff[i] = gray[static_cast<size_t>(y + kCircle[i][1]) * w + (x + kCircle[i][0])] - c;
    }
    // Score a maximal contiguous arc of >= kMinArc uniformly brighter (or
    // darker) circle pixels by its total contrast. Longer, stronger arcs win,
    // which localizes a square corner at its apex pixel where the arc peaks.
    double best = 0.0;
    for (int polarity = 0; polarity < 2; ++polarity) {
        double d[16];
        bool q[16];
        int qualifying = 0;
        for (int i = 0; i < 16; ++i) {
            d[i] = polarity == 0 ? diff[i] : -diff[i];
            q[i] = d[i] > threshold;
            qualifying += q[i];
        }
        if (qualifying < kMinArc) continue;
        if (qualifying == 16) {
            double sum = 0.0;
            for (int i = 0; i < 16; ++i) sum += d[i];
            best = std::max(best, sum);
            continue;
        }
        for (int s = 0; s < 16; ++s) {
            if (!q[s] || q[(s + 15) & 15]) continue;  // maximal runs only
            int len = 0;
            double sum = 0.0;
            for (int k = 0; k < 16 && q[(s + k) & 15]; ++k) {
                ++len;
                sum += d[(s + k) & 15];
            }
            if (len >= kMinArc) best = std::max(best, sum);
        }
    }
    return best;
}

}  // namespace

void conv2d_forward(const Tensor& in, const Tensor4& w, const std::vector<double>& bias,
                    int stride, int pad, Tensor& out) {
    const int total = out.c * out.h * out.w;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < total; ++idx) {
        const int oc = idx / (out.h * out.w);
        const int rem = idx % (out.h * out.w);
        out.data[idx] = conv_cell(in, w, bias, stride, pad, oc, rem / out.w, rem % out.w);
    }
}

void conv2d_backward_input(const Tensor& gout, const Tensor4& w, int stride, int pad, Tensor& gin) {
    const int total = gin.c * gin.h * gin.w;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < total; ++idx) {
        const int ic = idx / (gin.h * gin.w);
        const int rem = idx % (gin.h * gin.w);
        gin.data[idx] = conv_input_grad_cell(gout, w, stride, pad, ic, rem / gin.w, rem % gin.w);
    }
}

void conv2d_backward_weights(const Tensor& in, const Tensor& gout, int stride, int pad,
                             Tensor4& gw, std::vector<double>& gbias) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < gout.c; ++oc) {
        conv_weight_grad_channel(in, gout, stride, pad, gw.h, gw.w, oc, gw, gbias);
    }
}

void resize_bilinear(const std::vector<double>& src, int sw, int sh, int channels,
                     std::vector<double>& dst, int dw, int dh) {
    dst.resize(static_cast<size_t>(dw) * dh * channels);
    if (sw == dw && sh == dh) {
        dst = src;
        return;
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dh; ++y) {
        for (int x = 0; x < dw; ++x) resize_cell(src, sw, sh, channels, dst, dw, dh, y, x);
    }
}

void hamming_knn2(const std::vector<Descriptor>& queries, const std::vector<Descriptor>& refs,
                  std::vector<Nearest2>& out) {
    out.resize(queries.size());
    const int n = static_cast<int>(queries.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[i] = knn2_cell(queries[i], refs);
}

void corner_response(const std::vector<double>& gray, int w, int h, double threshold,
                     std::vector<double>& response) {
    response.assign(static_cast<size_t>(w) * h, 0.0);
    if (w < 7 || h < 7) return;
#pragma omp parallel for schedule(static)
    for (int y = 3; y < h - 3; ++y) {
        for (int x = 3; x < w - 3; ++x) {
            response[static_cast<size_t>(y) * w + x] = corner_cell(gray, w, y, x, threshold);
        }
    }
}

namespace ref {

void conv2d_forward(const Tensor& in, const Tensor4& w, const std::vector<double>& bias,
                    int stride, int pad, Tensor& out) {
    for (int oc = 0; oc < out.c; ++oc)
        for (int oy = 0; oy < out.h; ++oy)
            for (int ox = 0; ox < out.w; ++ox)
                out.at(oc, oy, ox) = conv_cell(in, w, bias, stride, pad, oc, oy, ox);
}

void conv2d_backward_input(const Tensor& gout, const Tensor4& w, int stride, int pad, Tensor& gin) {
    for (int ic = 0; ic < gin.c; ++ic)
        for (int iy = 0; iy < gin.h; ++iy)
            for (int ix = 0; ix < gin.w; ++ix)
                gin.at(ic, iy, ix) = conv_input_grad_cell(gout, w, stride, pad, ic, iy, ix);
}

void conv2d_backward_weights(const Tensor& in, const Tensor& gout, int stride, int pad,
                             Tensor4& gw, std::vector<double>& gbias) {
    for (int oc = 0; oc < gout.c; ++oc)
        conv_weight_grad_channel(in, gout, stride, pad, gw.h, gw.w, oc, gw, gbias);
}

void resize_bilinear(const std::vector<double>& src, int sw, int sh, int channels,
                     std::vector<double>& dst, int dw, int dh) {
    dst.resize(static_cast<size_t>(dw) * dh * channels);
    if (sw == dw && sh == dh) {
        dst = src;
        return;
    }
    for (int y = 0; y < dh; ++y)
        for (int x = 0; x < dw; ++x) resize_cell(src, sw, sh, channels, dst, dw, dh, y, x);
}

void hamming_knn2(const std::vector<Descriptor>& queries, const std::vector<Descriptor>& refs,
                  std::vector<Nearest2>& out) {
    out.resize(queries.size());
    for (size_t i = 0; i < queries.size(); ++i) out[i] = knn2_cell(queries[i], refs);
}

void corner_response(const std::vector<double>& gray, int w, int h, double threshold,
                     std::vector<double>& response) {
    response.assign(static_cast<size_t>(w) * h, 0.0);
    if (w < 7 || h < 7) return;
    for (int y = 3; y < h - 3; ++y)
        for (int x = 3; x < w - 3; ++x)
            response[static_cast<size_t>(y) * w + x] = corner_cell(gray, w, y, x, threshold);
}

}  // namespace ref
}  // namespace advslam::kernels
