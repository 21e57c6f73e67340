// Benchmark comparing the OpenMP kernels against their serial references and
// verifying bitwise agreement on the benchmark inputs.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include <omp.h>

#include "advslam/kernels.hpp"

using namespace advslam;

namespace {

std::mt19937_64 g_rng(4242);

double u01() { return static_cast<double>(g_rng() >> 11) * 0x1.0p-53; }

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void report(const std::string& name, double serial_s, double parallel_s, bool equal) {
    std::printf("%-24s serial %9.4f ms   omp %9.4f ms   speedup %5.2fx   %s\n", name.c_str(),
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                equal ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("OpenMP max threads: %d\n\n", omp_get_max_threads());
    const int reps = 5;

    {
        Tensor in(3, 256, 256);
        for (auto& v : in.data) v = u01();
        Tensor4 w(16, 3, 3, 3);
        for (auto& v : w.data) v = u01() - 0.5;
        std::vector<double> bias(16, 0.1);
        Tensor out_ref(16, 254, 254), out_omp(16, 254, 254);
        const double ts = time_best_of(reps, [&] {
            kernels::ref::conv2d_forward(in, w, bias, 1, 0, out_ref);
        });
        const double tp = time_best_of(reps, [&] {
            kernels::conv2d_forward(in, w, bias, 1, 0, out_omp);
        });
        report("conv2d_forward", ts, tp, out_ref.data == out_omp.data);

        Tensor gin_ref(3, 256, 256), gin_omp(3, 256, 256);
        const double ts2 = time_best_of(reps, [&] {
            kernels::ref::conv2d_backward_input(out_ref, w, 1, 0, gin_ref);
        });
        const double tp2 = time_best_of(reps, [&] {
            kernels::conv2d_backward_input(out_ref, w, 1, 0, gin_omp);
        });
        report("conv2d_backward_input", ts2, tp2, gin_ref.data == gin_omp.data);

        Tensor4 gw_ref(16, 3, 3, 3), gw_omp(16, 3, 3, 3);
        std::vector<double> gb_ref(16), gb_omp(16);
        const double ts3 = time_best_of(reps, [&] {
            kernels::ref::conv2d_backward_weights(in, out_ref, 1, 0, gw_ref, gb_ref);
        });
        const double tp3 = time_best_of(reps, [&] {
            kernels::conv2d_backward_weights(in, out_ref, 1, 0, gw_omp, gb_omp);
        });
        report("conv2d_backward_weights", ts3, tp3,
               gw_ref.data == gw_omp.data && gb_ref == gb_omp);
    }

    {
        std::vector<double> src(640 * 480 * 3);
        for (auto& v : src) v = u01();
        std::vector<double> dst_ref, dst_omp;
        const double ts = time_best_of(reps, [&] {
            kernels::ref::resize_bilinear(src, 640, 480, 3, dst_ref, 64, 64);
        });
        const double tp = time_best_of(reps, [&] {
            kernels::resize_bilinear(src, 640, 480, 3, dst_omp, 64, 64);
        });
        report("resize_bilinear", ts, tp, dst_ref == dst_omp);
    }

    {
        std::vector<Descriptor> a(800), b(800);
        for (auto& d : a)
            for (auto& word : d) word = g_rng();
        for (auto& d : b)
            for (auto& word : d) word = g_rng();
        std::vector<kernels::Nearest2> out_ref, out_omp;
        const double ts = time_best_of(reps, [&] { kernels::ref::hamming_knn2(a, b, out_ref); });
        const double tp = time_best_of(reps, [&] { kernels::hamming_knn2(a, b, out_omp); });
        bool equal = out_ref.size() == out_omp.size();
        for (size_t i = 0; equal && i < out_ref.size(); ++i) {
            equal = out_ref[i].best == out_omp[i].best &&
                    out_ref[i].best_dist == out_omp[i].best_dist &&
                    out_ref[i].second_dist == out_omp[i].second_dist;
        }
        report("hamming_knn2", ts, tp, equal);
    }

    {
        std::vector<double> gray(640 * 480);
        for (auto& v : gray) v = u01();
        std::vector<double> resp_ref, resp_omp;
        const double ts = time_best_of(reps, [&] {
            kernels::ref::corner_response(gray, 640, 480, 0.06, resp_ref);
        });
        const double tp = time_best_of(reps, [&] {
            kernels::corner_response(gray, 640, 480, 0.06, resp_omp);
        });
        report("corner_response", ts, tp, resp_ref == resp_omp);
    }

    return 0;
}
