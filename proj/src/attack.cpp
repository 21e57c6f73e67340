#include "advslam/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace advslam {

void AttackConfig::validate() const {
    if (epsilon < 0.0) throw ConfigError("attack epsilon must be >= 0");
    if (method == AttackMethod::PGD) {
        if (iterations < 1) throw ConfigError("PGD needs at least one iteration");
        if (pgd_alpha() <= 0.0 && epsilon > 0.0) throw ConfigError("PGD step size must be > 0");
    }
    if (depth_max <= depth_min) throw ConfigError("depth normalization range is degenerate");
}

Tensor attack_delta(const SurrogateModel& model, const Tensor& input, int label,
                    const AttackConfig& cfg) {
    cfg.validate();
    const double eps = cfg.epsilon;
    const double dir = cfg.mode == AttackMode::Untargeted ? 1.0 : -1.0;

    Tensor delta(input.c, input.h, input.w);
    if (eps == 0.0) return delta;

    if (cfg.method == AttackMethod::FGSM) {
        const Tensor g = model.loss_gradient(input, label);
        for (size_t i = 0; i < delta.size(); ++i) delta.data[i] = dir * eps * sign0(g.data[i]);
        return delta;
    }

    const double alpha = cfg.pgd_alpha();
    Tensor perturbed = input;
    for (int it = 0; it < cfg.iterations; ++it) {
        const Tensor g = model.loss_gradient(perturbed, label);
        for (size_t i = 0; i < delta.size(); ++i) {
            double d = delta.data[i] + dir * alpha * sign0(g.data[i]);
            delta.data[i] = std::clamp(d, -eps, eps);
            perturbed.data[i] = std::clamp(input.data[i] + delta.data[i], 0.0, 1.0);
        }
    }
    return delta;
}

Perturbation compute_perturbation(const SurrogateModel& model, const ImageFrame& frame, int label,
                                  const AttackConfig& cfg) {
    const Tensor input = frame_to_model_input(frame, model);
    const Tensor delta_s = attack_delta(model, input, label, cfg);

    // CHW -> interleaved at surrogate scale, then bilinear upsample to the frame
    const int mc = delta_s.c, mh = delta_s.h, mw = delta_s.w;
    std::vector<double> inter(static_cast<size_t>(mw) * mh * mc);
    for (int y = 0; y < mh; ++y)
        for (int x = 0; x < mw; ++x)
            for (int c = 0; c < mc; ++c)
                inter[(static_cast<size_t>(y) * mw + x) * mc + c] = delta_s.at(c, y, x);

    std::vector<double> up;
    kernels::resize_bilinear(inter, mw, mh, mc, up, frame.width, frame.height);

    Perturbation p;
    p.width = frame.width;
    p.height = frame.height;
    p.channels = frame.channels;
    p.epsilon = cfg.epsilon;
    p.delta.resize(static_cast<size_t>(frame.width) * frame.height * frame.channels);
    const size_t n = frame.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const double* src = &up[i * mc];
        double* dst = &p.delta[i * frame.channels];
        if (frame.channels == mc) {
            for (int c = 0; c < mc; ++c) dst[c] = src[c];
        } else if (frame.channels == 1) {
            double mean = 0.0;
            for (int c = 0; c < mc; ++c) mean += src[c];
            dst[0] = mean / mc;
        } else {
            for (int c = 0; c < frame.channels; ++c) dst[c] = src[0];
        }
    }
    // interpolation is a convex combination, but re-clamp so the bound is exact
    for (auto& d : p.delta) d = std::clamp(d, -cfg.epsilon, cfg.epsilon);
    return p;
}

Perturbation mask_perturbation(Perturbation p, const std::vector<Box>& boxes) {
    std::vector<char> inside(static_cast<size_t>(p.width) * p.height, 0);
    for (const Box& raw : boxes) {
        const Box b = clamp_box(raw, p.width, p.height);
        for (int y = b.y; y < b.y + b.h; ++y) {
            std::fill_n(inside.begin() + static_cast<size_t>(y) * p.width + b.x, b.w, char(1));
        }
    }
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            if (inside[static_cast<size_t>(y) * p.width + x]) continue;
            double* d = &p.delta[(static_cast<size_t>(y) * p.width + x) * p.channels];
            for (int c = 0; c < p.channels; ++c) d[c] = 0.0;
        }
    }
    return p;
}

AdversarialFrame apply_perturbation(const ImageFrame& original, const Perturbation& p) {
    if (original.width != p.width || original.height != p.height ||
        original.channels != p.channels) {
        throw DataError("perturbation shape does not match frame");
    }
    AdversarialFrame out;
    out.frame = original;
    out.perturbation = p;
    for (size_t i = 0; i < original.pixels.size(); ++i) {
        const double x = original.pixels[i];
        const double y = apply_bounded_delta(x, p.delta[i], p.epsilon, 0.0, 1.0);
        out.frame.pixels[i] = y;
        out.perturbation.delta[i] = y - x;  // realized delta
    }
    return out;
}

AdversarialFrame fgsm(const SurrogateModel& model, const ImageFrame& frame, int label,
                      const AttackConfig& cfg) {
    AttackConfig c = cfg;
    c.method = AttackMethod::FGSM;
    return apply_perturbation(frame, compute_perturbation(model, frame, label, c));
}

AdversarialFrame pgd(const SurrogateModel& model, const ImageFrame& frame, int label,
                     const AttackConfig& cfg) {
    AttackConfig c = cfg;
    c.method = AttackMethod::PGD;
    return apply_perturbation(frame, compute_perturbation(model, frame, label, c));
}

AdversarialFrame attack_frame(const SurrogateModel& model, const ImageFrame& frame, int label,
                              const AttackConfig& cfg) {
    return apply_perturbation(frame, compute_perturbation(model, frame, label, cfg));
}

int pick_target_label(const AttackConfig& cfg, uint64_t frame_index, int true_label, int classes) {
    if (cfg.policy == TargetLabelPolicy::Fixed) {
        if (cfg.fixed_label < 0 || cfg.fixed_label >= classes) {
            throw ConfigError("fixed target label out of range");
        }
        return cfg.fixed_label;
    }
    if (classes < 2) throw ConfigError("random target label needs at least 2 classes");
    std::mt19937_64 rng(mix_seed(cfg.seed, frame_index));
    const int r = static_cast<int>(rng() % static_cast<uint64_t>(classes - 1));
    return r < true_label ? r : r + 1;
}

ImageFrame depth_as_image(const DepthFrame& depth, const AttackConfig& cfg) {
    const double range = cfg.depth_max - cfg.depth_min;
    if (range <= 0.0) throw ConfigError("depth normalization range is degenerate");
    ImageFrame img;
    img.timestamp = depth.timestamp;
    img.width = depth.width;
    img.height = depth.height;
    img.channels = 1;
    img.pixels.resize(depth.depth.size());
    for (size_t i = 0; i < depth.depth.size(); ++i) {
        const double d = depth.depth[i];
        img.pixels[i] = d <= 0.0 ? 0.0 : std::clamp((d - cfg.depth_min) / range, 0.0, 1.0);
    }
    return img;
}

int surrogate_true_label(const SurrogateModel& model, const ImageFrame& frame) {
    return model.classify(frame_to_model_input(frame, model));
}

int surrogate_true_label_depth(const SurrogateModel& model, const DepthFrame& depth,
                               const AttackConfig& cfg) {
    return surrogate_true_label(model, depth_as_image(depth, cfg));
}

DepthFrame attack_depth(const SurrogateModel& model, const DepthFrame& depth, int label,
                        const AttackConfig& cfg, const std::vector<Box>* boxes) {
    cfg.validate();
    const double range = cfg.depth_max - cfg.depth_min;
    const ImageFrame normalized = depth_as_image(depth, cfg);

    Perturbation p = compute_perturbation(model, normalized, label, cfg);
    if (boxes) p = mask_perturbation(std::move(p), *boxes);

    const double eps_m = cfg.epsilon * range;
    DepthFrame out = depth;
    // Valid pixels are kept strictly positive so the invalid mask is exactly
    // preserved under the attack.
    constexpr double kValidFloor = 1e-6;
    for (size_t i = 0; i < depth.depth.size(); ++i) {
        const double d = depth.depth[i];
        if (d <= 0.0) {
            out.depth[i] = 0.0;
            continue;
        }
        const double delta_m = p.delta[i] * range;
        const double lo = std::max(0.0, std::min(d, cfg.depth_min));
        const double hi = std::max(d, cfg.depth_max);
        double v = apply_bounded_delta(d, delta_m, eps_m, lo, hi);
        // flooring toward d never widens |v - d|
        v = std::max(v, std::min(d, kValidFloor));
        out.depth[i] = v;
    }
    return out;
}

}  // namespace advslam
