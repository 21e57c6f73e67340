#ifndef ADVSLAM_ATTACK_HPP
#define ADVSLAM_ATTACK_HPP

#include <vector>

#include "advslam/core.hpp"
#include "advslam/dataset.hpp"
#include "advslam/surrogate.hpp"

namespace advslam {

enum class AttackMethod { FGSM, PGD };
enum class AttackMode { Untargeted, Targeted };
enum class TargetLabelPolicy { RandomPerFrame, Fixed };

struct AttackConfig {
    AttackMethod method = AttackMethod::FGSM;
    AttackMode mode = AttackMode::Untargeted;
    double epsilon = 0.10;      // L-inf bound in normalized pixel units
    double alpha = 0.0;         // PGD step; 0 selects the epsilon/4 default
    int iterations = 10;        // PGD
    TargetLabelPolicy policy = TargetLabelPolicy::RandomPerFrame;
    int fixed_label = 0;
    uint64_t seed = 0;          // target-label stream
    double depth_min = 0.0;     // depth attack normalization range, meters
    double depth_max = 10.0;

    double pgd_alpha() const { return alpha > 0.0 ? alpha : epsilon / 4.0; }
    void validate() const;
};

/// Candidate perturbation at frame resolution, every entry clamped to
/// [-epsilon, epsilon].
struct Perturbation {
    int width = 0, height = 0, channels = 0;
    double epsilon = 0.0;
    std::vector<double> delta;

    double at(int x, int y, int c) const {
        return delta[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

/// Result of applying a perturbation. The stored delta is the realized
/// per-pixel change (result - original), so result = original + delta holds
/// exactly and |delta| <= epsilon exactly.
struct AdversarialFrame {
    ImageFrame frame;
    Perturbation perturbation;
};

/// Signed-gradient perturbation at the surrogate input resolution. FGSM is a
/// single step of size epsilon; PGD iterates steps of size alpha from delta=0,
/// re-evaluating the gradient at the current perturbed point and clipping
/// delta to [-epsilon, epsilon] and the input to [0,1] every iteration.
/// Untargeted mode ascends the loss at the label; targeted mode descends.
Tensor attack_delta(const SurrogateModel& model, const Tensor& input, int label,
                    const AttackConfig& cfg);

/// attack_delta bridged to frame resolution: the surrogate-scale delta is
/// bilinearly upsampled and re-clamped; a single-channel frame receives the
/// channel mean.
Perturbation compute_perturbation(const SurrogateModel& model, const ImageFrame& frame, int label,
                                  const AttackConfig& cfg);

/// Zeroes the perturbation outside the union of the boxes (boxes are clamped
/// to the frame first). An empty box list zeroes everything.
Perturbation mask_perturbation(Perturbation p, const std::vector<Box>& boxes);

/// clamp(original + delta, 0, 1) with the realized delta stored back.
AdversarialFrame apply_perturbation(const ImageFrame& original, const Perturbation& p);

// Targeted FGSM is supported for completeness, but a single signed step is
// usually too weak to reach a chosen label; targeted runs normally use PGD.
AdversarialFrame fgsm(const SurrogateModel& model, const ImageFrame& frame, int label,
                      const AttackConfig& cfg);
AdversarialFrame pgd(const SurrogateModel& model, const ImageFrame& frame, int label,
                     const AttackConfig& cfg);
/// Dispatch on cfg.method.
AdversarialFrame attack_frame(const SurrogateModel& model, const ImageFrame& frame, int label,
                              const AttackConfig& cfg);

/// Uniform draw from [0, classes) minus the true label (or the fixed label).
/// Deterministic in (cfg.seed, frame_index).
int pick_target_label(const AttackConfig& cfg, uint64_t frame_index, int true_label, int classes);

/// Depth variant: depth is affinely normalized to [0,1] over
/// [depth_min, depth_max], attacked like a grayscale frame, and mapped back to
/// meters. Invalid (zero) pixels stay invalid and the per-pixel change is
/// bounded by epsilon * (depth_max - depth_min) exactly.
DepthFrame attack_depth(const SurrogateModel& model, const DepthFrame& depth, int label,
                        const AttackConfig& cfg, const std::vector<Box>* boxes = nullptr);

/// The label the attack engine treats as ground truth: the surrogate's own
/// prediction on the clean frame.
int surrogate_true_label(const SurrogateModel& model, const ImageFrame& frame);
int surrogate_true_label_depth(const SurrogateModel& model, const DepthFrame& depth,
                               const AttackConfig& cfg);

/// Normalized [0,1] grayscale view of a depth frame over the config range.
ImageFrame depth_as_image(const DepthFrame& depth, const AttackConfig& cfg);

}  // namespace advslam

#endif
