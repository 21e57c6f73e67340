#ifndef ADVSLAM_SURROGATE_HPP
#define ADVSLAM_SURROGATE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "advslam/core.hpp"
#include "advslam/kernels.hpp"

namespace advslam {

enum class LayerKind { Conv, ReLU, MaxPool, Flatten, Dense };

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    int out_channels = 0, kernel = 0, stride = 1, pad = 0;  // Conv
    int pool = 2, pool_stride = 2;                          // MaxPool
    int units = 0;                                          // Dense

    static LayerSpec conv(int out_channels, int kernel, int stride = 1, int pad = 0);
    static LayerSpec relu();
    static LayerSpec maxpool(int pool = 2, int stride = 2);
    static LayerSpec flatten();
    static LayerSpec dense(int units);
};

struct Architecture {
    int in_c = 3, in_h = 64, in_w = 64;
    int classes = 10;
    std::vector<LayerSpec> layers;

    /// Two 3x3 valid convolutions with ReLU + 2x2 max-pool each, one hidden
    /// dense layer, 10 logits, 64x64x3 input.
    static Architecture desk_default();
    /// Same layer sequence at a reduced size, used by the gradient checks.
    static Architecture tiny(int in_h = 16, int in_w = 16, int classes = 5);
};

/// The known classifier whose input gradients drive the attacks. Weights are
/// float32-representable doubles so the weight file round-trips losslessly;
/// all arithmetic is double precision. Immutable after construction; forward
/// and backward allocate per-call scratch only.
class SurrogateModel {
public:
    struct Gradients {
        Tensor input;
        std::vector<Tensor4> weights;        // one entry per layer (empty when unparameterized)
        std::vector<std::vector<double>> biases;
        double loss = 0.0;
    };

    SurrogateModel() = default;
    static SurrogateModel seeded(const Architecture& arch, uint64_t seed);

    const Architecture& architecture() const { return arch_; }
    int classes() const { return arch_.classes; }
    int input_channels() const { return arch_.in_c; }
    int input_height() const { return arch_.in_h; }
    int input_width() const { return arch_.in_w; }
    uint64_t init_seed() const { return init_seed_; }

    /// Logits for an input tensor of the model's expected shape.
    std::vector<double> forward(const Tensor& input) const;
    /// Softmax cross-entropy against the label.
    double loss(const Tensor& input, int label) const;
    /// dJ/dx for the cross-entropy loss at the label. Targeted attacks use the
    /// same gradient with a descent sign; see the attack engine.
    Tensor loss_gradient(const Tensor& input, int label) const;
    /// Full backward pass, including per-layer weight gradients (used by the
    /// gradient-check oracles).
    Gradients gradients(const Tensor& input, int label) const;
    /// argmax of logits, ties broken toward the lowest index.
    int classify(const Tensor& input) const;

    /// Smallest distance to a forward-pass nonlinearity: min over |pre-ReLU|
    /// activations and max-pool winner margins. Finite-difference gradient
    /// checks are only meaningful when this is comfortably larger than the
    /// probe step.
    double min_nonlinearity_margin(const Tensor& input) const;

    void save_weights(const std::filesystem::path& path) const;
    static SurrogateModel load_weights(const std::filesystem::path& path);

    // Mutable weight access for the finite-difference tests.
    size_t layer_count() const { return layers_.size(); }
    Tensor4& layer_weights(size_t i) { return layers_[i].w; }
    std::vector<double>& layer_biases(size_t i) { return layers_[i].b; }
    const Tensor4& layer_weights(size_t i) const { return layers_[i].w; }
    const std::vector<double>& layer_biases(size_t i) const { return layers_[i].b; }
    bool layer_has_params(size_t i) const;

private:
    struct Layer {
        LayerSpec spec;
        int in_c = 0, in_h = 0, in_w = 0;
        int out_c = 0, out_h = 0, out_w = 0;
        Tensor4 w;  // Conv: [oc][ic][k][k]; Dense: [units][inputs][1][1]
        std::vector<double> b;
    };

    void build(const Architecture& arch);
    std::vector<Tensor> forward_trace(const Tensor& input) const;

    Architecture arch_;
    std::vector<Layer> layers_;
    uint64_t init_seed_ = 0;
};

/// Numerically stable softmax.
std::vector<double> softmax(const std::vector<double>& logits);

/// Converts an interleaved [0,1] frame to a CHW tensor at the model input
/// shape: bilinear resize plus channel replication when the frame has fewer
/// channels than the model expects.
Tensor frame_to_model_input(const ImageFrame& frame, const SurrogateModel& model);

}  // namespace advslam

#endif
