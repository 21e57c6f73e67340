#include "advslam/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace advslam {

LayerSpec LayerSpec::conv(int out_channels, int kernel, int stride, int pad) {
    LayerSpec s;
    s.kind = LayerKind::Conv;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.pad = pad;
    return s;
}
LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    return s;
}
LayerSpec LayerSpec::maxpool(int pool, int stride) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool;
    s.pool = pool;
    s.pool_stride = stride;
    return s;
}
LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::Flatten;
    return s;
}
LayerSpec LayerSpec::dense(int units) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    return s;
}

Architecture Architecture::desk_default() {
    Architecture a;
    a.in_c = 3;
    a.in_h = 64;
    a.in_w = 64;
    a.classes = 10;
    a.layers = {LayerSpec::conv(8, 3),  LayerSpec::relu(), LayerSpec::maxpool(),
                LayerSpec::conv(16, 3), LayerSpec::relu(), LayerSpec::maxpool(),
                LayerSpec::flatten(),   LayerSpec::dense(64), LayerSpec::relu(),
                LayerSpec::dense(10)};
    return a;
}

Architecture Architecture::tiny(int in_h, int in_w, int classes) {
    Architecture a;
    a.in_c = 3;
    a.in_h = in_h;
    a.in_w = in_w;
    a.classes = classes;
    a.layers = {LayerSpec::conv(4, 3),  LayerSpec::relu(), LayerSpec::maxpool(),
                LayerSpec::conv(6, 3),  LayerSpec::relu(), LayerSpec::maxpool(),
                LayerSpec::flatten(),   LayerSpec::dense(16), LayerSpec::relu(),
                LayerSpec::dense(classes)};
    return a;
}

namespace {

// uniform in [0,1) from raw engine bits so the stream is identical on every
// platform (distributions in <random> are not portable)
inline double next_u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// He-style uniform init, truncated through float so saved float32 weights
// reload to bit-identical doubles
inline double init_value(std::mt19937_64& rng, int fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    const double v = (2.0 * next_u01(rng) - 1.0) * limit;
    return static_cast<double>(static_cast<float>(v));
}

}  // namespace

void SurrogateModel::build(const Architecture& arch) {
    arch_ = arch;
    layers_.clear();
    int c = arch.in_c, h = arch.in_h, w = arch.in_w;
    bool flattened = false;
    for (const auto& spec : arch.layers) {
        Layer layer;
        layer.spec = spec;
        layer.in_c = c;
        layer.in_h = h;
        layer.in_w = w;
        switch (spec.kind) {
            case LayerKind::Conv: {
                if (flattened) throw ConfigError("conv layer after flatten");
                const int oh = kernels::conv_out_extent(h, spec.kernel, spec.stride, spec.pad);
                const int ow = kernels::conv_out_extent(w, spec.kernel, spec.stride, spec.pad);
                if (oh <= 0 || ow <= 0) throw ConfigError("conv output would be empty");
                layer.w = Tensor4(spec.out_channels, c, spec.kernel, spec.kernel);
                layer.b.assign(spec.out_channels, 0.0);
                c = spec.out_channels;
                h = oh;
                w = ow;
                break;
            }
            case LayerKind::ReLU:
                break;
            case LayerKind::MaxPool: {
                if (flattened) throw ConfigError("maxpool after flatten");
                if (h < spec.pool || w < spec.pool) throw ConfigError("maxpool window too large");
                h = (h - spec.pool) / spec.pool_stride + 1;
                w = (w - spec.pool) / spec.pool_stride + 1;
                break;
            }
            case LayerKind::Flatten:
                c = c * h * w;
                h = 1;
                w = 1;
                flattened = true;
                break;
            case LayerKind::Dense: {
                if (h != 1 || w != 1) throw ConfigError("dense layer requires flattened input");
                layer.w = Tensor4(spec.units, c, 1, 1);
                layer.b.assign(spec.units, 0.0);
                c = spec.units;
                break;
            }
        }
        layer.out_c = c;
        layer.out_h = h;
        layer.out_w = w;
        layers_.push_back(std::move(layer));
    }
    if (h != 1 || w != 1 || c != arch.classes) {
        throw ConfigError("layer stack does not end in " + std::to_string(arch.classes) + " logits");
    }
}

SurrogateModel SurrogateModel::seeded(const Architecture& arch, uint64_t seed) {
    SurrogateModel m;
    m.build(arch);
    m.init_seed_ = seed;
    std::mt19937_64 rng(seed);
    for (auto& layer : m.layers_) {
        if (layer.w.size() == 0) continue;
        const int fan_in = layer.spec.kind == LayerKind::Conv
                               ? layer.in_c * layer.spec.kernel * layer.spec.kernel
                               : layer.in_c;
        for (auto& v : layer.w.data) v = init_value(rng, fan_in);
        // biases stay zero
    }
    return m;
}

bool SurrogateModel::layer_has_params(size_t i) const { return layers_[i].w.size() > 0; }

std::vector<Tensor> SurrogateModel::forward_trace(const Tensor& input) const {
    if (input.c != arch_.in_c || input.h != arch_.in_h || input.w != arch_.in_w) {
        throw DataError("surrogate input shape mismatch");
    }
    std::vector<Tensor> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(input);
    for (const auto& layer : layers_) {
        const Tensor& in = acts.back();
        Tensor out(layer.out_c, layer.out_h, layer.out_w);
        switch (layer.spec.kind) {
            case LayerKind::Conv:
                kernels::conv2d_forward(in, layer.w, layer.b, layer.spec.stride, layer.spec.pad, out);
                break;
            case LayerKind::ReLU:
                for (size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
                break;
            case LayerKind::MaxPool: {
                const int p = layer.spec.pool, st = layer.spec.pool_stride;
                for (int ci = 0; ci < layer.out_c; ++ci) {
                    for (int oy = 0; oy < layer.out_h; ++oy) {
                        for (int ox = 0; ox < layer.out_w; ++ox) {
                            double best = -std::numeric_limits<double>::infinity();
                            for (int ky = 0; ky < p; ++ky)
                                for (int kx = 0; kx < p; ++kx)
                                    best = std::max(best, in.at(ci, oy * st + ky, ox * st + kx));
                            out.at(ci, oy, ox) = best;
                        }
                    }
                }
                break;
            }
            case LayerKind::Flatten:
                out.data = in.data;
                break;
            case LayerKind::Dense: {
                for (int u = 0; u < layer.out_c; ++u) {
                    double acc = layer.b[u];
                    for (int i = 0; i < layer.in_c; ++i) acc += layer.w.at(u, i, 0, 0) * in.data[i];
                    out.data[u] = acc;
                }
                break;
            }
        }
        for (double v : out.data) {
            if (!std::isfinite(v)) throw DataError("non-finite activation (corrupt weights?)");
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

std::vector<double> SurrogateModel::forward(const Tensor& input) const {
    return forward_trace(input).back().data;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double SurrogateModel::loss(const Tensor& input, int label) const {
    if (label < 0 || label >= arch_.classes) throw ConfigError("label out of range");
    const auto logits = forward(input);
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    return m + std::log(sum) - logits[label];
}

SurrogateModel::Gradients SurrogateModel::gradients(const Tensor& input, int label) const {
    if (label < 0 || label >= arch_.classes) throw ConfigError("label out of range");
    const auto acts = forward_trace(input);

    Gradients g;
    g.weights.resize(layers_.size());
    g.biases.resize(layers_.size());

    const auto& logits = acts.back().data;
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    g.loss = m + std::log(sum) - logits[label];

    // dJ/dlogits = softmax - onehot, exact at the logit level
    Tensor delta(arch_.classes, 1, 1);
    for (int i = 0; i < arch_.classes; ++i) {
        delta.data[i] = std::exp(logits[i] - m) / sum - (i == label ? 1.0 : 0.0);
    }

    for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
        const Layer& layer = layers_[li];
        const Tensor& in = acts[li];
        Tensor next(layer.in_c, layer.in_h, layer.in_w);
        switch (layer.spec.kind) {
            case LayerKind::Conv: {
                g.weights[li] = Tensor4(layer.w.n, layer.w.c, layer.w.h, layer.w.w);
                g.biases[li].assign(layer.b.size(), 0.0);
                kernels::conv2d_backward_weights(in, delta, layer.spec.stride, layer.spec.pad,
                                                 g.weights[li], g.biases[li]);
                kernels::conv2d_backward_input(delta, layer.w, layer.spec.stride, layer.spec.pad,
                                               next);
                break;
            }
            case LayerKind::ReLU:
                for (size_t i = 0; i < in.size(); ++i) {
                    next.data[i] = in.data[i] > 0.0 ? delta.data[i] : 0.0;
                }
                break;
            case LayerKind::MaxPool: {
                const int p = layer.spec.pool, st = layer.spec.pool_stride;
                for (int ci = 0; ci < layer.out_c; ++ci) {
                    for (int oy = 0; oy < layer.out_h; ++oy) {
                        for (int ox = 0; ox < layer.out_w; ++ox) {
                            // route to the first maximum in row-major scan order
                            int by = 0, bx = 0;
                            double best = -std::numeric_limits<double>::infinity();
                            for (int ky = 0; ky < p; ++ky) {
                                for (int kx = 0; kx < p; ++kx) {
                                    const double v = in.at(ci, oy * st + ky, ox * st + kx);
                                    if (v > best) {
                                        best = v;
                                        by = ky;
                                        bx = kx;
                                    }
                                }
                            }
                            next.at(ci, oy * st + by, ox * st + bx) += delta.at(ci, oy, ox);
                        }
                    }
                }
                break;
            }
            case LayerKind::Flatten:
                next.data = delta.data;
                break;
            case LayerKind::Dense: {
                g.weights[li] = Tensor4(layer.w.n, layer.w.c, 1, 1);
                g.biases[li].assign(layer.b.size(), 0.0);
                for (int u = 0; u < layer.out_c; ++u) {
                    g.biases[li][u] = delta.data[u];
                    for (int i = 0; i < layer.in_c; ++i) {
                        g.weights[li].at(u, i, 0, 0) = delta.data[u] * in.data[i];
                        next.data[i] += layer.w.at(u, i, 0, 0) * delta.data[u];
                    }
                }
                break;
            }
        }
        delta = std::move(next);
    }
    for (double v : delta.data) {
        if (!std::isfinite(v)) throw DataError("non-finite gradient (corrupt weights?)");
    }
    g.input = std::move(delta);
    return g;
}

Tensor SurrogateModel::loss_gradient(const Tensor& input, int label) const {
    return gradients(input, label).input;
}

double SurrogateModel::min_nonlinearity_margin(const Tensor& input) const {
    const auto acts = forward_trace(input);
    double margin = std::numeric_limits<double>::infinity();
    for (size_t li = 0; li < layers_.size(); ++li) {
        const Layer& layer = layers_[li];
        const Tensor& in = acts[li];
        if (layer.spec.kind == LayerKind::ReLU) {
            for (double v : in.data) margin = std::min(margin, std::abs(v));
        } else if (layer.spec.kind == LayerKind::MaxPool) {
            const int p = layer.spec.pool, st = layer.spec.pool_stride;
            for (int ci = 0; ci < layer.out_c; ++ci) {
                for (int oy = 0; oy < layer.out_h; ++oy) {
                    for (int ox = 0; ox < layer.out_w; ++ox) {
                        double best = -std::numeric_limits<double>::infinity();
                        double second = best;
                        for (int ky = 0; ky < p; ++ky) {
                            for (int kx = 0; kx < p; ++kx) {
                                const double v = in.at(ci, oy * st + ky, ox * st + kx);
                                if (v > best) {
                                    second = best;
                                    best = v;
                                } else if (v > second) {
                                    second = v;
                                }
                            }
                        }
                        // a tie of ReLU-clipped exact zeros is locally flat,
                        // not a kink; the ReLU margin guards the clip boundary
                        if (best == 0.0 && second == 0.0) continue;
                        margin = std::min(margin, best - second);
                    }
                }
            }
        }
    }
    return margin;
}

int SurrogateModel::classify(const Tensor& input) const {
    const auto logits = forward(input);
    int best = 0;
    for (int i = 1; i < static_cast<int>(logits.size()); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Weight file: plain-text descriptor, then little-endian float32 payload.
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kMagic = "ADVSLAMNET";
constexpr int kVersion = 1;
}  // namespace

void SurrogateModel::save_weights(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot create weight file: " + path.string());

    size_t count = 0;
    for (const auto& l : layers_) count += l.w.size() + l.b.size();

    out << kMagic << " " << kVersion << "\n";
    out << "input " << arch_.in_c << " " << arch_.in_h << " " << arch_.in_w << "\n";
    out << "classes " << arch_.classes << "\n";
    for (const auto& l : layers_) {
        switch (l.spec.kind) {
            case LayerKind::Conv:
                out << "layer conv " << l.spec.out_channels << " " << l.spec.kernel << " "
                    << l.spec.stride << " " << l.spec.pad << "\n";
                break;
            case LayerKind::ReLU:
                out << "layer relu\n";
                break;
            case LayerKind::MaxPool:
                out << "layer maxpool " << l.spec.pool << " " << l.spec.pool_stride << "\n";
                break;
            case LayerKind::Flatten:
                out << "layer flatten\n";
                break;
            case LayerKind::Dense:
                out << "layer dense " << l.spec.units << "\n";
                break;
        }
    }
    out << "seed " << init_seed_ << "\n";
    out << "weights " << count << "\n";

    std::vector<float> payload;
    payload.reserve(count);
    for (const auto& l : layers_) {
        for (double v : l.w.data) payload.push_back(static_cast<float>(v));
        for (double v : l.b) payload.push_back(static_cast<float>(v));
    }
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw DataError("short write to weight file: " + path.string());
}

SurrogateModel SurrogateModel::load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open weight file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty weight file");
    {
        std::istringstream iss(line);
        std::string magic;
        int version = -1;
        iss >> magic >> version;
        if (magic != kMagic) throw DataError(path.string() + ": bad magic, not a weight file");
        if (version != kVersion) {
            throw DataError(path.string() + ": unsupported weight file version " +
                            std::to_string(version));
        }
    }

    Architecture arch;
    uint64_t seed = 0;
    size_t declared = 0;
    bool saw_weights = false;
    while (!saw_weights && std::getline(in, line)) {
        std::istringstream iss(line);
        std::string key;
        iss >> key;
        if (key == "input") {
            if (!(iss >> arch.in_c >> arch.in_h >> arch.in_w)) {
                throw DataError(path.string() + ": malformed input line");
            }
        } else if (key == "classes") {
            if (!(iss >> arch.classes)) throw DataError(path.string() + ": malformed classes line");
        } else if (key == "layer") {
            std::string kind;
            iss >> kind;
            if (kind == "conv") {
                int oc, k, s, p;
                if (!(iss >> oc >> k >> s >> p)) throw DataError(path.string() + ": malformed conv");
                arch.layers.push_back(LayerSpec::conv(oc, k, s, p));
            } else if (kind == "relu") {
                arch.layers.push_back(LayerSpec::relu());
            } else if (kind == "maxpool") {
                int pl, s;
                if (!(iss >> pl >> s)) throw DataError(path.string() + ": malformed maxpool");
                arch.layers.push_back(LayerSpec::maxpool(pl, s));
            } else if (kind == "flatten") {
                arch.layers.push_back(LayerSpec::flatten());
            } else if (kind == "dense") {
                int u;
                if (!(iss >> u)) throw DataError(path.string() + ": malformed dense");
                arch.layers.push_back(LayerSpec::dense(u));
            } else {
                throw DataError(path.string() + ": unknown layer kind '" + kind + "'");
            }
        } else if (key == "seed") {
            iss >> seed;
        } else if (key == "weights") {
            if (!(iss >> declared)) throw DataError(path.string() + ": malformed weights line");
            saw_weights = true;
        } else {
            throw DataError(path.string() + ": unexpected descriptor line '" + line + "'");
        }
    }
    if (!saw_weights) throw DataError(path.string() + ": missing weights section");

    SurrogateModel m;
    try {
        m.build(arch);
    } catch (const ConfigError& e) {
        throw DataError(path.string() + ": descriptor shapes do not chain: " + e.what());
    }
    m.init_seed_ = seed;

    size_t expected = 0;
    for (const auto& l : m.layers_) expected += l.w.size() + l.b.size();
    if (declared != expected) {
        throw DataError(path.string() + ": weight count " + std::to_string(declared) +
                        " does not match architecture (" + std::to_string(expected) + ")");
    }

    std::vector<float> payload(expected);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(expected * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != expected * sizeof(float)) {
        throw DataError(path.string() + ": truncated weight payload");
    }
    size_t idx = 0;
    for (auto& l : m.layers_) {
        for (auto& v : l.w.data) v = static_cast<double>(payload[idx++]);
        for (auto& v : l.b) v = static_cast<double>(payload[idx++]);
    }
    for (const auto& l : m.layers_) {
        for (double v : l.w.data) {
            if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite weight");
        }
    }
    return m;
}

Tensor frame_to_model_input(const ImageFrame& frame, const SurrogateModel& model) {
    const int mh = model.input_height(), mw = model.input_width(), mc = model.input_channels();
    std::vector<double> resized;
    kernels::resize_bilinear(frame.pixels, frame.width, frame.height, frame.channels, resized, mw,
                             mh);
    Tensor t(mc, mh, mw);
    for (int y = 0; y < mh; ++y) {
        for (int x = 0; x < mw; ++x) {
            const double* px = &resized[(static_cast<size_t>(y) * mw + x) * frame.channels];
            for (int c = 0; c < mc; ++c) {
                double v;
                if (frame.channels == mc) {
                    v = px[c];
                } else if (frame.channels == 1) {
                    v = px[0];  // replicate gray to every model channel
                } else if (mc == 1) {
                    v = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
                } else {
                    throw DataError("cannot bridge frame channels to model input channels");
                }
                t.at(c, y, x) = v;
            }
        }
    }
    return t;
}

}  // namespace advslam
