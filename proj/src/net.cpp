#include "imia/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "imia/dataset.hpp"
#include "imia/rng.hpp"

namespace imia {

namespace {

constexpr double kProbClamp = 1e-12;

std::vector<size_t> conv_output_shape(const LayerSpec& l, const std::vector<size_t>& in) {
    if (in.size() != 3) {
        throw std::invalid_argument("conv2d expects a (C,H,W) input, got " +
                                    shape_to_string(in));
    }
    if (in[0] != l.in_channels) {
        throw std::invalid_argument("conv2d expects " + std::to_string(l.in_channels) +
                                    " input channels, got " + std::to_string(in[0]));
    }
    if (in[1] < l.kernel || in[2] < l.kernel) {
        throw std::invalid_argument("conv2d kernel larger than input " +
                                    shape_to_string(in));
    }
    const size_t oh = (in[1] - l.kernel) / l.stride + 1;
    const size_t ow = (in[2] - l.kernel) / l.stride + 1;
    return {l.out_channels, oh, ow};
}

std::vector<size_t> layer_output_shape(const LayerSpec& l, const std::vector<size_t>& in) {
    switch (l.kind) {
    case LayerKind::Dense:
        if (in.size() != 1 || in[0] != l.in_width) {
            throw std::invalid_argument("dense layer expects input (" +
                                        std::to_string(l.in_width) + "), got " +
                                        shape_to_string(in));
        }
        return {l.out_width};
    case LayerKind::Conv2d:
        return conv_output_shape(l, in);
    case LayerKind::Relu:
        return in;
    case LayerKind::Flatten:
        return {shape_numel(in)};
    }
    throw std::invalid_argument("unknown layer kind");
}

} // namespace

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::Relu: return "relu";
    case LayerKind::Flatten: return "flatten";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "dense") return LayerKind::Dense;
    if (name == "conv2d") return LayerKind::Conv2d;
    if (name == "relu") return LayerKind::Relu;
    if (name == "flatten") return LayerKind::Flatten;
    throw std::invalid_argument("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::dense(size_t in, size_t out) {
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.in_width = in;
    l.out_width = out;
    return l;
}

LayerSpec LayerSpec::conv2d(size_t in_ch, size_t out_ch, size_t kernel, size_t stride) {
    LayerSpec l;
    l.kind = LayerKind::Conv2d;
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    l.kernel = kernel;
    l.stride = stride;
    return l;
}

LayerSpec LayerSpec::relu() {
    LayerSpec l;
    l.kind = LayerKind::Relu;
    return l;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec l;
    l.kind = LayerKind::Flatten;
    return l;
}

void NetworkSpec::validate() const {
    if (num_classes < 2) throw std::invalid_argument("network needs at least 2 classes");
    if (input_shape.empty() || shape_numel(input_shape) == 0) {
        throw std::invalid_argument("empty input shape");
    }
    if (layers.empty()) throw std::invalid_argument("network needs at least one layer");
    for (const LayerSpec& l : layers) {
        if (l.kind == LayerKind::Dense && (l.in_width == 0 || l.out_width == 0)) {
            throw std::invalid_argument("dense layer widths must be positive");
        }
        if (l.kind == LayerKind::Conv2d) {
            if (l.in_channels == 0 || l.out_channels == 0 || l.kernel == 0 || l.stride == 0) {
                throw std::invalid_argument("conv2d parameters must be positive");
            }
        }
    }
    const std::vector<size_t> out = shape_after(layers.size());
    if (out.size() != 1 || out[0] != num_classes) {
        throw std::invalid_argument("final layer produces " + shape_to_string(out) +
                                    ", expected (" + std::to_string(num_classes) + ")");
    }
}

std::vector<size_t> NetworkSpec::shape_after(size_t n_layers) const {
    std::vector<size_t> shape = input_shape;
    for (size_t i = 0; i < n_layers && i < layers.size(); ++i) {
        shape = layer_output_shape(layers[i], shape);
    }
    return shape;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    // learning_rate == 0 is a legal degenerate config (zero effective updates).
    if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning rate must be nonnegative");
    }
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

std::string TrainConfig::digest() const {
    std::ostringstream key;
    key << epochs << '|' << learning_rate << '|' << batch_size << '|' << seed;
    // FNV-1a over the canonical key string.
    uint64_t h = 1469598103934665603ULL;
    for (char c : key.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

Network::Network(NetworkSpec spec, uint64_t init_seed)
    : spec_(std::move(spec)), init_seed_(init_seed) {
    spec_.validate();
    RandomStream rng(init_seed);
    for (const LayerSpec& l : spec_.layers) {
        if (l.kind == LayerKind::Dense) {
            const double s = std::sqrt(6.0 / double(l.in_width + l.out_width));
            Tensor w({l.out_width, l.in_width});
            for (size_t i = 0; i < w.size(); ++i) {
                w[i] = static_cast<float>(rng.uniform(-s, s));
            }
            params_.push_back(std::move(w));
            params_.push_back(Tensor({l.out_width}));
        } else if (l.kind == LayerKind::Conv2d) {
            const size_t fan_in = l.in_channels * l.kernel * l.kernel;
            const size_t fan_out = l.out_channels * l.kernel * l.kernel;
            const double s = std::sqrt(6.0 / double(fan_in + fan_out));
            Tensor w({l.out_channels, l.in_channels, l.kernel, l.kernel});
            for (size_t i = 0; i < w.size(); ++i) {
                w[i] = static_cast<float>(rng.uniform(-s, s));
            }
            params_.push_back(std::move(w));
            params_.push_back(Tensor({l.out_channels}));
        }
    }
    build_offsets();
}

Network::Network(NetworkSpec spec, std::vector<Tensor> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
    spec_.validate();
    build_offsets();
    // Shape-check adopted parameters against the architecture.
    size_t p = 0;
    for (const LayerSpec& l : spec_.layers) {
        if (l.kind == LayerKind::Dense) {
            if (p + 2 > params_.size() ||
                params_[p].shape() != std::vector<size_t>{l.out_width, l.in_width} ||
                params_[p + 1].shape() != std::vector<size_t>{l.out_width}) {
                throw std::invalid_argument("dense parameter shape mismatch");
            }
            p += 2;
        } else if (l.kind == LayerKind::Conv2d) {
            if (p + 2 > params_.size() ||
                params_[p].shape() !=
                    std::vector<size_t>{l.out_channels, l.in_channels, l.kernel, l.kernel} ||
                params_[p + 1].shape() != std::vector<size_t>{l.out_channels}) {
                throw std::invalid_argument("conv2d parameter shape mismatch");
            }
            p += 2;
        }
    }
    if (p != params_.size()) {
        throw std::invalid_argument("unexpected extra network parameters");
    }
}

void Network::build_offsets() {
    param_offset_.clear();
    size_t p = 0;
    for (const LayerSpec& l : spec_.layers) {
        param_offset_.push_back(p);
        if (l.kind == LayerKind::Dense || l.kind == LayerKind::Conv2d) p += 2;
    }
}

Network::Trace Network::forward_trace(const Tensor& input) const {
    if (input.shape() != spec_.input_shape) {
        throw std::invalid_argument("input shape " + input.shape_str() +
                                    " does not match network input " +
                                    shape_to_string(spec_.input_shape));
    }
    input.require_finite("network input");

    Trace trace;
    trace.activations.reserve(spec_.layers.size() + 1);
    trace.activations.push_back(input);

    for (size_t li = 0; li < spec_.layers.size(); ++li) {
        const LayerSpec& l = spec_.layers[li];
        const Tensor& x = trace.activations.back();
        switch (l.kind) {
        case LayerKind::Dense: {
            const Tensor& w = params_[param_offset_[li]];
            const Tensor& b = params_[param_offset_[li] + 1];
            Tensor y({l.out_width});
            for (size_t o = 0; o < l.out_width; ++o) {
                double acc = b[o];
                const float* wrow = w.data() + o * l.in_width;
                for (size_t i = 0; i < l.in_width; ++i) {
                    acc += static_cast<double>(wrow[i]) * static_cast<double>(x[i]);
                }
                y[o] = static_cast<float>(acc);
            }
            trace.activations.push_back(std::move(y));
            break;
        }
        case LayerKind::Conv2d: {
            const Tensor& w = params_[param_offset_[li]];
            const Tensor& b = params_[param_offset_[li] + 1];
            const auto& in_shape = x.shape();
            const size_t ih = in_shape[1], iw = in_shape[2];
            const size_t oh = (ih - l.kernel) / l.stride + 1;
            const size_t ow = (iw - l.kernel) / l.stride + 1;
            Tensor y({l.out_channels, oh, ow});
            for (size_t oc = 0; oc < l.out_channels; ++oc) {
                for (size_t r = 0; r < oh; ++r) {
                    for (size_t c = 0; c < ow; ++c) {
                        double acc = b[oc];
                        for (size_t ic = 0; ic < l.in_channels; ++ic) {
                            for (size_t kr = 0; kr < l.kernel; ++kr) {
                                const size_t x_base =
                                    (ic * ih + r * l.stride + kr) * iw + c * l.stride;
                                const size_t w_base =
                                    ((oc * l.in_channels + ic) * l.kernel + kr) * l.kernel;
                                for (size_t kc = 0; kc < l.kernel; ++kc) {
                                    acc += static_cast<double>(w[w_base + kc]) *
                                           static_cast<double>(x[x_base + kc]);
                                }
                            }
                        }
                        y[(oc * oh + r) * ow + c] = static_cast<float>(acc);
                    }
                }
            }
            trace.activations.push_back(std::move(y));
            break;
        }
        case LayerKind::Relu: {
            Tensor y = x;
            for (size_t i = 0; i < y.size(); ++i) {
                if (y[i] < 0.0f) y[i] = 0.0f;
            }
            trace.activations.push_back(std::move(y));
            break;
        }
        case LayerKind::Flatten: {
            trace.activations.emplace_back(std::vector<size_t>{x.size()},
                                           std::vector<float>(x.values()));
            break;
        }
        }
    }
    return trace;
}

Tensor Network::forward(const Tensor& input) const {
    return forward_trace(input).activations.back();
}

int Network::predict_label(const Tensor& input) const {
    return argmax_lowest(forward(input));
}

Network::Gradients Network::backward(const Trace& trace, int label, bool want_params,
                                     bool want_input) const {
    const Tensor& logits = trace.activations.back();
    if (label < 0 || static_cast<size_t>(label) >= logits.size()) {
        throw std::invalid_argument("label " + std::to_string(label) + " out of range");
    }

    Gradients grads;
    if (want_params) {
        grads.params.reserve(params_.size());
        for (const Tensor& p : params_) grads.params.emplace_back(p.shape());
    }

    // dL/dlogits for cross-entropy: softmax - onehot. Double accumulation,
    // float32 storage between layers.
    std::vector<double> pd(logits.size());
    {
        double mx = logits[0];
        for (size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, double(logits[i]));
        double sum = 0.0;
        for (size_t i = 0; i < logits.size(); ++i) {
            pd[i] = std::exp(double(logits[i]) - mx);
            sum += pd[i];
        }
        for (double& v : pd) v /= sum;
    }
    Tensor delta({logits.size()});
    for (size_t i = 0; i < logits.size(); ++i) {
        delta[i] = static_cast<float>(pd[i] - (static_cast<size_t>(label) == i ? 1.0 : 0.0));
    }

    for (size_t li = spec_.layers.size(); li-- > 0;) {
        const LayerSpec& l = spec_.layers[li];
        const Tensor& x = trace.activations[li];
        const bool need_dx = want_input || li > 0;
        switch (l.kind) {
        case LayerKind::Dense: {
            const Tensor& w = params_[param_offset_[li]];
            if (want_params) {
                Tensor& gw = grads.params[param_offset_[li]];
                Tensor& gb = grads.params[param_offset_[li] + 1];
                for (size_t o = 0; o < l.out_width; ++o) {
                    gb[o] += delta[o];
                    float* gw_row = gw.data() + o * l.in_width;
                    for (size_t i = 0; i < l.in_width; ++i) {
                        gw_row[i] += delta[o] * x[i];
                    }
                }
            }
            if (need_dx) {
                Tensor dx({l.in_width});
                for (size_t i = 0; i < l.in_width; ++i) {
                    double acc = 0.0;
                    for (size_t o = 0; o < l.out_width; ++o) {
                        acc += static_cast<double>(w[o * l.in_width + i]) *
                               static_cast<double>(delta[o]);
                    }
                    dx[i] = static_cast<float>(acc);
                }
                delta = std::move(dx);
            }
            break;
        }
        case LayerKind::Conv2d: {
            const Tensor& w = params_[param_offset_[li]];
            const auto& in_shape = x.shape();
            const size_t ih = in_shape[1], iw = in_shape[2];
            const size_t oh = (ih - l.kernel) / l.stride + 1;
            const size_t ow = (iw - l.kernel) / l.stride + 1;
            Tensor dx(in_shape);
            std::vector<double> dx_acc(need_dx ? dx.size() : 0, 0.0);
            for (size_t oc = 0; oc < l.out_channels; ++oc) {
                for (size_t r = 0; r < oh; ++r) {
                    for (size_t c = 0; c < ow; ++c) {
                        const float d = delta[(oc * oh + r) * ow + c];
                        if (want_params) {
                            grads.params[param_offset_[li] + 1][oc] += d;
                        }
                        for (size_t ic = 0; ic < l.in_channels; ++ic) {
                            for (size_t kr = 0; kr < l.kernel; ++kr) {
                                const size_t x_base =
                                    (ic * ih + r * l.stride + kr) * iw + c * l.stride;
                                const size_t w_base =
                                    ((oc * l.in_channels + ic) * l.kernel + kr) * l.kernel;
                                for (size_t kc = 0; kc < l.kernel; ++kc) {
                                    if (want_params) {
                                        grads.params[param_offset_[li]][w_base + kc] +=
                                            d * x[x_base + kc];
                                    }
                                    if (need_dx) {
                                        dx_acc[x_base + kc] +=
                                            static_cast<double>(d) *
                                            static_cast<double>(w[w_base + kc]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if (need_dx) {
                for (size_t i = 0; i < dx.size(); ++i) {
                    dx[i] = static_cast<float>(dx_acc[i]);
                }
                delta = std::move(dx);
            }
            break;
        }
        case LayerKind::Relu: {
            if (need_dx) {
                for (size_t i = 0; i < delta.size(); ++i) {
                    if (x[i] <= 0.0f) delta[i] = 0.0f;
                }
            }
            break;
        }
        case LayerKind::Flatten: {
            if (need_dx) {
                delta = Tensor(x.shape(), std::vector<float>(delta.values()));
            }
            break;
        }
        }
    }
    if (want_input) grads.input = std::move(delta);
    return grads;
}

Tensor Network::input_gradient(const Tensor& input, int label) const {
    Trace trace = forward_trace(input);
    return backward(trace, label, /*want_params=*/false, /*want_input=*/true).input;
}

Tensor softmax(const Tensor& logits) {
    if (logits.size() < 2) throw std::invalid_argument("softmax needs at least 2 logits");
    logits.require_finite("softmax input");
    double mx = logits[0];
    for (size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, double(logits[i]));
    std::vector<double> e(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        e[i] = std::exp(double(logits[i]) - mx);
        sum += e[i];
    }
    Tensor probs({logits.size()});
    for (size_t i = 0; i < logits.size(); ++i) {
        const double p = std::clamp(e[i] / sum, kProbClamp, 1.0 - kProbClamp);
        probs[i] = static_cast<float>(p);
    }
    return probs;
}

double cross_entropy(const Tensor& logits, int label) {
    if (label < 0 || static_cast<size_t>(label) >= logits.size()) {
        throw std::invalid_argument("cross_entropy label out of range");
    }
    logits.require_finite("cross_entropy logits");
    double mx = logits[0];
    for (size_t i = 1; i < logits.size(); ++i) mx = std::max(mx, double(logits[i]));
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        sum += std::exp(double(logits[i]) - mx);
    }
    const double p = std::clamp(std::exp(double(logits[label]) - mx) / sum, kProbClamp,
                                1.0 - kProbClamp);
    return -std::log(p);
}

int argmax_lowest(const Tensor& t) {
    size_t best = 0;
    for (size_t i = 1; i < t.size(); ++i) {
        if (t[i] > t[best]) best = i;
    }
    return static_cast<int>(best);
}

TrainLog train_sgd(Network& net, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("cannot train on an empty dataset");
    data.validate();
    if (data.num_classes != net.spec().num_classes) {
        throw std::invalid_argument("dataset class count does not match network");
    }

    RandomStream rng(cfg.seed);
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), size_t{0});

    const size_t n_params = net.parameters().size();
    std::vector<std::vector<double>> acc(n_params);
    for (size_t p = 0; p < n_params; ++p) acc[p].resize(net.parameters()[p].size());

    TrainLog log;
    log.epoch_loss.reserve(cfg.epochs);

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            for (auto& a : acc) std::fill(a.begin(), a.end(), 0.0);
            for (size_t i = start; i < end; ++i) {
                const size_t idx = order[i];
                Network::Trace trace = net.forward_trace(data.inputs[idx]);
                epoch_loss += cross_entropy(trace.activations.back(), data.labels[idx]);
                Network::Gradients g =
                    net.backward(trace, data.labels[idx], /*want_params=*/true,
                                 /*want_input=*/false);
                for (size_t p = 0; p < n_params; ++p) {
                    const Tensor& gp = g.params[p];
                    for (size_t j = 0; j < gp.size(); ++j) acc[p][j] += gp[j];
                }
            }
            const double scale = cfg.learning_rate / double(end - start);
            for (size_t p = 0; p < n_params; ++p) {
                Tensor& param = net.parameters()[p];
                for (size_t j = 0; j < param.size(); ++j) {
                    param[j] = static_cast<float>(param[j] - scale * acc[p][j]);
                }
            }
        }
        log.epoch_loss.push_back(epoch_loss / double(data.size()));
    }
    return log;
}

double accuracy(const Network& net, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("accuracy of empty dataset");
    size_t hits = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        if (net.predict_label(data.inputs[i]) == data.labels[i]) ++hits;
    }
    return double(hits) / double(data.size());
}

} // namespace imia
