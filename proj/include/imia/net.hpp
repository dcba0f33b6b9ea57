#ifndef IMIA_NET_HPP
#define IMIA_NET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "imia/tensor.hpp"

namespace imia {

struct Dataset;

enum class LayerKind { Dense, Conv2d, Relu, Flatten };

const char* layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    // dense
    size_t in_width = 0;
    size_t out_width = 0;
    // conv2d (square kernel, valid padding)
    size_t in_channels = 0;
    size_t out_channels = 0;
    size_t kernel = 0;
    size_t stride = 1;

    static LayerSpec dense(size_t in, size_t out);
    static LayerSpec conv2d(size_t in_ch, size_t out_ch, size_t kernel, size_t stride = 1);
    static LayerSpec relu();
    static LayerSpec flatten();
};

/// Architecture description: input shape, ordered layers, class count.
struct NetworkSpec {
    std::vector<size_t> input_shape;
    size_t num_classes = 0;
    std::vector<LayerSpec> layers;

    // Checks that adjacent layer shapes compose and the final output is a
    // length-num_classes vector. Throws std::invalid_argument otherwise.
    void validate() const;

    // Output shape after applying layers [0, n_layers) to input_shape.
    std::vector<size_t> shape_after(size_t n_layers) const;
};

struct TrainConfig {
    size_t epochs = 1;
    double learning_rate = 0.01;
    size_t batch_size = 32;
    uint64_t seed = 0;

    void validate() const;
    // Stable digest of the config, stored in checkpoints.
    std::string digest() const;
};

struct TrainLog {
    std::vector<double> epoch_loss; // mean cross-entropy per epoch
};

/// Feedforward network with float32 parameters. Immutable after training;
/// forward/gradient evaluation is read-only and safe to call concurrently.
class Network {
public:
    // Glorot-uniform initialization, seeded.
    Network(NetworkSpec spec, uint64_t init_seed);

    // Adopts externally produced parameters (checkpoint loading).
    Network(NetworkSpec spec, std::vector<Tensor> params);

    const NetworkSpec& spec() const { return spec_; }
    uint64_t init_seed() const { return init_seed_; }

    // Parameters in layer order: dense -> W{out,in}, b{out};
    // conv2d -> W{oc,ic,k,k}, b{oc}. Relu/flatten contribute none.
    const std::vector<Tensor>& parameters() const { return params_; }
    std::vector<Tensor>& parameters() { return params_; }

    /// Length-K logit vector; throws std::invalid_argument on shape mismatch
    /// or non-finite input.
    Tensor forward(const Tensor& input) const;

    /// Argmax of the logits; ties broken toward the lowest class index.
    int predict_label(const Tensor& input) const;

    /// Gradient of the cross-entropy loss with respect to the input.
    Tensor input_gradient(const Tensor& input, int label) const;

    // --- low-level hooks used by train_sgd ---
    struct Trace {
        std::vector<Tensor> activations; // activations[0] = input, back() = logits
    };
    Trace forward_trace(const Tensor& input) const;
    struct Gradients {
        std::vector<Tensor> params; // same layout as parameters()
        Tensor input;
    };
    Gradients backward(const Trace& trace, int label, bool want_params,
                       bool want_input) const;

private:
    NetworkSpec spec_;
    std::vector<Tensor> params_;
    std::vector<size_t> param_offset_; // first parameter index of each layer
    uint64_t init_seed_ = 0;

    void build_offsets();
};

/// Numerically stabilized softmax (max-subtraction, double accumulation).
/// Output probabilities are clamped into [1e-12, 1-1e-12] so downstream
/// logs stay finite; the sum remains within 1e-6 of 1.
Tensor softmax(const Tensor& logits);

/// -log(softmax(logits)[label]), computed in double with the same 1e-12
/// probability clamp as softmax().
double cross_entropy(const Tensor& logits, int label);

int argmax_lowest(const Tensor& t);

/// Mini-batch SGD with cross-entropy loss. Deterministic given cfg.seed:
/// the same seed yields bit-identical weights and loss history.
TrainLog train_sgd(Network& net, const Dataset& data, const TrainConfig& cfg);

/// Fraction of samples whose predicted label matches the dataset label.
double accuracy(const Network& net, const Dataset& data);

} // namespace imia

#endif
