#ifndef IMIA_TEST_HELPERS_HPP
#define IMIA_TEST_HELPERS_HPP

// Test-only oracles, independent of the library's forward/backward path:
// a double-precision reimplementation of inference used for finite-difference
// gradient checks and hand verification.

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "imia/net.hpp"
#include "imia/rng.hpp"

namespace imia::test {

// Self-cleaning scratch directory for file-format tests.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("imia-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

// Double-precision forward over the network's float32 parameters.
inline std::vector<double> oracle_logits(const Network& net, const std::vector<double>& x) {
    std::vector<double> cur = x;
    std::vector<size_t> shape = net.spec().input_shape;
    size_t p = 0;
    for (const LayerSpec& l : net.spec().layers) {
        if (l.kind == LayerKind::Dense) {
            const Tensor& w = net.parameters()[p];
            const Tensor& b = net.parameters()[p + 1];
            p += 2;
            std::vector<double> y(l.out_width);
            for (size_t o = 0; o < l.out_width; ++o) {
                double acc = b[o];
                for (size_t i = 0; i < l.in_width; ++i) {
                    acc += double(w[o * l.in_width + i]) * cur[i];
                }
                y[o] = acc;
            }
            cur = std::move(y);
            shape = {l.out_width};
        } else if (l.kind == LayerKind::Conv2d) {
            const Tensor& w = net.parameters()[p];
            const Tensor& b = net.parameters()[p + 1];
            p += 2;
            const size_t ih = shape[1], iw = shape[2];
            const size_t oh = (ih - l.kernel) / l.stride + 1;
            const size_t ow = (iw - l.kernel) / l.stride + 1;
            std::vector<double> y(l.out_channels * oh * ow);
            for (size_t oc = 0; oc < l.out_channels; ++oc)
                for (size_t r = 0; r < oh; ++r)
                    for (size_t c = 0; c < ow; ++c) {
                        double acc = b[oc];
                        for (size_t ic = 0; ic < l.in_channels; ++ic)
                            for (size_t kr = 0; kr < l.kernel; ++kr)
                                for (size_t kc = 0; kc < l.kernel; ++kc) {
                                    acc += double(w[((oc * l.in_channels + ic) * l.kernel +
                                                     kr) *
                                                        l.kernel +
                                                    kc]) *
                                           cur[(ic * ih + r * l.stride + kr) * iw +
                                               c * l.stride + kc];
                                }
                        y[(oc * oh + r) * ow + c] = acc;
                    }
            cur = std::move(y);
            shape = {l.out_channels, oh, ow};
        } else if (l.kind == LayerKind::Relu) {
            for (double& v : cur) {
                if (v < 0.0) v = 0.0;
            }
        } else { // flatten
            shape = {cur.size()};
        }
    }
    return cur;
}

inline double oracle_cross_entropy(const Network& net, const std::vector<double>& x,
                                   int label) {
    const std::vector<double> logits = oracle_logits(net, x);
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    return -(logits[size_t(label)] - mx - std::log(sum));
}

// Smallest |preactivation| feeding any relu: finite differences are only
// trustworthy when no kink sits inside the probe interval.
inline double min_relu_preactivation(const Network& net, const std::vector<double>& x) {
    std::vector<double> cur = x;
    std::vector<size_t> shape = net.spec().input_shape;
    double closest = 1e30;
    size_t p = 0;
    for (const LayerSpec& l : net.spec().layers) {
        if (l.kind == LayerKind::Relu) {
            for (double v : cur) closest = std::min(closest, std::fabs(v));
        }
        if (l.kind == LayerKind::Dense) {
            const Tensor& w = net.parameters()[p];
            const Tensor& b = net.parameters()[p + 1];
            p += 2;
            std::vector<double> y(l.out_width);
            for (size_t o = 0; o < l.out_width; ++o) {
                double acc = b[o];
                for (size_t i = 0; i < l.in_width; ++i) {
                    acc += double(w[o * l.in_width + i]) * cur[i];
                }
                y[o] = acc;
            }
            cur = std::move(y);
            shape = {l.out_width};
        } else if (l.kind == LayerKind::Conv2d) {
            const Tensor& w = net.parameters()[p];
            const Tensor& b = net.parameters()[p + 1];
            p += 2;
            const size_t ih = shape[1], iw = shape[2];
            const size_t oh = (ih - l.kernel) / l.stride + 1;
            const size_t ow = (iw - l.kernel) / l.stride + 1;
            std::vector<double> y(l.out_channels * oh * ow);
            for (size_t oc = 0; oc < l.out_channels; ++oc)
                for (size_t r = 0; r < oh; ++r)
                    for (size_t c = 0; c < ow; ++c) {
                        double acc = b[oc];
                        for (size_t ic = 0; ic < l.in_channels; ++ic)
                            for (size_t kr = 0; kr < l.kernel; ++kr)
                                for (size_t kc = 0; kc < l.kernel; ++kc) {
                                    acc += double(w[((oc * l.in_channels + ic) * l.kernel +
                                                     kr) *
                                                        l.kernel +
                                                    kc]) *
                                           cur[(ic * ih + r * l.stride + kr) * iw +
                                               c * l.stride + kc];
                                }
                        y[(oc * oh + r) * ow + c] = acc;
                    }
            cur = std::move(y);
            shape = {l.out_channels, oh, ow};
        } else if (l.kind == LayerKind::Relu) {
            for (double& v : cur) {
                if (v < 0.0) v = 0.0;
            }
        } else {
            shape = {cur.size()};
        }
    }
    return closest;
}

// A few small architectures cycled through by the gradient-check suites.
inline NetworkSpec random_arch(size_t which) {
    NetworkSpec spec;
    switch (which % 4) {
    case 0:
        spec.input_shape = {4};
        spec.num_classes = 3;
        spec.layers = {LayerSpec::dense(4, 8), LayerSpec::relu(), LayerSpec::dense(8, 3)};
        break;
    case 1:
        spec.input_shape = {6};
        spec.num_classes = 2;
        spec.layers = {LayerSpec::dense(6, 5), LayerSpec::relu(), LayerSpec::dense(5, 4),
                       LayerSpec::relu(), LayerSpec::dense(4, 2)};
        break;
    case 2:
        spec.input_shape = {2, 5, 5};
        spec.num_classes = 3;
        spec.layers = {LayerSpec::conv2d(2, 3, 3), LayerSpec::relu(), LayerSpec::flatten(),
                       LayerSpec::dense(27, 3)};
        break;
    default:
        spec.input_shape = {1, 6, 6};
        spec.num_classes = 4;
        spec.layers = {LayerSpec::conv2d(1, 2, 3, 2), LayerSpec::flatten(),
                       LayerSpec::relu(), LayerSpec::dense(8, 4)};
        break;
    }
    return spec;
}

struct GradCheckResult {
    double worst_rel = 0.0;
    size_t checked = 0;
};

// Central finite differences of the double-precision loss against the
// library's input_gradient. Relative error uses an absolute floor of 1e-3
// so near-zero components are compared at 1e-6.
inline GradCheckResult gradient_check(const Network& net, const Tensor& input, int label,
                                      double h = 1e-3) {
    std::vector<double> x(input.size());
    for (size_t i = 0; i < input.size(); ++i) x[i] = input[i];

    const Tensor analytic = net.input_gradient(input, label);
    GradCheckResult result;
    for (size_t i = 0; i < x.size(); ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd =
            (oracle_cross_entropy(net, xp, label) - oracle_cross_entropy(net, xm, label)) /
            (2.0 * h);
        const double an = analytic[i];
        const double rel =
            std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-3});
        result.worst_rel = std::max(result.worst_rel, rel);
        ++result.checked;
    }
    return result;
}

// Random (net, input, label) triple; re-draws inputs that put a relu
// preactivation within the finite-difference probe radius.
struct GradTriple {
    Network net;
    Tensor input;
    int label;
};

inline GradTriple random_grad_triple(size_t index, uint64_t seed) {
    NetworkSpec spec = random_arch(index);
    Network net(spec, derive_seed(seed, 0x6e6574, index));
    RandomStream rng(derive_seed(seed, 0x696e, index));
    for (int attempt = 0; attempt < 100; ++attempt) {
        Tensor input(spec.input_shape);
        std::vector<double> x(input.size());
        for (size_t i = 0; i < input.size(); ++i) {
            x[i] = rng.uniform();
            input[i] = static_cast<float>(x[i]);
            x[i] = input[i];
        }
        if (min_relu_preactivation(net, x) > 5e-3) {
            const int label = int(rng.below(spec.num_classes));
            return {std::move(net), std::move(input), label};
        }
    }
    // Give up on the guard; kink collisions are rare enough.
    Tensor input(spec.input_shape);
    for (size_t i = 0; i < input.size(); ++i) {
        input[i] = static_cast<float>(rng.uniform());
    }
    return {std::move(net), std::move(input), int(rng.below(spec.num_classes))};
}

} // namespace imia::test

#endif
