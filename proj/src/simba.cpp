#include <numeric>
#include <stdexcept>

#include "imia/attacks.hpp"
#include "imia/errors.hpp"
#include "imia/rng.hpp"

namespace imia {

namespace {

size_t direction_count(const SimbaConfig& cfg, const std::vector<size_t>& shape) {
    if (cfg.basis == SimbaConfig::Basis::Pixel) return shape_numel(shape);
    const size_t channels = shape.size() == 3 ? shape[0] : 1;
    return channels * cfg.freq_dims * cfg.freq_dims;
}

Tensor basis_direction(const SimbaConfig& cfg, const std::vector<size_t>& shape,
                       size_t index) {
    if (cfg.basis == SimbaConfig::Basis::Pixel) {
        Tensor q(shape);
        q[index] = 1.0f;
        return q;
    }
    return dct_basis_step(index, cfg.freq_dims, shape);
}

} // namespace

void SimbaConfig::validate(const std::vector<size_t>& input_shape) const {
    if (max_iters < 1) throw std::invalid_argument("simba max_iters must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("simba epsilon must be positive");
    if (linf_bound < 0.0) throw std::invalid_argument("simba linf_bound must be >= 0");
    if (basis == Basis::Dct) {
        if (input_shape.size() != 2 && input_shape.size() != 3) {
            throw std::invalid_argument("simba DCT basis needs a 2-D or 3-D input shape");
        }
        const size_t h = input_shape[input_shape.size() - 2];
        const size_t w = input_shape[input_shape.size() - 1];
        if (freq_dims == 0 || freq_dims > h || freq_dims > w) {
            throw std::invalid_argument("simba freq_dims must be in [1, min(H,W)]");
        }
    }
}

AttackOutcome simba_attack(ModelOracle& oracle, const Tensor& input, int label,
                           const SimbaConfig& cfg, SimbaTrace* trace) {
    cfg.validate(input.shape());
    input.require_finite("simba input");

    AttackOutcome out;
    out.adversarial = input;

    RandomStream rng(cfg.seed);
    const size_t n_dirs = direction_count(cfg, input.shape());
    std::vector<size_t> order(n_dirs);
    std::iota(order.begin(), order.end(), size_t{0});

    Tensor x = input;
    double p_true = 0.0;
    const float eps = static_cast<float>(cfg.epsilon);

    Tensor box_lo, box_hi;
    if (cfg.linf_bound > 0.0) {
        const float b = static_cast<float>(cfg.linf_bound);
        box_lo = input;
        box_hi = input;
        for (size_t i = 0; i < input.size(); ++i) {
            box_lo[i] -= b;
            box_hi[i] += b;
        }
    }

    try {
        {
            const Tensor probs = oracle.query_scores(input);
            ++out.queries;
            if (label < 0 || static_cast<size_t>(label) >= probs.size()) {
                throw std::invalid_argument("simba label out of range");
            }
            p_true = probs[size_t(label)];
            if (argmax_lowest(probs) != label) {
                out.success = true;
                out.initial_misclassified = true;
                return out;
            }
        }

        for (size_t t = 0; t < cfg.max_iters; ++t) {
            const size_t slot = t % n_dirs;
            if (slot == 0 && cfg.order == SimbaConfig::Order::Random) {
                rng.shuffle(order);
            }
            const Tensor q = basis_direction(cfg, input.shape(), order[slot]);

            bool flipped = false;
            for (const float sign : {1.0f, -1.0f}) {
                Tensor cand = x;
                axpy(cand, sign * eps, q);
                if (cfg.linf_bound > 0.0) clamp_box_inplace(cand, box_lo, box_hi);

                const Tensor probs = oracle.query_scores(cand);
                ++out.queries;
                const double p_cand = probs[size_t(label)];
                if (p_cand < p_true) {
                    x = std::move(cand);
                    p_true = p_cand;
                    if (trace) trace->accepted_probs.push_back(p_cand);
                    if (argmax_lowest(probs) != label) {
                        out.success = true;
                        out.iterations = t + 1;
                        flipped = true;
                    }
                    break;
                }
            }
            if (flipped) break;
        }
    } catch (const BudgetExhausted&) {
        out.success = false;
    }

    if (!out.success) out.iterations = cfg.max_iters;
    out.adversarial = std::move(x);
    out.l2_distance = l2_distance(out.adversarial, input);
    return out;
}

} // namespace imia
