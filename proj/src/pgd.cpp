#include <cmath>
#include <stdexcept>

#include "imia/attacks.hpp"
#include "imia/errors.hpp"
#include "imia/rng.hpp"

namespace imia {

void PgdConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("pgd epsilon must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("pgd alpha must be positive");
    if (steps < 1) throw std::invalid_argument("pgd steps must be >= 1");
}

AttackOutcome pgd_attack(ModelOracle& oracle, const Tensor& input, int label,
                         const PgdConfig& cfg) {
    cfg.validate();
    input.require_finite("pgd input");
    for (size_t i = 0; i < input.size(); ++i) {
        if (input[i] < 0.0f || input[i] > 1.0f) {
            throw std::invalid_argument("pgd input values must lie in [0,1]");
        }
    }

    AttackOutcome out;
    out.adversarial = input;

    if (oracle.query_label(input) != label) {
        ++out.queries;
        out.success = true;
        out.initial_misclassified = true;
        return out;
    }
    ++out.queries;

    const float eps = static_cast<float>(cfg.epsilon);
    Tensor lo = input, hi = input;
    for (size_t i = 0; i < input.size(); ++i) {
        lo[i] = std::max(0.0f, input[i] - eps);
        hi[i] = std::min(1.0f, input[i] + eps);
    }

    Tensor x = input;
    if (cfg.random_start) {
        RandomStream rng(cfg.seed);
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] = input[i] + static_cast<float>(rng.uniform(-cfg.epsilon, cfg.epsilon));
        }
        clamp_box_inplace(x, lo, hi);
    }

    try {
        for (size_t step = 1; step <= cfg.steps; ++step) {
            const Tensor grad = oracle.query_input_gradient(x, label);
            ++out.queries;
            for (size_t i = 0; i < x.size(); ++i) {
                const float s = grad[i] > 0.0f ? 1.0f : (grad[i] < 0.0f ? -1.0f : 0.0f);
                x[i] += static_cast<float>(cfg.alpha) * s;
            }
            clamp_box_inplace(x, lo, hi);

            const int predicted = oracle.query_label(x);
            ++out.queries;
            if (predicted != label) {
                out.success = true;
                out.iterations = step;
                break;
            }
        }
    } catch (const BudgetExhausted&) {
        // Out of queries without a flip: treated like any failed attack.
        out.success = false;
    }
    if (!out.success) out.iterations = cfg.steps;

    out.adversarial = std::move(x);
    out.l2_distance = l2_distance(out.adversarial, input);
    return out;
}

double boundary_distance(const AttackOutcome& outcome) {
    if (!outcome.success && !outcome.initial_misclassified) {
        throw std::runtime_error("boundary distance undefined: attack never reached the "
                                 "decision boundary");
    }
    return outcome.l2_distance;
}

} // namespace imia
