#include <cmath>
#include <stdexcept>

#include "imia/attacks.hpp"
#include "imia/errors.hpp"
#include "imia/rng.hpp"

namespace imia {

void HsjaConfig::validate() const {
    if (!(clip_max > clip_min)) throw std::invalid_argument("hsja clip range is empty");
    if (num_iterations < 1) throw std::invalid_argument("hsja num_iterations must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("hsja gamma must be positive");
    if (init_num_evals < 1 || init_num_evals > max_num_evals) {
        throw std::invalid_argument("hsja needs 1 <= init_num_evals <= max_num_evals");
    }
    if (max_init_draws < 1) throw std::invalid_argument("hsja max_init_draws must be >= 1");
    if (std::isnan(d_target) || d_target < 0.0) {
        throw std::invalid_argument("hsja d_target must be nonnegative");
    }
}

namespace {

struct HsjaRun {
    ModelOracle* oracle;
    const Tensor* original;
    int label;
    const HsjaConfig* cfg;
    uint64_t queries = 0;

    // phi(x): is x misclassified?
    bool adversarial(const Tensor& x) {
        const int predicted = oracle->query_label(x);
        ++queries;
        return predicted != label;
    }

    Tensor clip(Tensor x) const {
        clamp_inplace(x, static_cast<float>(cfg->clip_min),
                      static_cast<float>(cfg->clip_max));
        return x;
    }

    Tensor blend(const Tensor& a, const Tensor& b, double alpha) const {
        Tensor out = a;
        for (size_t i = 0; i < out.size(); ++i) {
            out[i] = static_cast<float>((1.0 - alpha) * a[i] + alpha * b[i]);
        }
        return out;
    }

    // Bisects along the segment original -> perturbed until the blend factor
    // is pinned within `precision`, returning the misclassified-side point.
    Tensor boundary_search(const Tensor& perturbed, double precision) {
        double low = 0.0, high = 1.0;
        while (high - low > precision) {
            const double mid = (high + low) / 2.0;
            if (adversarial(blend(*original, perturbed, mid))) {
                high = mid;
            } else {
                low = mid;
            }
        }
        return blend(*original, perturbed, high);
    }

    // Monte-Carlo estimate of the boundary normal at `point`, using
    // n_evals probes at radius delta. Returns a unit vector.
    Tensor estimate_direction(const Tensor& point, size_t n_evals, double delta,
                              RandomStream& rng) {
        const size_t d = point.size();
        std::vector<Tensor> probes;
        std::vector<double> fvals;
        probes.reserve(n_evals);
        fvals.reserve(n_evals);

        for (size_t b = 0; b < n_evals; ++b) {
            Tensor u(point.shape());
            double norm = 0.0;
            for (size_t i = 0; i < d; ++i) {
                const double g = rng.normal();
                u[i] = static_cast<float>(g);
                norm += g * g;
            }
            norm = std::sqrt(std::max(norm, 1e-30));
            Tensor probe = point;
            for (size_t i = 0; i < d; ++i) {
                u[i] = static_cast<float>(u[i] / norm);
                probe[i] = static_cast<float>(probe[i] + delta * u[i]);
            }
            probe = clip(std::move(probe));
            // Re-derive the direction actually probed after clipping.
            for (size_t i = 0; i < d; ++i) {
                u[i] = static_cast<float>((probe[i] - point[i]) / delta);
            }
            fvals.push_back(adversarial(probe) ? 1.0 : -1.0);
            probes.push_back(std::move(u));
        }

        double fbar = 0.0;
        for (double f : fvals) fbar += f;
        fbar /= double(n_evals);

        Tensor grad(point.shape());
        std::vector<double> acc(d, 0.0);
        if (fbar >= 1.0 || fbar <= -1.0) {
            const double sign = fbar >= 1.0 ? 1.0 : -1.0;
            for (const Tensor& u : probes) {
                for (size_t i = 0; i < d; ++i) acc[i] += sign * u[i];
            }
        } else {
            for (size_t b = 0; b < n_evals; ++b) {
                const double w = fvals[b] - fbar;
                for (size_t i = 0; i < d; ++i) acc[i] += w * probes[b][i];
            }
        }
        double norm = 0.0;
        for (size_t i = 0; i < d; ++i) {
            acc[i] /= double(n_evals);
            norm += acc[i] * acc[i];
        }
        norm = std::sqrt(std::max(norm, 1e-30));
        for (size_t i = 0; i < d; ++i) grad[i] = static_cast<float>(acc[i] / norm);
        return grad;
    }
};

} // namespace

AttackOutcome hsja_attack(ModelOracle& oracle, const Tensor& input, int label,
                          const HsjaConfig& cfg, HsjaTrace* trace) {
    cfg.validate();
    input.require_finite("hsja input");

    AttackOutcome out;
    out.adversarial = input;

    HsjaRun run{&oracle, &input, label, &cfg};
    const size_t d = input.size();
    const double theta = cfg.gamma / (std::sqrt(double(d)) * double(d));

    // Walk state; kept outside the try so budget exhaustion preserves the
    // best misclassified point seen so far.
    Tensor perturbed = input;
    bool have_adversarial = false;
    size_t reached_at = cfg.num_iterations;

    try {
        if (run.adversarial(input)) {
            out.queries = run.queries;
            out.success = true;
            out.initial_misclassified = true;
            return out;
        }

        // Random restarts until a misclassified point turns up.
        RandomStream rng(cfg.seed);
        Tensor start(input.shape());
        bool found = false;
        for (size_t draw = 0; draw < cfg.max_init_draws && !found; ++draw) {
            for (size_t i = 0; i < d; ++i) {
                start[i] = static_cast<float>(rng.uniform(cfg.clip_min, cfg.clip_max));
            }
            found = run.adversarial(start);
        }
        if (!found) {
            // No misclassified point was ever found: the one true failure.
            out.queries = run.queries;
            out.iterations = cfg.num_iterations;
            return out;
        }
        perturbed = start;
        have_adversarial = true;

        // Pull the random start toward the sample before the walk begins.
        perturbed = run.boundary_search(perturbed, 0.001);
        double dist = l2_distance(perturbed, input);
        if (trace) {
            trace->boundary_points.push_back(perturbed);
            trace->distances.push_back(dist);
        }

        if (dist < cfg.d_target) {
            reached_at = 0;
        } else {
            for (size_t t = 1; t <= cfg.num_iterations; ++t) {
                const double delta = t == 1 ? 0.1 * (cfg.clip_max - cfg.clip_min)
                                            : std::sqrt(double(d)) * theta * dist;
                const size_t n_evals = std::min<size_t>(
                    cfg.max_num_evals,
                    size_t(double(cfg.init_num_evals) * std::sqrt(double(t))));
                const Tensor direction =
                    run.estimate_direction(perturbed, n_evals, delta, rng);

                // Geometric step-size search along the estimated normal.
                double step = dist / std::sqrt(double(t));
                bool stepped = false;
                for (int halvings = 0; halvings < 64; ++halvings) {
                    Tensor cand = perturbed;
                    axpy(cand, static_cast<float>(step), direction);
                    cand = run.clip(std::move(cand));
                    if (run.adversarial(cand)) {
                        perturbed = std::move(cand);
                        stepped = true;
                        break;
                    }
                    step /= 2.0;
                }
                if (stepped) {
                    perturbed = run.boundary_search(perturbed, theta);
                    if (trace) trace->boundary_points.push_back(perturbed);
                }
                dist = l2_distance(perturbed, input);
                if (trace && stepped) trace->distances.push_back(dist);
                if (dist < cfg.d_target) {
                    reached_at = t;
                    break;
                }
            }
        }
    } catch (const BudgetExhausted&) {
        // Capped iteration count stands in for the unfinished walk.
        reached_at = cfg.num_iterations;
    }

    out.success = have_adversarial;
    out.iterations = have_adversarial ? reached_at : cfg.num_iterations;
    out.adversarial = std::move(perturbed);
    out.l2_distance = l2_distance(out.adversarial, input);
    out.queries = run.queries;
    return out;
}

} // namespace imia
