#ifndef IMIA_ATTACKS_HPP
#define IMIA_ATTACKS_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "imia/oracle.hpp"
#include "imia/tensor.hpp"

namespace imia {

/// Result of one adversarial-example generation. `iterations` is the signal
/// consumed by the iteration-count membership attack: 0 for inputs the model
/// already misclassifies, the configured maximum for failed attacks.
struct AttackOutcome {
    bool success = false;
    size_t iterations = 0;
    uint64_t queries = 0;
    Tensor adversarial;
    double l2_distance = 0.0;
    bool initial_misclassified = false;
};

struct PgdConfig {
    double epsilon = 3.0 / 255.0; // L-infinity budget
    double alpha = 0.001;         // step size
    size_t steps = 50;
    bool random_start = true;
    uint64_t seed = 0;

    void validate() const;
};

struct SimbaConfig {
    enum class Basis { Pixel, Dct };
    enum class Order { Random, Ascending };

    size_t max_iters = 300;
    double epsilon = 0.05;        // per-step perturbation magnitude
    Basis basis = Basis::Dct;
    size_t freq_dims = 32;        // DCT only
    Order order = Order::Random;
    double linf_bound = 0.0;      // 0 = unbounded
    uint64_t seed = 0;

    void validate(const std::vector<size_t>& input_shape) const;
};

struct HsjaConfig {
    double clip_min = 0.0;
    double clip_max = 1.0;
    size_t num_iterations = 100;  // outer iterations
    double gamma = 1.0;           // binary-search confidence
    size_t max_num_evals = 10000; // cap on gradient-estimation evaluations
    size_t init_num_evals = 100;
    uint64_t seed = 0;
    // Success distance threshold: iterations = first outer iteration whose
    // distance to the original falls below this. +inf is trivially met right
    // after initialization; 0 is never met (full-depth run).
    double d_target = std::numeric_limits<double>::infinity();
    size_t max_init_draws = 1000; // bound on random initialization attempts

    void validate() const;
};

/// Optional instrumentation for simba_attack: the strictly decreasing
/// sequence of true-label probabilities over accepted proposals.
struct SimbaTrace {
    std::vector<double> accepted_probs;
};

/// Optional instrumentation for hsja_attack: every boundary-side point the
/// binary searches returned, with its distance to the original.
struct HsjaTrace {
    std::vector<Tensor> boundary_points;
    std::vector<double> distances;
};

/// L-infinity projected gradient ascent on the loss, stopping at the first
/// label flip. Requires a WhiteBox oracle; input values must lie in [0,1].
AttackOutcome pgd_attack(ModelOracle& oracle, const Tensor& input, int label,
                         const PgdConfig& cfg);

/// Greedy single-direction descent of p(y|x) over an orthonormal basis
/// (pixel or DCT), one or two score queries per examined direction.
AttackOutcome simba_attack(ModelOracle& oracle, const Tensor& input, int label,
                           const SimbaConfig& cfg, SimbaTrace* trace = nullptr);

/// Decision-based boundary walk: random misclassified start, binary search
/// to the boundary, then per-iteration Monte-Carlo gradient-direction
/// estimation, geometric step-size search and boundary re-projection.
AttackOutcome hsja_attack(ModelOracle& oracle, const Tensor& input, int label,
                          const HsjaConfig& cfg, HsjaTrace* trace = nullptr);

/// Image of a one-hot frequency coefficient under the orthonormal inverse
/// 2-D DCT, per channel. `image_shape` is (H,W) or (C,H,W); valid indices
/// are [0, channels * freq_dims^2).
Tensor dct_basis_step(size_t index, size_t freq_dims,
                      const std::vector<size_t>& image_shape);

/// L2 distance from the original to its adversarial example. Defined only
/// for successful (or initially misclassified) outcomes; throws otherwise.
double boundary_distance(const AttackOutcome& outcome);

} // namespace imia

#endif
