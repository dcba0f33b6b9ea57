#ifndef IMIA_RNG_HPP
#define IMIA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace imia {

// splitmix64 finalizer; used for seed derivation only.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from (base, tag, index).
/// All randomness in the toolkit flows from one global seed through this
/// function, so results do not depend on scheduling or worker count.
inline uint64_t derive_seed(uint64_t base, uint64_t tag, uint64_t index = 0) {
    return mix64(mix64(mix64(base) ^ tag) ^ index);
}

// Stream tags for derive_seed. Distinct per consumer.
namespace seed_tag {
inline constexpr uint64_t kAttackSample = 0x41545441434bULL; // per-sample attacks
inline constexpr uint64_t kEvalRepeat = 0x524550454154ULL;   // evaluation repeats
inline constexpr uint64_t kPoolPick = 0x504f4f4cULL;         // attack pool subsampling
inline constexpr uint64_t kCalibration = 0x43414c4942ULL;    // hsja d_target calibration
} // namespace seed_tag

/// Deterministic random stream. Draws are implemented by hand on top of
/// mt19937_64 because the std distributions are implementation-defined;
/// identical seeds give identical sequences on every platform.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection; n > 0.
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; caches the paired draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace imia

#endif
