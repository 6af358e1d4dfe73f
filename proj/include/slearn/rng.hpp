#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace slearn {

// SplitMix64 step, used for seeding and for deriving per-replication streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a replication index into a master seed so that replications get
// independent streams while staying reproducible from one number.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x2545f4914f6cdd1dULL * (index + 1));
    return splitmix64(s);
}

// xoshiro256++ with explicit state, identical output on every platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Marsaglia's polar method (libm use limited to log/sqrt)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Inverse-CDF draw over the weights [begin, begin+n), walked in index
    // order. Weights must be nonnegative and sum to ~1; fp shortfall falls
    // back to the last positive entry.
    std::size_t categorical(const double* weights, std::size_t n) {
        const double u = uniform();
        double cum = 0.0;
        std::size_t last_positive = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (weights[i] > 0.0) last_positive = i;
            cum += weights[i];
            if (u < cum) return i;
        }
        if (last_positive == n) throw std::domain_error("categorical: all weights zero");
        return last_positive;
    }

    std::size_t categorical(const std::vector<double>& weights) {
        return categorical(weights.data(), weights.size());
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    bool have_spare_;
    double spare_;
};

}  // namespace slearn
