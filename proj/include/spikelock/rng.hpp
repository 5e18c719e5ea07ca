#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spikelock {

// Deterministic random stream. mt19937_64 has a standardized algorithm, and
// the variate transforms below are fixed arithmetic, so identical seeds give
// identical draws on every platform (std::uniform_real_distribution does not
// make that guarantee).
class rng_stream {
public:
    explicit rng_stream(std::uint64_t master_seed, std::uint64_t stream_id = 0) {
        std::seed_seq seq{master_seed, stream_id};
        engine_.seed(seq);
    }

    // uniform on [0, 1) with 53-bit resolution
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // exponential with the given rate; log1p(-u) keeps full precision near u = 0
    double exponential(double rate) {
        return -std::log1p(-uniform01()) / rate;
    }

    // standard normal via Box-Muller; one variate per call so every draw
    // consumes exactly two engine words
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace spikelock
