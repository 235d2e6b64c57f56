#ifndef ECODYN_RNG_HPP
#define ECODYN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ecodyn {

// Counter-based generator: output j of stream s is a hash of (seed, s, j),
// so parallel consumers can draw from disjoint substreams in any order.
class CounterRng {
public:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        return mix(seed ^ mix(stream + 0x6a09e667f3bcc909ULL));
    }

    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(derive_seed(seed, stream)) {}

    std::uint64_t next_u64() { return mix(key_ + counter_++ * 0x9e3779b97f4a7c15ULL); }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double mag = std::sqrt(-2.0 * std::log(u1));
        cached_ = mag * std::sin(6.283185307179586 * u2);
        have_cached_ = true;
        return mag * std::cos(6.283185307179586 * u2);
    }

    // Log-normal(mean, sigma) of the underlying normal, truncated to [lo, hi]
    // by rejection.
    double lognormal_trunc(double mean, double sigma, double lo, double hi) {
        if (!(lo < hi) || hi <= 0.0)
            throw std::invalid_argument("lognormal_trunc: bad truncation interval");
        for (int attempt = 0; attempt < 100'000; ++attempt) {
            double x = std::exp(mean + sigma * normal());
            if (x >= lo && x <= hi) return x;
        }
        throw std::runtime_error("lognormal_trunc: truncation interval has negligible mass");
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace ecodyn

#endif
