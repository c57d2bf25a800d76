#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nsprobe {

// All randomness in the library flows through this wrapper. std::mt19937_64
// output is specified by the standard, and we do our own bounded/real
// conversions, so a (seed, stream) pair gives identical draws on every
// platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix(seed)) {}

    // Derived stream for worker/trial decorrelation.
    static Rng derive(std::uint64_t master, std::uint64_t stream) {
        return Rng(mix(master) ^ mix(stream * 0x9e3779b97f4a7c15ull + 0x243f6a8885a308d3ull));
    }

    std::uint64_t u64() { return eng_(); }

    // Uniform integer in [0, bound). Masked rejection keeps it exact.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1)
            return 0;
        std::uint64_t mask = ~0ull >> countl_zero_u64(bound - 1);
        std::uint64_t v;
        do {
            v = eng_() & mask;
        } while (v >= bound);
        return v;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static int countl_zero_u64(std::uint64_t x) {
        int c = 0;
        for (std::uint64_t probe = 1ull << 63; probe != 0 && !(x & probe); probe >>= 1)
            ++c;
        return c;
    }

    // splitmix64; decorrelates small consecutive seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 eng_;
};

}  // namespace nsprobe
