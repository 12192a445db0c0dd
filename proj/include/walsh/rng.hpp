#pragma once

#include <cmath>
#include <cstdint>

namespace walsh {

// Counter-seeded xoshiro256++ stream with a polar-method normal generator.
//
// Streams are derived from (master seed, stream index, purpose) through
// splitmix64, so a batch of paths can be simulated in any order, on any
// number of workers, with identical output. Normals are generated without
// touching <random> distributions, which keeps sequences stable across
// standard-library versions.
class RngStream {
  public:
    enum Purpose : std::uint64_t { kDriver = 0, kAngles = 1, kAux = 2 };

    explicit RngStream(std::uint64_t seed) { reseed(seed, 0, 0); }

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index, std::uint64_t purpose) {
        reseed(master_seed, stream_index, purpose);
    }

    static RngStream for_path(std::uint64_t master_seed, std::uint64_t path_index,
                              Purpose purpose) {
        return RngStream(master_seed, path_index, static_cast<std::uint64_t>(purpose));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Standard normal via the polar (Marsaglia) method; one spare is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& state) {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    void reseed(std::uint64_t master_seed, std::uint64_t stream_index, std::uint64_t purpose) {
        std::uint64_t key = master_seed;
        std::uint64_t mix = splitmix64(key);
        key ^= stream_index * 0xD1342543DE82EF95ull;
        mix ^= splitmix64(key);
        key ^= purpose * 0xDB4F0B9175AE2165ull;
        mix ^= splitmix64(key);
        std::uint64_t state = mix;
        for (auto& word : s_) word = splitmix64(state);
        bool all_zero = true;
        for (auto word : s_) all_zero = all_zero && word == 0;
        if (all_zero) s_[0] = 0x9E3779B97F4A7C15ull;
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t s_[4] = {};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace walsh
