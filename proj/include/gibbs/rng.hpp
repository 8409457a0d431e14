#ifndef GIBBS_RNG_HPP
#define GIBBS_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gibbs {

/// SplitMix64 finalizer; used to derive stream keys and seed state.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Splittable random stream. A stream is identified by a 64-bit key derived
/// from (seed, path of split ids); the same key always yields the same
/// sequence, so work partitioned into keyed substreams is reproducible
/// regardless of which thread draws it. The generator behind a key is
/// xoshiro256**.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) noexcept : key_(splitmix64(seed)) { reseed(); }

    /// Child stream for substream `id`; independent of how much of the parent
    /// has been consumed.
    [[nodiscard]] RandomStream split(std::uint64_t id) const noexcept
    {
        return RandomStream(Key{splitmix64(key_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL))});
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

private:
    struct Key {
        std::uint64_t value;
    };
    explicit RandomStream(Key k) noexcept : key_(k.value) { reseed(); }

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    void reseed() noexcept
    {
        std::uint64_t z = key_;
        for (auto& word : s_) {
            z += 0x9E3779B97F4A7C15ULL;
            word = splitmix64(z);
        }
        has_spare_ = false;
    }

    std::uint64_t key_;
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gibbs

#endif
