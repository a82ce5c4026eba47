#pragma once

// Counter-based random streams. A stream is keyed by (seed, path, label) and
// produces the SplitMix64 finaliser of key + counter * golden gamma, so any
// path can be regenerated independently of the order paths are run in.

#include <cstddef>
#include <cstdint>
#include <limits>

namespace fxtriplet {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream labels. Fill streams are one per (pair, side).
enum class StreamLabel : std::uint64_t {
    normals = 1,
    fills_x_plus = 2,
    fills_x_minus = 3,
    fills_y_plus = 4,
    fills_y_minus = 5,
    fills_z_plus = 6,
    fills_z_minus = 7,
    oracle = 8,
};

class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t path, StreamLabel label) noexcept
        : key_(mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + path * 0x9e3779b97f4a7c15ULL +
                     static_cast<std::uint64_t>(label) * 0xd1b54a32d192ed03ULL))
    {
    }
    CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t label) noexcept
        : CounterRng(seed, path, static_cast<StreamLabel>(label))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline StreamLabel fill_stream(std::size_t pair, bool plus) noexcept
{
    return static_cast<StreamLabel>(2 + 2 * pair + (plus ? 0 : 1));
}

}  // namespace fxtriplet
