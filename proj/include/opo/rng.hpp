#pragma once

#include <cstdint>

namespace opo {

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream key for (master seed, trajectory, mode, channel); distinct tuples
/// give statistically independent streams.
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trajectory, std::uint64_t mode,
                         std::uint64_t channel) noexcept;

// Counter-based generator: the n-th draw is mix64(key + n * golden). Output
// depends only on (key, n), so streams can be generated in any order or on
// any thread. normal() uses Box-Muller and is reproducible across platforms
// with IEEE-754 libm.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept;
    /// Uniform on (0, 1).
    double uniform() noexcept;
    double normal() noexcept;

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace opo
