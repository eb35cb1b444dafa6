#include "opo/rng.hpp"

#include <cmath>
#include <numbers>

namespace opo {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trajectory, std::uint64_t mode,
                         std::uint64_t channel) noexcept {
    std::uint64_t k = mix64(master_seed + kGolden);
    k = mix64(k ^ (trajectory + 1) * kGolden);
    k = mix64(k ^ (mode + 1) * 0xd1b54a32d192ed03ULL);
    k = mix64(k ^ (channel + 1) * 0x8cb92ba72f3d8dd7ULL);
    return k;
}

std::uint64_t CounterRng::next_u64() noexcept { return mix64(key_ + ++counter_ * kGolden); }

double CounterRng::uniform() noexcept {
    // 53 random bits, shifted off zero
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

} // namespace opo
