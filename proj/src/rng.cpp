#include "rqif/rng.hpp"

#include <cmath>

namespace rqif {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t batch, std::uint64_t cluster) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= batch * 0xff51afd7ed558ccdULL;
    h ^= splitmix64(s);
    s ^= cluster * 0xc4ceb9fe1a85ec53ULL;
    h ^= splitmix64(s);
    return h;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t batch, std::uint64_t cluster)
    : state_(mix_key(seed, batch, cluster)) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(state_); }

double CounterRng::next_uniform() {
    // 53 random bits into (0,1); offset by half an ulp to exclude 0.
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

}  // namespace rqif
