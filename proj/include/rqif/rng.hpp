#pragma once

#include <cstdint>

namespace rqif {

/// Counter-based stream: the state is a hash of (seed, batch, cluster), so
/// any cluster's draws can be regenerated independently of the rest of the
/// stream.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t batch, std::uint64_t cluster);

    std::uint64_t next_u64();
    /// Uniform in (0, 1), never exactly 0 or 1.
    double next_uniform();
    /// Standard normal via Box-Muller.
    double next_normal();

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace rqif
