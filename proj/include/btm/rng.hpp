#pragma once

#include <cstdint>

namespace btm {

// Deterministic xoshiro256** stream with splitmix64 seeding. Hand-rolled so
// generated scenarios are bit-reproducible independent of the standard
// library's distribution internals. fork() derives an independent substream,
// keeping customer/cloud/noise draws decoupled from each other.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng fork(std::uint64_t stream_id) const;

    std::uint64_t next_u64();

    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();                        // standard normal, Box-Muller
    double normal(double mean, double stddev);
    double lognormal_unit_mean(double sigma); // exp(sigma*N - sigma^2/2), mean 1

    // Uniform integer in [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
};

} // namespace btm
