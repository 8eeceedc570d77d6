#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "fsonet/errors.hpp"

namespace fsonet::numerics {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Seeded random stream. Equal (seed, stream_id) pairs yield identical
/// sequences. Single owner: give each worker its own stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Uniform on [0, 1).
    double uniform() { return unit_(engine_); }

    /// Uniform on (0, 1]; safe as an argument to log.
    double uniform_open_low() { return 1.0 - unit_(engine_); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log(uniform_open_low()) / rate; }

    /// Gamma with shape k and scale theta (mean k*theta).
    double gamma(double shape, double scale) {
        if (!(shape > 0.0 && scale > 0.0)) throw DomainError("RngStream::gamma: bad parameters");
        return std::gamma_distribution<double>(shape, scale)(engine_);
    }

    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw DomainError("RngStream::poisson: negative mean");
        if (mean == 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) noexcept {
        return detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(~stream));
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fsonet::numerics
