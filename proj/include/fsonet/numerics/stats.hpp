#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "fsonet/numerics/rng.hpp"

namespace fsonet::numerics {

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Interval {
    double low;
    double high;
};

/// Wilson score interval for a binomial proportion (z = 1.96 gives 95 %).
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {successes == 0 ? 0.0 : std::max(0.0, center - half),
            successes == trials ? 1.0 : std::min(1.0, center + half)};
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sorted` and `cdf`.
template <class Cdf>
double ks_statistic(std::span<const double> sorted, Cdf&& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                      std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

/// Empirical CDF value: fraction of sorted samples <= x.
inline double empirical_cdf(std::span<const double> sorted, double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

inline unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Split [0, n) into `chunks` contiguous ranges and run body(chunk, begin, end, rng)
/// on a worker pool. Chunk k always draws from RngStream(seed, k), so results do
/// not depend on the number of threads or on scheduling.
inline void parallel_chunks(std::size_t n, std::size_t chunks, std::uint64_t seed,
                            const std::function<void(std::size_t, std::size_t, std::size_t, RngStream&)>& body) {
    if (n == 0) return;
    chunks = std::max<std::size_t>(1, std::min(chunks, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= chunks) return;
            const std::size_t begin = n * k / chunks;
            const std::size_t end = n * (k + 1) / chunks;
            try {
                RngStream rng(seed, k);
                body(k, begin, end, rng);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
            }
        }
    };

    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(worker_count(), chunks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

/// Number of chunks used by the Monte Carlo drivers. Fixed so that output is
/// identical across machines.
inline constexpr std::size_t kMonteCarloChunks = 64;

}  // namespace fsonet::numerics
