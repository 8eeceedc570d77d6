#pragma once

// Uplink SINR with fractional power control over a Poisson field of
// interfering UEs: Monte Carlo estimators and the coverage/rate integrals.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fsonet/errors.hpp"
#include "fsonet/geometry.hpp"
#include "fsonet/numerics.hpp"

namespace fsonet::uplink {

using geometry::DistanceModel;
using geometry::NetworkRealization;
using numerics::pi;
using numerics::RngStream;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Thermal noise power in watts for a given bandwidth and noise density.
inline double noise_power_w(double bandwidth_hz, double density_dbm_per_hz = -173.8) {
    if (!(bandwidth_hz > 0.0)) throw DomainError("noise_power_w: bandwidth must be positive");
    return std::pow(10.0, (density_dbm_per_hz + 10.0 * std::log10(bandwidth_hz)) / 10.0) * 1e-3;
}

struct UplinkConfig {
    double lambda = 0.25;       ///< UE (and BS) density per km^2
    double alpha = 3.5;         ///< pathloss exponent
    double epsilon = 0.6;       ///< fractional power control exponent
    double mu = 1.0 / 0.15;     ///< fading rate; mean received power 1/mu W
    double noise_w = noise_power_w(300e6);
    DistanceModel model = DistanceModel::ppp_rayleigh;
    double window_km = 0.0;     ///< Monte Carlo window radius; 0 selects the default

    static UplinkConfig table_iii() { return {}; }

    double window() const { return window_km > 0.0 ? window_km : geometry::default_window_radius(lambda); }

    void validate() const {
        if (!(lambda > 0.0)) throw DomainError("UplinkConfig: lambda must be positive");
        if (!(alpha > 2.0)) throw DomainError("UplinkConfig: alpha must exceed 2");
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("UplinkConfig: epsilon must lie in [0, 1]");
        if (!(mu > 0.0)) throw DomainError("UplinkConfig: mu must be positive");
        if (!(noise_w >= 0.0)) throw DomainError("UplinkConfig: noise power must be non-negative");
        if (window_km != 0.0 && !(window_km >= geometry::min_window_radius(lambda)))
            throw DomainError("UplinkConfig: window below 15/sqrt(pi*lambda)");
    }
};

struct SinrSample {
    double sinr;
    double signal;
    double interference;
};

/// One SINR draw for a given snapshot with fresh Rayleigh fades.
inline SinrSample sinr_sample(const UplinkConfig& cfg, const NetworkRealization& net, RngStream& rng) {
    const double r = net.serving_distance_km;
    const double signal = rng.exponential(cfg.mu) * std::pow(r, cfg.alpha * (cfg.epsilon - 1.0));
    const double half_ae = 0.5 * cfg.alpha * cfg.epsilon, half_a = 0.5 * cfg.alpha;
    numerics::CompensatedSum interference;
    for (const auto& z : net.interferers) {
        // r_z^{alpha eps} d_z^{-alpha} evaluated through squared distances.
        const double gain = std::exp(half_ae * std::log(z.rz_km * z.rz_km) - half_a * std::log(z.dz_km * z.dz_km));
        interference += gain * rng.exponential(cfg.mu);
    }
    const double i = interference.value();
    return {signal / (cfg.noise_w + i), signal, i};
}

namespace detail {

// int_y^inf u / (1 + u^alpha) du as an incomplete beta function.
inline double tail_kernel(double y, double alpha) {
    const double a = 1.0 - 2.0 / alpha, b = 2.0 / alpha;
    if (y <= 0.0) return numerics::pi / (alpha * std::sin(2.0 * numerics::pi / alpha));
    const double ya = std::pow(y, alpha);
    const double t = 1.0 / (1.0 + ya);
    if (t == 0.0) return std::pow(y, 2.0 - alpha) / (alpha - 2.0);
    return numerics::incomplete_beta(a, b, t) / alpha;
}

inline const numerics::QuadratureSpec& inner_spec() {
    static const numerics::QuadratureSpec spec = numerics::QuadratureSpec{}.with_tolerance(1e-13, 1e-10);
    return spec;
}

inline void require_analytic(const UplinkConfig& cfg) {
    cfg.validate();
    if (cfg.model != DistanceModel::ppp_rayleigh && cfg.model != DistanceModel::ppp_uniform)
        throw DomainError("uplink: analytic evaluation needs the ppp_rayleigh or ppp_uniform model, got " +
                          std::string(geometry::to_string(cfg.model)));
}

}  // namespace detail

/// Laplace transform of the aggregate interference at the BS of interest,
/// E[exp(-s I)], with interferers outside the exclusion radius r and,
/// optionally, inside an outer radius.
inline double interference_laplace(const UplinkConfig& cfg, double s, double r,
                                   double outer_radius = std::numeric_limits<double>::infinity()) {
    detail::require_analytic(cfg);
    if (!(s >= 0.0)) throw DomainError("interference_laplace: s must be non-negative");
    if (!(r > 0.0)) throw DomainError("interference_laplace: exclusion radius must be positive");
    if (s == 0.0 || outer_radius <= r) return 1.0;
    if (std::isinf(s)) return 0.0;

    const double a = cfg.alpha, lambda = cfg.lambda;
    // Contribution of one interferer with link distance rz, integrated over its
    // position: int_r^W x / (1 + x^alpha / c) dx with c = (s/mu) rz^{alpha eps}.
    auto per_link = [&](double rz) {
        const double c = (s / cfg.mu) * std::pow(rz, a * cfg.epsilon);
        if (c == 0.0) return 0.0;
        const double scale = std::pow(c, 1.0 / a);
        double v = detail::tail_kernel(r / scale, a);
        if (std::isfinite(outer_radius)) v -= detail::tail_kernel(outer_radius / scale, a);
        return scale * scale * v;
    };

    double mean = 0.0;
    if (cfg.model == DistanceModel::ppp_rayleigh) {
        mean = numerics::integral([&](double rz) { return per_link(rz) * geometry::serving_distance_pdf(rz, lambda); },
                                  0.0, INFINITY, detail::inner_spec());
    } else {
        const double rmax = geometry::equal_area_radius(lambda);
        mean = numerics::integral([&](double rz) { return per_link(rz) * 2.0 * pi * lambda * rz; }, 0.0, rmax,
                                  detail::inner_spec());
    }
    return std::exp(-2.0 * pi * lambda * mean);
}

/// P[SINR > threshold] for a linear threshold.
inline double coverage_analytic(const UplinkConfig& cfg, double threshold,
                                double outer_radius = std::numeric_limits<double>::infinity()) {
    detail::require_analytic(cfg);
    if (!(threshold > 0.0)) throw DomainError("coverage_analytic: threshold must be positive");
    const double lambda = cfg.lambda;
    const double exponent = cfg.alpha * (1.0 - cfg.epsilon);
    auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double s = cfg.mu * threshold * std::pow(r, exponent);
        const double noise = std::exp(-s * cfg.noise_w);
        if (noise == 0.0) return 0.0;
        return geometry::serving_distance_pdf(r, lambda) * noise * interference_laplace(cfg, s, r, outer_radius);
    };
    return numerics::integral(integrand, 0.0, INFINITY, numerics::QuadratureSpec{}.with_tolerance(1e-10, 1e-8));
}

/// Outage P[SNR < threshold] with interference switched off, computed
/// without the 1 - coverage cancellation so deep outages keep full precision.
inline double outage_noise_limited(const UplinkConfig& cfg, double threshold) {
    cfg.validate();
    if (!(threshold > 0.0)) throw DomainError("outage_noise_limited: threshold must be positive");
    const double exponent = cfg.alpha * (1.0 - cfg.epsilon);
    auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        return geometry::serving_distance_pdf(r, cfg.lambda) *
               -std::expm1(-cfg.mu * threshold * cfg.noise_w * std::pow(r, exponent));
    };
    return numerics::integral(integrand, 0.0, INFINITY, numerics::QuadratureSpec{}.with_tolerance(1e-300, 1e-10));
}

/// Ergodic rate E[ln(1 + SINR)] in nats/s/Hz as the double integral over the
/// serving distance and the rate variable x (threshold e^x - 1).
inline double rate_analytic(const UplinkConfig& cfg) {
    detail::require_analytic(cfg);
    const double exponent = cfg.alpha * (1.0 - cfg.epsilon);
    const auto spec = numerics::QuadratureSpec{}.with_tolerance(1e-8, 1e-6);
    auto over_x = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double rscale = cfg.mu * std::pow(r, exponent);
        auto inner = [&](double x) {
            const double s = std::expm1(x) * rscale;
            const double noise = std::exp(-s * cfg.noise_w);
            if (noise == 0.0) return 0.0;
            const double l = interference_laplace(cfg, s, r);
            return noise * l;
        };
        return geometry::serving_distance_pdf(r, cfg.lambda) * numerics::integral(inner, 0.0, INFINITY, spec);
    };
    return numerics::integral(over_x, 0.0, INFINITY, spec);
}

/// Rate through the threshold integral of the coverage curve,
/// int_0^inf P_c(e^x - 1) dx.
inline double rate_from_coverage(const UplinkConfig& cfg) {
    detail::require_analytic(cfg);
    return numerics::integral([&](double x) { return x == 0.0 ? 1.0 : coverage_analytic(cfg, std::expm1(x)); }, 0.0,
                              INFINITY, numerics::QuadratureSpec{}.with_tolerance(1e-8, 1e-6));
}

enum class Method { analytic, monte_carlo };

inline std::string_view to_string(Method m) { return m == Method::analytic ? "analytic" : "monte-carlo"; }

struct CoverageCurve {
    std::vector<double> thresholds_db;
    std::vector<double> coverage;
    std::vector<double> ci_low;   ///< Wilson 95 % bounds; equal to coverage for analytic curves
    std::vector<double> ci_high;
    Method method = Method::analytic;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct UplinkMonteCarlo {
    CoverageCurve coverage;
    McEstimate rate;  ///< E[ln(1 + SINR)]
    std::uint64_t realizations = 0;
};

/// Monte Carlo coverage and rate over independent snapshots. Each snapshot
/// contributes one SINR draw evaluated at every threshold.
inline UplinkMonteCarlo uplink_mc(const UplinkConfig& cfg, const std::vector<double>& thresholds_db,
                                  std::uint64_t realizations, std::uint64_t seed) {
    cfg.validate();
    if (realizations < 1) throw DomainError("uplink_mc: need at least one realization");
    const std::size_t chunks = numerics::kMonteCarloChunks;
    std::vector<double> thresholds;
    for (double db : thresholds_db) thresholds.push_back(db_to_linear(db));

    struct Partial {
        std::vector<std::uint64_t> hits;
        numerics::CompensatedSum rate, rate_sq;
    };
    std::vector<Partial> parts(chunks);
    numerics::parallel_chunks(realizations, chunks, seed, [&](std::size_t k, std::size_t begin, std::size_t end, RngStream& rng) {
        Partial& p = parts[k];
        p.hits.assign(thresholds.size(), 0);
        NetworkRealization net;
        for (std::size_t i = begin; i < end; ++i) {
            geometry::sample_network(net, cfg.model, cfg.lambda, cfg.window(), rng);
            const double sinr = sinr_sample(cfg, net, rng).sinr;
            for (std::size_t t = 0; t < thresholds.size(); ++t)
                if (sinr > thresholds[t]) ++p.hits[t];
            const double c = std::log1p(sinr);
            p.rate += c;
            p.rate_sq += c * c;
        }
    });

    UplinkMonteCarlo out;
    out.realizations = realizations;
    out.coverage.method = Method::monte_carlo;
    out.coverage.thresholds_db = thresholds_db;
    std::vector<std::uint64_t> hits(thresholds.size(), 0);
    numerics::CompensatedSum rate, rate_sq;
    for (const auto& p : parts) {
        if (p.hits.size() == hits.size())
            for (std::size_t t = 0; t < hits.size(); ++t) hits[t] += p.hits[t];
        rate.merge(p.rate);
        rate_sq.merge(p.rate_sq);
    }
    const double n = static_cast<double>(realizations);
    for (std::size_t t = 0; t < hits.size(); ++t) {
        const auto ci = numerics::wilson_interval(hits[t], realizations);
        out.coverage.coverage.push_back(static_cast<double>(hits[t]) / n);
        out.coverage.ci_low.push_back(ci.low);
        out.coverage.ci_high.push_back(ci.high);
    }
    const double mean = rate.value() / n;
    const double var = std::max(0.0, rate_sq.value() / n - mean * mean);
    out.rate = {mean, std::sqrt(var / n)};
    return out;
}

inline CoverageCurve coverage_mc(const UplinkConfig& cfg, const std::vector<double>& thresholds_db,
                                 std::uint64_t realizations, std::uint64_t seed) {
    return uplink_mc(cfg, thresholds_db, realizations, seed).coverage;
}

inline McEstimate rate_mc(const UplinkConfig& cfg, std::uint64_t realizations, std::uint64_t seed) {
    return uplink_mc(cfg, {}, realizations, seed).rate;
}

inline CoverageCurve coverage_curve_analytic(const UplinkConfig& cfg, const std::vector<double>& thresholds_db) {
    CoverageCurve out;
    out.method = Method::analytic;
    out.thresholds_db = thresholds_db;
    for (double db : thresholds_db) {
        const double p = coverage_analytic(cfg, db_to_linear(db));
        out.coverage.push_back(p);
        out.ci_low.push_back(p);
        out.ci_high.push_back(p);
    }
    return out;
}

}  // namespace fsonet::uplink
