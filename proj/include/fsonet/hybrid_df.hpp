#pragma once

// RF uplink followed by an FSO backhaul through a repetition-coded
// decode-and-forward base station.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fsonet/errors.hpp"
#include "fsonet/fso_channel.hpp"
#include "fsonet/uplink_rf.hpp"

namespace fsonet::hybrid {

using fso::FsoLinkSpec;
using uplink::UplinkConfig;

struct HybridOptions {
    double varpi = fso::kVarpiHeterodyne;
    bool half_duplex = false;  ///< apply a 1/2 pre-log for the two transmission slots
};

struct HybridResult {
    double coverage = 0.0;
    double rate = 0.0;
    double uplink_coverage = 0.0;
    double backhaul_coverage = 0.0;
    double uplink_rate = 0.0;
    double backhaul_rate = 0.0;
};

/// End-to-end SINR of the relayed link: the weaker hop decides.
inline double hybrid_sinr(const uplink::SinrSample& up, double backhaul_snr) {
    return std::min(up.sinr, backhaul_snr);
}

inline double hybrid_sinr(double up, double backhaul_snr) { return std::min(up, backhaul_snr); }

/// Hops fade independently, so end-to-end coverage is the product.
inline double hybrid_coverage(const UplinkConfig& cfg, const FsoLinkSpec& spec, double threshold) {
    return uplink::coverage_analytic(cfg, threshold) * fso::snr_ccdf(spec, threshold);
}

inline double pre_log(const HybridOptions& opt) { return opt.half_duplex ? 0.5 : 1.0; }

inline double hybrid_rate(const UplinkConfig& cfg, const FsoLinkSpec& spec, const HybridOptions& opt = {}) {
    return pre_log(opt) * std::min(uplink::rate_analytic(cfg), fso::fso_rate_exact(spec, opt.varpi));
}

inline HybridResult hybrid_evaluate(const UplinkConfig& cfg, const FsoLinkSpec& spec, double threshold,
                                    const HybridOptions& opt = {}) {
    HybridResult out;
    out.uplink_coverage = uplink::coverage_analytic(cfg, threshold);
    out.backhaul_coverage = fso::snr_ccdf(spec, threshold);
    out.coverage = out.uplink_coverage * out.backhaul_coverage;
    out.uplink_rate = uplink::rate_analytic(cfg);
    out.backhaul_rate = fso::fso_rate_exact(spec, opt.varpi);
    out.rate = pre_log(opt) * std::min(out.uplink_rate, out.backhaul_rate);
    return out;
}

struct HybridMonteCarlo {
    uplink::CoverageCurve coverage;
    uplink::McEstimate uplink_rate;
    uplink::McEstimate backhaul_rate;
    double rate = 0.0;  ///< min of the two hop rates, times the pre-log
    std::uint64_t realizations = 0;
};

/// Joint simulation of both hops; coverage counts min-SINR exceedances.
inline HybridMonteCarlo hybrid_mc(const UplinkConfig& cfg, const FsoLinkSpec& spec,
                                  const std::vector<double>& thresholds_db, std::uint64_t realizations,
                                  std::uint64_t seed, const HybridOptions& opt = {}) {
    cfg.validate();
    spec.validate();
    if (realizations < 1) throw DomainError("hybrid_mc: need at least one realization");
    std::vector<double> thresholds;
    for (double db : thresholds_db) thresholds.push_back(uplink::db_to_linear(db));
    struct Partial {
        std::vector<std::uint64_t> hits;
        numerics::CompensatedSum up, up_sq, bh, bh_sq;
    };
    const std::size_t chunks = numerics::kMonteCarloChunks;
    std::vector<Partial> parts(chunks);
    numerics::parallel_chunks(realizations, chunks, seed,
                              [&](std::size_t k, std::size_t begin, std::size_t end, numerics::RngStream& rng) {
                                  Partial& p = parts[k];
                                  p.hits.assign(thresholds.size(), 0);
                                  geometry::NetworkRealization net;
                                  for (std::size_t i = begin; i < end; ++i) {
                                      geometry::sample_network(net, cfg.model, cfg.lambda, cfg.window(), rng);
                                      const double up = uplink::sinr_sample(cfg, net, rng).sinr;
                                      const double bh = fso::fso_sample_snr(spec, rng);
                                      const double e2e = hybrid_sinr(up, bh);
                                      for (std::size_t t = 0; t < thresholds.size(); ++t)
                                          if (e2e > thresholds[t]) ++p.hits[t];
                                      const double cu = std::log1p(up), cb = std::log1p(opt.varpi * bh);
                                      p.up += cu;
                                      p.up_sq += cu * cu;
                                      p.bh += cb;
                                      p.bh_sq += cb * cb;
                                  }
                              });
    HybridMonteCarlo out;
    out.realizations = realizations;
    out.coverage.method = uplink::Method::monte_carlo;
    out.coverage.thresholds_db = thresholds_db;
    std::vector<std::uint64_t> hits(thresholds.size(), 0);
    numerics::CompensatedSum up, up_sq, bh, bh_sq;
    for (const auto& p : parts) {
        if (p.hits.size() == hits.size())
            for (std::size_t t = 0; t < hits.size(); ++t) hits[t] += p.hits[t];
        up.merge(p.up);
        up_sq.merge(p.up_sq);
        bh.merge(p.bh);
        bh_sq.merge(p.bh_sq);
    }
    const double n = static_cast<double>(realizations);
    for (std::size_t t = 0; t < hits.size(); ++t) {
        const auto ci = numerics::wilson_interval(hits[t], realizations);
        out.coverage.coverage.push_back(static_cast<double>(hits[t]) / n);
        out.coverage.ci_low.push_back(ci.low);
        out.coverage.ci_high.push_back(ci.high);
    }
    auto estimate = [n](const numerics::CompensatedSum& s, const numerics::CompensatedSum& sq) {
        const double mean = s.value() / n;
        return uplink::McEstimate{mean, std::sqrt(std::max(0.0, sq.value() / n - mean * mean) / n)};
    };
    out.uplink_rate = estimate(up, up_sq);
    out.backhaul_rate = estimate(bh, bh_sq);
    out.rate = pre_log(opt) * std::min(out.uplink_rate.value, out.backhaul_rate.value);
    return out;
}

/// Diversity order min(1, g^2/r, nu/r, kappa/r).
inline double predicted_diversity(const FsoLinkSpec& spec) {
    const double r = spec.detection;
    const auto& t = spec.turbulence;
    return std::min({1.0, spec.pointing.g2() / r, t.nu() / r, t.kappa() / r});
}

/// Slope implied by the small-gain behaviour of the turbulence density.
/// Agrees with predicted_diversity when the scatter power zeta is zero;
/// otherwise the first Bessel term caps the FSO hop at min(g^2, nu, 1)/r.
inline double asymptotic_diversity(const FsoLinkSpec& spec) { return std::min(1.0, fso::fso_diversity_order(spec)); }

struct OutageCurve {
    std::vector<double> snr_db;
    std::vector<double> outage;
};

/// End-to-end outage at threshold Gamma as both hops' average SNR grows.
/// The uplink hop is taken noise-limited at average SNR rho over a unit
/// link (interference would impose a floor); the backhaul has mu_r = rho.
inline OutageCurve hybrid_outage_curve(const UplinkConfig& cfg, const FsoLinkSpec& spec, double threshold,
                                       const std::vector<double>& snr_db) {
    OutageCurve out;
    out.snr_db = snr_db;
    for (double db : snr_db) {
        UplinkConfig up = cfg;
        up.noise_w = 1.0 / (cfg.mu * uplink::db_to_linear(db));
        const double a = uplink::outage_noise_limited(up, threshold);
        const double b = fso::snr_cdf(spec.with_electrical_snr_db(db), threshold);
        out.outage.push_back(a + b - a * b);
    }
    return out;
}

inline OutageCurve fso_outage_curve(const FsoLinkSpec& spec, double threshold, const std::vector<double>& snr_db) {
    OutageCurve out;
    out.snr_db = snr_db;
    for (double db : snr_db) out.outage.push_back(fso::snr_cdf(spec.with_electrical_snr_db(db), threshold));
    return out;
}

struct DiversityEstimate {
    double slope = 0.0;
    double fit_low_db = 0.0;
    double fit_high_db = 0.0;
    double predicted = 0.0;
};

/// Least-squares log-log slope over the highest decade of the curve whose
/// local slopes vary by less than 5 %.
inline DiversityEstimate diversity_estimate(const OutageCurve& curve, double predicted) {
    const auto& x = curve.snr_db;
    const auto& y = curve.outage;
    if (x.size() != y.size() || x.size() < 3) throw DomainError("diversity_estimate: need at least three points");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw DomainError("diversity_estimate: SNR grid must increase");
    std::size_t n = 0;
    while (n < y.size() && y[n] > 0.0) {
        if (y[n] > 1.0 || !std::isfinite(y[n])) throw DomainError("diversity_estimate: outage outside (0, 1]");
        ++n;
    }
    if (n < 3 || x[n - 1] - x[0] < 20.0) throw DomainError("diversity_estimate: curve must span at least 20 dB");
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        slope[i] = -(std::log10(y[i + 1]) - std::log10(y[i])) / ((x[i + 1] - x[i]) / 10.0);
    if (slope.back() < 0.02) throw InsufficientDecayError("diversity_estimate: outage floor detected");

    for (std::size_t hi = n - 1; hi >= 1; --hi) {
        std::size_t lo = hi;
        while (lo > 0 && x[hi] - x[lo - 1] <= 10.0 + 1e-9) --lo;
        if (x[hi] - x[lo] < 10.0 - 1e-9) break;
        const auto [mn, mx] = std::minmax_element(slope.begin() + lo, slope.begin() + hi);
        const double mean = 0.5 * (*mn + *mx);
        if (mean > 0.0 && (*mx - *mn) / mean < 0.05) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const double m = static_cast<double>(hi - lo + 1);
            for (std::size_t i = lo; i <= hi; ++i) {
                const double u = x[i] / 10.0, v = std::log10(y[i]);
                sx += u;
                sy += v;
                sxx += u * u;
                sxy += u * v;
            }
            const double fit = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            return {-fit, x[lo], x[hi], predicted};
        }
    }
    throw InsufficientDecayError("diversity_estimate: no decade with a stable slope");
}

}  // namespace fsonet::hybrid
