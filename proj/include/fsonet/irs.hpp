#pragma once

// Intelligent reflecting surface at the base station: phase-shift model,
// SINR with interference, zero-forcing phase design and an ensemble
// comparison of spectral efficiency against the decode-and-forward link.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fsonet/errors.hpp"
#include "fsonet/geometry.hpp"
#include "fsonet/hybrid_df.hpp"
#include "fsonet/numerics.hpp"
#include "fsonet/uplink_rf.hpp"

namespace fsonet::irs {

using CVec = Eigen::VectorXcd;
using numerics::pi;
using numerics::RngStream;

/// Channels of one IRS snapshot. The SINR is
/// |h1^H Phi h2|^2 / (sum_z w_z |hz^H Phi h2|^2 + noise).
struct IrsChannels {
    CVec h1;                      ///< UE to IRS
    CVec h2;                      ///< IRS to destination
    std::vector<CVec> hz;         ///< interferers to IRS
    std::vector<double> weights;  ///< w_z = r_z^{alpha eps} d_z^{-alpha}
    double noise = 0.0;

    Eigen::Index size() const { return h1.size(); }

    void validate() const {
        if (h1.size() < 1) throw DomainError("IrsChannels: need at least one element");
        if (h2.size() != h1.size()) throw DomainError("IrsChannels: h1 and h2 lengths differ");
        if (!h1.allFinite() || !h2.allFinite()) throw DomainError("IrsChannels: non-finite channel");
        if (h1.norm() == 0.0 || h2.norm() == 0.0) throw DomainError("IrsChannels: zero desired channel");
        if (hz.size() != weights.size()) throw DomainError("IrsChannels: one weight per interferer");
        for (std::size_t z = 0; z < hz.size(); ++z) {
            if (hz[z].size() != h1.size() || !hz[z].allFinite())
                throw DomainError("IrsChannels: bad interferer channel");
            if (!(weights[z] >= 0.0)) throw DomainError("IrsChannels: negative interferer weight");
        }
        if (!(noise >= 0.0)) throw DomainError("IrsChannels: negative noise");
    }
};

/// Phase shifts of the reflecting elements; Phi = diag(e^{j phi_n}).
struct PhaseVector {
    std::vector<double> phi;

    CVec diagonal() const {
        CVec d(static_cast<Eigen::Index>(phi.size()));
        for (std::size_t n = 0; n < phi.size(); ++n) d[n] = std::polar(1.0, phi[n]);
        return d;
    }
};

inline CVec reflected(const IrsChannels& ch, const PhaseVector& p) {
    if (static_cast<Eigen::Index>(p.phi.size()) != ch.size()) throw DomainError("irs: phase vector length mismatch");
    return p.diagonal().cwiseProduct(ch.h2);
}

/// Total weighted interference power sum_z w_z |hz^H x|^2 for a reflected beam x.
inline double interference_power(const IrsChannels& ch, const CVec& x) {
    numerics::CompensatedSum sum;
    for (std::size_t z = 0; z < ch.hz.size(); ++z) sum += ch.weights[z] * std::norm(ch.hz[z].dot(x));
    return sum.value();
}

inline double sinr_for_beam(const IrsChannels& ch, const CVec& x) {
    const double signal = std::norm(ch.h1.dot(x));
    const double denom = interference_power(ch, x) + ch.noise;
    if (denom == 0.0) throw DomainError("irs_sinr: no noise and no interference");
    return signal / denom;
}

inline double irs_sinr(const IrsChannels& ch, const PhaseVector& p) {
    ch.validate();
    return sinr_for_beam(ch, reflected(ch, p));
}

/// x = (I - hz hz^H / |hz|^2) h1, the part of h1 orthogonal to hz.
inline CVec zf_solution(const CVec& h1, const CVec& hz) {
    const double n2 = hz.squaredNorm();
    if (!(n2 > 0.0)) throw DomainError("zf_solution: interferer channel has zero norm");
    if (hz.size() != h1.size()) throw DomainError("zf_solution: length mismatch");
    return h1 - hz * (hz.dot(h1) / n2);
}

/// Projection of h1 onto the null space of all interferer channels at once.
inline CVec zf_solution_multi(const CVec& h1, const std::vector<CVec>& hz) {
    if (hz.empty()) return h1;
    const auto k = static_cast<Eigen::Index>(hz.size());
    if (k >= h1.size()) throw DomainError("zf_solution_multi: need more elements than interferers");
    Eigen::MatrixXcd z(h1.size(), k);
    for (Eigen::Index i = 0; i < k; ++i) z.col(i) = hz[i];
    return h1 - z * z.completeOrthogonalDecomposition().solve(h1);
}

enum class ZfMode { strongest, all };

inline std::size_t strongest_interferer(const IrsChannels& ch) {
    std::size_t best = 0;
    for (std::size_t z = 1; z < ch.weights.size(); ++z)
        if (ch.weights[z] > ch.weights[best]) best = z;
    return best;
}

/// Target beam direction for the phase design: h1 without interferers,
/// otherwise its projection away from the strongest (or every) interferer.
inline CVec zf_target(const IrsChannels& ch, ZfMode mode = ZfMode::strongest) {
    ch.validate();
    if (ch.hz.empty()) return ch.h1;
    if (mode == ZfMode::all) return zf_solution_multi(ch.h1, ch.hz);
    const auto& z = ch.hz[strongest_interferer(ch)];
    if (z.squaredNorm() == 0.0) return ch.h1;
    return zf_solution(ch.h1, z);
}

/// phi_n = angle(x_n / h2_n); elements with h2_n = 0 get phase 0.
inline PhaseVector phases_for_target(const CVec& target, const CVec& h2) {
    PhaseVector p;
    p.phi.resize(static_cast<std::size_t>(h2.size()));
    for (Eigen::Index n = 0; n < h2.size(); ++n)
        p.phi[n] = (h2[n] == 0.0 || target[n] == 0.0) ? 0.0 : std::arg(target[n] / h2[n]);
    return p;
}

inline PhaseVector optimal_phases(const IrsChannels& ch, ZfMode mode = ZfMode::strongest) {
    return phases_for_target(zf_target(ch, mode), ch.h2);
}

/// SINR of the unconstrained beam along the ZF target, scaled to the power
/// |h2|^2 the surface reflects. Interference from projected users is zero.
inline double relaxed_sinr(const IrsChannels& ch, ZfMode mode = ZfMode::strongest) {
    const CVec x = zf_target(ch, mode);
    const double n = x.norm();
    if (n == 0.0) return 0.0;
    return sinr_for_beam(ch, x * (ch.h2.norm() / n));
}

/// Alignment objective |x^H Phi h2|^2 for the ZF target x.
inline double zf_objective(const IrsChannels& ch, const PhaseVector& p, ZfMode mode = ZfMode::strongest) {
    return std::norm(zf_target(ch, mode).dot(reflected(ch, p)));
}

enum class PhaseDesign { optimal, random, fixed };

inline std::string_view to_string(PhaseDesign d) {
    switch (d) {
        case PhaseDesign::optimal: return "optimal";
        case PhaseDesign::random: return "random";
        case PhaseDesign::fixed: return "fixed";
    }
    return "?";
}

inline PhaseVector phase_design(const IrsChannels& ch, PhaseDesign kind, RngStream& rng,
                                ZfMode mode = ZfMode::strongest) {
    switch (kind) {
        case PhaseDesign::optimal: return optimal_phases(ch, mode);
        case PhaseDesign::random: {
            PhaseVector p;
            for (Eigen::Index n = 0; n < ch.size(); ++n) p.phi.push_back(2.0 * pi * rng.uniform());
            return p;
        }
        case PhaseDesign::fixed: return PhaseVector{std::vector<double>(static_cast<std::size_t>(ch.size()), 0.0)};
    }
    throw DomainError("phase_design: unknown design");
}

inline CVec complex_gaussian(Eigen::Index n, RngStream& rng) {
    CVec v(n);
    const double s = std::sqrt(0.5);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = {s * rng.normal(), s * rng.normal()};
    return v;
}

struct IrsEnsembleConfig {
    uplink::UplinkConfig uplink = uplink::UplinkConfig::table_iii();
    fso::FsoLinkSpec backhaul = fso::FsoLinkSpec{}.with_electrical_snr_db(20.0);
    std::vector<int> n_grid = {1, 2, 5, 10, 20, 40};
    std::uint64_t instances = 2000;
    std::uint64_t seed = 1;
    ZfMode mode = ZfMode::strongest;
    double window_km = 0.0;  ///< 0 selects the minimum admissible window

    void validate() const {
        uplink.validate();
        if (n_grid.empty()) throw DomainError("IrsEnsembleConfig: empty N grid");
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            if (n_grid[i] < 1) throw DomainError("IrsEnsembleConfig: N must be positive");
            if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw DomainError("IrsEnsembleConfig: N grid must increase");
        }
        if (instances < 1) throw DomainError("IrsEnsembleConfig: need at least one instance");
    }

    double window() const { return window_km > 0.0 ? window_km : geometry::min_window_radius(uplink.lambda); }
};

/// One snapshot: network drawn from the uplink model, unit-variance complex
/// Gaussian IRS channels, desired pathloss folded into h1, noise expressed
/// relative to the mean fading power 1/mu.
inline IrsChannels sample_channels(const IrsEnsembleConfig& cfg, const geometry::NetworkRealization& net, int n,
                                   RngStream& rng) {
    const auto& up = cfg.uplink;
    IrsChannels ch;
    const double desired = std::pow(net.serving_distance_km, up.alpha * (up.epsilon - 1.0));
    ch.h1 = complex_gaussian(n, rng) * std::sqrt(desired);
    ch.h2 = complex_gaussian(n, rng);
    for (const auto& z : net.interferers) {
        ch.hz.push_back(complex_gaussian(n, rng));
        ch.weights.push_back(std::pow(z.rz_km, up.alpha * up.epsilon) * std::pow(z.dz_km, -up.alpha));
    }
    ch.noise = up.noise_w * up.mu;
    return ch;
}

struct IrsSeRow {
    int n = 0;
    PhaseDesign design = PhaseDesign::optimal;
    double se = 0.0;
    double se_std_error = 0.0;
    double residual_interference = 0.0;  ///< mean weighted interference power
};

struct IrsComparison {
    std::vector<IrsSeRow> rows;
    double df_baseline = 0.0;
    int min_elements = -1;  ///< smallest N on the grid with optimal SE >= DF; -1 if none
    double relaxed_se_max_n = 0.0;
};

/// Spectral efficiency E[ln(1 + SINR)] per design and N, against the DF
/// rate of the hybrid link.
inline IrsComparison se_comparison(const IrsEnsembleConfig& cfg) {
    cfg.validate();
    const std::size_t nn = cfg.n_grid.size();
    constexpr std::size_t kDesigns = 3;
    struct Acc {
        std::vector<numerics::CompensatedSum> se, se_sq, intf;
        numerics::CompensatedSum relaxed;
    };
    const std::size_t chunks = numerics::kMonteCarloChunks;
    std::vector<Acc> acc(chunks);
    const double window = cfg.window();
    numerics::parallel_chunks(cfg.instances, chunks, cfg.seed,
                              [&](std::size_t k, std::size_t begin, std::size_t end, RngStream& rng) {
                                  Acc& a = acc[k];
                                  a.se.assign(nn * kDesigns, {});
                                  a.se_sq.assign(nn * kDesigns, {});
                                  a.intf.assign(nn * kDesigns, {});
                                  geometry::NetworkRealization net;
                                  for (std::size_t i = begin; i < end; ++i) {
                                      geometry::sample_network(net, cfg.uplink.model, cfg.uplink.lambda, window, rng);
                                      for (std::size_t j = 0; j < nn; ++j) {
                                          const auto ch = sample_channels(cfg, net, cfg.n_grid[j], rng);
                                          for (std::size_t d = 0; d < kDesigns; ++d) {
                                              const auto p = phase_design(ch, static_cast<PhaseDesign>(d), rng, cfg.mode);
                                              const CVec x = reflected(ch, p);
                                              const double c = std::log1p(sinr_for_beam(ch, x));
                                              a.se[j * kDesigns + d] += c;
                                              a.se_sq[j * kDesigns + d] += c * c;
                                              a.intf[j * kDesigns + d] += interference_power(ch, x);
                                          }
                                          if (j + 1 == nn) a.relaxed += std::log1p(relaxed_sinr(ch, cfg.mode));
                                      }
                                  }
                              });
    IrsComparison out;
    const double count = static_cast<double>(cfg.instances);
    numerics::CompensatedSum relaxed;
    for (std::size_t j = 0; j < nn; ++j)
        for (std::size_t d = 0; d < kDesigns; ++d) {
            numerics::CompensatedSum s, sq, in;
            for (const auto& a : acc) {
                if (a.se.empty()) continue;
                s.merge(a.se[j * kDesigns + d]);
                sq.merge(a.se_sq[j * kDesigns + d]);
                in.merge(a.intf[j * kDesigns + d]);
            }
            const double mean = s.value() / count;
            const double var = std::max(0.0, sq.value() / count - mean * mean);
            out.rows.push_back({cfg.n_grid[j], static_cast<PhaseDesign>(d), mean, std::sqrt(var / count),
                                in.value() / count});
        }
    for (const auto& a : acc) relaxed.merge(a.relaxed);
    out.relaxed_se_max_n = relaxed.value() / count;
    out.df_baseline = hybrid::hybrid_rate(cfg.uplink, cfg.backhaul);
    for (const auto& row : out.rows)
        if (row.design == PhaseDesign::optimal && row.se >= out.df_baseline) {
            out.min_elements = row.n;
            break;
        }
    return out;
}

}  // namespace fsonet::irs
