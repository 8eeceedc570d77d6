#pragma once

// Subcommands: each turns a resolved ScenarioConfig into one CSV table.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fsonet/experiment/config.hpp"
#include "fsonet/experiment/csv.hpp"
#include "fsonet/fso_channel.hpp"
#include "fsonet/geometry.hpp"
#include "fsonet/hybrid_df.hpp"
#include "fsonet/irs.hpp"
#include "fsonet/numerics.hpp"
#include "fsonet/uplink_rf.hpp"

namespace fsonet::experiment {

struct SubcommandInfo {
    std::set<std::string> variables;
    std::string default_variable;
    std::string default_grid;
    const char* summary;
};

inline const std::map<std::string, SubcommandInfo>& subcommands() {
    static const std::map<std::string, SubcommandInfo> table = {
        {"coverage", {{"threshold_db"}, "threshold_db", "-10:1:20", "uplink coverage vs SINR threshold"}},
        {"rate", {{"lambda", "epsilon", "alpha"}, "epsilon", "0:0.2:1", "uplink ergodic rate vs a model parameter"}},
        {"fso", {{"snr_db"}, "snr_db", "-20:5:40", "FSO backhaul rate forms vs average SNR"}},
        {"hybrid", {{"threshold_db"}, "threshold_db", "-10:2:20", "end-to-end DF coverage vs threshold"}},
        {"irs", {{"n"}, "n", "1,2,5,10,20,40", "IRS spectral efficiency vs number of elements"}},
        {"diversity", {{"snr_db"}, "snr_db", "0:2:160", "outage vs average SNR and fitted slope"}},
        {"beamwaist", {{"w0_cm"}, "w0_cm", "1:0.25:6", "outage vs transmit beam waist"}},
        {"distances", {{"distance_km"}, "distance_km", "0:0.1:3", "CCDFs of serving and interferer link distances"}},
    };
    return table;
}

namespace detail {

inline std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
    return seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL * (index + 1);
}

inline bool has_closed_form(geometry::DistanceModel m) {
    return m == geometry::DistanceModel::ppp_rayleigh || m == geometry::DistanceModel::ppp_uniform;
}

inline CsvTable run_coverage(const ScenarioConfig& cfg) {
    CsvTable t({"threshold_db", "analytic", "mc", "mc_ci_low", "mc_ci_high"});
    const auto& grid = cfg.sweep.grid;
    const auto mc = uplink::coverage_mc(cfg.uplink, grid, cfg.sweep.mc_budget, cfg.sweep.seed);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = has_closed_form(cfg.uplink.model)
                                 ? uplink::coverage_analytic(cfg.uplink, uplink::db_to_linear(grid[i]))
                                 : std::nan("");
        t.add_numeric_row({grid[i], exact, mc.coverage[i], mc.ci_low[i], mc.ci_high[i]});
    }
    return t;
}

inline CsvTable run_rate(const ScenarioConfig& cfg) {
    const auto& var = cfg.sweep.variable;
    CsvTable t({var, "analytic", "threshold_integral", "mc", "mc_std_error"});
    for (std::size_t i = 0; i < cfg.sweep.grid.size(); ++i) {
        auto up = cfg.uplink;
        const double v = cfg.sweep.grid[i];
        if (var == "lambda") up.lambda = v;
        else if (var == "epsilon") up.epsilon = v;
        else up.alpha = v;
        try {
            up.validate();
        } catch (const DomainError& e) {
            throw ConfigError("sweep.grid", e.what());
        }
        const bool closed = has_closed_form(up.model);
        const double a = closed ? uplink::rate_analytic(up) : std::nan("");
        const double b = closed ? uplink::rate_from_coverage(up) : std::nan("");
        const auto mc = uplink::rate_mc(up, cfg.sweep.mc_budget, point_seed(cfg.sweep.seed, i));
        t.add_numeric_row({v, a, b, mc.value, mc.std_error});
    }
    return t;
}

inline CsvTable run_fso(const ScenarioConfig& cfg) {
    CsvTable t({"snr_db", "exact", "low", "upper", "high1", "high2", "mc", "mc_std_error", "outage"});
    const double varpi = cfg.varpi();
    const double threshold = uplink::db_to_linear(cfg.threshold_db);
    for (std::size_t i = 0; i < cfg.sweep.grid.size(); ++i) {
        const double db = cfg.sweep.grid[i];
        const auto spec = cfg.fso.with_electrical_snr_db(db);
        double high1 = std::nan("");
        try {
            high1 = fso::fso_rate_high1(spec, varpi);
        } catch (const DomainError&) {
            // logarithmic terms in the small-gain expansion; no power-law form
        }
        std::vector<numerics::CompensatedSum> s(numerics::kMonteCarloChunks), sq(numerics::kMonteCarloChunks);
        numerics::parallel_chunks(cfg.sweep.mc_budget, numerics::kMonteCarloChunks, point_seed(cfg.sweep.seed, i),
                                  [&](std::size_t k, std::size_t b, std::size_t e, numerics::RngStream& rng) {
                                      for (std::size_t j = b; j < e; ++j) {
                                          const double c = std::log1p(varpi * fso::fso_sample_snr(spec, rng));
                                          s[k] += c;
                                          sq[k] += c * c;
                                      }
                                  });
        numerics::CompensatedSum sum, sum_sq;
        for (std::size_t k = 0; k < s.size(); ++k) {
            sum.merge(s[k]);
            sum_sq.merge(sq[k]);
        }
        const double n = static_cast<double>(cfg.sweep.mc_budget);
        const double mean = sum.value() / n;
        const double se = std::sqrt(std::max(0.0, sum_sq.value() / n - mean * mean) / n);
        t.add_numeric_row({db, fso::fso_rate_exact(spec, varpi), fso::fso_rate_low(spec, varpi),
                           fso::fso_rate_upper(spec, varpi), high1, fso::fso_rate_high2(spec, varpi), mean, se,
                           fso::snr_cdf(spec, threshold)});
    }
    t.add_footer("detection=" + std::string(cfg.fso.detection == 1 ? "heterodyne" : "imdd") +
                 " varpi=" + format_number(varpi) + " outage_threshold_db=" + format_number(cfg.threshold_db));
    return t;
}

inline CsvTable run_hybrid(const ScenarioConfig& cfg) {
    CsvTable t({"threshold_db", "uplink_coverage", "backhaul_coverage", "coverage", "mc", "mc_ci_low", "mc_ci_high"});
    const auto spec = cfg.fso_link();
    const hybrid::HybridOptions opt{cfg.varpi(), cfg.half_duplex};
    const auto mc = hybrid::hybrid_mc(cfg.uplink, spec, cfg.sweep.grid, cfg.sweep.mc_budget, cfg.sweep.seed, opt);
    const bool closed = has_closed_form(cfg.uplink.model);
    for (std::size_t i = 0; i < cfg.sweep.grid.size(); ++i) {
        const double g = uplink::db_to_linear(cfg.sweep.grid[i]);
        const double up = closed ? uplink::coverage_analytic(cfg.uplink, g) : std::nan("");
        const double bh = fso::snr_ccdf(spec, g);
        t.add_numeric_row({cfg.sweep.grid[i], up, bh, up * bh, mc.coverage.coverage[i], mc.coverage.ci_low[i],
                           mc.coverage.ci_high[i]});
    }
    const double up_rate = closed ? uplink::rate_analytic(cfg.uplink) : std::nan("");
    const double bh_rate = fso::fso_rate_exact(spec, opt.varpi);
    t.add_footer("uplink_rate=" + format_number(up_rate) + " backhaul_rate=" + format_number(bh_rate) +
                 " rate=" + format_number(hybrid::pre_log(opt) * std::min(up_rate, bh_rate)) +
                 " rate_mc=" + format_number(mc.rate) + " half_duplex=" + (cfg.half_duplex ? "true" : "false"));
    return t;
}

inline CsvTable run_irs(const ScenarioConfig& cfg) {
    CsvTable t({"n", "design", "se", "se_std_error", "residual_interference", "df_baseline"});
    irs::IrsEnsembleConfig ens;
    ens.uplink = cfg.uplink;
    ens.backhaul = cfg.fso_link();
    ens.instances = cfg.sweep.mc_budget;
    ens.seed = cfg.sweep.seed;
    ens.mode = cfg.zf_mode;
    ens.n_grid.clear();
    for (double v : cfg.sweep.grid) {
        if (v != std::floor(v) || v < 1) throw ConfigError("sweep.grid", "N must be a positive integer");
        ens.n_grid.push_back(static_cast<int>(v));
    }
    const auto res = irs::se_comparison(ens);
    for (const auto& r : res.rows)
        t.add_row({std::to_string(r.n), std::string(irs::to_string(r.design)), format_number(r.se),
                   format_number(r.se_std_error), format_number(r.residual_interference),
                   format_number(res.df_baseline)});
    t.add_footer("min_elements_beating_df=" + std::to_string(res.min_elements) +
                 " relaxed_zf_se_at_max_n=" + format_number(res.relaxed_se_max_n));
    return t;
}

inline CsvTable run_diversity(const ScenarioConfig& cfg) {
    CsvTable t({"snr_db", "hybrid_outage", "fso_outage"});
    const double threshold = uplink::db_to_linear(cfg.threshold_db);
    const auto curve = hybrid::hybrid_outage_curve(cfg.uplink, cfg.fso, threshold, cfg.sweep.grid);
    const auto fso_curve = hybrid::fso_outage_curve(cfg.fso, threshold, cfg.sweep.grid);
    for (std::size_t i = 0; i < curve.snr_db.size(); ++i)
        t.add_numeric_row({curve.snr_db[i], curve.outage[i], fso_curve.outage[i]});
    const double predicted = hybrid::predicted_diversity(cfg.fso);
    const double asymptotic = hybrid::asymptotic_diversity(cfg.fso);
    try {
        const auto est = hybrid::diversity_estimate(curve, predicted);
        t.add_footer("slope=" + format_number(est.slope) + " fit_db=" + format_number(est.fit_low_db) + ":" +
                     format_number(est.fit_high_db) + " predicted=" + format_number(predicted) +
                     " asymptotic=" + format_number(asymptotic));
    } catch (const InsufficientDecayError& e) {
        t.add_footer(std::string("slope=unavailable reason=\"") + e.what() + "\" predicted=" + format_number(predicted));
    } catch (const DomainError& e) {
        throw ConfigError("sweep.grid", e.what());
    }
    return t;
}

inline CsvTable run_beamwaist(const ScenarioConfig& cfg) {
    CsvTable t({"sigma_ratio", "w0_cm", "wz_m", "g2", "outage"});
    const auto& bw = cfg.beamwaist;
    for (double ratio : bw.jitter_ratios) {
        fso::BeamWaistScenario s;
        s.turbulence = cfg.fso.turbulence;
        s.aperture_m = bw.aperture_m;
        s.jitter_m = ratio * bw.aperture_m;
        s.link_m = bw.link_m;
        s.wavelength_m = bw.wavelength_m;
        s.normalized_threshold = bw.normalized_threshold;
        for (double w0_cm : cfg.sweep.grid) {
            if (!(w0_cm > 0.0)) throw ConfigError("sweep.grid", "beam waist must be positive");
            const double wz = fso::gaussian_beam_waist(w0_cm / 100.0, s.wavelength_m, s.link_m);
            const auto p = fso::PointingParams::symmetric(s.jitter_m, s.aperture_m, wz);
            t.add_numeric_row({ratio, w0_cm, wz, p.g2(), fso::beam_waist_outage(s, w0_cm / 100.0)});
        }
        const auto best = fso::optimal_beam_waist(s, cfg.sweep.grid.front() / 100.0, cfg.sweep.grid.back() / 100.0,
                                                  static_cast<int>(std::max<std::size_t>(cfg.sweep.grid.size(), 3)));
        t.add_footer("optimum sigma_ratio=" + format_number(ratio) + " w0_cm=" + format_number(100.0 * best.w0_m) +
                     " outage=" + format_number(best.outage) + " interior=" + (best.interior ? "true" : "false"));
    }
    return t;
}

inline CsvTable run_distances(const ScenarioConfig& cfg) {
    CsvTable t({"distance_km", "serving_ccdf_analytic", "serving_ccdf_mc", "rz_ccdf_analytic", "rz_ccdf_mc"});
    const auto& up = cfg.uplink;
    const double window = up.window_km > 0.0 ? up.window_km : geometry::min_window_radius(up.lambda);
    const std::size_t chunks = numerics::kMonteCarloChunks;
    std::vector<std::vector<double>> serving(chunks), rz(chunks);
    numerics::parallel_chunks(cfg.sweep.mc_budget, chunks, cfg.sweep.seed,
                              [&](std::size_t k, std::size_t b, std::size_t e, numerics::RngStream& rng) {
                                  geometry::NetworkRealization net;
                                  for (std::size_t i = b; i < e; ++i) {
                                      geometry::sample_network(net, up.model, up.lambda, window, rng);
                                      serving[k].push_back(net.serving_distance_km);
                                      // One interferer per snapshot keeps the pooled sample unweighted.
                                      if (!net.interferers.empty()) {
                                          const auto pick = static_cast<std::size_t>(rng.uniform() * net.interferers.size());
                                          rz[k].push_back(net.interferers[std::min(pick, net.interferers.size() - 1)].rz_km);
                                      }
                                  }
                              });
    std::vector<double> all_serving, all_rz;
    for (std::size_t k = 0; k < chunks; ++k) {
        all_serving.insert(all_serving.end(), serving[k].begin(), serving[k].end());
        all_rz.insert(all_rz.end(), rz[k].begin(), rz[k].end());
    }
    std::sort(all_serving.begin(), all_serving.end());
    std::sort(all_rz.begin(), all_rz.end());
    auto ccdf = [](const std::vector<double>& v, double x) {
        if (v.empty()) return std::nan("");
        const auto above = v.end() - std::upper_bound(v.begin(), v.end(), x);
        return static_cast<double>(above) / static_cast<double>(v.size());
    };
    const bool ppp = up.model != geometry::DistanceModel::hexagonal && up.model != geometry::DistanceModel::full_ppp;
    for (double d : cfg.sweep.grid) {
        double rz_exact = std::nan("");
        if (up.model == geometry::DistanceModel::ppp_rayleigh) rz_exact = geometry::rz_ccdf_rayleigh(d, up.lambda);
        if (up.model == geometry::DistanceModel::ppp_uniform) rz_exact = geometry::rz_ccdf_uniform(d, up.lambda);
        const double serving_exact = ppp ? std::exp(-up.lambda * numerics::pi * d * d) : std::nan("");
        t.add_numeric_row({d, serving_exact, ccdf(all_serving, d), rz_exact, ccdf(all_rz, d)});
    }
    t.add_footer("model=" + std::string(geometry::to_string(up.model)));
    return t;
}

}  // namespace detail

/// Process exit status for a failed run: 2 for rejected configuration,
/// 3 for numerical non-convergence, 1 otherwise.
inline int exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
    if (dynamic_cast<const NonConvergenceError*>(&e)) return 3;
    return 1;
}

/// Fill in the default sweep of a subcommand when none was configured.
inline void apply_default_sweep(ScenarioConfig& cfg, const std::string& sub) {
    const auto it = subcommands().find(sub);
    if (it == subcommands().end()) throw ConfigError("subcommand", "unknown subcommand '" + sub + "'");
    if (cfg.sweep.variable.empty() && cfg.sweep.grid.empty()) {
        cfg.sweep.variable = it->second.default_variable;
        cfg.sweep.grid = detail::parse_grid("sweep.grid", it->second.default_grid);
    }
}

/// Run one subcommand on a resolved configuration and attach the
/// provenance footer.
inline CsvTable run(const std::string& sub, const ScenarioConfig& cfg) {
    const auto it = subcommands().find(sub);
    if (it == subcommands().end()) throw ConfigError("subcommand", "unknown subcommand '" + sub + "'");
    validate_sweep(cfg.sweep, it->second.variables);
    CsvTable t = [&] {
        if (sub == "coverage") return detail::run_coverage(cfg);
        if (sub == "rate") return detail::run_rate(cfg);
        if (sub == "fso") return detail::run_fso(cfg);
        if (sub == "hybrid") return detail::run_hybrid(cfg);
        if (sub == "irs") return detail::run_irs(cfg);
        if (sub == "diversity") return detail::run_diversity(cfg);
        if (sub == "beamwaist") return detail::run_beamwaist(cfg);
        return detail::run_distances(cfg);
    }();
    t.add_footer("subcommand=" + sub + " seed=" + std::to_string(cfg.sweep.seed) +
                 " mc_budget=" + std::to_string(cfg.sweep.mc_budget));
    t.add_footer("version=" + std::string(kArtifactVersion) + " config_fnv1a64=" + config_hash(cfg));
    return t;
}

}  // namespace fsonet::experiment
