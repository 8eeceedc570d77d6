#pragma once

// Scenario configuration: INI-style text with flat sections and key = value
// lines. Unknown sections or keys are rejected so typos surface early.

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fsonet/errors.hpp"
#include "fsonet/fso_channel.hpp"
#include "fsonet/geometry.hpp"
#include "fsonet/irs.hpp"
#include "fsonet/uplink_rf.hpp"

namespace fsonet::experiment {

struct SweepSpec {
    std::string variable;
    std::vector<double> grid;
    std::uint64_t mc_budget = 100000;
    std::uint64_t seed = 1;
};

struct BeamWaistSpec {
    double aperture_m = 0.005;
    double link_m = 100.0;
    double wavelength_m = 1550e-9;
    double normalized_threshold = 3e-2;
    std::vector<double> jitter_ratios = {3.5, 4.0, 4.5, 5.0};  ///< sigma_s / a
};

struct ScenarioConfig {
    uplink::UplinkConfig uplink = uplink::UplinkConfig::table_iii();
    fso::FsoLinkSpec fso = fso::weather_preset("clear_air");
    double fso_snr_db = 20.0;  ///< average electrical SNR mu_r used to set the receiver noise
    bool fso_snr_from_noise = false;  ///< keep the noise variance as given instead
    double threshold_db = 0.0;
    bool half_duplex = false;
    irs::ZfMode zf_mode = irs::ZfMode::strongest;
    BeamWaistSpec beamwaist{};
    SweepSpec sweep{};
    std::string output;

    /// FSO link with the noise variance resolved from fso_snr_db.
    fso::FsoLinkSpec fso_link() const { return fso_snr_from_noise ? fso : fso.with_electrical_snr_db(fso_snr_db); }

    double varpi() const { return fso::default_varpi(fso.detection); }
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"tableIII", "clear_air", "moderate_fog", "moderate_rain"};
    return names;
}

/// Apply a named parameter preset: the cellular defaults or one weather case.
inline void apply_preset(ScenarioConfig& cfg, const std::string& name) {
    if (name == "tableIII") {
        cfg.uplink = uplink::UplinkConfig::table_iii();
        return;
    }
    try {
        const auto w = fso::weather_preset(name);
        cfg.fso.pathloss = w.pathloss;
    } catch (const DomainError&) {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
}

inline ScenarioConfig preset(const std::string& name) {
    ScenarioConfig cfg;
    apply_preset(cfg, name);
    return cfg;
}

namespace detail {

using boost::property_tree::ptree;

template <class T>
T parse_value(const std::string& field, const std::string& text) {
    try {
        return boost::lexical_cast<T>(boost::trim_copy(text));
    } catch (const boost::bad_lexical_cast&) {
        throw ConfigError(field, "cannot parse '" + text + "'");
    }
}

inline bool parse_bool(const std::string& field, const std::string& text) {
    const auto t = boost::to_lower_copy(boost::trim_copy(text));
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw ConfigError(field, "expected a boolean, got '" + text + "'");
}

/// A comma list "1, 2, 5" or an inclusive range "start:step:stop".
inline std::vector<double> parse_grid(const std::string& field, const std::string& text) {
    std::vector<double> out;
    const auto t = boost::trim_copy(text);
    if (t.empty()) return out;
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        boost::split(parts, t, boost::is_any_of(":"));
        if (parts.size() != 3) throw ConfigError(field, "range must be start:step:stop");
        const double a = parse_value<double>(field, parts[0]);
        const double step = parse_value<double>(field, parts[1]);
        const double b = parse_value<double>(field, parts[2]);
        if (!(step > 0.0) || b < a) throw ConfigError(field, "range needs step > 0 and stop >= start");
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
        if (count > 1000000) throw ConfigError(field, "range has too many points");
        for (long i = 0; i <= count; ++i) out.push_back(a + step * static_cast<double>(i));
        return out;
    }
    std::vector<std::string> parts;
    boost::split(parts, t, boost::is_any_of(","));
    for (const auto& p : parts) out.push_back(parse_value<double>(field, p));
    return out;
}

inline double positive(const std::string& field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be a positive finite number");
    return v;
}

inline void check_keys(const ptree& section, const std::string& name, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : section) {
        if (!value.empty()) throw ConfigError(name + "." + key, "nested keys are not supported");
        if (!allowed.count(key)) throw ConfigError(name + "." + key, "unknown key");
    }
}

}  // namespace detail

/// Overlay settings from INI text onto `cfg`.
inline void apply_ini(ScenarioConfig& cfg, std::istream& in) {
    using detail::parse_value;
    using detail::positive;
    detail::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"scenario", {"preset", "output"}},
        {"uplink", {"lambda", "alpha", "epsilon", "mu", "bandwidth_hz", "noise_w", "model", "window_km"}},
        {"fso",
         {"weather", "nu", "kappa", "b0", "rho", "omega", "theta_a", "theta_b", "aperture_m", "divergence_rad",
          "link_km", "attenuation_db_per_km", "cn2", "wavelength_m", "jitter_m", "sigma_x", "sigma_y", "mu_x", "mu_y",
          "beam_waist_m", "g2", "detection", "snr_db", "noise_var"}},
        {"hybrid", {"threshold_db", "half_duplex"}},
        {"irs", {"zf_mode"}},
        {"beamwaist", {"aperture_m", "link_m", "wavelength_m", "threshold", "ratios"}},
        {"sweep", {"variable", "grid", "mc_budget", "seed"}},
    };
    for (const auto& [name, section] : tree) {
        if (section.empty() && !section.data().empty()) throw ConfigError(name, "keys must live inside a [section]");
        const auto it = allowed.find(name);
        if (it == allowed.end()) throw ConfigError(name, "unknown section");
        detail::check_keys(section, name, it->second);
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(detail::ptree::path_type(path, '.'))) return *v;
        return std::nullopt;
    };

    if (auto v = get("scenario.preset")) {
        std::vector<std::string> names;
        boost::split(names, *v, boost::is_any_of(","));
        for (auto& n : names) apply_preset(cfg, boost::trim_copy(n));
    }
    if (auto v = get("scenario.output")) cfg.output = boost::trim_copy(*v);

    auto& up = cfg.uplink;
    if (auto v = get("uplink.lambda")) up.lambda = positive("uplink.lambda", parse_value<double>("uplink.lambda", *v));
    if (auto v = get("uplink.alpha")) up.alpha = parse_value<double>("uplink.alpha", *v);
    if (auto v = get("uplink.epsilon")) up.epsilon = parse_value<double>("uplink.epsilon", *v);
    if (auto v = get("uplink.mu")) up.mu = positive("uplink.mu", parse_value<double>("uplink.mu", *v));
    if (auto v = get("uplink.bandwidth_hz"))
        up.noise_w = uplink::noise_power_w(positive("uplink.bandwidth_hz", parse_value<double>("uplink.bandwidth_hz", *v)));
    if (auto v = get("uplink.noise_w")) up.noise_w = parse_value<double>("uplink.noise_w", *v);
    if (auto v = get("uplink.model")) {
        try {
            up.model = geometry::parse_distance_model(boost::trim_copy(*v));
        } catch (const DomainError& e) {
            throw ConfigError("uplink.model", e.what());
        }
    }
    if (auto v = get("uplink.window_km")) up.window_km = parse_value<double>("uplink.window_km", *v);
    try {
        up.validate();
    } catch (const DomainError& e) {
        throw ConfigError("uplink", e.what());
    }

    auto& f = cfg.fso;
    if (auto v = get("fso.weather")) {
        try {
            f.pathloss = fso::weather_preset(boost::trim_copy(*v)).pathloss;
        } catch (const DomainError& e) {
            throw ConfigError("fso.weather", e.what());
        }
    }
    {
        const auto& t = f.turbulence;
        double nu = t.nu(), b0 = t.b0(), rho = t.rho(), omega = t.omega(), ta = t.theta_a(), tb = t.theta_b();
        int kappa = t.kappa();
        bool touched = false;
        auto read = [&](const char* key, double& out) {
            if (auto v = get(std::string("fso.") + key)) {
                out = parse_value<double>(std::string("fso.") + key, *v);
                touched = true;
            }
        };
        read("nu", nu);
        read("b0", b0);
        read("rho", rho);
        read("omega", omega);
        read("theta_a", ta);
        read("theta_b", tb);
        if (auto v = get("fso.kappa")) {
            kappa = parse_value<int>("fso.kappa", *v);
            touched = true;
        }
        if (touched) {
            try {
                f.turbulence = fso::MalagaParams(nu, kappa, b0, rho, omega, ta, tb);
            } catch (const DomainError& e) {
                throw ConfigError("fso", e.what());
            }
        }
    }
    auto& pl = f.pathloss;
    if (auto v = get("fso.aperture_m")) {
        pl.aperture_m = positive("fso.aperture_m", parse_value<double>("fso.aperture_m", *v));
        f.pointing.aperture_m = pl.aperture_m;
    }
    if (auto v = get("fso.divergence_rad")) pl.divergence_rad = positive("fso.divergence_rad", parse_value<double>("fso.divergence_rad", *v));
    if (auto v = get("fso.link_km")) pl.link_km = positive("fso.link_km", parse_value<double>("fso.link_km", *v));
    if (auto v = get("fso.attenuation_db_per_km"))
        pl.attenuation_db_per_km = parse_value<double>("fso.attenuation_db_per_km", *v);
    if (auto v = get("fso.cn2")) pl.cn2 = positive("fso.cn2", parse_value<double>("fso.cn2", *v));
    if (auto v = get("fso.wavelength_m")) pl.wavelength_m = positive("fso.wavelength_m", parse_value<double>("fso.wavelength_m", *v));
    auto& pt = f.pointing;
    if (auto v = get("fso.beam_waist_m")) pt.beam_waist_m = positive("fso.beam_waist_m", parse_value<double>("fso.beam_waist_m", *v));
    if (auto v = get("fso.jitter_m")) pt.sigma_x = pt.sigma_y = positive("fso.jitter_m", parse_value<double>("fso.jitter_m", *v));
    if (auto v = get("fso.sigma_x")) pt.sigma_x = positive("fso.sigma_x", parse_value<double>("fso.sigma_x", *v));
    if (auto v = get("fso.sigma_y")) pt.sigma_y = positive("fso.sigma_y", parse_value<double>("fso.sigma_y", *v));
    if (auto v = get("fso.mu_x")) pt.mu_x = parse_value<double>("fso.mu_x", *v);
    if (auto v = get("fso.mu_y")) pt.mu_y = parse_value<double>("fso.mu_y", *v);
    if (auto v = get("fso.g2")) {
        if (get("fso.jitter_m") || get("fso.sigma_x") || get("fso.sigma_y"))
            throw ConfigError("fso.g2", "set either g2 or the jitter, not both");
        pt = fso::PointingParams::from_coefficient(positive("fso.g2", parse_value<double>("fso.g2", *v)), pt.aperture_m,
                                                   pt.beam_waist_m);
    }
    if (auto v = get("fso.detection")) {
        const auto d = boost::to_lower_copy(boost::trim_copy(*v));
        if (d == "heterodyne" || d == "1") f.detection = 1;
        else if (d == "imdd" || d == "im/dd" || d == "2") f.detection = 2;
        else throw ConfigError("fso.detection", "expected heterodyne or imdd");
    }
    if (auto v = get("fso.snr_db")) cfg.fso_snr_db = parse_value<double>("fso.snr_db", *v);
    if (auto v = get("fso.noise_var")) {
        if (get("fso.snr_db")) throw ConfigError("fso.noise_var", "set either snr_db or noise_var, not both");
        f.noise_var = positive("fso.noise_var", parse_value<double>("fso.noise_var", *v));
        cfg.fso_snr_from_noise = true;
    }
    try {
        f.validate();
    } catch (const DomainError& e) {
        throw ConfigError("fso", e.what());
    }

    if (auto v = get("hybrid.threshold_db")) cfg.threshold_db = parse_value<double>("hybrid.threshold_db", *v);
    if (auto v = get("hybrid.half_duplex")) cfg.half_duplex = detail::parse_bool("hybrid.half_duplex", *v);
    if (auto v = get("irs.zf_mode")) {
        const auto m = boost::trim_copy(*v);
        if (m == "strongest") cfg.zf_mode = irs::ZfMode::strongest;
        else if (m == "all") cfg.zf_mode = irs::ZfMode::all;
        else throw ConfigError("irs.zf_mode", "expected strongest or all");
    }
    auto& bw = cfg.beamwaist;
    if (auto v = get("beamwaist.aperture_m")) bw.aperture_m = positive("beamwaist.aperture_m", parse_value<double>("beamwaist.aperture_m", *v));
    if (auto v = get("beamwaist.link_m")) bw.link_m = positive("beamwaist.link_m", parse_value<double>("beamwaist.link_m", *v));
    if (auto v = get("beamwaist.wavelength_m")) bw.wavelength_m = positive("beamwaist.wavelength_m", parse_value<double>("beamwaist.wavelength_m", *v));
    if (auto v = get("beamwaist.threshold")) bw.normalized_threshold = positive("beamwaist.threshold", parse_value<double>("beamwaist.threshold", *v));
    if (auto v = get("beamwaist.ratios")) {
        bw.jitter_ratios = detail::parse_grid("beamwaist.ratios", *v);
        if (bw.jitter_ratios.empty()) throw ConfigError("beamwaist.ratios", "empty list");
        for (double r : bw.jitter_ratios) positive("beamwaist.ratios", r);
    }

    auto& sw = cfg.sweep;
    if (auto v = get("sweep.variable")) sw.variable = boost::trim_copy(*v);
    if (auto v = get("sweep.grid")) sw.grid = detail::parse_grid("sweep.grid", *v);
    if (auto v = get("sweep.mc_budget")) sw.mc_budget = parse_value<std::uint64_t>("sweep.mc_budget", *v);
    if (auto v = get("sweep.seed")) sw.seed = parse_value<std::uint64_t>("sweep.seed", *v);
}

inline void apply_ini_text(ScenarioConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    apply_ini(cfg, in);
}

inline void apply_ini_file(ScenarioConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    apply_ini(cfg, in);
}

/// Sweep checks shared by every subcommand: one variable from `allowed`,
/// a non-empty strictly increasing grid and an MC budget of at least 1000.
inline void validate_sweep(const SweepSpec& sw, const std::set<std::string>& allowed) {
    if (sw.variable.empty()) throw ConfigError("sweep.variable", "missing");
    if (!allowed.count(sw.variable)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError("sweep.variable", "'" + sw.variable + "' not valid here; expected one of " + list);
    }
    if (sw.grid.empty()) throw ConfigError("sweep.grid", "empty grid");
    for (std::size_t i = 0; i < sw.grid.size(); ++i) {
        if (!std::isfinite(sw.grid[i])) throw ConfigError("sweep.grid", "non-finite value");
        if (i > 0 && !(sw.grid[i] > sw.grid[i - 1])) throw ConfigError("sweep.grid", "grid must be strictly increasing");
    }
    if (sw.mc_budget < 1000) throw ConfigError("sweep.mc_budget", "must be at least 1000");
}

namespace detail {
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

/// Fully resolved configuration as sorted key=value lines.
inline std::string canonical(const ScenarioConfig& c) {
    using detail::num;
    std::map<std::string, std::string> kv;
    const auto& u = c.uplink;
    kv["uplink.lambda"] = num(u.lambda);
    kv["uplink.alpha"] = num(u.alpha);
    kv["uplink.epsilon"] = num(u.epsilon);
    kv["uplink.mu"] = num(u.mu);
    kv["uplink.noise_w"] = num(u.noise_w);
    kv["uplink.model"] = std::string(geometry::to_string(u.model));
    kv["uplink.window_km"] = num(u.window());
    const auto& t = c.fso.turbulence;
    kv["fso.nu"] = num(t.nu());
    kv["fso.kappa"] = std::to_string(t.kappa());
    kv["fso.b0"] = num(t.b0());
    kv["fso.rho"] = num(t.rho());
    kv["fso.omega"] = num(t.omega());
    kv["fso.theta_a"] = num(t.theta_a());
    kv["fso.theta_b"] = num(t.theta_b());
    const auto& p = c.fso.pathloss;
    kv["fso.aperture_m"] = num(p.aperture_m);
    kv["fso.divergence_rad"] = num(p.divergence_rad);
    kv["fso.link_km"] = num(p.link_km);
    kv["fso.attenuation_db_per_km"] = num(p.attenuation_db_per_km);
    kv["fso.cn2"] = num(p.cn2);
    kv["fso.wavelength_m"] = num(p.wavelength_m);
    const auto& q = c.fso.pointing;
    kv["fso.pointing"] = num(q.mu_x) + "," + num(q.mu_y) + "," + num(q.sigma_x) + "," + num(q.sigma_y) + "," +
                         num(q.aperture_m) + "," + num(q.beam_waist_m);
    kv["fso.detection"] = std::to_string(c.fso.detection);
    kv["fso.noise_var"] = num(c.fso_link().noise_var);
    kv["hybrid.threshold_db"] = num(c.threshold_db);
    kv["hybrid.half_duplex"] = c.half_duplex ? "true" : "false";
    kv["irs.zf_mode"] = c.zf_mode == irs::ZfMode::all ? "all" : "strongest";
    const auto& b = c.beamwaist;
    kv["beamwaist"] = num(b.aperture_m) + "," + num(b.link_m) + "," + num(b.wavelength_m) + "," + num(b.normalized_threshold);
    std::string ratios;
    for (double r : b.jitter_ratios) ratios += (ratios.empty() ? "" : ",") + num(r);
    kv["beamwaist.ratios"] = ratios;
    kv["sweep.variable"] = c.sweep.variable;
    std::string grid;
    for (double g : c.sweep.grid) grid += (grid.empty() ? "" : ",") + num(g);
    kv["sweep.grid"] = grid;
    kv["sweep.mc_budget"] = std::to_string(c.sweep.mc_budget);
    kv["sweep.seed"] = std::to_string(c.sweep.seed);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string config_hash(const ScenarioConfig& c) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical(c))));
    return buf;
}

}  // namespace fsonet::experiment
