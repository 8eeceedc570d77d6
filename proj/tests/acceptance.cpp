// Acceptance checks 1-9. Each prints one "criterion N: PASS|FAIL ..." line.
//   acceptance                 run all
//   acceptance --criterion N   run one; exit status 1 on FAIL

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "fsonet/experiment.hpp"
#include "fsonet/fso_channel.hpp"
#include "fsonet/hybrid_df.hpp"
#include "fsonet/irs.hpp"
#include "fsonet/uplink_rf.hpp"

using namespace fsonet;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::vector<double> range(double a, double step, double b) {
    std::vector<double> out;
    for (int i = 0; a + step * i <= b + 1e-9; ++i) out.push_back(a + step * i);
    return out;
}

// 1. Analytic vs Monte Carlo coverage for the cellular defaults.
Outcome criterion_1() {
    Outcome o;
    const auto cfg = experiment::preset("tableIII").uplink;
    const auto grid = range(-10, 1, 20);
    const auto t0 = std::chrono::steady_clock::now();
    const auto mc = uplink::coverage_mc(cfg, grid, 100000, 2024);
    double worst = 0.0, at = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = std::abs(uplink::coverage_analytic(cfg, uplink::db_to_linear(grid[i])) - mc.coverage[i]);
        if (d > worst) worst = d, at = grid[i];
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(worst <= 0.01, "max |analytic - mc| > 0.01");
    o.check(secs <= 300.0, "runtime above 5 min");
    o.note(fmt("max |analytic - mc| = %.4f at %g dB", worst, at));
    o.note(fmt("31 thresholds, 1e5 snapshots, %.1f s on %g worker(s)", secs, numerics::worker_count()));
    return o;
}

// 2. Rate identity and Monte Carlo agreement.
Outcome criterion_2() {
    Outcome o;
    const auto cfg = experiment::preset("tableIII").uplink;
    const double a = uplink::rate_analytic(cfg);
    // Independent threshold integral: int_0^inf P(SINR > e^t - 1) dt with Boost exp-sinh.
    boost::math::quadrature::exp_sinh<double> es;
    const double b = es.integrate([&](double t) { return uplink::coverage_analytic(cfg, std::expm1(t)); }, 1e-8);
    const auto mc = uplink::rate_mc(cfg, 100000, 77);
    o.check(std::abs(a - b) <= 1e-3, "analytic vs threshold integral beyond 1e-3 nats");
    o.check(std::abs(a - mc.value) <= 0.02 * a, "analytic vs MC beyond 2%");
    o.check(std::abs(b - mc.value) <= 0.02 * b, "threshold integral vs MC beyond 2%");
    o.note(fmt("analytic %.6f, threshold integral %.6f", a, b));
    o.note(fmt("MC %.6f +- %.4f nats", mc.value, mc.std_error));
    return o;
}

// 3. Composite SNR CDF against a 1e6-sample empirical CDF.
Outcome criterion_3() {
    Outcome o;
    double overall = 0.0;
    std::uint64_t seed = 300;
    for (const char* weather : {"clear_air", "moderate_fog", "moderate_rain"})
        for (int r : {1, 2}) {
            const auto spec = fso::weather_preset(weather).with_detection(r).with_electrical_snr_db(20.0);
            const std::size_t n = 1000000;
            std::vector<double> s(n);
            numerics::parallel_chunks(n, numerics::kMonteCarloChunks, seed++,
                                      [&](std::size_t, std::size_t b, std::size_t e, numerics::RngStream& rng) {
                                          for (std::size_t i = b; i < e; ++i) s[i] = fso::fso_sample_snr(spec, rng);
                                      });
            std::sort(s.begin(), s.end());
            // Evaluate at 400 empirical quantiles, both sides of each jump.
            double sup = 0.0;
            for (int k = 1; k < 400; ++k) {
                const std::size_t i = n * static_cast<std::size_t>(k) / 400;
                const double f = fso::snr_cdf(spec, s[i]);
                sup = std::max({sup, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
            }
            o.check(sup < 0.01, std::string(weather) + (r == 1 ? " heterodyne" : " IM/DD"));
            overall = std::max(overall, sup);
        }
    o.note(fmt("max sup-distance %.4f over 3 weather presets x 2 detection modes", overall));
    return o;
}

// 4. Moments, Jensen ordering and asymptotic tightness.
Outcome criterion_4() {
    Outcome o;
    double worst_moment = 0.0;
    for (const char* weather : {"clear_air", "moderate_fog", "moderate_rain"})
        for (int r : {1, 2}) {
            const auto spec = fso::weather_preset(weather).with_detection(r).with_electrical_snr_db(10.0);
            const double mu = spec.average_snr();
            o.check(std::abs(fso::snr_moment(spec, 0) - 1.0) <= 1e-12, "snr_moment(0) != 1");
            // Quadrature in units of the mean so the integrand is O(1).
            boost::math::quadrature::exp_sinh<double> es;
            const double mass = es.integrate([&](double y) { return mu * fso::snr_pdf(spec, mu * y); }, 1e-10);
            worst_moment = std::max(worst_moment, std::abs(mass - 1.0));
            for (int k : {1, 2}) {
                const double q =
                    es.integrate([&](double y) { return std::pow(y, k) * mu * fso::snr_pdf(spec, mu * y); }, 1e-10);
                const double closed = fso::snr_moment(spec, k) / std::pow(mu, k);
                worst_moment = std::max(worst_moment, std::abs(q / closed - 1.0));
            }
        }
    o.check(worst_moment <= 1e-4, "moment quadrature mismatch above 1e-4");
    o.note(fmt("worst moment relative error %.2e", worst_moment));

    int low_violations = 0, upper_violations = 0;
    double worst_high = 0.0;
    bool pattern = true;
    for (int r : {1, 2}) {
        const auto base = fso::weather_preset("clear_air").with_detection(r);
        const double varpi = fso::default_varpi(r);
        for (double db : range(-20.0, 60.0 / 19.0, 40.0)) {
            const auto spec = base.with_electrical_snr_db(db);
            const double exact = fso::fso_rate_exact(spec, varpi);
            if (!(fso::fso_rate_low(spec, varpi) <= exact)) ++low_violations;
            if (!(exact <= fso::fso_rate_upper(spec, varpi))) ++upper_violations;
        }
        const auto hi = base.with_electrical_snr_db(40.0);
        const double exact40 = fso::fso_rate_exact(hi, varpi);
        worst_high = std::max(worst_high, std::abs(fso::fso_rate_high2(hi, varpi) / exact40 - 1.0));
        worst_high = std::max(worst_high, std::abs(fso::fso_rate_high1(hi, varpi) / exact40 - 1.0));
        // Low-SNR gap: small at -20 dB, widening monotonically, clearly open by 0 dB.
        double prev = -1.0;
        for (double db : {-20.0, -15.0, -10.0, -5.0, 0.0}) {
            const auto spec = base.with_electrical_snr_db(db);
            const double gap = fso::fso_rate_low(spec, varpi) / fso::fso_rate_exact(spec, varpi) - 1.0;
            if (!(gap > prev)) pattern = false;
            if (db == -20.0 && !(gap <= 0.06)) pattern = false;
            if (db == 0.0 && !(gap >= 0.5)) pattern = false;
            prev = gap;
        }
    }
    o.check(low_violations == 0, std::to_string(low_violations) + "/40 grid points with low > exact");
    o.check(upper_violations == 0, std::to_string(upper_violations) + "/40 grid points with exact > upper");
    o.check(worst_high <= 0.02, "high-SNR form off by more than 2% at 40 dB");
    o.check(pattern, "low-SNR tightness pattern");
    o.note(fmt("high-SNR worst relative error at 40 dB %.4f", worst_high));
    return o;
}

// 5. Fitted diversity slopes against min(1, g^2/r, nu/r, kappa/r).
Outcome criterion_5() {
    Outcome o;
    struct Case {
        double g2, nu;
        int kappa, r;
        bool scatter_free;
    };
    const Case cases[] = {{1.2, 2.5, 2, 2, true}, {6.0, 1.5, 3, 2, true},     {6.0, 4.0, 1, 2, false},
                          {0.8, 2.296, 2, 1, false}, {6.0, 0.7, 2, 1, false}, {6.0, 4.0, 3, 1, true}};
    const auto cfg = uplink::UplinkConfig::table_iii();
    const auto grid = range(0, 2, 160);
    bool saturated = false;
    std::string slopes;
    for (const auto& c : cases) {
        fso::FsoLinkSpec spec;
        spec.detection = c.r;
        spec.turbulence = c.scatter_free ? fso::MalagaParams::gamma_gamma(c.nu, c.kappa)
                                         : fso::MalagaParams(c.nu, c.kappa, 0.1079, 0.596, 1.3265);
        spec.pointing = fso::PointingParams::from_coefficient(c.g2);
        const double predicted = std::min({1.0, c.g2 / c.r, c.nu / c.r, static_cast<double>(c.kappa) / c.r});
        const auto est = hybrid::diversity_estimate(hybrid::hybrid_outage_curve(cfg, spec, 1.0, grid), predicted);
        o.check(std::abs(est.slope - predicted) <= 0.1, fmt("slope %.3f vs predicted %.3f", est.slope, predicted));
        saturated |= predicted == 1.0 && std::abs(est.slope - 1.0) <= 0.1;
        slopes += (slopes.empty() ? "" : " ") + fmt("%.3f/%.2f", est.slope, predicted);
    }
    o.check(saturated, "no uplink-limited case saturating at 1");
    o.note("fitted/predicted " + slopes);
    return o;
}

// 6. Coverage trends in density, power control exponent and pathloss exponent.
Outcome criterion_6() {
    Outcome o;
    const auto base = experiment::preset("tableIII").uplink;
    auto cov = [](uplink::UplinkConfig c, double db) { return uplink::coverage_analytic(c, uplink::db_to_linear(db)); };

    // (a) decreasing in density
    const std::vector<double> lambdas = {0.05, 0.1, 0.25, 0.5, 1.0, 2.0};
    bool density_ok = true;
    double spread = 0.0;
    for (double db : {-5.0, 0.0, 5.0, 10.0}) {
        double prev = 2.0, lo = 2.0, hi = -1.0;
        for (double lam : lambdas) {
            auto c = base;
            c.lambda = lam;
            const double v = cov(c, db);
            if (!(v < prev)) density_ok = false;
            prev = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        spread = std::max(spread, hi - lo);
    }
    o.check(density_ok, fmt("coverage not decreasing in density (max spread over lambda %.2e)", spread));

    // (b) decreasing in epsilon at thresholds >= 5 dB, worst at epsilon = 1
    bool eps_ok = true;
    for (double db : {5.0, 10.0, 15.0, 20.0}) {
        double prev = 2.0;
        for (double eps : range(0.0, 0.2, 1.0)) {
            auto c = base;
            c.epsilon = eps;
            const double v = cov(c, db);
            if (!(v < prev)) eps_ok = false;
            prev = v;
        }
    }
    o.check(eps_ok, "coverage not decreasing in epsilon at >= 5 dB");

    // (c) pathloss exponent: ordered in alpha, with the gap peaking near 0 dB
    const auto grid = range(-10, 1, 20);
    std::vector<double> gap;
    bool alpha_order = true;
    for (double db : grid) {
        double prev = -1.0;
        for (double alpha : {3.0, 3.5, 4.0}) {
            auto c = base;
            c.alpha = alpha;
            const double v = cov(c, db);
            if (!(v > prev)) alpha_order = false;
            prev = v;
        }
        auto a3 = base, a4 = base;
        a3.alpha = 3.0;
        a4.alpha = 4.0;
        gap.push_back(cov(a4, db) - cov(a3, db));
    }
    const auto peak = static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    bool unimodal = true;
    for (std::size_t i = 1; i < gap.size(); ++i)
        if (i <= peak ? !(gap[i] > gap[i - 1]) : !(gap[i] < gap[i - 1])) unimodal = false;
    o.check(alpha_order, "coverage not ordered in alpha");
    o.check(std::abs(grid[peak]) <= 2.0 && unimodal, "alpha sensitivity not concentrated near 0 dB");
    o.note(fmt("alpha gap peaks at %g dB (%.3f)", grid[peak], gap[peak]));
    return o;
}

// 7. Beam waist optima. Outage depends on w0 only through w_z, which is
// smallest at the collimation waist; the search covers the collimated branch
// and any minimum below it must be the w_z twin of the collimated optimum.
Outcome criterion_7() {
    Outcome o;
    const double ratios[] = {3.5, 4.0, 4.5, 5.0};
    const double targets_cm[] = {2.1, 2.4, 2.7, 3.0};
    double prev = 0.0;
    std::string found;
    for (int k = 0; k < 4; ++k) {
        fso::BeamWaistScenario s;
        s.jitter_m = ratios[k] * s.aperture_m;
        const double wc = fso::collimation_waist(s.wavelength_m, s.link_m);
        const auto w_grid = range(wc, 0.0005, 0.08);
        // Unique interior minimum on a fine grid: differences change sign exactly once.
        int sign_changes = 0;
        double last = fso::beam_waist_outage(s, w_grid[0]), last_diff = 0.0;
        for (std::size_t i = 1; i < w_grid.size(); ++i) {
            const double v = fso::beam_waist_outage(s, w_grid[i]);
            const double d = v - last;
            if (last_diff != 0.0 && d != 0.0 && (d > 0) != (last_diff > 0)) ++sign_changes;
            if (d != 0.0) last_diff = d;
            last = v;
        }
        const auto best = fso::optimal_beam_waist(s, w_grid.front(), w_grid.back());
        const double cm = 100.0 * best.w0_m;
        o.check(sign_changes == 1 && best.interior, fmt("no unique interior minimum at ratio %.1f", ratios[k]));
        o.check(cm > prev, fmt("optimum does not shift upward at ratio %.1f", ratios[k]));
        o.check(std::abs(cm - targets_cm[k]) <= 0.25 * targets_cm[k],
                fmt("optimum %.2f cm vs %.1f cm target", cm, targets_cm[k]));
        // Below the collimation waist nothing beats the collimated optimum.
        double far_best = 1.0;
        for (double w : range(0.0002, 0.00005, wc)) far_best = std::min(far_best, fso::beam_waist_outage(s, w));
        o.check(far_best >= best.outage - 1e-6, fmt("sub-collimation waist beats optimum at ratio %.1f", ratios[k]));
        prev = cm;
        found += (found.empty() ? "" : ", ") + fmt("%.2f", cm);
    }
    o.note("optima {" + found + "} cm vs {2.1, 2.4, 2.7, 3.0}");
    return o;
}

// 8. IRS phase design suite.
Outcome criterion_8() {
    Outcome o;
    numerics::RngStream rng(800, 0);
    double worst_proj = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 2 + t % 30;
        const irs::CVec x = irs::complex_gaussian(n, rng), z = irs::complex_gaussian(n, rng);
        worst_proj = std::max(worst_proj, std::abs(irs::zf_solution(x, z).dot(z)) / (x.norm() * z.norm()));
    }
    o.check(worst_proj <= 1e-12, "ZF residual above 1e-12");

    // Exhaustive 256-level phase grid (phi_1 = 0 by common-phase invariance).
    double worst_ratio = 1.0;
    for (int n : {1, 2, 3})
        for (int t = 0; t < 5; ++t) {
            irs::IrsChannels ch;
            ch.h1 = irs::complex_gaussian(n, rng);
            ch.h2 = irs::complex_gaussian(n, rng);
            ch.hz.push_back(irs::complex_gaussian(n, rng));
            ch.weights.push_back(0.5 + rng.uniform());
            ch.noise = 0.1;
            const double achieved = irs::zf_objective(ch, irs::optimal_phases(ch));
            const int levels = 256;
            const int combos = n == 1 ? 1 : n == 2 ? levels : levels * levels;
            irs::PhaseVector p{std::vector<double>(n, 0.0)};
            double best = 0.0;
            for (int c = 0; c < combos; ++c) {
                if (n >= 2) p.phi[1] = 2 * numerics::pi * (c % levels) / levels;
                if (n == 3) p.phi[2] = 2 * numerics::pi * (c / levels) / levels;
                best = std::max(best, irs::zf_objective(ch, p));
            }
            worst_ratio = std::min(worst_ratio, achieved / best);
        }
    o.check(worst_ratio >= 0.99, "brute-force optimality below 99%");

    irs::IrsEnsembleConfig cfg;
    const auto res = irs::se_comparison(cfg);
    auto row = [&](std::size_t j, irs::PhaseDesign d) { return res.rows[j * 3 + static_cast<std::size_t>(d)]; };
    for (std::size_t j = 1; j < cfg.n_grid.size(); ++j)
        o.check(row(j, irs::PhaseDesign::optimal).se > row(j - 1, irs::PhaseDesign::optimal).se,
                "optimal SE not increasing at N=" + std::to_string(cfg.n_grid[j]));
    for (auto d : {irs::PhaseDesign::random, irs::PhaseDesign::fixed}) {
        double lo = 1e9, hi = -1e9, se = 0.0;
        for (std::size_t j = 0; j < cfg.n_grid.size(); ++j) {
            lo = std::min(lo, row(j, d).se);
            hi = std::max(hi, row(j, d).se);
            se = std::max(se, row(j, d).se_std_error);
        }
        // Flat: spread of the curve within four standard errors.
        o.check(hi - lo <= 4.0 * se, std::string(irs::to_string(d)) + " SE not flat");
    }
    o.check(res.min_elements > 0 && res.min_elements <= 10, "minimum N beating DF missing or above 10");
    o.note(fmt("ZF residual %.1e, brute-force ratio %.4f", worst_proj, worst_ratio));
    o.note("min N beating DF = " + std::to_string(res.min_elements) +
           fmt(", SE(optimal, N=40) %.3f vs DF %.3f", row(cfg.n_grid.size() - 1, irs::PhaseDesign::optimal).se,
               res.df_baseline));
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 9. Byte-identical CSV for identical config and seed.
Outcome criterion_9() {
    Outcome o;
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / ("fsonet_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::vector<std::string> runs = {"coverage --mc-budget 20000 --seed 9", "rate --mc-budget 5000 --seed 9",
                                           "fso --mc-budget 20000 --seed 9",      "hybrid --mc-budget 20000 --seed 9",
                                           "irs --mc-budget 1000 --seed 9",       "distances --mc-budget 20000 --seed 9",
                                           "diversity",                           "beamwaist"};
    int identical = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::string outputs[2];
        for (int k = 0; k < 2; ++k) {
            const auto path = dir / ("run" + std::to_string(i) + "_" + std::to_string(k) + ".csv");
            const std::string cmd = std::string(FSONET_CLI_PATH) + " " + runs[i] + " --out " + path.string();
            const int raw = std::system(cmd.c_str());
            o.check(WIFEXITED(raw) && WEXITSTATUS(raw) == 0, "run failed: " + runs[i]);
            outputs[k] = slurp(path);
        }
        const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
        o.check(same, "outputs differ: " + runs[i]);
        identical += same;
    }
    fs::remove_all(dir);
    o.note(std::to_string(identical) + "/" + std::to_string(runs.size()) + " subcommands byte-identical");
    return o;
}

const std::vector<std::function<Outcome()>> kCriteria = {criterion_1, criterion_2, criterion_3,
                                                         criterion_4, criterion_5, criterion_6,
                                                         criterion_7, criterion_8, criterion_9};

bool report(int n) {
    Outcome o;
    try {
        o = kCriteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s (%s)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc == 3 && std::string(argv[1]) == "--criterion") {
        const int n = std::atoi(argv[2]);
        if (n < 1 || n > 9) {
            std::fprintf(stderr, "criterion must be 1..9\n");
            return 2;
        }
        return report(n) ? 0 : 1;
    }
    if (argc != 1) {
        std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
        return 2;
    }
    bool all = true;
    for (int n = 1; n <= 9; ++n) all = report(n) && all;
    return all ? 0 : 1;
}
