#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fsonet/hybrid_df.hpp"

using namespace fsonet;
using namespace fsonet::hybrid;

namespace {

std::vector<double> snr_grid(double hi = 160.0) {
    std::vector<double> g;
    for (double d = 0.0; d <= hi; d += 2.0) g.push_back(d);
    return g;
}

FsoLinkSpec make_spec(double g2, double nu, int kappa, int r, bool scatter_free) {
    FsoLinkSpec spec;
    spec.detection = r;
    spec.turbulence = scatter_free ? fso::MalagaParams::gamma_gamma(nu, kappa)
                                   : fso::MalagaParams(nu, kappa, 0.1079, 0.596, 1.3265);
    spec.pointing = fso::PointingParams::from_coefficient(g2);
    return spec;
}

}  // namespace

TEST(HybridSinr, MinimumOfHops) {
    EXPECT_EQ(hybrid_sinr(3.0, 5.0), 3.0);
    EXPECT_EQ(hybrid_sinr(5.0, 3.0), 3.0);
    EXPECT_EQ(hybrid_sinr(uplink::SinrSample{2.5, 1.0, 0.1}, INFINITY), 2.5);
}

TEST(HybridSinr, MinDistributionIsProductOfCcdfs) {
    // Independent exponentials: P[min > t] = e^{-t/a} e^{-t/b}.
    numerics::RngStream rng(31, 0);
    const int n = 100000;
    const double a = 2.0, b = 5.0, t = 1.5;
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (hybrid_sinr(rng.exponential(1.0 / a), rng.exponential(1.0 / b)) > t) ++hits;
    const auto ci = numerics::wilson_interval(hits, n);
    const double want = std::exp(-t / a - t / b);
    EXPECT_LE(ci.low, want);
    EXPECT_GE(ci.high, want);
}

TEST(HybridCoverage, ProductAndLimits) {
    const auto cfg = uplink::UplinkConfig::table_iii();
    const auto spec = fso::weather_preset("clear_air").with_electrical_snr_db(20.0);
    const double g = 1.0;
    EXPECT_NEAR(hybrid_coverage(cfg, spec, g), uplink::coverage_analytic(cfg, g) * fso::snr_ccdf(spec, g), 1e-15);
    EXPECT_LE(hybrid_coverage(cfg, spec, g), std::min(uplink::coverage_analytic(cfg, g), fso::snr_ccdf(spec, g)));
    auto dead = fso::weather_preset("clear_air").with_electrical_snr_db(-200.0);
    EXPECT_LT(hybrid_coverage(cfg, dead, g), 1e-12);
    auto quiet = cfg;
    quiet.noise_w = 0.0;
    quiet.lambda = 1e-9;
    const auto clean = fso::weather_preset("clear_air").with_electrical_snr_db(250.0);
    EXPECT_GT(hybrid_coverage(quiet, clean, 1e-6), 1.0 - 1e-5);
}

TEST(HybridCoverage, MonotoneInEitherHop) {
    const auto cfg = uplink::UplinkConfig::table_iii();
    double prev = 0.0;
    for (double db : {0.0, 10.0, 20.0, 30.0}) {
        const double p = hybrid_coverage(cfg, fso::FsoLinkSpec{}.with_electrical_snr_db(db), 1.0);
        EXPECT_GE(p, prev);
        prev = p;
    }
    const auto spec = fso::FsoLinkSpec{}.with_electrical_snr_db(15.0);
    double prev_noise = 1.0;
    for (double noise : {1e-14, 1e-12, 1e-10, 1e-8}) {
        auto c = cfg;
        c.noise_w = noise;
        const double p = hybrid_coverage(c, spec, 1.0);
        EXPECT_LE(p, prev_noise + 1e-12);
        prev_noise = p;
    }
}

TEST(HybridCoverage, MatchesMonteCarloMinSinr) {
    auto cfg = uplink::UplinkConfig::table_iii();
    const auto spec = fso::weather_preset("clear_air").with_electrical_snr_db(10.0);
    const std::vector<double> grid = {-5.0, 0.0, 5.0};
    const auto mc = hybrid_mc(cfg, spec, grid, 40000, 9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = hybrid_coverage(cfg, spec, uplink::db_to_linear(grid[i]));
        EXPECT_NEAR(mc.coverage.coverage[i], exact, 0.01) << grid[i];
    }
}

TEST(HybridRate, MinOfHopsAndPreLog) {
    const auto cfg = uplink::UplinkConfig::table_iii();
    const auto weak = fso::FsoLinkSpec{}.with_electrical_snr_db(-5.0);
    const double up = uplink::rate_analytic(cfg);
    const double bh = fso::fso_rate_exact(weak, 1.0);
    ASSERT_LT(bh, up);
    EXPECT_DOUBLE_EQ(hybrid_rate(cfg, weak), bh);
    EXPECT_DOUBLE_EQ(hybrid_rate(cfg, weak, {1.0, true}), 0.5 * bh);
    const auto strong = fso::FsoLinkSpec{}.with_electrical_snr_db(30.0);
    const auto res = hybrid_evaluate(cfg, strong, 1.0);
    EXPECT_DOUBLE_EQ(res.rate, res.uplink_rate);
    EXPECT_LE(res.rate, std::min(res.uplink_rate, res.backhaul_rate));
    EXPECT_LE(res.coverage, std::min(res.uplink_coverage, res.backhaul_coverage));
}

TEST(HybridRate, MatchesMonteCarloMinOfRates) {
    const auto cfg = uplink::UplinkConfig::table_iii();
    for (double db : {0.0, 20.0}) {
        const auto spec = fso::FsoLinkSpec{}.with_electrical_snr_db(db);
        const auto mc = hybrid_mc(cfg, spec, {}, 40000, 10);
        const double exact = hybrid_rate(cfg, spec);
        EXPECT_NEAR(mc.rate, exact, 0.02 * exact) << db;
    }
}

TEST(Diversity, PredictedFormula) {
    EXPECT_NEAR(predicted_diversity(make_spec(1.2, 2.5, 2, 2, true)), 0.6, 1e-12);
    EXPECT_NEAR(predicted_diversity(make_spec(80.0, 30.0, 30, 1, true)), 1.0, 1e-12);
    const auto het = make_spec(0.8, 2.5, 2, 1, true);
    const auto imdd = make_spec(0.8, 2.5, 2, 2, true);
    EXPECT_NEAR(predicted_diversity(het) / predicted_diversity(imdd), 2.0, 1e-12);
}

TEST(Diversity, FittedSlopesMatchPrediction) {
    struct Case {
        double g2, nu;
        int kappa, r;
        bool scatter_free;
        double expected;
    };
    const Case cases[] = {{1.2, 2.5, 2, 2, true, 0.6},  {6.0, 1.5, 3, 2, true, 0.75}, {6.0, 4.0, 1, 2, false, 0.5},
                          {0.8, 2.296, 2, 1, false, 0.8}, {6.0, 0.7, 2, 1, false, 0.7}, {6.0, 4.0, 3, 1, true, 1.0}};
    const auto cfg = uplink::UplinkConfig::table_iii();
    for (const auto& c : cases) {
        const auto spec = make_spec(c.g2, c.nu, c.kappa, c.r, c.scatter_free);
        const auto est = diversity_estimate(hybrid_outage_curve(cfg, spec, 1.0, snr_grid()), predicted_diversity(spec));
        EXPECT_NEAR(est.predicted, c.expected, 1e-12);
        EXPECT_NEAR(est.slope, c.expected, 0.1) << c.g2 << " " << c.nu;
        EXPECT_GE(est.fit_high_db - est.fit_low_db, 10.0 - 1e-9);
    }
}

TEST(Diversity, ScatterTermCapsFsoSlope) {
    // With zeta > 0 the first Bessel term sets the slope to min(g^2, nu, 1)/r.
    const auto spec = make_spec(6.0, 2.296, 2, 2, false);
    EXPECT_NEAR(predicted_diversity(spec), 1.0, 1e-12);
    EXPECT_NEAR(asymptotic_diversity(spec), 0.5, 1e-12);
    const auto est = diversity_estimate(fso_outage_curve(spec, 1.0, snr_grid()), asymptotic_diversity(spec));
    EXPECT_NEAR(est.slope, 0.5, 0.02);
}

TEST(Diversity, HeterodyneDoublesFsoLimitedSlope) {
    const auto het = make_spec(1.2, 2.5, 2, 1, true);
    const auto imdd = make_spec(1.2, 2.5, 2, 2, true);
    const auto a = diversity_estimate(fso_outage_curve(het, 1.0, snr_grid()), 0.0);
    const auto b = diversity_estimate(fso_outage_curve(imdd, 1.0, snr_grid()), 0.0);
    EXPECT_NEAR(a.slope / b.slope, 2.0, 0.05);
}

TEST(Diversity, FloorAndBadInputs) {
    OutageCurve floor;
    for (double d = 0.0; d <= 40.0; d += 2.0) {
        floor.snr_db.push_back(d);
        floor.outage.push_back(0.05 + 0.9 * std::pow(10.0, -d / 10.0));
    }
    EXPECT_THROW(diversity_estimate(floor, 1.0), InsufficientDecayError);
    OutageCurve shortc{{0.0, 5.0, 10.0}, {0.5, 0.2, 0.1}};
    EXPECT_THROW(diversity_estimate(shortc, 1.0), DomainError);
    OutageCurve clean;
    for (double d = 0.0; d <= 40.0; d += 2.0) {
        clean.snr_db.push_back(d);
        clean.outage.push_back(0.3 * std::pow(10.0, -0.7 * d / 10.0));
    }
    EXPECT_NEAR(diversity_estimate(clean, 0.7).slope, 0.7, 1e-9);
}
