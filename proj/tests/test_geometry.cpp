#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fsonet/geometry.hpp"
#include "fsonet/numerics.hpp"

using namespace fsonet;
using namespace fsonet::geometry;
using numerics::RngStream;

namespace {

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST(ServingDistance, MeanAndKs) {
    const double lambda = 0.25;
    RngStream rng(11, 0);
    std::vector<double> r(100000);
    for (auto& x : r) x = sample_serving_distance(lambda, rng);
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= r.size();
    EXPECT_NEAR(mean, 1.0 / (2.0 * std::sqrt(lambda)), 0.01);
    const auto s = sorted(r);
    EXPECT_LT(numerics::ks_statistic(s, [&](double x) { return 1.0 - std::exp(-pi * lambda * x * x); }), 0.01);
}

TEST(ServingDistance, ShrinksWithDensity) {
    RngStream rng(3, 0);
    double mean = 0.0;
    for (int i = 0; i < 10000; ++i) mean += sample_serving_distance(1e6, rng);
    EXPECT_LT(mean / 10000, 1e-3);
    EXPECT_THROW(sample_serving_distance(0.0, rng), DomainError);
}

TEST(JointDensity, Values) {
    EXPECT_EQ(joint_rz_density(0.0, 1.3, 0.25), 0.0);
    EXPECT_NEAR(joint_rz_density(1.0, 1.0, 0.25), std::pow(2 * pi * 0.25, 2) * std::exp(-0.5 * pi), 1e-14);
    EXPECT_NEAR(joint_rz_density(1.0, 1.0, 0.25), 0.5130, 1e-4);
    const double marginal = numerics::integral([](double r) { return serving_distance_pdf(r, 0.25); }, 0.0, INFINITY);
    EXPECT_NEAR(marginal * marginal, 1.0, 1e-9);
    // Direct 2-D integration of the joint density.
    const double total = numerics::integral(
        [](double r1) {
            return numerics::integral([&](double r2) { return joint_rz_density(r1, r2, 0.25); }, 0.0, INFINITY);
        },
        0.0, INFINITY);
    EXPECT_NEAR(total, 1.0, 1e-7);
}

TEST(Hexagon, CellAreaIsInverseDensity) {
    EXPECT_NEAR(hex_cell_area(0.25), 4.0, 1e-12);
    EXPECT_NEAR(hex_cell_area(3.0), 1.0 / 3.0, 1e-12);
}

TEST(Window, Validation) {
    RngStream rng(1, 0);
    EXPECT_THROW(sample_network(DistanceModel::ppp_rayleigh, 0.25, 5.0, rng), DomainError);
    EXPECT_THROW(sample_network(DistanceModel::ppp_rayleigh, -1.0, 50.0, rng), DomainError);
    EXPECT_NO_THROW(sample_network(DistanceModel::ppp_rayleigh, 0.25, min_window_radius(0.25), rng));
}

TEST(PppRayleigh, InterfererCountIsPoisson) {
    RngStream rng(5, 0);
    double total = 0.0;
    const int runs = 10000;
    NetworkRealization net;
    for (int i = 0; i < runs; ++i) {
        sample_network(net, DistanceModel::ppp_rayleigh, 0.25, 30.0, rng);
        total += net.interferers.size();
    }
    EXPECT_NEAR(total / runs / (0.25 * pi * 900.0), 1.0, 0.02);
}

TEST(PppRayleigh, ExclusionAndMarginal) {
    RngStream rng(6, 0);
    std::vector<double> rz;
    while (rz.size() < 100000) {
        const auto net = sample_network(DistanceModel::ppp_rayleigh, 0.25, 20.0, rng);
        for (const auto& z : net.interferers) {
            EXPECT_GE(z.dz_km, net.serving_distance_km);
            EXPECT_GT(z.rz_km, 0.0);
            rz.push_back(z.rz_km);
        }
    }
    rz.resize(100000);
    const auto s = sorted(rz);
    EXPECT_LT(numerics::ks_statistic(s, [](double r) { return 1.0 - rz_ccdf_rayleigh(r, 0.25); }), 0.01);
}

TEST(PppUniform, SupportAndMarginal) {
    RngStream rng(7, 0);
    std::vector<double> rz;
    double max_rz = 0.0;
    while (rz.size() < 100000) {
        const auto net = sample_network(DistanceModel::ppp_uniform, 0.25, 20.0, rng);
        for (const auto& z : net.interferers) {
            max_rz = std::max(max_rz, z.rz_km);
            rz.push_back(z.rz_km);
        }
    }
    EXPECT_LE(max_rz, 1.0 / std::sqrt(pi * 0.25));
    EXPECT_NEAR(1.0 / std::sqrt(pi * 0.25), 1.1284, 1e-4);
    rz.resize(100000);
    const auto s = sorted(rz);
    EXPECT_LT(numerics::ks_statistic(s, [](double r) { return 1.0 - rz_ccdf_uniform(r, 0.25); }), 0.01);
}

TEST(Hexagonal, CellGeometry) {
    const double lambda = 0.25;
    const double R = hex_circumradius(lambda);
    RngStream rng(8, 0);
    std::vector<double> rz;
    while (rz.size() < 100000) {
        const auto net = sample_network(DistanceModel::hexagonal, lambda, 17.0, rng);
        EXPECT_LE(net.serving_distance_km, R + 1e-12);
        for (const auto& z : net.interferers) {
            EXPECT_LE(z.rz_km, R + 1e-12);
            EXPECT_LE(z.rz_km, z.dz_km + 1e-12);
            rz.push_back(z.rz_km);
        }
    }
    // Uniform in a hexagon: E[r^2] = 5 R^2 / 12.
    double m2 = 0.0;
    for (double r : rz) m2 += r * r;
    EXPECT_NEAR(m2 / rz.size(), 5.0 * R * R / 12.0, 0.01 * R * R);
    // Number of cells inside the window tracks window area over cell area.
    const auto net = sample_network(DistanceModel::hexagonal, lambda, 40.0, rng);
    EXPECT_NEAR(static_cast<double>(net.interferers.size() + 1) / (lambda * pi * 1600.0), 1.0, 0.03);
}

TEST(FullPpp, VoronoiExclusion) {
    RngStream rng(9, 0);
    std::vector<double> rz;
    for (int run = 0; run < 40; ++run) {
        const auto net = sample_network(DistanceModel::full_ppp, 0.25, 17.0, rng);
        EXPECT_GT(net.serving_distance_km, 0.0);
        for (const auto& z : net.interferers) {
            EXPECT_LE(z.rz_km, z.dz_km + 1e-9);
            rz.push_back(z.rz_km);
        }
    }
    // A UE uniform in the typical Poisson-Voronoi cell sees a near-Rayleigh
    // link distance with effective density 9/7 lambda (user point process
    // approximation), i.e. a mean of 1/(2 sqrt(9/7 lambda)) ~ 0.882 km.
    double mean = 0.0;
    for (double r : rz) mean += r;
    EXPECT_NEAR(mean / rz.size(), 1.0 / (2.0 * std::sqrt(9.0 / 7.0 * 0.25)), 0.03);
}

TEST(FullPpp, VoronoiCellsTileTheBox) {
    RngStream rng(10, 0);
    std::vector<geometry::detail::Point> sites;
    for (int i = 0; i < 400; ++i) sites.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10)});
    const geometry::detail::VoronoiBuilder voronoi(sites, 10.0, 1.0);
    double area = 0.0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const auto poly = voronoi.cell(i);
        for (std::size_t k = 0; k < poly.size(); ++k) {
            const auto p = poly[k], q = poly[(k + 1) % poly.size()];
            area += 0.5 * (p.x * q.y - q.x * p.y);
        }
        // A cell vertex is never closer to another site than to its own.
        for (const auto& v : poly) {
            const double own = geometry::detail::norm({v.x - sites[i].x, v.y - sites[i].y});
            for (const auto& s : sites) EXPECT_GE(geometry::detail::norm({v.x - s.x, v.y - s.y}), own - 1e-9);
        }
    }
    EXPECT_NEAR(area, 400.0, 1e-8);
}

TEST(Models, ParseRoundTrip) {
    for (auto m : {DistanceModel::full_ppp, DistanceModel::ppp_rayleigh, DistanceModel::ppp_uniform,
                   DistanceModel::hexagonal})
        EXPECT_EQ(parse_distance_model(to_string(m)), m);
    EXPECT_THROW(parse_distance_model("grid"), DomainError);
}
