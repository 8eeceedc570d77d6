#pragma once

// Spatial models for the uplink: the serving BS sits at the origin and one
// interfering UE is active per neighbouring cell.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "fsonet/errors.hpp"
#include "fsonet/numerics/rng.hpp"
#include "fsonet/numerics/special.hpp"

namespace fsonet::geometry {

using numerics::pi;
using numerics::RngStream;

enum class DistanceModel { full_ppp, ppp_rayleigh, ppp_uniform, hexagonal };

inline std::string_view to_string(DistanceModel m) {
    switch (m) {
        case DistanceModel::full_ppp: return "full_ppp";
        case DistanceModel::ppp_rayleigh: return "ppp_rayleigh";
        case DistanceModel::ppp_uniform: return "ppp_uniform";
        case DistanceModel::hexagonal: return "hexagonal";
    }
    return "?";
}

inline DistanceModel parse_distance_model(std::string_view name) {
    for (auto m : {DistanceModel::full_ppp, DistanceModel::ppp_rayleigh, DistanceModel::ppp_uniform,
                   DistanceModel::hexagonal})
        if (to_string(m) == name) return m;
    throw DomainError("unknown distance model '" + std::string(name) + "'");
}

/// Interfering UE: distance to its own BS (r_z) and to the BS of interest (d_z).
struct Interferer {
    double rz_km;
    double dz_km;
};

struct NetworkRealization {
    double serving_distance_km = 0.0;
    std::vector<Interferer> interferers;
    double density = 0.0;
};

/// Smallest window accepted by sample_network.
inline double min_window_radius(double lambda) { return 15.0 / std::sqrt(pi * lambda); }

/// Window used by the Monte Carlo drivers. At alpha = 3.5 the 15/sqrt(pi lambda)
/// minimum still leaves a coverage bias near 0.008 at 0 dB; 60/sqrt(pi lambda)
/// brings it to about 0.001.
inline double default_window_radius(double lambda) { return 60.0 / std::sqrt(pi * lambda); }

/// Radius of the disc with area 1/lambda.
inline double equal_area_radius(double lambda) { return 1.0 / std::sqrt(pi * lambda); }

/// Nearest-BS distance, Rayleigh with CDF 1 - exp(-pi lambda r^2).
inline double sample_serving_distance(double lambda, RngStream& rng) {
    if (!(lambda > 0.0)) throw DomainError("sample_serving_distance: density must be positive");
    return std::sqrt(-std::log(rng.uniform_open_low()) / (pi * lambda));
}

inline double serving_distance_pdf(double r, double lambda) {
    return r < 0.0 ? 0.0 : 2.0 * pi * lambda * r * std::exp(-pi * lambda * r * r);
}

/// Product density of two independent Rayleigh link distances.
inline double joint_rz_density(double r1, double r2, double lambda) {
    if (r1 < 0.0 || r2 < 0.0) return 0.0;
    const double k = 2.0 * pi * lambda;
    return k * k * r1 * r2 * std::exp(-lambda * pi * (r1 * r1 + r2 * r2));
}

/// CCDF of r_z under the Rayleigh approximation.
inline double rz_ccdf_rayleigh(double r, double lambda) { return r <= 0.0 ? 1.0 : std::exp(-pi * lambda * r * r); }

/// CCDF of r_z under the uniform-disc approximation.
inline double rz_ccdf_uniform(double r, double lambda) {
    return r <= 0.0 ? 1.0 : std::max(0.0, 1.0 - pi * lambda * r * r);
}

/// Circumradius of the regular hexagon with area 1/lambda.
inline double hex_circumradius(double lambda) { return std::sqrt(2.0 / (3.0 * std::sqrt(3.0) * lambda)); }

inline double hex_cell_area(double lambda) {
    const double R = hex_circumradius(lambda);
    return 1.5 * std::sqrt(3.0) * R * R;
}

namespace detail {

struct Point {
    double x, y;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }

// Uniform point in a pointy-top hexagon of circumradius R centred at the origin.
inline Point sample_in_hexagon(double R, RngStream& rng) {
    const double half_width = 0.5 * std::sqrt(3.0) * R;
    for (;;) {
        const double x = rng.uniform(-half_width, half_width);
        const double y = rng.uniform(-R, R);
        if (std::abs(y) <= R - std::abs(x) / std::sqrt(3.0)) return {x, y};
    }
}

using Polygon = std::vector<Point>;

// Keep the part of a convex polygon closer to `site` than to `other`.
inline Polygon clip_half_plane(const Polygon& poly, Point site, Point other) {
    const double nx = other.x - site.x, ny = other.y - site.y;
    const double c = 0.5 * (other.x * other.x + other.y * other.y - site.x * site.x - site.y * site.y);
    auto side = [&](Point p) { return nx * p.x + ny * p.y - c; };  // <= 0 inside
    Polygon out;
    out.reserve(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point p = poly[i], q = poly[(i + 1) % poly.size()];
        const double sp = side(p), sq = side(q);
        if (sp <= 0.0) out.push_back(p);
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
            const double t = sp / (sp - sq);
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    return out;
}

inline Point sample_in_convex_polygon(const Polygon& poly, RngStream& rng) {
    double total = 0.0;
    std::vector<double> cumulative(poly.size(), 0.0);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const Point a = poly[0], b = poly[i], c = poly[i + 1];
        total += 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
        cumulative[i] = total;
    }
    const double pick = rng.uniform() * total;
    std::size_t i = 1;
    while (i + 2 < poly.size() && cumulative[i] < pick) ++i;
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    const Point a = poly[0], b = poly[i], c = poly[i + 1];
    return {a.x + u * (b.x - a.x) + v * (c.x - a.x), a.y + u * (b.y - a.y) + v * (c.y - a.y)};
}

// Voronoi cells of a point set inside a square box, using a bucket grid to
// find neighbours in order of distance.
class VoronoiBuilder {
public:
    VoronoiBuilder(const std::vector<Point>& sites, double half_box, double bucket)
        : sites_(sites), half_box_(half_box), bucket_(bucket) {
        dim_ = std::max(1, static_cast<int>(std::ceil(2.0 * half_box / bucket)));
        buckets_.assign(static_cast<std::size_t>(dim_) * dim_, {});
        for (std::size_t i = 0; i < sites.size(); ++i) buckets_[index(cell_of(sites[i].x), cell_of(sites[i].y))].push_back(i);
    }

    Polygon cell(std::size_t i) const {
        const Point s = sites_[i];
        Polygon poly = {{-half_box_, -half_box_}, {half_box_, -half_box_}, {half_box_, half_box_}, {-half_box_, half_box_}};
        const int cx = cell_of(s.x), cy = cell_of(s.y);
        std::vector<std::pair<double, std::size_t>> candidates;
        for (int ring = 0; ring <= dim_; ++ring) {
            candidates.clear();
            for (int gx = cx - ring; gx <= cx + ring; ++gx)
                for (int gy = cy - ring; gy <= cy + ring; ++gy) {
                    if (std::max(std::abs(gx - cx), std::abs(gy - cy)) != ring) continue;
                    if (gx < 0 || gy < 0 || gx >= dim_ || gy >= dim_) continue;
                    for (std::size_t j : buckets_[index(gx, gy)])
                        if (j != i) candidates.push_back({norm({sites_[j].x - s.x, sites_[j].y - s.y}), j});
                }
            std::sort(candidates.begin(), candidates.end());
            for (const auto& [d, j] : candidates) poly = clip_half_plane(poly, s, sites_[j]);
            // Every site beyond the searched rings is at least ring*bucket away;
            // it cannot cut the cell once that exceeds twice the cell radius.
            double reach = 0.0;
            for (const auto& v : poly) reach = std::max(reach, norm({v.x - s.x, v.y - s.y}));
            if (ring * bucket_ >= 2.0 * reach) break;
        }
        return poly;
    }

private:
    int cell_of(double v) const {
        return std::clamp(static_cast<int>((v + half_box_) / bucket_), 0, dim_ - 1);
    }
    std::size_t index(int gx, int gy) const { return static_cast<std::size_t>(gx) * dim_ + gy; }

    const std::vector<Point>& sites_;
    double half_box_;
    double bucket_;
    int dim_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
};

inline void require_window(double lambda, double window) {
    if (!(lambda > 0.0)) throw DomainError("sample_network: density must be positive");
    if (!(window >= min_window_radius(lambda)))
        throw DomainError("sample_network: window radius below 15/sqrt(pi*lambda)");
}

}  // namespace detail

/// PPP-Rayleigh or PPP-Uniform snapshot conditioned on the serving distance r:
/// Poisson(lambda pi W^2) points uniform in the window disc, those closer than
/// r dropped, each carrying an independent r_z.
inline void sample_network_given_serving(NetworkRealization& out, DistanceModel model, double lambda,
                                         double window_radius, double r, RngStream& rng) {
    detail::require_window(lambda, window_radius);
    if (model != DistanceModel::ppp_rayleigh && model != DistanceModel::ppp_uniform)
        throw DomainError("sample_network_given_serving: only the PPP-Rayleigh and PPP-Uniform models");
    if (!(r > 0.0)) throw DomainError("sample_network_given_serving: serving distance must be positive");
    out.density = lambda;
    out.interferers.clear();
    out.serving_distance_km = r;
    const auto count = rng.poisson(lambda * pi * window_radius * window_radius);
    const double r2 = r * r, w2 = window_radius * window_radius;
    const double rz_max = equal_area_radius(lambda);
    for (std::uint64_t k = 0; k < count; ++k) {
        const double d2 = w2 * rng.uniform();
        if (d2 < r2) continue;
        const double rz = model == DistanceModel::ppp_rayleigh ? sample_serving_distance(lambda, rng)
                                                               : rz_max * std::sqrt(rng.uniform());
        out.interferers.push_back({rz, std::sqrt(d2)});
    }
}

/// Draw one uplink snapshot. The serving BS is at the origin.
///
/// PPP-Rayleigh and PPP-Uniform draw a Rayleigh serving distance and then
/// follow sample_network_given_serving. Hexagonal and FullPPP place one UE
/// uniformly in every cell; for them each interferer satisfies r_z <= d_z.
inline void sample_network(NetworkRealization& out, DistanceModel model, double lambda, double window_radius,
                           RngStream& rng) {
    detail::require_window(lambda, window_radius);
    out.density = lambda;
    out.interferers.clear();

    switch (model) {
        case DistanceModel::ppp_rayleigh:
        case DistanceModel::ppp_uniform:
            sample_network_given_serving(out, model, lambda, window_radius, sample_serving_distance(lambda, rng),
                                         rng);
            return;
        case DistanceModel::hexagonal: {
            const double R = hex_circumradius(lambda);
            const double sx = std::sqrt(3.0) * R;
            out.serving_distance_km = detail::norm(detail::sample_in_hexagon(R, rng));
            const int span = static_cast<int>(std::ceil(window_radius / (1.5 * R))) + 1;
            for (int j = -span; j <= span; ++j)
                for (int i = -2 * span; i <= 2 * span; ++i) {
                    if (i == 0 && j == 0) continue;
                    const detail::Point c{sx * (i + 0.5 * j), 1.5 * R * j};
                    if (detail::norm(c) > window_radius) continue;
                    const auto u = detail::sample_in_hexagon(R, rng);
                    out.interferers.push_back({detail::norm(u), detail::norm({c.x + u.x, c.y + u.y})});
                }
            return;
        }
        case DistanceModel::full_ppp: {
            // BS process inside the box plus the BS of interest at the origin.
            const double half = window_radius;
            const auto count = rng.poisson(lambda * 4.0 * half * half);
            std::vector<detail::Point> sites;
            sites.reserve(count + 1);
            sites.push_back({0.0, 0.0});
            for (std::uint64_t k = 0; k < count; ++k) sites.push_back({rng.uniform(-half, half), rng.uniform(-half, half)});
            const detail::VoronoiBuilder voronoi(sites, half, 1.0 / std::sqrt(lambda));
            const auto own = detail::sample_in_convex_polygon(voronoi.cell(0), rng);
            out.serving_distance_km = detail::norm(own);
            for (std::size_t k = 1; k < sites.size(); ++k) {
                if (detail::norm(sites[k]) > window_radius) continue;
                const auto ue = detail::sample_in_convex_polygon(voronoi.cell(k), rng);
                out.interferers.push_back({detail::norm({ue.x - sites[k].x, ue.y - sites[k].y}), detail::norm(ue)});
            }
            return;
        }
    }
}

inline NetworkRealization sample_network(DistanceModel model, double lambda, double window_radius, RngStream& rng) {
    NetworkRealization out;
    sample_network(out, model, lambda, window_radius, rng);
    return out;
}

}  // namespace fsonet::geometry
