#pragma once

// Globally adaptive Gauss-Kronrod (10/21) quadrature on finite and
// half-infinite intervals. Node tables come from Boost.Math; subdivision,
// interval mapping and convergence reporting are implemented here.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "fsonet/errors.hpp"

namespace fsonet::numerics {

enum class TailPolicy {
    exp_decay_mapping,  ///< map [a, inf) onto [0, 1) with x = a + t/(1-t)
    user_cutoff,        ///< integrate [a, a + cutoff] and ignore the rest
};

struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    TailPolicy tail = TailPolicy::exp_decay_mapping;
    double cutoff = 0.0;  ///< only read when tail == user_cutoff

    QuadratureSpec with_tolerance(double abs, double rel) const {
        QuadratureSpec out = *this;
        out.abs_tol = abs;
        out.rel_tol = rel;
        return out;
    }

    void validate() const {
        if (!(abs_tol > 0.0)) throw DomainError("QuadratureSpec: abs_tol must be positive");
        if (!(rel_tol > 0.0)) throw DomainError("QuadratureSpec: rel_tol must be positive");
        if (max_subdivisions < 1) throw DomainError("QuadratureSpec: max_subdivisions must be >= 1");
        if (tail == TailPolicy::user_cutoff && !(cutoff > 0.0))
            throw DomainError("QuadratureSpec: user cutoff must be positive");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

namespace detail {

struct Panel {
    double a, b, value, error, l1;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_21(F& f, double a, double b) {
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
    using gauss = boost::math::quadrature::gauss<double, 10>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double f0 = f(center);
    double kronrod_sum = f0 * wk[0];
    double gauss_sum = 0.0;
    double l1 = std::abs(f0) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fp = f(center + half * x[i]);
        const double fm = f(center - half * x[i]);
        kronrod_sum += (fp + fm) * wk[i];
        l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 1) gauss_sum += (fp + fm) * wg[i / 2];
    }
    const double value = kronrod_sum * half;
    const double err = std::abs((kronrod_sum - gauss_sum) * half);
    return {a, b, value, err, std::abs(l1 * half)};
}

template <class F>
QuadratureResult adaptive(F&& f, double a, double b, const QuadratureSpec& spec) {
    std::priority_queue<Panel> panels;
    std::vector<Panel> settled;  // panels too narrow to split further
    panels.push(gauss_kronrod_21(f, a, b));
    int splits = 0;

    auto totals = [&](double& value, double& error, double& l1) {
        value = error = l1 = 0.0;
        auto q = panels;
        while (!q.empty()) {
            value += q.top().value;
            error += q.top().error;
            l1 += q.top().l1;
            q.pop();
        }
        for (const auto& p : settled) {
            value += p.value;
            error += p.error;
            l1 += p.l1;
        }
    };

    double value = panels.top().value;
    double error = panels.top().error;
    double l1 = panels.top().l1;
    // Running sums are refreshed exactly every few splits to avoid drift.
    for (;;) {
        const double target = std::max({spec.abs_tol, spec.rel_tol * std::abs(value),
                                        64.0 * std::numeric_limits<double>::epsilon() * l1});
        if (!(std::isfinite(value) && std::isfinite(error)))
            throw NonConvergenceError("integrate: non-finite integrand value", value, error);
        if (error <= target) break;
        if (panels.empty() || splits >= spec.max_subdivisions) {
            std::ostringstream msg;
            msg << "integrate: no convergence after " << splits << " subdivisions on [" << a << ", "
                << b << "], estimate " << value << " +/- " << error;
            throw NonConvergenceError(msg.str(), value, error);
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) <= 1e-14 * std::max(std::abs(worst.a), std::abs(worst.b))) {
            settled.push_back(worst);
            continue;
        }
        const Panel left = gauss_kronrod_21(f, worst.a, mid);
        const Panel right = gauss_kronrod_21(f, mid, worst.b);
        panels.push(left);
        panels.push(right);
        ++splits;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        if (splits % 64 == 0) totals(value, error, l1);
    }
    totals(value, error, l1);
    return {value, error, splits};
}

}  // namespace detail

/// Integrate f over [a, b]; either bound may be infinite.
///
/// Half-infinite ranges are mapped onto a unit interval with x = a + t/(1-t),
/// which suits integrands with exponential or power-law decay. Integrable
/// endpoint singularities are handled by subdivision (nodes never touch the
/// endpoints). Throws NonConvergenceError instead of returning an estimate
/// that misses the tolerance.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN bound");
    if (a == b) return {};
    if (a > b) {
        auto r = integrate(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    const bool lower_inf = std::isinf(a);
    const bool upper_inf = std::isinf(b);

    if (lower_inf && upper_inf) {
        auto lo = integrate(f, a, 0.0, spec);
        auto hi = integrate(f, 0.0, b, spec);
        return {lo.value + hi.value, lo.error + hi.error, lo.subdivisions + hi.subdivisions};
    }
    if (upper_inf) {
        if (spec.tail == TailPolicy::user_cutoff)
            return detail::adaptive(f, a, a + spec.cutoff, spec);
        auto mapped = [&f, a](double t) {
            const double one_minus = 1.0 - t;
            const double x = a + t / one_minus;
            const double fx = f(x);
            if (fx == 0.0) return 0.0;
            return fx / (one_minus * one_minus);
        };
        return detail::adaptive(mapped, 0.0, 1.0, spec);
    }
    if (lower_inf) {
        if (spec.tail == TailPolicy::user_cutoff)
            return detail::adaptive(f, b - spec.cutoff, b, spec);
        auto mapped = [&f, b](double t) {
            const double x = b - (1.0 - t) / t;
            const double fx = f(x);
            if (fx == 0.0) return 0.0;
            return fx / (t * t);
        };
        return detail::adaptive(mapped, 0.0, 1.0, spec);
    }
    return detail::adaptive(f, a, b, spec);
}

/// Convenience overload returning only the value.
template <class F>
double integral(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    return integrate(std::forward<F>(f), a, b, spec).value;
}

}  // namespace fsonet::numerics
