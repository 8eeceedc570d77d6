#pragma once

// Special functions used by the channel models. Thin wrappers over Boost.Math
// that translate its error reporting into fsonet::DomainError.

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

#include "fsonet/errors.hpp"

namespace fsonet::numerics {

inline constexpr double pi = 3.14159265358979323846;

/// Modified Bessel function of the second kind K_order(x) for real order.
///
/// Even in the order. Flushes to 0 once the result underflows (x beyond ~705
/// for moderate orders). Throws DomainError for x <= 0.
inline double bessel_k(double order, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k: x must be positive");
    if (std::isinf(x)) return 0.0;
    try {
        return boost::math::cyl_bessel_k(std::abs(order), x);
    } catch (const std::overflow_error&) {
        return std::numeric_limits<double>::infinity();
    } catch (const std::underflow_error&) {
        return 0.0;
    }
}

/// log K_order(x), finite where K itself would underflow or overflow.
inline double log_bessel_k(double order, double x) {
    const double k = bessel_k(order, x);
    if (k > 0.0 && std::isfinite(k)) return std::log(k);
    const double v = std::abs(order);
    if (k == 0.0) {
        // Large-argument expansion: K_v(x) ~ sqrt(pi/2x) e^{-x} (1 + (4v^2-1)/(8x)).
        const double mu = 4.0 * v * v;
        return 0.5 * std::log(pi / (2.0 * x)) - x + std::log1p((mu - 1.0) / (8.0 * x));
    }
    // Small-argument limit: K_v(x) ~ Gamma(v)/2 (2/x)^v for v > 0.
    if (v > 0.0) return boost::math::lgamma(v) - std::log(2.0) + v * (std::log(2.0) - std::log(x));
    throw DomainError("log_bessel_k: overflow");
}

inline double gamma_fn(double x) {
    if (x <= 0.0 && std::floor(x) == x) throw DomainError("gamma_fn: pole at non-positive integer");
    return boost::math::tgamma(x);
}

inline double log_gamma(double x) {
    if (x <= 0.0 && std::floor(x) == x) throw DomainError("log_gamma: pole at non-positive integer");
    return boost::math::lgamma(x);
}

inline double digamma(double x) {
    if (x <= 0.0 && std::floor(x) == x) throw DomainError("digamma: pole at non-positive integer");
    return boost::math::digamma(x);
}

/// Non-regularized upper incomplete gamma, Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt.
inline double upper_incomplete_gamma(double a, double x) {
    if (x < 0.0) throw DomainError("upper_incomplete_gamma: x must be non-negative");
    if (a <= 0.0) throw DomainError("upper_incomplete_gamma: a must be positive");
    return boost::math::tgamma(a, x);
}

inline double erf(double x) { return boost::math::erf(x); }

/// Non-regularized incomplete beta B(x; a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete_beta: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw DomainError("incomplete_beta: x outside [0, 1]");
    return boost::math::beta(a, b, x);
}

/// Binomial coefficient for small non-negative integers.
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

}  // namespace fsonet::numerics
