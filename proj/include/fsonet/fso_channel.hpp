#pragma once

// FSO backhaul: Malaga turbulence, weather pathloss and Beckmann pointing
// errors (modified-Rayleigh approximation), with SNR statistics and rates.

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fsonet/errors.hpp"
#include "fsonet/numerics.hpp"

namespace fsonet::fso {

using numerics::pi;
using numerics::RngStream;

inline constexpr double kVarpiHeterodyne = 1.0;
inline const double kVarpiImdd = std::exp(1.0) / (2.0 * pi);

/// Malaga turbulence parameters.
///
/// The density is sum_n w_n I^{(nu+n)/2-1} K_{nu-n}(2 sqrt(c I)) with
/// c = nu kappa / (zeta kappa + Omega'). The weights w_n carry the product of
/// the amplitude constant and sigma_n with the zeta powers collected, so that
/// zeta = 0 (rho = 1) is handled and the density integrates to one.
class MalagaParams {
public:
    MalagaParams(double nu, int kappa, double b0, double rho, double omega, double theta_a = pi / 2,
                 double theta_b = 0.0)
        : nu_(nu), kappa_(kappa), b0_(b0), rho_(rho), omega_(omega), theta_a_(theta_a), theta_b_(theta_b) {
        if (!(nu > 0.0)) throw DomainError("MalagaParams: nu must be positive");
        if (kappa < 1) throw DomainError("MalagaParams: kappa must be a positive integer");
        if (!(b0 >= 0.0)) throw DomainError("MalagaParams: b0 must be non-negative");
        if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("MalagaParams: rho must lie in [0, 1]");
        if (!(omega >= 0.0)) throw DomainError("MalagaParams: Omega must be non-negative");
        zeta_ = 2.0 * b0 * (1.0 - rho);
        omega_prime_ = omega + 2.0 * rho * b0 + 2.0 * std::sqrt(2.0 * rho * b0 * omega) * std::cos(theta_a - theta_b);
        if (!(omega_prime_ >= 0.0 && zeta_ + omega_prime_ > 0.0))
            throw DomainError("MalagaParams: degenerate coherent and scatter powers");
        if (omega_prime_ == 0.0 && zeta_ > 0.0 && kappa > 1)
            throw DomainError("MalagaParams: Omega' = 0 needs kappa = 1");
        const double denom = zeta_ * kappa + omega_prime_;
        c_ = nu * kappa / denom;
        weights_.resize(kappa);
        const double lead = std::log(2.0) + 0.5 * nu * std::log(nu) - numerics::log_gamma(nu) +
                            (kappa + 0.5 * nu) * (std::log(static_cast<double>(kappa)) - std::log(denom));
        for (int n = 1; n <= kappa; ++n) {
            const double zeta_pow = kappa - n;
            if ((zeta_ == 0.0 && zeta_pow > 0) || (omega_prime_ == 0.0 && n > 1)) {
                weights_[n - 1] = 0.0;
                continue;
            }
            double log_w = lead + std::log(numerics::binomial(kappa - 1, n - 1)) + (1.0 - 0.5 * n) * std::log(denom) -
                           numerics::log_gamma(n) + 0.5 * n * std::log(nu / kappa);
            if (n > 1) log_w += (n - 1) * std::log(omega_prime_);
            if (zeta_pow > 0) log_w += zeta_pow * std::log(zeta_);
            weights_[n - 1] = std::exp(log_w);
        }
        const double z = zeroth_moment_unnormalized();
        if (std::abs(z - 1.0) > 1e-6) throw DomainError("MalagaParams: density does not normalize");
    }

    /// Reference parameter set used throughout the examples and tests.
    static MalagaParams reference() { return {2.296, 2, 0.1079, 0.596, 1.3265, pi / 2, 0.0}; }

    /// Gamma-Gamma limit (rho = 1, b0 = 0) with unit mean.
    static MalagaParams gamma_gamma(double nu, int kappa) { return {nu, kappa, 0.0, 1.0, 1.0}; }

    double nu() const { return nu_; }
    int kappa() const { return kappa_; }
    double b0() const { return b0_; }
    double rho() const { return rho_; }
    double omega() const { return omega_; }
    double theta_a() const { return theta_a_; }
    double theta_b() const { return theta_b_; }
    double zeta() const { return zeta_; }
    double omega_prime() const { return omega_prime_; }
    double c() const { return c_; }

    /// Weight of the n-th Bessel term (n = 1..kappa).
    double weight(int n) const { return weights_.at(n - 1); }

    /// Amplitude constant with the zeta^{1 + nu/2} normalization.
    double lambda() const {
        return 2.0 * std::pow(nu_, nu_ / 2) / (std::pow(zeta_, 1.0 + nu_ / 2) * numerics::gamma_fn(nu_)) *
               std::pow(zeta_ * kappa_ / (zeta_ * kappa_ + omega_prime_), kappa_ + nu_ / 2);
    }

    /// Amplitude constant with a zeta^{1 + 1/nu} prefactor.
    double lambda_alternate() const {
        return 2.0 * std::pow(nu_, nu_ / 2) / (std::pow(zeta_, 1.0 + 1.0 / nu_) * numerics::gamma_fn(nu_)) *
               std::pow(zeta_ * kappa_ / (zeta_ * kappa_ + omega_prime_), kappa_ + nu_ / 2);
    }

    /// Zeroth moment of the density built with lambda_alternate(); the
    /// normalized density divides it out. NaN when zeta = 0.
    double alternate_zeroth_moment() const {
        if (zeta_ == 0.0) return std::numeric_limits<double>::quiet_NaN();
        return std::pow(zeta_, nu_ / 2 - 1.0 / nu_);
    }

    double sigma(int n) const {
        return numerics::binomial(kappa_ - 1, n - 1) * std::pow(zeta_ * kappa_ + omega_prime_, 1.0 - n / 2.0) /
               numerics::gamma_fn(n) * std::pow(omega_prime_ / zeta_, n - 1) * std::pow(nu_ / kappa_, n / 2.0);
    }

    double tau(int n) const { return sigma(n) * std::pow((zeta_ * kappa_ + omega_prime_) / (nu_ * kappa_), (nu_ + n) / 2); }

    /// Mellin moment E[I_a^s]; finite for s > -min(nu, n_min).
    double moment(double s) const {
        if (!(s > -std::min(nu_, static_cast<double>(leading_term()))))
            throw DomainError("MalagaParams::moment: order below the integrability limit");
        double total = 0.0;
        for (int n = 1; n <= kappa_; ++n) {
            if (weights_[n - 1] == 0.0) continue;
            total += 0.5 * weights_[n - 1] * std::pow(c_, -((nu_ + n) / 2 + s)) * numerics::gamma_fn(n + s) *
                     numerics::gamma_fn(nu_ + s);
        }
        return total;
    }

    double mean() const { return zeta_ + omega_prime_; }

    /// Smallest n with a non-zero term; the density behaves as
    /// I^{min(nu, n_min) - 1} near zero.
    int leading_term() const {
        for (int n = 1; n <= kappa_; ++n)
            if (weights_[n - 1] != 0.0) return n;
        return kappa_;
    }

private:
    double zeroth_moment_unnormalized() const {
        double total = 0.0;
        for (int n = 1; n <= kappa_; ++n)
            if (weights_[n - 1] != 0.0)
                total += 0.5 * weights_[n - 1] * std::pow(c_, -(nu_ + n) / 2) * numerics::gamma_fn(n) *
                         numerics::gamma_fn(nu_);
        return total;
    }

    double nu_;
    int kappa_;
    double b0_, rho_, omega_, theta_a_, theta_b_;
    double zeta_ = 0.0, omega_prime_ = 0.0, c_ = 0.0;
    std::vector<double> weights_;
};

/// log(I f(I)) for the Malaga density; finite wherever the density is.
inline double malaga_log_density_times_x(const MalagaParams& p, double log_i) {
    const double nu = p.nu();
    const double arg = 2.0 * std::sqrt(p.c()) * std::exp(0.5 * log_i);
    if (!(arg > 0.0)) return -std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    double terms[64];
    int count = 0;
    for (int n = 1; n <= p.kappa() && count < 64; ++n) {
        if (p.weight(n) == 0.0) continue;
        const double t = std::log(p.weight(n)) + 0.5 * (nu + n) * log_i + numerics::log_bessel_k(nu - n, arg);
        terms[count++] = t;
        best = std::max(best, t);
    }
    if (!std::isfinite(best)) return best;
    double sum = 0.0;
    for (int i = 0; i < count; ++i) sum += std::exp(terms[i] - best);
    return best + std::log(sum);
}

inline double malaga_pdf(const MalagaParams& p, double i) {
    if (!(i > 0.0)) throw DomainError("malaga_pdf: irradiance must be positive");
    if (std::isinf(i)) return 0.0;
    return std::exp(malaga_log_density_times_x(p, std::log(i))) / i;
}

inline double malaga_cdf(const MalagaParams& p, double x) {
    if (x <= 0.0) return 0.0;
    const auto spec = numerics::QuadratureSpec{}.with_tolerance(1e-300, 1e-11);
    auto f = [&](double s) { return std::exp(malaga_log_density_times_x(p, s)); };
    const double lx = std::log(x);
    if (x <= p.mean()) return numerics::integral(f, -INFINITY, lx, spec);
    return 1.0 - numerics::integral(f, lx, INFINITY, spec);
}

/// Draw from the Malaga law: a Gamma(nu) large-scale factor modulating the
/// coherent component (power Omega', Gamma(kappa) amplitude fluctuation)
/// plus circular Gaussian scatter of power zeta.
inline double malaga_sample(const MalagaParams& p, RngStream& rng) {
    const double g = rng.gamma(p.nu(), 1.0 / p.nu());
    const double s = rng.gamma(p.kappa(), 1.0 / p.kappa());
    const double coherent = std::sqrt(p.omega_prime() * s);
    const double sd = std::sqrt(p.zeta() / 2.0);
    const double re = coherent + sd * rng.normal();
    const double im = sd * rng.normal();
    const double y = re * re + im * im;
    return y > 0.0 ? g * y : std::numeric_limits<double>::min();
}

/// Beckmann misalignment with the modified-Rayleigh approximation.
struct PointingParams {
    double mu_x = 0.0, mu_y = 0.0;        ///< boresight offsets (m)
    double sigma_x = 0.15, sigma_y = 0.15;  ///< jitter standard deviations (m)
    double aperture_m = 0.05;             ///< receiver aperture radius a (m)
    double beam_waist_m = 0.5;            ///< beam waist at the receiver w_z (m)

    static PointingParams symmetric(double sigma, double aperture_m = 0.05, double beam_waist_m = 0.5) {
        return {0.0, 0.0, sigma, sigma, aperture_m, beam_waist_m};
    }

    /// Zero-boresight symmetric jitter chosen to give the coefficient g^2.
    static PointingParams from_coefficient(double g2, double aperture_m = 0.05, double beam_waist_m = 0.5) {
        if (!(g2 > 0.0)) throw DomainError("PointingParams: g^2 must be positive");
        PointingParams p = symmetric(1.0, aperture_m, beam_waist_m);
        const double sigma = std::sqrt(p.equivalent_waist_sq() / (4.0 * g2));
        p.sigma_x = p.sigma_y = sigma;
        return p;
    }

    void validate() const {
        if (!(sigma_x > 0.0 && sigma_y > 0.0)) throw DomainError("PointingParams: jitter must be positive");
        if (!(aperture_m > 0.0 && beam_waist_m > 0.0))
            throw DomainError("PointingParams: aperture and beam waist must be positive");
        if (!(std::isfinite(mu_x) && std::isfinite(mu_y))) throw DomainError("PointingParams: bad boresight");
    }

    double v() const { return std::sqrt(pi / 2.0) * aperture_m / beam_waist_m; }
    double a0() const {
        const double e = numerics::erf(v());
        return e * e;
    }
    double equivalent_waist_sq() const {
        const double vv = v();
        return std::sqrt(pi) * numerics::erf(vv) * beam_waist_m * beam_waist_m / (2.0 * vv * std::exp(-vv * vv));
    }
    double phi_x() const { return std::sqrt(equivalent_waist_sq()) / (2.0 * sigma_x); }
    double phi_y() const { return std::sqrt(equivalent_waist_sq()) / (2.0 * sigma_y); }

    /// Effective jitter variance of the matched Rayleigh law.
    double sigma_s_sq() const {
        const double sx2 = sigma_x * sigma_x, sy2 = sigma_y * sigma_y;
        return std::cbrt((3.0 * mu_x * mu_x * sx2 * sx2 + 3.0 * mu_y * mu_y * sy2 * sy2 + sx2 * sx2 * sx2 +
                          sy2 * sy2 * sy2) /
                         2.0);
    }

    /// Pointing error coefficient g^2 = w_zeq^2 / (4 sigma_s^2).
    double g2() const { return equivalent_waist_sq() / (4.0 * sigma_s_sq()); }

    double eta() const {
        const double px2 = phi_x() * phi_x(), py2 = phi_y() * phi_y();
        return std::exp(1.0 / g2() - 1.0 / (2.0 * px2) - 1.0 / (2.0 * py2) -
                        mu_x * mu_x / (2.0 * sigma_x * sigma_x * px2) - mu_y * mu_y / (2.0 * sigma_y * sigma_y * py2));
    }

    /// Upper end of the approximate gain support, A0 eta.
    double peak_gain() const { return a0() * eta(); }
};

/// Gain A0 exp(-2 psi^2 / w_zeq^2) for a Beckmann-distributed displacement.
inline double pointing_sample(const PointingParams& p, RngStream& rng) {
    const double x = rng.normal(p.mu_x, p.sigma_x);
    const double y = rng.normal(p.mu_y, p.sigma_y);
    return p.a0() * std::exp(-2.0 * (x * x + y * y) / p.equivalent_waist_sq());
}

/// Modified-Rayleigh gain density g^2/(A0 eta)^{g^2} x^{g^2-1} on [0, A0 eta].
inline double pointing_pdf_approx(const PointingParams& p, double x) {
    const double top = p.peak_gain(), g2 = p.g2();
    if (x <= 0.0 || x > top) return 0.0;
    return g2 / top * std::pow(x / top, g2 - 1.0);
}

inline double pointing_cdf_approx(const PointingParams& p, double x) {
    if (x <= 0.0) return 0.0;
    const double top = p.peak_gain();
    return x >= top ? 1.0 : std::pow(x / top, p.g2());
}

struct PathlossParams {
    double aperture_m = 0.05;
    double divergence_rad = 0.01;
    double link_km = 1.0;
    double attenuation_db_per_km = 0.43;
    double cn2 = 5e-14;
    double wavelength_m = 1550e-9;

    void validate() const {
        if (!(aperture_m > 0.0 && divergence_rad > 0.0 && link_km > 0.0 && wavelength_m > 0.0 && cn2 > 0.0))
            throw DomainError("PathlossParams: all parameters must be positive");
        if (!(attenuation_db_per_km >= 0.0)) throw DomainError("PathlossParams: attenuation must be non-negative");
    }
};

/// Geometric spreading and weather attenuation, pi a^2 / (theta L)^2 exp(-sigma L).
inline double pathloss_gain(const PathlossParams& p) {
    p.validate();
    const double length_m = p.link_km * 1e3;
    const double sigma_per_km = p.attenuation_db_per_km / 4.343;
    const double geometric = std::min(1.0, pi * p.aperture_m * p.aperture_m / std::pow(p.divergence_rad * length_m, 2));
    return geometric * std::exp(-sigma_per_km * p.link_km);
}

/// Rytov variance 1.23 Cn^2 k^{7/6} L^{11/6}.
inline double rytov_variance(const PathlossParams& p) {
    p.validate();
    const double k = 2.0 * pi / p.wavelength_m;
    return 1.23 * p.cn2 * std::pow(k, 7.0 / 6.0) * std::pow(p.link_km * 1e3, 11.0 / 6.0);
}

/// Gaussian-beam spreading of the transmit waist w0 over a distance L.
inline double gaussian_beam_waist(double w0_m, double wavelength_m, double length_m) {
    if (!(w0_m > 0.0)) throw DomainError("gaussian_beam_waist: waist must be positive");
    const double zr = wavelength_m * length_m / (pi * w0_m * w0_m);
    return w0_m * std::sqrt(1.0 + zr * zr);
}

/// Waist at which w_z(w0) is smallest. Below it every w_z is reached again
/// by a larger (collimated) waist, so outage curves have a mirror image there.
inline double collimation_waist(double wavelength_m, double length_m) {
    return std::sqrt(wavelength_m * length_m / pi);
}

enum class Detection { heterodyne = 1, im_dd = 2 };

inline double default_varpi(int r) { return r == 1 ? kVarpiHeterodyne : kVarpiImdd; }

struct FsoLinkSpec {
    MalagaParams turbulence = MalagaParams::reference();
    PointingParams pointing{};
    PathlossParams pathloss{};
    int detection = 1;        ///< 1 heterodyne, 2 IM/DD
    double noise_var = 1e-7;  ///< sigma^2_RD

    void validate() const {
        pointing.validate();
        pathloss.validate();
        if (detection != 1 && detection != 2) throw DomainError("FsoLinkSpec: detection must be 1 or 2");
        if (!(noise_var > 0.0)) throw DomainError("FsoLinkSpec: noise variance must be positive");
    }

    double pathloss_gain() const { return fso::pathloss_gain(pathloss); }

    /// Upper end of the composite gain scale, I_l A0 eta.
    double gain_scale() const { return pathloss_gain() * pointing.peak_gain(); }

    /// E[I^k] for the composite gain I = I_a I_l I_p.
    double gain_moment(double k) const {
        const double g2 = pointing.g2();
        return std::pow(gain_scale(), k) * g2 / (g2 + k) * turbulence.moment(k);
    }

    double mean_gain() const { return gain_moment(1.0); }

    /// Average electrical SNR mu_r = E[I]^r / sigma^2.
    double electrical_snr() const { return std::pow(mean_gain(), detection) / noise_var; }

    /// Average SNR E[I^r] / sigma^2.
    double average_snr() const { return gain_moment(detection) / noise_var; }

    double scintillation_index() const { return gain_moment(2.0) / std::pow(mean_gain(), 2) - 1.0; }

    /// Copy with the noise variance chosen to give the requested mu_r (dB).
    FsoLinkSpec with_electrical_snr_db(double db) const {
        FsoLinkSpec out = *this;
        out.noise_var = std::pow(mean_gain(), detection) / std::pow(10.0, db / 10.0);
        return out;
    }

    FsoLinkSpec with_detection(int r) const {
        FsoLinkSpec out = *this;
        out.detection = r;
        return out;
    }
};

/// Weather presets: attenuation (dB/km) and Cn^2 over a 1 km, 1550 nm link.
inline FsoLinkSpec weather_preset(std::string_view name) {
    FsoLinkSpec spec;
    if (name == "clear_air") {
        spec.pathloss.attenuation_db_per_km = 0.43;
        spec.pathloss.cn2 = 5e-14;
    } else if (name == "moderate_fog") {
        spec.pathloss.attenuation_db_per_km = 42.2;
        spec.pathloss.cn2 = 2e-15;
    } else if (name == "moderate_rain") {
        spec.pathloss.attenuation_db_per_km = 5.8;
        spec.pathloss.cn2 = 5e-15;
    } else {
        throw DomainError("unknown weather preset '" + std::string(name) + "'");
    }
    return spec;
}

inline double fso_sample_gain(const FsoLinkSpec& spec, RngStream& rng) {
    return spec.pathloss_gain() * malaga_sample(spec.turbulence, rng) * pointing_sample(spec.pointing, rng);
}

/// Instantaneous SNR I^r / sigma^2 with the exact Beckmann pointing law.
inline double fso_sample_snr(const FsoLinkSpec& spec, RngStream& rng) {
    return std::pow(fso_sample_gain(spec, rng), spec.detection) / spec.noise_var;
}

namespace detail {

inline const numerics::QuadratureSpec& tail_spec() {
    static const numerics::QuadratureSpec spec = numerics::QuadratureSpec{}.with_tolerance(1e-300, 1e-11);
    return spec;
}

// CDF of I_a I_p / (A0 eta) at y, i.e. E[min(1, (y / I_a)^{g^2})].
inline double normalized_cdf(const MalagaParams& p, double g2, double y) {
    if (y <= 0.0) return 0.0;
    const double ly = std::log(y);
    auto body = [&](double s) { return std::exp(malaga_log_density_times_x(p, s)); };
    auto tail = [&](double s) { return std::exp(g2 * (ly - s) + malaga_log_density_times_x(p, s)); };
    return numerics::integral(body, -INFINITY, ly, tail_spec()) + numerics::integral(tail, ly, INFINITY, tail_spec());
}

inline double normalized_ccdf(const MalagaParams& p, double g2, double y) {
    if (y <= 0.0) return 1.0;
    const double ly = std::log(y);
    auto f = [&](double s) { return -std::expm1(g2 * (ly - s)) * std::exp(malaga_log_density_times_x(p, s)); };
    return numerics::integral(f, ly, INFINITY, tail_spec());
}

inline double normalized_pdf(const MalagaParams& p, double g2, double y) {
    if (y <= 0.0 || std::isinf(y)) return 0.0;
    const double ly = std::log(y);
    auto f = [&](double s) { return std::exp(g2 * (ly - s) + malaga_log_density_times_x(p, s)); };
    return g2 / y * numerics::integral(f, ly, INFINITY, tail_spec());
}

}  // namespace detail

/// Density of the composite gain I = I_a I_l I_p.
inline double composite_gain_pdf(const FsoLinkSpec& spec, double i) {
    const double scale = spec.gain_scale();
    return detail::normalized_pdf(spec.turbulence, spec.pointing.g2(), i / scale) / scale;
}

inline double composite_gain_cdf(const FsoLinkSpec& spec, double i) {
    const double y = i / spec.gain_scale();
    const double g2 = spec.pointing.g2();
    if (y <= spec.turbulence.mean()) return detail::normalized_cdf(spec.turbulence, g2, y);
    return 1.0 - detail::normalized_ccdf(spec.turbulence, g2, y);
}

inline double composite_gain_ccdf(const FsoLinkSpec& spec, double i) {
    const double y = i / spec.gain_scale();
    const double g2 = spec.pointing.g2();
    if (y <= spec.turbulence.mean()) return 1.0 - detail::normalized_cdf(spec.turbulence, g2, y);
    return detail::normalized_ccdf(spec.turbulence, g2, y);
}

namespace detail {
inline double gain_at_snr(const FsoLinkSpec& spec, double gamma) {
    return std::pow(gamma * spec.noise_var, 1.0 / spec.detection);
}
}  // namespace detail

/// CDF of gamma_r = I^r / sigma^2.
inline double snr_cdf(const FsoLinkSpec& spec, double gamma) {
    if (gamma <= 0.0) return 0.0;
    if (std::isinf(gamma)) return 1.0;
    return composite_gain_cdf(spec, detail::gain_at_snr(spec, gamma));
}

inline double snr_ccdf(const FsoLinkSpec& spec, double gamma) {
    if (gamma <= 0.0) return 1.0;
    if (std::isinf(gamma)) return 0.0;
    return composite_gain_ccdf(spec, detail::gain_at_snr(spec, gamma));
}

inline double snr_pdf(const FsoLinkSpec& spec, double gamma) {
    if (gamma <= 0.0) return 0.0;
    const double i = detail::gain_at_snr(spec, gamma);
    return composite_gain_pdf(spec, i) * i / (spec.detection * gamma);
}

/// E[gamma_r^n] from the closed form, normalized so that n = 0 gives one.
inline double snr_moment(const FsoLinkSpec& spec, double n) {
    if (!(n >= 0.0)) throw DomainError("snr_moment: order must be non-negative");
    const auto& t = spec.turbulence;
    const double g2 = spec.pointing.g2();
    const int r = spec.detection;
    const double nr = n * r;
    const double delta = g2 / (g2 + 1.0) * t.c() * t.mean();
    double sum = 0.0;
    for (int m = 1; m <= t.kappa(); ++m) {
        if (t.weight(m) == 0.0) continue;
        sum += t.weight(m) * std::pow(t.c(), -(t.nu() + m) / 2) * numerics::gamma_fn(nr + m);
    }
    const double prefactor = r * g2 * numerics::gamma_fn(nr + t.nu()) / (std::pow(2.0, r) * (nr + g2) * std::pow(delta, nr));
    return prefactor * sum * std::pow(spec.electrical_snr(), n);
}

namespace detail {
inline void require_varpi(double varpi) {
    if (!(std::abs(varpi - kVarpiHeterodyne) < 1e-12 || std::abs(varpi - kVarpiImdd) < 1e-12))
        throw DomainError("fso rate: varpi must be 1 or e/(2 pi)");
}
}  // namespace detail

/// E[ln(1 + varpi gamma)] by integrating the SNR CCDF on a log axis.
inline double fso_rate_exact(const FsoLinkSpec& spec, double varpi) {
    spec.validate();
    detail::require_varpi(varpi);
    auto f = [&](double t) {
        const double x = std::exp(t);
        const double w = 1.0 / (1.0 + 1.0 / (varpi * x));
        if (w == 0.0) return 0.0;
        return w * snr_ccdf(spec, x);
    };
    return numerics::integral(f, -INFINITY, INFINITY, numerics::QuadratureSpec{}.with_tolerance(1e-12, 1e-9));
}

/// Low-SNR form varpi E[gamma].
inline double fso_rate_low(const FsoLinkSpec& spec, double varpi) {
    detail::require_varpi(varpi);
    return varpi * snr_moment(spec, 1.0);
}

/// Jensen bound ln(1 + varpi E[gamma]).
inline double fso_rate_upper(const FsoLinkSpec& spec, double varpi) {
    detail::require_varpi(varpi);
    return std::log1p(varpi * snr_moment(spec, 1.0));
}

/// High-SNR form from the derivative of the moment at n = 0, E[ln(varpi gamma)].
inline double fso_rate_high2(const FsoLinkSpec& spec, double varpi) {
    detail::require_varpi(varpi);
    const auto& t = spec.turbulence;
    const double g2 = spec.pointing.g2();
    const int r = spec.detection;
    const double delta = g2 / (g2 + 1.0) * t.c() * t.mean();
    double total = 0.0;
    for (int m = 1; m <= t.kappa(); ++m) {
        if (t.weight(m) == 0.0) continue;
        const double w = 0.5 * t.weight(m) * std::pow(t.c(), -(t.nu() + m) / 2) * numerics::gamma_fn(t.nu()) *
                         numerics::gamma_fn(m);
        total += w * r * (-1.0 / g2 - std::log(delta) + numerics::digamma(t.nu()) + numerics::digamma(m));
    }
    return total + std::log(varpi * spec.electrical_snr());
}

/// Power-law term C x^d in the small-gain expansion of the composite CDF.
struct CdfTerm {
    double exponent;
    double coefficient;
};

/// Leading terms of F_I(x) ~ sum C x^d as x -> 0 with d below `limit`.
/// Throws when two exponents coincide (logarithmic terms).
inline std::vector<CdfTerm> small_gain_expansion(const FsoLinkSpec& spec, double limit) {
    const auto& t = spec.turbulence;
    const double g2 = spec.pointing.g2();
    const double nu = t.nu(), c = t.c();
    std::vector<CdfTerm> density;  // f_a(I) ~ A I^{d-1}
    auto is_int = [](double v) { return std::abs(v - std::round(v)) < 1e-9; };
    for (int n = 1; n <= t.kappa(); ++n) {
        const double w = t.weight(n);
        if (w == 0.0) continue;
        const double order = std::abs(nu - n);
        const double low = std::min(nu, static_cast<double>(n)), high = std::max(nu, static_cast<double>(n));
        if (order == 0.0 && low < limit) throw DomainError("small_gain_expansion: logarithmic term (nu = n)");
        for (int k = 0; low + k < limit; ++k) {
            if (is_int(order) && k >= order) throw DomainError("small_gain_expansion: logarithmic term");
            const double coef = w * (k % 2 ? -1.0 : 1.0) * numerics::gamma_fn(order - k) /
                                (2.0 * numerics::gamma_fn(k + 1.0)) * std::pow(c, k - order / 2);
            density.push_back({low + k, coef});
        }
        for (int k = 0; high + k < limit && order > 0.0; ++k) {
            if (is_int(order)) throw DomainError("small_gain_expansion: logarithmic term");
            const double coef = w * (-pi / (2.0 * std::sin(order * pi))) /
                                (numerics::gamma_fn(k + 1.0) * numerics::gamma_fn(k + order + 1.0)) *
                                std::pow(c, k + order / 2);
            density.push_back({high + k, coef});
        }
    }
    const double scale = spec.gain_scale();
    std::vector<CdfTerm> out;
    for (const auto& term : density) {
        const double d = term.exponent;
        if (std::abs(d - g2) < 1e-9) throw DomainError("small_gain_expansion: pointing pole coincides");
        out.push_back({d, term.coefficient * (-g2 / (d * (d - g2))) * std::pow(scale, -d)});
    }
    if (g2 < limit) out.push_back({g2, t.moment(-g2) * std::pow(scale, -g2)});
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (std::abs(out[i].exponent - out[j].exponent) < 1e-9)
                throw DomainError("small_gain_expansion: coincident exponents");
    return out;
}

/// High-SNR expansion: E[ln(varpi gamma)] plus the fractional-order
/// corrections C (sigma^2 / varpi)^{d/r} Gamma(d/r) Gamma(1 - d/r).
inline double fso_rate_high1(const FsoLinkSpec& spec, double varpi) {
    const double base = fso_rate_high2(spec, varpi);
    const int r = spec.detection;
    const double k = std::pow(spec.noise_var / varpi, 1.0 / r);
    double corr = 0.0;
    for (const auto& term : small_gain_expansion(spec, r)) {
        const double s = term.exponent / r;
        corr += term.coefficient * std::pow(k, term.exponent) * numerics::gamma_fn(s) * numerics::gamma_fn(1.0 - s);
    }
    return base + corr;
}

/// High-SNR outage slope implied by the small-gain expansion:
/// min(g^2, nu, n_min) / r where n_min is the first non-vanishing term.
inline double fso_diversity_order(const FsoLinkSpec& spec) {
    const auto& t = spec.turbulence;
    return std::min({spec.pointing.g2(), t.nu(), static_cast<double>(t.leading_term())}) / spec.detection;
}

/// Beam-waist trade-off: outage P[I < threshold] as a function of the
/// transmit waist w0 for a Gaussian beam over a short link.
struct BeamWaistScenario {
    MalagaParams turbulence = MalagaParams::reference();
    double aperture_m = 0.005;
    double jitter_m = 0.0175;  ///< sigma_s
    double link_m = 100.0;
    double wavelength_m = 1550e-9;
    double normalized_threshold = 3e-2;  ///< I_th / I_l
};

inline double beam_waist_outage(const BeamWaistScenario& s, double w0_m) {
    const double wz = gaussian_beam_waist(w0_m, s.wavelength_m, s.link_m);
    const auto pointing = PointingParams::symmetric(s.jitter_m, s.aperture_m, wz);
    return detail::normalized_cdf(s.turbulence, pointing.g2(), s.normalized_threshold / pointing.peak_gain());
}

struct BeamWaistOptimum {
    double w0_m;
    double outage;
    bool interior;  ///< minimum lies strictly inside the search interval
};

/// Minimize beam_waist_outage over [lo, hi]: coarse grid, then Brent refinement.
inline BeamWaistOptimum optimal_beam_waist(const BeamWaistScenario& s, double lo_m = 0.01, double hi_m = 0.06,
                                           int grid = 51) {
    if (!(lo_m > 0.0 && hi_m > lo_m) || grid < 3) throw DomainError("optimal_beam_waist: bad search interval");
    std::size_t best = 0;
    std::vector<double> w(grid), out(grid);
    for (int i = 0; i < grid; ++i) {
        w[i] = lo_m + (hi_m - lo_m) * i / (grid - 1);
        out[i] = beam_waist_outage(s, w[i]);
        if (out[i] < out[best]) best = i;
    }
    if (best == 0 || best + 1 == static_cast<std::size_t>(grid)) return {w[best], out[best], false};
    auto f = [&](double x) { return beam_waist_outage(s, x); };
    const auto [x, fx] = boost::math::tools::brent_find_minima(f, w[best - 1], w[best + 1], 30);
    return {x, fx, true};
}

}  // namespace fsonet::fso
