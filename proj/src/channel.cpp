#include "starnoma/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "starnoma/errors.hpp"

namespace starnoma::channel {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) {
        throw ConfigError("SystemConfig: " + msg);
    }
}

bool positive_finite(double v) {
    return std::isfinite(v) && v > 0.0;
}

}  // namespace

void SystemConfig::validate() const {
    require(positive_finite(d_sn) && positive_finite(d_sr) && positive_finite(d_rn) && positive_finite(d_rm),
            "all distances must be > 0");
    require(positive_finite(alpha), "alpha must be > 0");
    require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be >= 0");
    require(K >= 1, "K must be >= 1");
    require(std::isfinite(a_n) && std::isfinite(a_m) && a_n > 0.0 && a_m > 0.0 && a_n < 1.0 && a_m < 1.0,
            "a_n and a_m must lie in (0, 1)");
    require(std::fabs(a_n + a_m - 1.0) <= 1e-12, "a_n + a_m must equal 1");
    if (require_power_order) {
        require(a_n < a_m, "a_n must be smaller than a_m");
    }
    require(positive_finite(R_n) && positive_finite(R_m), "target rates must be > 0");
    require(std::isfinite(omega_I) && omega_I >= 0.0, "omega_I must be >= 0");
    require(ipsic == 0 || ipsic == 1, "ipsic flag must be 0 or 1");
}

double SystemConfig::alpha_sn() const { return path_gain(d_sn, alpha); }
double SystemConfig::alpha_sr() const { return path_gain(d_sr, alpha); }
double SystemConfig::alpha_rn() const { return path_gain(d_rn, alpha); }
double SystemConfig::alpha_rm() const { return path_gain(d_rm, alpha); }

double path_gain(double d, double alpha) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw DomainError("path_gain: distance must be > 0");
    }
    return std::pow(d, -alpha);
}

double sample_rician_amp(double gain, double kappa, rng::Stream& stream) {
    const double los = std::sqrt(kappa / (kappa + 1.0));
    const double sigma = std::sqrt(0.5 / (kappa + 1.0));
    const double re = los + sigma * stream.normal();
    const double im = sigma * stream.normal();
    return std::sqrt(gain) * std::hypot(re, im);
}

double sample_cascade_sum(int K, double g_sr, double g_rx, double kappa, rng::Stream& stream) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
        const double first = sample_rician_amp(g_sr, kappa, stream);
        const double second = sample_rician_amp(g_rx, kappa, stream);
        sum += first * second;
    }
    return sum;
}

CascadeMoments cascade_moments(double g_sr, double g_rx, double kappa, int K) {
    if (!(g_sr > 0.0) || !(g_rx > 0.0) || !(kappa >= 0.0) || K < 1) {
        throw DomainError("cascade_moments: gains > 0, kappa >= 0, K >= 1 required");
    }
    const double L = specfun::laguerre_half(-kappa);
    const double L2 = L * L;
    const double g = g_sr * g_rx;
    const double pi = std::numbers::pi;
    CascadeMoments m;
    m.mu = pi * std::sqrt(g) / (4.0 * (kappa + 1.0)) * L2;
    m.omega = g * (1.0 - pi * pi / (16.0 * (1.0 + kappa) * (1.0 + kappa)) * L2 * L2);
    if (!(m.omega > 0.0)) {
        throw DomainError("cascade_moments: variance lost to cancellation (kappa too large)");
    }
    m.phi = K * m.mu * m.mu / m.omega - 1.0;
    m.scale = m.omega / m.mu;
    return m;
}

double cascade_pdf(double x, double g_sr, double g_rx, double kappa, const specfun::EvalOptions& opts) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("cascade_pdf: x must be > 0");
    }
    if (!(g_sr > 0.0) || !(g_rx > 0.0) || !(kappa >= 0.0)) {
        throw DomainError("cascade_pdf: gains > 0 and kappa >= 0 required");
    }
    constexpr int cap = 40;
    const double g = g_sr * g_rx;
    const double y = 2.0 * x * (kappa + 1.0) / std::sqrt(g);

    // ln K_n(y) for n = 0..cap, by the ratio form of the upward recurrence
    std::array<double, cap + 1> log_k{};
    {
        const double k0 = specfun::bessel_k_scaled(0, y, opts);
        const double k1 = specfun::bessel_k_scaled(1, y, opts);
        log_k[0] = std::log(k0) - y;
        log_k[1] = std::log(k1) - y;
        double ratio = k1 / k0;
        for (int n = 1; n < cap; ++n) {
            ratio = 1.0 / ratio + 2.0 * n / y;
            log_k[n + 1] = log_k[n] + std::log(ratio);
        }
    }

    const double log_x = std::log(x);
    const double log_g = std::log(g);
    const double log_k1 = std::log(kappa + 1.0);
    const double base = std::log(4.0) - 2.0 * kappa;
    const int imax = kappa > 0.0 ? cap : 0;
    const double log_kappa = kappa > 0.0 ? std::log(kappa) : 0.0;
    const double tol = opts.abs_tol;

    double total = 0.0;
    for (int i = 0; i <= imax; ++i) {
        double row = 0.0;
        for (int j = 0; j <= imax; ++j) {
            const int s = i + j;
            const double lt = base + s * log_kappa + (s + 2) * log_k1 + (s + 1) * log_x - 0.5 * (s + 2) * log_g -
                              2.0 * specfun::log_gamma(i + 1.0) - 2.0 * specfun::log_gamma(j + 1.0) +
                              log_k[std::abs(i - j)];
            const double term = std::exp(lt);
            row += term;
            if (j > i && term < tol * (total + row)) {
                break;
            }
        }
        total += row;
        if (i > 0 && row < tol * total) {
            return total;
        }
    }
    if (imax == 0) {
        return total;
    }
    throw ConvergenceError("cascade_pdf: double series not converged at i, j <= 40");
}

double rician_cdf(double x, double gain, double kappa) {
    if (x <= 0.0) {
        return 0.0;
    }
    return specfun::marcum_p(std::sqrt(2.0 * kappa), x * std::sqrt(2.0 * (kappa + 1.0) / gain));
}

double rician_pdf(double x, double gain, double kappa) {
    if (x <= 0.0) {
        return 0.0;
    }
    const double c = (kappa + 1.0) / gain;
    const double z = 2.0 * x * std::sqrt(kappa * c);
    // e^{-kappa - c x^2} I0(z) = e^{-(x sqrt(c) - sqrt(kappa))^2} I0e(z)
    const double d = x * std::sqrt(c) - std::sqrt(kappa);
    return 2.0 * c * x * std::exp(-d * d) * specfun::bessel_i_scaled(0, z);
}

double rician_mean(double gain, double kappa) {
    return std::sqrt(std::numbers::pi * gain / (4.0 * (kappa + 1.0))) * specfun::laguerre_half(-kappa);
}

double aggregate_second_moment_n(const SystemConfig& cfg) {
    const CascadeMoments m = cascade_moments(cfg.alpha_sr(), cfg.alpha_rn(), cfg.kappa, cfg.K);
    const double a = cfg.alpha_sn();
    const double mean_x = cfg.K * m.mu;
    return a + 2.0 * rician_mean(a, cfg.kappa) * mean_x + cfg.K * m.omega + mean_x * mean_x;
}

double aggregate_second_moment_m(const SystemConfig& cfg) {
    const CascadeMoments m = cascade_moments(cfg.alpha_sr(), cfg.alpha_rm(), cfg.kappa, cfg.K);
    const double mean_x = cfg.K * m.mu;
    return cfg.K * m.omega + mean_x * mean_x;
}

ChannelRealization sample_realization(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t trial) {
    ChannelRealization r;
    rng::Stream direct(seed, trial, rng::Component::Direct);
    r.h_sn_amp = sample_rician_amp(cfg.alpha_sn(), cfg.kappa, direct);
    if (cfg.omega_I > 0.0) {
        rng::Stream interf(seed, trial, rng::Component::Interference);
        r.h_I_sq = interf.exponential(cfg.omega_I);
    }
    rng::Stream cn(seed, trial, rng::Component::CascadeN);
    r.cascade_n = sample_cascade_sum(cfg.K, cfg.alpha_sr(), cfg.alpha_rn(), cfg.kappa, cn);
    rng::Stream cm(seed, trial, rng::Component::CascadeM);
    r.cascade_m = sample_cascade_sum(cfg.K, cfg.alpha_sr(), cfg.alpha_rm(), cfg.kappa, cm);
    return r;
}

}  // namespace starnoma::channel
