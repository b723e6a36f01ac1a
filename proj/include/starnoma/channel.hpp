#pragma once

// Scenario description, fading statistics and amplitude samplers.
//
// Coherent phase alignment turns every SINR into a function of amplitude sums,
// so only amplitudes are drawn; phases never appear.

#include <cstdint>

#include "starnoma/rng.hpp"
#include "starnoma/specfun.hpp"

namespace starnoma::channel {

struct SystemConfig {
    // distances in metres
    double d_sn = 10.0;
    double d_sr = 8.0;
    double d_rn = 6.0;
    double d_rm = 10.0;
    double alpha = 2.0;   // path-loss exponent
    double kappa = 0.31622776601683794;  // Rician factor, linear (-5 dB)
    int K = 5;            // elements per half-surface
    double a_n = 0.2;
    double a_m = 0.8;
    double R_n = 0.5;     // bits per channel use
    double R_m = 0.5;
    double omega_I = 1e-3;  // residual interference power, linear (-30 dB)
    int ipsic = 1;          // 1: imperfect SIC, 0: perfect SIC
    // The power-split sweep deliberately crosses a_n = a_m; everything else
    // keeps the near user on the smaller share.
    bool require_power_order = true;

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    double alpha_sn() const;
    double alpha_sr() const;
    double alpha_rn() const;
    double alpha_rm() const;
};

struct ChannelRealization {
    double h_sn_amp = 0.0;   // |h_sn|
    double cascade_n = 0.0;  // sum_k |h_sr^k h_rn^k|
    double cascade_m = 0.0;  // sum_k |h_sr^k h_rm^k|, disjoint element group
    double h_I_sq = 0.0;     // |h_I|^2
};

struct CascadeMoments {
    double mu = 0.0;     // mean of one product |h_sr^k h_rx^k|
    double omega = 0.0;  // its variance
    double phi = 0.0;    // gamma shape minus one, K mu^2 / omega - 1
    double scale = 0.0;  // gamma scale, omega / mu
};

/// d^{-alpha}.
double path_gain(double d, double alpha);

/// One draw of |sqrt(g) (sqrt(k/(k+1)) + sqrt(1/(k+1)) h~)|, h~ ~ CN(0, 1).
double sample_rician_amp(double gain, double kappa, rng::Stream& stream);

/// Sum of K independent products of two Rician amplitudes.
double sample_cascade_sum(int K, double g_sr, double g_rx, double kappa, rng::Stream& stream);

/// Mean, variance and gamma parameters of the cascade sum's approximation.
CascadeMoments cascade_moments(double g_sr, double g_rx, double kappa, int K);

/// Density of one product |h_sr h_rx| from the double Bessel-K series,
/// truncated at i, j <= 40. Test-grade; the simulators never use it.
double cascade_pdf(double x, double g_sr, double g_rx, double kappa, const specfun::EvalOptions& opts = {});

/// Rician amplitude CDF 1 - Q(sqrt(2 kappa), x sqrt(2 (kappa+1) / g)).
double rician_cdf(double x, double gain, double kappa);

/// Rician amplitude density.
double rician_pdf(double x, double gain, double kappa);

/// E|h| = sqrt(pi g / (4 (kappa+1))) L_{1/2}(-kappa).
double rician_mean(double gain, double kappa);

/// E[(|h_sn| + sum_k |h_sr^k h_rn^k|)^2] for user n.
double aggregate_second_moment_n(const SystemConfig& cfg);

/// E[(sum_k |h_sr^k h_rm^k|)^2] for user m.
double aggregate_second_moment_m(const SystemConfig& cfg);

/// Draw every amplitude of one trial. Each component has its own stream, so
/// the realization depends only on (seed, trial).
ChannelRealization sample_realization(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t trial);

}  // namespace starnoma::channel
