#pragma once

// Closed-form, quadrature and asymptotic performance expressions.
//
// Conventions: rho is the linear transmit SNR; every rate is in bits per
// channel use. Outage values come back with a status so that clamped sums,
// certain outage and the divergent-constant surrogate stay visible.

#include <vector>

#include "starnoma/channel.hpp"

namespace starnoma::analysis {

using channel::SystemConfig;

struct Thresholds {
    double gamma_th_n = 0.0;      // 2^{R_n} - 1
    double gamma_th_m = 0.0;      // 2^{R_m} - 1
    double gamma_th_n_oma = 0.0;  // 2^{2 R_n} - 1
    double gamma_th_m_oma = 0.0;  // 2^{2 R_m} - 1
    double beta = 0.0;            // gamma_th_n / (a_n rho)
    bool tau_defined = false;     // a_m > gamma_th_m a_n
    double tau = 0.0;             // gamma_th_m / (rho (a_m - gamma_th_m a_n)); +inf when undefined
    double ell = 0.0;             // gamma_th_n_oma / (rho a_n)
};

Thresholds thresholds(const SystemConfig& cfg, double rho);

enum class Status {
    Ok,
    Clamped,         // quadrature sum left [0, 1] by less than 1e-6 and was clamped
    CertainOutage,   // a_m <= gamma_th_m a_n: user m can never decode
    SurrogateTheta,  // asymptote uses the finite stand-in for the divergent constant
};

const char* to_string(Status s);

struct OutageValue {
    double value = 0.0;
    Status status = Status::Ok;
    double excursion = 0.0;  // how far the raw sum was outside [0, 1]
};

inline constexpr int kDefaultLaguerreOrder = 300;
inline constexpr int kDefaultChebyshevOrder = 50;

/// User n with imperfect SIC: Gauss-Laguerre over |h_I|^2 and Gauss-Chebyshev
/// over the cascade amplitude, Rician CDF through Marcum Q.
OutageValue op_user_n_ipsic(const SystemConfig& cfg, double rho, int P = kDefaultLaguerreOrder,
                            int U = kDefaultChebyshevOrder);

/// User n with perfect SIC: one Gauss-Chebyshev sum over the direct link.
OutageValue op_user_n_psic(const SystemConfig& cfg, double rho, int U = kDefaultChebyshevOrder);

/// The same CDF evaluated by adaptive quadrature instead of the fixed rule.
double op_user_n_psic_adaptive(const SystemConfig& cfg, double rho);

/// Pr(A^2 < s) for A = |h_sn| + cascade_n under the gamma approximation,
/// by the fixed Chebyshev rule (unclamped raw sum).
double aggregate_cdf_n(const SystemConfig& cfg, double s, int U = kDefaultChebyshevOrder);

/// User m: regularized lower gamma P(K mu^2 / Omega, mu sqrt(tau) / Omega).
OutageValue op_user_m(const SystemConfig& cfg, double rho);

enum class User { N, M };

/// OMA users: Chebyshev sum with ell for N, regularized gamma for M.
OutageValue op_oma(const SystemConfig& cfg, double rho, User user, int U = kDefaultChebyshevOrder);

/// 1 - (1 - p_n)(1 - p_m).
double op_system(double p_n, double p_m);

enum class AsymKind { IpSicFloor, PSicUserN, UserM };

/// Finite stand-in for 2F1(2, 1/2; 5/2; 1) 16 (1+kappa)^2 / (3 e^{2 kappa}),
/// with the hypergeometric factor evaluated at z instead of 1.
double theta_surrogate(double kappa, double z = 1.0 - 1e-6);

/// High-SNR expressions. PSicUserN and UserM carry Status::SurrogateTheta.
OutageValue op_asym(const SystemConfig& cfg, double rho, AsymKind kind, double theta_z = 1.0 - 1e-6,
                    int P = kDefaultLaguerreOrder, int U = kDefaultChebyshevOrder);

struct CurvePoint {
    double rho_db = 0.0;
    double value = 0.0;
};

/// Negated least-squares slope of log10 P against log10 rho over
/// lo_db <= rho_db <= hi_db. Needs three points, all with P > 0.
double diversity_fit(const std::vector<CurvePoint>& curve, double lo_db, double hi_db);

/// Least-squares slope of rate against log2 rho over the window.
double slope_fit(const std::vector<CurvePoint>& curve, double lo_db, double hi_db);

/// User n, perfect SIC: (rho a_n / ln 2) int (1 - F(x)) / (1 + rho a_n x) dx.
double rate_user_n_psic(const SystemConfig& cfg, double rho, int U = kDefaultChebyshevOrder);

/// User m: Chebyshev sum over the SINR ceiling a_m / a_n.
double rate_user_m(const SystemConfig& cfg, double rho, int U = kDefaultChebyshevOrder);

/// OMA users, with the 1/2 pre-log.
double rate_oma(const SystemConfig& cfg, double rho, User user, int U = kDefaultChebyshevOrder);

enum class Bound { NomaN, OmaN, OmaM };

/// Jensen bound log2(1 + rho a E[amplitude^2]), halved for OMA.
double rate_upper_bound(const SystemConfig& cfg, double rho, Bound which);

enum class ThroughputMode { DelayLimited_ipSIC, DelayLimited_pSIC, DelayTolerant };

double throughput(const SystemConfig& cfg, double rho, ThroughputMode mode);

double db_to_linear(double db);

}  // namespace starnoma::analysis
