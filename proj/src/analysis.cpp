#include "starnoma/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "starnoma/errors.hpp"
#include "starnoma/quadrature.hpp"
#include "starnoma/specfun.hpp"

namespace starnoma::analysis {

namespace {

using channel::CascadeMoments;
using quadrature::Family;

double user_n_cutoff(const SystemConfig& cfg);
double aggregate_cdf_below(const SystemConfig& cfg, double s, int U, double sure);

constexpr double kMaxExcursion = 1e-6;
constexpr double kLn2 = std::numbers::ln2;

void check_rho(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw DomainError("rho must be a positive finite linear SNR");
    }
}

OutageValue finalize(double raw) {
    OutageValue out;
    if (!std::isfinite(raw)) {
        throw ConvergenceError("outage sum is not finite");
    }
    if (raw < 0.0) {
        out.excursion = -raw;
    } else if (raw > 1.0) {
        out.excursion = raw - 1.0;
    }
    if (out.excursion > kMaxExcursion) {
        throw ConvergenceError("outage sum left [0, 1] by " + std::to_string(out.excursion) +
                               "; quadrature order too low");
    }
    out.value = std::clamp(raw, 0.0, 1.0);
    out.status = out.excursion > 0.0 ? Status::Clamped : Status::Ok;
    return out;
}

CascadeMoments moments_n(const SystemConfig& cfg) {
    return channel::cascade_moments(cfg.alpha_sr(), cfg.alpha_rn(), cfg.kappa, cfg.K);
}

CascadeMoments moments_m(const SystemConfig& cfg) {
    return channel::cascade_moments(cfg.alpha_sr(), cfg.alpha_rm(), cfg.kappa, cfg.K);
}

// Double sum over |h_I|^2 (Laguerre) and the cascade amplitude (Chebyshev):
// sum_p H_p Pr(A^2 < chi_p^2), with the cascade density integrated against
// the Rician CDF of the direct link. chi_of(x_p) supplies chi.
double laguerre_chebyshev_sum(const SystemConfig& cfg, int P, int U, const std::function<double(double)>& chi_of) {
    const CascadeMoments m = moments_n(cfg);
    const auto lag = quadrature::cached_rule(Family::Laguerre, P);
    const auto cheb = quadrature::cached_rule(Family::ChebyshevFirstKind, U);
    const double shape = m.phi + 1.0;
    const double log_Phi = -m.phi * std::log(2.0) - shape * std::log(m.scale) - specfun::log_gamma(shape);
    const double a = std::sqrt(2.0 * cfg.kappa);
    const double c = std::sqrt(2.0 * (cfg.kappa + 1.0) / cfg.alpha_sn());

    const double sure = user_n_cutoff(cfg);

    double total = 0.0;
    for (int p = 0; p < P; ++p) {
        if (lag->weights[p] == 0.0) {
            continue;  // contributes less than e^{-745}
        }
        const double chi = chi_of(lag->nodes[p]);
        if (chi <= 0.0) {
            continue;
        }
        if (chi * chi >= sure) {
            // the whole amplitude law sits below chi; the fixed rule would
            // stretch its nodes over mostly empty range
            total += lag->weights[p];
            continue;
        }
        const double log_chi = std::log(chi);
        double inner = 0.0;
        for (int u = 0; u < U; ++u) {
            const double x = cheb->nodes[u];
            const double lt = log_Phi + cheb->log_weights[u] + shape * log_chi + m.phi * std::log1p(x) -
                              (x + 1.0) * chi / (2.0 * m.scale);
            if (lt < -745.0) {
                continue;
            }
            inner += std::exp(lt) * specfun::marcum_p(a, 0.5 * chi * (1.0 - x) * c);
        }
        total += lag->weights[p] * inner;
    }
    return total;
}

// Integral of c * tail(x) / (1 + c x) over x in (0, x_max), on a log axis so
// that both the 1/c knee and the bulk of the distribution get resolved.
// The piece below x_lo = 1e-12 / c is bounded by 1e-12 and dropped.
double log_axis_integral(const std::function<double(double)>& tail, double c, double x_max) {
    const double x_lo = 1e-12 / c;
    if (x_max <= x_lo) {
        return 0.0;
    }
    auto integrand = [&](double u) {
        const double x = std::exp(u);
        const double cx = c * x;
        return cx / (1.0 + cx) * tail(x);
    };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, std::log(x_lo), std::log(x_max), 25, 1e-11, &error);
    if (!(error <= 1e-8)) {
        throw ConvergenceError("rate integral did not reach 1e-8 absolute (estimate " + std::to_string(error) + ")");
    }
    return value;
}

// Smallest squared amplitude beyond which tail_bound(amplitude) < 1e-17.
double tail_cutoff(const std::function<double(double)>& tail_bound, double start) {
    double a = start;
    for (int i = 0; i < 200; ++i) {
        if (tail_bound(a) < 1e-17) {
            return a * a;
        }
        a *= 1.25;
    }
    throw ConvergenceError("could not bound the amplitude tail");
}

double user_n_cutoff(const SystemConfig& cfg) {
    const CascadeMoments m = moments_n(cfg);
    const double a = std::sqrt(2.0 * cfg.kappa);
    const double c = std::sqrt(2.0 * (cfg.kappa + 1.0) / cfg.alpha_sn());
    // Pr(|h| + X > t) <= Pr(|h| > t/2) + Pr(X > t/2)
    auto bound = [&](double t) {
        return specfun::marcum_q(a, 0.5 * t * c) + specfun::gamma_q(m.phi + 1.0, 0.5 * t / m.scale);
    };
    return tail_cutoff(bound, std::sqrt(channel::aggregate_second_moment_n(cfg)));
}

double user_m_cutoff(const CascadeMoments& m) {
    auto bound = [&](double t) { return specfun::gamma_q(m.phi + 1.0, t / m.scale); };
    return tail_cutoff(bound, (m.phi + 1.0) * m.scale);
}

double user_n_rate_integral(const SystemConfig& cfg, double rho, int U) {
    const double c = rho * cfg.a_n;
    const double x_max = user_n_cutoff(cfg);
    auto tail = [&](double x) { return std::clamp(1.0 - aggregate_cdf_below(cfg, x, U, x_max), 0.0, 1.0); };
    return log_axis_integral(tail, c, x_max) / kLn2;
}

struct LsSlope {
    double slope = 0.0;
    int count = 0;
};

LsSlope least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw DomainError("slope fit: window points share one abscissa");
    }
    return {sxy / sxx, static_cast<int>(xs.size())};
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Ok:
            return "ok";
        case Status::Clamped:
            return "clamped";
        case Status::CertainOutage:
            return "certain_outage";
        case Status::SurrogateTheta:
            return "surrogate_theta";
    }
    return "unknown";
}

double db_to_linear(double db) {
    return std::pow(10.0, db / 10.0);
}

Thresholds thresholds(const SystemConfig& cfg, double rho) {
    check_rho(rho);
    Thresholds t;
    t.gamma_th_n = std::exp2(cfg.R_n) - 1.0;
    t.gamma_th_m = std::exp2(cfg.R_m) - 1.0;
    t.gamma_th_n_oma = std::exp2(2.0 * cfg.R_n) - 1.0;
    t.gamma_th_m_oma = std::exp2(2.0 * cfg.R_m) - 1.0;
    t.beta = t.gamma_th_n / (cfg.a_n * rho);
    const double margin = cfg.a_m - t.gamma_th_m * cfg.a_n;
    t.tau_defined = margin > 0.0;
    t.tau = t.tau_defined ? t.gamma_th_m / (rho * margin) : std::numeric_limits<double>::infinity();
    t.ell = t.gamma_th_n_oma / (rho * cfg.a_n);
    return t;
}

double aggregate_cdf_n(const SystemConfig& cfg, double s, int U) {
    return aggregate_cdf_below(cfg, s, U, user_n_cutoff(cfg));
}

namespace {

// Pr(A^2 < s); sure is a squared amplitude that A exceeds with probability < 1e-17.
double aggregate_cdf_below(const SystemConfig& cfg, double s, int U, double sure) {
    if (!(s > 0.0)) {
        return 0.0;
    }
    if (s >= sure) {
        return 1.0;
    }
    const CascadeMoments m = moments_n(cfg);
    const auto cheb = quadrature::cached_rule(Family::ChebyshevFirstKind, U);
    const double shape = m.phi + 1.0;
    const double kappa = cfg.kappa;
    const double alpha = cfg.alpha_sn();
    const double root_s = std::sqrt(s);
    const double c = std::sqrt((kappa + 1.0) / alpha);
    const double root_k = std::sqrt(kappa);
    const double log_pref = std::log(s) + std::log(kappa + 1.0) - std::log(alpha);

    double sum = 0.0;
    for (int u = 0; u < U; ++u) {
        const double x = cheb->nodes[u];
        const double y = 0.5 * root_s * (x + 1.0);  // direct-link amplitude
        const double d = y * c - root_k;
        const double lt = log_pref + cheb->log_weights[u] + std::log1p(x) - d * d;
        if (lt < -745.0) {
            continue;
        }
        const double bessel = specfun::bessel_i_scaled(0, 2.0 * y * c * root_k);
        const double g = specfun::gamma_p(shape, 0.5 * (1.0 - x) * root_s / m.scale);
        sum += std::exp(lt) * bessel * g;
    }
    return sum;
}

}  // namespace

OutageValue op_user_n_ipsic(const SystemConfig& cfg, double rho, int P, int U) {
    cfg.validate();
    const Thresholds th = thresholds(cfg, rho);
    // the scheme itself fixes the SIC flag to 1; Omega_I = 0 recovers perfect SIC
    const double coupling = cfg.omega_I * rho;
    auto chi_of = [&](double xp) { return std::sqrt(th.beta * (coupling * xp + 1.0)); };
    return finalize(laguerre_chebyshev_sum(cfg, P, U, chi_of));
}

OutageValue op_user_n_psic(const SystemConfig& cfg, double rho, int U) {
    cfg.validate();
    const Thresholds th = thresholds(cfg, rho);
    return finalize(aggregate_cdf_n(cfg, th.beta, U));
}

double op_user_n_psic_adaptive(const SystemConfig& cfg, double rho) {
    cfg.validate();
    const Thresholds th = thresholds(cfg, rho);
    const CascadeMoments m = moments_n(cfg);
    const double root = std::sqrt(th.beta);
    const double alpha = cfg.alpha_sn();
    auto integrand = [&](double y) {
        return channel::rician_pdf(y, alpha, cfg.kappa) * specfun::gamma_p(m.phi + 1.0, (root - y) / m.scale);
    };
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, root, 15, 1e-10, &error);
}

OutageValue op_user_m(const SystemConfig& cfg, double rho) {
    cfg.validate();
    const Thresholds th = thresholds(cfg, rho);
    if (!th.tau_defined) {
        return {1.0, Status::CertainOutage, 0.0};
    }
    const CascadeMoments m = moments_m(cfg);
    return finalize(specfun::gamma_p(m.phi + 1.0, std::sqrt(th.tau) / m.scale));
}

OutageValue op_oma(const SystemConfig& cfg, double rho, User user, int U) {
    cfg.validate();
    const Thresholds th = thresholds(cfg, rho);
    if (user == User::N) {
        return finalize(aggregate_cdf_n(cfg, th.ell, U));
    }
    const CascadeMoments m = moments_m(cfg);
    return finalize(specfun::gamma_p(m.phi + 1.0, std::sqrt(th.gamma_th_m_oma / (rho * cfg.a_m)) / m.scale));
}

double op_system(double p_n, double p_m) {
    if (!(p_n >= 0.0 && p_n <= 1.0) || !(p_m >= 0.0 && p_m <= 1.0)) {
        throw DomainError("op_system: probabilities must lie in [0, 1]");
    }
    return 1.0 - (1.0 - p_n) * (1.0 - p_m);
}

double theta_surrogate(double kappa, double z) {
    const double f = specfun::gauss_2f1(2.0, 0.5, 2.5, z);
    return f * 16.0 * (1.0 + kappa) * (1.0 + kappa) / (3.0 * std::exp(2.0 * kappa));
}

OutageValue op_asym(const SystemConfig& cfg, double rho, AsymKind kind, double theta_z, int P, int U) {
    cfg.validate();
    const Thresholds th = thresholds(cfg, rho);
    const int K = cfg.K;
    switch (kind) {
        case AsymKind::IpSicFloor: {
            const double beta_tilde = th.gamma_th_n / cfg.a_n;
            auto chi_of = [&](double xp) { return std::sqrt(xp * cfg.omega_I * beta_tilde); };
            return finalize(laguerre_chebyshev_sum(cfg, P, U, chi_of));
        }
        case AsymKind::PSicUserN: {
            const double theta = theta_surrogate(cfg.kappa, theta_z);
            const double log_v = std::log(2.0) + K * std::log(theta) + std::log(cfg.kappa + 1.0) +
                                 (K + 1.0) * std::log(th.beta) - std::log(cfg.alpha_sn()) -
                                 K * std::log(cfg.alpha_sr() * cfg.alpha_rn()) - cfg.kappa -
                                 specfun::log_gamma(2.0 * K + 3.0);
            return {std::exp(log_v), Status::SurrogateTheta, 0.0};
        }
        case AsymKind::UserM: {
            if (!th.tau_defined) {
                return {1.0, Status::CertainOutage, 0.0};
            }
            const double theta = theta_surrogate(cfg.kappa, theta_z);
            const double log_v = K * std::log(theta) + K * std::log(th.tau) - std::log(2.0 * K) -
                                 K * std::log(cfg.alpha_sr() * cfg.alpha_rm()) - specfun::log_gamma(2.0 * K);
            return {std::exp(log_v), Status::SurrogateTheta, 0.0};
        }
    }
    throw DomainError("op_asym: unknown kind");
}

double diversity_fit(const std::vector<CurvePoint>& curve, double lo_db, double hi_db) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const CurvePoint& p : curve) {
        if (p.rho_db < lo_db || p.rho_db > hi_db) {
            continue;
        }
        if (!(p.value > 0.0)) {
            throw DomainError("diversity_fit: probabilities in the window must be > 0");
        }
        xs.push_back(p.rho_db / 10.0);
        ys.push_back(std::log10(p.value));
    }
    if (xs.size() < 3) {
        throw DomainError("diversity_fit: fewer than 3 points in the window");
    }
    return -least_squares(xs, ys).slope;
}

double slope_fit(const std::vector<CurvePoint>& curve, double lo_db, double hi_db) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const CurvePoint& p : curve) {
        if (p.rho_db < lo_db || p.rho_db > hi_db) {
            continue;
        }
        xs.push_back(p.rho_db / 10.0 * std::log2(10.0));
        ys.push_back(p.value);
    }
    if (xs.size() < 3) {
        throw DomainError("slope_fit: fewer than 3 points in the window");
    }
    return least_squares(xs, ys).slope;
}

double rate_user_n_psic(const SystemConfig& cfg, double rho, int U) {
    cfg.validate();
    check_rho(rho);
    return user_n_rate_integral(cfg, rho, U);
}

double rate_user_m(const SystemConfig& cfg, double rho, int U) {
    cfg.validate();
    check_rho(rho);
    const CascadeMoments m = moments_m(cfg);
    const auto cheb = quadrature::cached_rule(Family::ChebyshevFirstKind, U);
    double sum = 0.0;
    for (int u = 0; u < U; ++u) {
        const double x = cheb->nodes[u];
        // SINR level sitting at node x of the ceiling interval
        const double arg = std::sqrt((x + 1.0) / (m.scale * m.scale * rho * cfg.a_n * (1.0 - x)));
        sum += 2.0 * cheb->weights[u] / (2.0 * cfg.a_n + (x + 1.0) * cfg.a_m) *
               specfun::gamma_q(m.phi + 1.0, arg);
    }
    return cfg.a_m / kLn2 * sum;
}

double rate_oma(const SystemConfig& cfg, double rho, User user, int U) {
    cfg.validate();
    check_rho(rho);
    if (user == User::N) {
        return 0.5 * user_n_rate_integral(cfg, rho, U);
    }
    const CascadeMoments m = moments_m(cfg);
    const double c = rho * cfg.a_m;
    auto tail = [&](double x) { return specfun::gamma_q(m.phi + 1.0, std::sqrt(x) / m.scale); };
    return 0.5 * log_axis_integral(tail, c, user_m_cutoff(m)) / kLn2;
}

double rate_upper_bound(const SystemConfig& cfg, double rho, Bound which) {
    cfg.validate();
    check_rho(rho);
    switch (which) {
        case Bound::NomaN:
            return std::log2(1.0 + rho * cfg.a_n * channel::aggregate_second_moment_n(cfg));
        case Bound::OmaN:
            return 0.5 * std::log2(1.0 + rho * cfg.a_n * channel::aggregate_second_moment_n(cfg));
        case Bound::OmaM:
            return 0.5 * std::log2(1.0 + rho * cfg.a_m * channel::aggregate_second_moment_m(cfg));
    }
    throw DomainError("rate_upper_bound: unknown bound");
}

double throughput(const SystemConfig& cfg, double rho, ThroughputMode mode) {
    switch (mode) {
        case ThroughputMode::DelayLimited_ipSIC:
        case ThroughputMode::DelayLimited_pSIC: {
            const double p_n = mode == ThroughputMode::DelayLimited_ipSIC ? op_user_n_ipsic(cfg, rho).value
                                                                          : op_user_n_psic(cfg, rho).value;
            const double p_m = op_user_m(cfg, rho).value;
            return (1.0 - p_n) * cfg.R_n + (1.0 - p_m) * cfg.R_m;
        }
        case ThroughputMode::DelayTolerant:
            return rate_user_n_psic(cfg, rho) + rate_user_m(cfg, rho);
    }
    throw DomainError("throughput: unknown mode");
}

}  // namespace starnoma::analysis
