#pragma once

// Real-argument special functions used by the outage and rate expressions.
//
// Every routine is a pure function of its arguments. Series are stopped once
// the current (normalised) term, or a bound on the remaining tail, drops below
// abs_tol * (1 + |partial sum|) with a 1e-4 safety factor. Hitting max_terms
// raises ConvergenceError instead of returning a partial sum.

namespace starnoma::specfun {

struct EvalOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_terms = 500;

    void validate() const;
};

/// Modified Bessel function of the first kind I_n(x), x >= 0.
/// Throws OverflowError when I_n(x) exceeds the double range.
double bessel_i(int order, double x, const EvalOptions& opts = {});

/// Exponentially scaled form e^{-x} I_n(x); finite for every x >= 0.
double bessel_i_scaled(int order, double x, const EvalOptions& opts = {});

/// Modified Bessel function of the second kind K_n(x), x > 0. K_{-n} = K_n.
double bessel_k(int order, double x, const EvalOptions& opts = {});

/// Exponentially scaled form e^{x} K_n(x).
double bessel_k_scaled(int order, double x, const EvalOptions& opts = {});

/// First-order Marcum Q-function
///   Q(a, b) = \int_b^\infty x exp(-(x^2 + a^2)/2) I_0(a x) dx.
/// Evaluated as a Poisson mixture of gamma tails; the complementary sum is
/// used for b < a.
double marcum_q(double a, double b, const EvalOptions& opts = {});

/// 1 - Q(a, b), summed directly (no cancellation) when b < a.
double marcum_p(double a, double b, const EvalOptions& opts = {});

/// Lower incomplete gamma function gamma(a, x) = \int_0^x t^{a-1} e^{-t} dt.
double lower_inc_gamma(double a, double x, const EvalOptions& opts = {});

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x, const EvalOptions& opts = {});

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double gamma_q(double a, double x, const EvalOptions& opts = {});

/// Laguerre function of order 1/2,
///   L_{1/2}(x) = e^{x/2} [ (1 - x) I_0(-x/2) - x I_1(-x/2) ],
/// using I_0 even and I_1 odd. L_{1/2}(0) = 1.
double laguerre_half(double x);

/// Gauss hypergeometric function 2F1(a, b; c; z) for z < 1 (Pfaff transform for z < 0).
/// z = 1 is accepted only when c - a - b > 0 (Gauss summation theorem);
/// otherwise DivergenceError is raised.
double gauss_2f1(double a, double b, double c, double z, const EvalOptions& opts = {});

/// ln Gamma(x) for x > 0 (thread-safe).
double log_gamma(double x);

/// Digamma psi(x) for x > 0.
double digamma(double x);

}  // namespace starnoma::specfun
