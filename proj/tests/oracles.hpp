#pragma once

// Reference implementations used only by the tests. They are deliberately
// naive: long double series and brute-force quadrature, or Boost.Math where a
// well-tested implementation exists.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

// I_n(x) = sum_k (x/2)^{2k+n} / (k! (k+n)!)
inline long double bessel_i_series(int n, long double x, int terms = 60) {
    long double term = std::pow(x / 2.0L, n);
    for (int k = 1; k <= n; ++k) {
        term /= k;
    }
    long double sum = term;
    const long double q = x * x / 4.0L;
    for (int k = 1; k < terms; ++k) {
        term *= q / (static_cast<long double>(k) * (k + n));
        sum += term;
    }
    return sum;
}

// K_n(x) = int_0^inf e^{-x cosh t} cosh(n t) dt
inline double bessel_k_integral(int n, double x) {
    auto f = [&](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(n * t); };
    const double upper = std::acosh(1.0 + 800.0 / x);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 20, 1e-14);
}

// Q_1(a, b) = 1 - F(b^2) for a noncentral chi-square with 2 degrees of freedom
inline double marcum_q_chi2(double a, double b) {
    if (b == 0.0) {
        return 1.0;
    }
    boost::math::non_central_chi_squared d(2.0, a * a);
    return boost::math::cdf(boost::math::complement(d, b * b));
}

// Q_1(a, b) from its defining integral, scaled Bessel to keep the integrand finite
inline double marcum_q_integral(double a, double b, double upper) {
    auto f = [&](double x) {
        const double s = boost::math::cyl_bessel_i(0, a * x) * std::exp(-a * x);
        return x * std::exp(-(x - a) * (x - a) / 2.0) * s;
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b, upper, 25, 1e-14);
}

// gamma(a, x) = x^a e^{-x} sum_k x^k / (a (a+1) ... (a+k))
inline long double lower_gamma_series(long double a, long double x) {
    long double term = 1.0L / a;
    long double sum = term;
    for (int k = 1; k < 100000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (term < 1e-22L * sum) {
            break;
        }
    }
    return std::pow(x, a) * std::exp(-x) * sum;
}

// Direct Gauss series in long double; only sensible for |z| < 1.
inline long double hyp2f1_series(long double a, long double b, long double c, long double z,
                                 std::int64_t max_terms = 50'000'000) {
    long double term = 1.0L;
    long double sum = 1.0L;
    for (std::int64_t k = 0; k < max_terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0L)) * z;
        sum += term;
        if (std::fabs(term) < 1e-21L * std::fabs(sum)) {
            break;
        }
    }
    return sum;
}

// Kolmogorov-Smirnov distance between a sample and a CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
    }
    return d;
}

}  // namespace oracle

namespace oracle {

// Rician amplitude density with E|h|^2 = g, through the noncentral chi-square
// law of 2 (kappa + 1) |h|^2 / g.
inline double rician_pdf_chi2(double x, double g, double kappa) {
    if (x <= 0.0) {
        return 0.0;
    }
    const double c2 = 2.0 * (kappa + 1.0) / g;
    boost::math::non_central_chi_squared d(2.0, 2.0 * kappa);
    return boost::math::pdf(d, c2 * x * x) * 2.0 * c2 * x;
}

}  // namespace oracle
