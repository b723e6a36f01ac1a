#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "starnoma/quadrature.hpp"

using namespace starnoma::quadrature;

namespace {

// sum_p H_p f(x_p) with f(x) = sum_k c_k x^k, by Horner at each node
double rule_sum(const QuadratureRule& r, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        if (r.weights[i] == 0.0) {
            continue;
        }
        double v = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) {
            v = v * r.nodes[i] + c[k];
        }
        s += r.weights[i] * v;
    }
    return s;
}

// int_0^inf x^k e^{-x} dx = k!, summed in long double
double moment_sum(const std::vector<double>& c) {
    long double s = 0.0L;
    long double f = 1.0L;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (k > 0) {
            f *= k;
        }
        s += c[k] * f;
    }
    return static_cast<double>(s);
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("chebyshev closed forms") {
    const auto r1 = chebyshev_rule(1);
    REQUIRE(r1.nodes.size() == 1);
    CHECK(std::abs(r1.nodes[0]) < 1e-16);
    CHECK(r1.weights[0] == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-15));

    const auto r2 = chebyshev_rule(2);
    REQUIRE(r2.nodes.size() == 2);
    CHECK(r2.nodes[0] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
    CHECK(r2.nodes[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    for (double w : r2.weights) {
        CHECK(w == doctest::Approx(std::numbers::pi / 4.0 * std::sqrt(0.5)).epsilon(1e-15));
    }
}

TEST_CASE("chebyshev rule approximates a plain integral over [-1, 1]") {
    const auto r = chebyshev_rule(50);
    double s = 0.0;
    for (double w : r.weights) {
        s += w;
    }
    // weights sum to one, so 2 * sum is the integral of f = 1
    CHECK(std::abs(2.0 * s - 2.0) < 1e-3);
    double cubic = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        cubic += 2.0 * r.weights[i] * std::pow(r.nodes[i], 3);
        quad += 2.0 * r.weights[i] * r.nodes[i] * r.nodes[i];
    }
    CHECK(std::abs(cubic) < 1e-14);
    CHECK(std::abs(quad - 2.0 / 3.0) < 1e-3);
}

TEST_CASE("chebyshev invariants") {
    for (int U : {1, 2, 3, 7, 50, 51, 200}) {
        const auto r = chebyshev_rule(U);
        CHECK(r.order == U);
        REQUIRE(static_cast<int>(r.nodes.size()) == U);
        REQUIRE(r.weights.size() == r.nodes.size());
        REQUIRE(r.log_weights.size() == r.nodes.size());
        for (int u = 0; u < U; ++u) {
            CHECK(r.nodes[u] > -1.0);
            CHECK(r.nodes[u] < 1.0);
            CHECK(r.weights[u] > 0.0);
            CHECK(r.log_weights[u] == doctest::Approx(std::log(r.weights[u])).epsilon(1e-13));
            if (u > 0) {
                CHECK(r.nodes[u] > r.nodes[u - 1]);
            }
            // closed form, ascending order
            const double x = std::cos((2.0 * (U - u) - 1.0) * std::numbers::pi / (2.0 * U));
            CHECK(std::abs(r.nodes[u] - x) < 1e-15);
            CHECK(r.weights[u] ==
                  doctest::Approx(std::numbers::pi / (2.0 * U) * std::sqrt(1.0 - x * x)).epsilon(1e-13));
        }
    }
}

TEST_CASE("laguerre closed form at P = 1 and unit mass") {
    const auto r = laguerre_rule(1);
    CHECK(r.nodes[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (int P : {1, 2, 3, 10, 64, 150, 300}) {
        const auto q = laguerre_rule(P);
        double s = 0.0;
        for (double w : q.weights) {
            s += w;
        }
        CHECK(std::abs(s - 1.0) < 1e-10);
    }
}

TEST_CASE("laguerre P = 300 monomials up to degree 50") {
    const auto r = cached_rule(Family::Laguerre, 300);
    CHECK(rule_sum(*r, {0, 0, 0, 0, 0, 1}) == doctest::Approx(120.0).epsilon(1e-8));
    for (int d = 0; d <= 50; ++d) {
        std::vector<double> c(d + 1, 0.0);
        c[d] = 1.0;
        const double want = moment_sum(c);
        CHECK(std::abs(rule_sum(*r, c) / want - 1.0) < 1e-8);
    }
}

TEST_CASE("laguerre exactness for random polynomials") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    for (int P : {5, 20, 300}) {
        const auto r = laguerre_rule(P);
        // above degree ~60 the moments exceed double range of sensible weights
        const int dmax = std::min(2 * P - 1, 60);
        for (int trial = 0; trial < 20; ++trial) {
            const int d = static_cast<int>(gen() % (dmax + 1));
            std::vector<double> c(d + 1);
            for (auto& x : c) {
                x = uc(gen);
            }
            const double want = moment_sum(c);
            // relative to the largest term; cancellation between signed coefficients is not rule error
            double scale = 0.0;
            long double f = 1.0L;
            for (int k = 0; k <= d; ++k) {
                if (k > 0) {
                    f *= k;
                }
                scale = std::max(scale, static_cast<double>(std::fabs(c[k]) * f));
            }
            CHECK(std::abs(rule_sum(r, c) - want) <= 1e-8 * scale);
        }
    }
}

TEST_CASE("laguerre invariants and interlacing") {
    for (int P = 1; P <= 50; ++P) {
        const auto a = laguerre_rule(P);
        const auto b = laguerre_rule(P + 1);
        REQUIRE(static_cast<int>(a.nodes.size()) == P);
        for (int i = 0; i < P; ++i) {
            CHECK(a.nodes[i] > 0.0);
            CHECK(a.weights[i] > 0.0);
            if (i > 0) {
                CHECK(a.nodes[i] > a.nodes[i - 1]);
            }
            CHECK(b.nodes[i] < a.nodes[i]);
            CHECK(a.nodes[i] < b.nodes[i + 1]);
        }
    }
    // at P = 300 the far weights fall below the double range; their logs stay finite
    const auto r = laguerre_rule(300);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        CHECK(r.weights[i] >= 0.0);
        CHECK(std::isfinite(r.log_weights[i]));
        if (r.weights[i] > 1e-300) {  // denormals carry few digits
            CHECK(r.log_weights[i] == doctest::Approx(std::log(r.weights[i])).epsilon(1e-12));
        }
    }
}

TEST_CASE("laguerre formula weights agree with eigenvector weights") {
    for (int P : {4, 20, 60}) {
        const auto f = laguerre_rule(P);
        const auto e = laguerre_rule_eigen(P);
        for (int i = 0; i < P; ++i) {
            CHECK(f.nodes[i] == doctest::Approx(e.nodes[i]).epsilon(1e-12));
            if (e.weights[i] > 1e-200) {
                CHECK(f.weights[i] == doctest::Approx(e.weights[i]).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("rules are deterministic and cached") {
    const auto a = laguerre_rule(128);
    const auto b = laguerre_rule(128);
    CHECK(a.nodes == b.nodes);
    CHECK(a.weights == b.weights);
    const auto c1 = cached_rule(Family::ChebyshevFirstKind, 50);
    const auto c2 = cached_rule(Family::ChebyshevFirstKind, 50);
    CHECK(c1.get() == c2.get());
    CHECK(c1->nodes == chebyshev_rule(50).nodes);

    // concurrent first use hands every thread the same object
    std::vector<std::shared_ptr<const QuadratureRule>> got(8);
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&got, t] { got[t] = cached_rule(Family::Laguerre, 77); });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& g : got) {
        CHECK(g.get() == got[0].get());
    }
}

TEST_CASE("invalid orders") {
    CHECK_THROWS(chebyshev_rule(0));
    CHECK_THROWS(laguerre_rule(0));
    CHECK(to_string(Family::Laguerre) == "laguerre");
}

}
