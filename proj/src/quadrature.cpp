#include "starnoma/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <shared_mutex>
#include <string>
#include <utility>

#include "starnoma/errors.hpp"

namespace starnoma::quadrature {

namespace {

// Symmetric tridiagonal eigenproblem by implicit-shift QL. Only the first
// component of each eigenvector is tracked (all Golub-Welsch needs).
// d: diagonal (overwritten by eigenvalues), e: off-diagonal with e[n-1] unused.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z0) {
    const int n = static_cast<int>(d.size());
    constexpr double eps = 1e-14;
    constexpr int max_iter = 60;
    z0.assign(n, 0.0);
    z0[0] = 1.0;
    e.resize(n);
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) {
                    break;
                }
            }
            if (m != l) {
                if (++iter > max_iter) {
                    throw ConvergenceError("laguerre_rule: QL iteration did not converge");
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    const double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    const double zf = z0[i + 1];
                    z0[i + 1] = s * z0[i] + c * zf;
                    z0[i] = c * z0[i] - s * zf;
                }
                if (r == 0.0 && i >= l) {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// L_n(x) and L_{n-1}(x) as mantissas sharing one scale factor exp(log_scale).
struct ScaledLaguerre {
    double top = 1.0;
    double prev = 0.0;
    double log_scale = 0.0;
};

ScaledLaguerre laguerre_pair(int n, double x) {
    ScaledLaguerre out;
    double p0 = 1.0;
    double p1 = 1.0 - x;
    if (n == 0) {
        out.top = p0;
        return out;
    }
    constexpr double big = 1e150;
    const double log_big = std::log(big);
    for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0 - x) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
        if (std::fabs(p1) > big) {
            p1 /= big;
            p0 /= big;
            out.log_scale += log_big;
        }
    }
    out.top = p1;
    out.prev = p0;
    return out;
}

std::vector<double> golub_welsch_laguerre(int P, std::vector<double>& first_components) {
    std::vector<double> d(P);
    std::vector<double> e(P, 0.0);
    for (int k = 0; k < P; ++k) {
        d[k] = 2.0 * k + 1.0;
        if (k + 1 < P) {
            e[k] = k + 1.0;
        }
    }
    tridiagonal_ql(d, e, first_components);
    return d;
}

void sort_rule(std::vector<double>& nodes, std::vector<double>& extra) {
    std::vector<std::size_t> idx(nodes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    std::vector<double> n2(nodes.size());
    std::vector<double> e2(nodes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        n2[i] = nodes[idx[i]];
        e2[i] = extra[idx[i]];
    }
    nodes.swap(n2);
    extra.swap(e2);
}

void check_strict(const std::vector<double>& nodes) {
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) {
            throw ConvergenceError("laguerre_rule: nodes not strictly increasing after refinement");
        }
    }
}

}  // namespace

std::string to_string(Family f) {
    return f == Family::Laguerre ? "laguerre" : "chebyshev";
}

QuadratureRule chebyshev_rule(int U) {
    if (U < 1) {
        throw DomainError("chebyshev_rule: U must be >= 1");
    }
    QuadratureRule rule;
    rule.family = Family::ChebyshevFirstKind;
    rule.order = U;
    rule.nodes.resize(U);
    rule.weights.resize(U);
    rule.log_weights.resize(U);
    const double h = std::numbers::pi / (2.0 * U);
    // cos((2u-1)h) = sin((U-2u+1)h): exact zero in the middle and exact antisymmetry
    for (int u = 1; u <= U; ++u) {
        const int j = U - u;  // ascending order
        const double angle = (U - 2 * u + 1) * h;
        rule.nodes[j] = std::sin(angle);
        rule.weights[j] = h * std::cos(angle);
        rule.log_weights[j] = std::log(rule.weights[j]);
    }
    return rule;
}

QuadratureRule laguerre_rule(int P) {
    if (P < 1) {
        throw DomainError("laguerre_rule: P must be >= 1");
    }
    std::vector<double> z0;
    std::vector<double> nodes = golub_welsch_laguerre(P, z0);
    sort_rule(nodes, z0);

    // Newton polish on L_P, L_P'(x) = P (L_P - L_{P-1}) / x
    for (double& x : nodes) {
        for (int it = 0; it < 8; ++it) {
            const ScaledLaguerre l = laguerre_pair(P, x);
            const double deriv = P * (l.top - l.prev) / x;
            const double step = l.top / deriv;
            x -= step;
            if (std::fabs(step) <= 4e-16 * x) {
                break;
            }
        }
    }
    check_strict(nodes);

    QuadratureRule rule;
    rule.family = Family::Laguerre;
    rule.order = P;
    rule.nodes = nodes;
    rule.weights.resize(P);
    rule.log_weights.resize(P);
    const double log_p1 = std::log(P + 1.0);
    for (int i = 0; i < P; ++i) {
        const double x = nodes[i];
        const ScaledLaguerre l = laguerre_pair(P + 1, x);
        const double lw = std::log(x) - 2.0 * log_p1 - 2.0 * (std::log(std::fabs(l.top)) + l.log_scale);
        rule.log_weights[i] = lw;
        rule.weights[i] = std::exp(lw);
    }
    return rule;
}

QuadratureRule laguerre_rule_eigen(int P) {
    if (P < 1) {
        throw DomainError("laguerre_rule_eigen: P must be >= 1");
    }
    std::vector<double> z0;
    std::vector<double> nodes = golub_welsch_laguerre(P, z0);
    sort_rule(nodes, z0);
    QuadratureRule rule;
    rule.family = Family::Laguerre;
    rule.order = P;
    rule.nodes = nodes;
    rule.weights.resize(P);
    rule.log_weights.resize(P);
    for (int i = 0; i < P; ++i) {
        rule.weights[i] = z0[i] * z0[i];
        rule.log_weights[i] = std::log(rule.weights[i]);
    }
    return rule;
}

std::shared_ptr<const QuadratureRule> cached_rule(Family family, int order) {
    static std::shared_mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const QuadratureRule>> cache;
    const std::pair<int, int> key{static_cast<int>(family), order};
    {
        std::shared_lock lock(mutex);
        auto it = cache.find(key);
        if (it != cache.end()) {
            return it->second;
        }
    }
    // build outside the lock; a racing builder produces an identical rule
    auto rule = std::make_shared<const QuadratureRule>(family == Family::Laguerre ? laguerre_rule(order)
                                                                                 : chebyshev_rule(order));
    std::unique_lock lock(mutex);
    auto [it, inserted] = cache.emplace(key, rule);
    return it->second;
}

}  // namespace starnoma::quadrature
