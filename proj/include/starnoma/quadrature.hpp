#pragma once

// Fixed-order Gauss rules consumed by the closed-form outage expressions.

#include <memory>
#include <string>
#include <vector>

namespace starnoma::quadrature {

enum class Family { ChebyshevFirstKind, Laguerre };

std::string to_string(Family f);

struct QuadratureRule {
    Family family = Family::ChebyshevFirstKind;
    int order = 0;
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;  // may underflow to 0 for far Laguerre nodes
    // ln(weight); always finite, so callers can combine tiny weights with large
    // integrand values without underflow.
    std::vector<double> log_weights;
};

/// x_u = cos((2u-1) pi / 2U), b_u = (pi / 2U) sqrt(1 - x_u^2), sorted ascending.
/// These weights sum to 1, so int_{-1}^{1} f(t) dt ~ 2 sum_u b_u f(x_u).
QuadratureRule chebyshev_rule(int U);

/// Gauss-Laguerre rule for int_0^inf f(x) e^{-x} dx.
/// Nodes from Golub-Welsch (implicit QL on the Jacobi matrix), refined by
/// Newton on L_P; weights from x / ((P+1)^2 L_{P+1}(x)^2) evaluated in logs.
QuadratureRule laguerre_rule(int P);

/// Same nodes, weights taken from the squared first eigenvector components
/// (the textbook Golub-Welsch form). Kept for cross-checking.
QuadratureRule laguerre_rule_eigen(int P);

/// Memoised rule, shared read-only between threads.
std::shared_ptr<const QuadratureRule> cached_rule(Family family, int order);

}  // namespace starnoma::quadrature
