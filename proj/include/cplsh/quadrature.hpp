#pragma once

#include <functional>
#include <vector>

namespace cplsh {

/// Adaptive Gauss-Kronrod 7-15 integration over [a, b]. Bisects until the
/// embedded error estimate of every panel is below max(abs_tol, rel_tol * |I|).
/// Throws on non-convergence (max_depth exceeded with the budget blown).
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double abs_tol = 1e-12, double rel_tol = 1e-10, int max_depth = 40);

/// Gauss-Hermite nodes and weights for weight exp(-x^2) on n points
/// (Newton iteration on the orthonormal Hermite recurrence). Sum of weights
/// is sqrt(pi); rule is exact for polynomials of degree < 2n.
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
HermiteRule gauss_hermite(int n);

}  // namespace cplsh
