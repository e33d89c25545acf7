#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cplsh/normal.hpp"

namespace cplsh {

/// One point of the rho-versus-number-of-parts trade-off curves.
struct TradeoffPoint {
    double num_parts;  // T
    double rho;
};

/// Monte Carlo estimate with its binomial standard error.
struct McEstimate {
    double estimate;
    double std_error;
};

/// Standard normal upper tail Pr[X >= eta].
inline double phi_c(double eta) { return normal_upper_tail(eta); }

/// Inverse of phi_c on (0, 1).
inline double phi_c_inv(double mu) { return normal_upper_tail_inv(mu); }

/// alpha = 1 - tau^2/2 and beta = sqrt(tau^2 - tau^4/4): the coefficients
/// placing a point at distance tau from e1 on the sphere, q = alpha e1 + beta e2.
struct AlphaBeta {
    double alpha, beta;
};
AlphaBeta distance_coefficients(double tau);

/// Lambda(tau, eta) = Pr[X >= eta and alpha X + beta Y >= eta] / Pr[X >= eta]
/// for X, Y ~ N(0,1). Equals 1 at tau = 0 and phi_c(eta) at tau = sqrt(2).
/// Requires 0 <= tau <= sqrt(2). Absolute error <= 1e-8.
double lambda(double tau, double eta);

/// sigma(u, v) = Pr[|X| <= u and |alpha X + beta Y| <= alpha u + beta v],
/// the inner probability of the collision integral. Returns 0 when u <= 0 or
/// alpha u + beta v <= 0. Requires 0 < tau < 2. Absolute error <= 1e-9.
double sigma(double u, double v, double tau);

/// Delta(u, v) = min{u, alpha u + beta v}: distance from the origin to the
/// complement of the sigma slab intersection.
double delta(double u, double v, double tau);

/// Collision probability of the cross-polytope hash (full variant, Gaussian
/// rotation) in dimension d at distance tau:
///   p = 2d * E_{X1,Y1 ~ N(0,1)}[ sigma(X1, Y1)^{d-1} ].
/// Tensor Gauss-Hermite outer quadrature with the power taken in log space.
/// Requires d >= 2 and 0 < tau < 2; relative error target 1e-4. Throws with
/// diagnostics if the two internal node counts disagree (non-convergence).
double cp_collision_probability(int d, double tau);

/// Same integral for several dimensions at once, sharing the sigma grid.
std::vector<double> cp_collision_probability_many(std::span<const int> ds, double tau);

/// Hash family description for the Monte Carlo collision oracles.
struct McFamilySpec {
    enum class Rotation { gaussian, pseudo };

    Rotation rotation = Rotation::gaussian;
    uint32_t ambient_dim = 128;  // pseudo: must be a power of two
    uint32_t cp_dim = 128;       // d', polytope dimension (<= ambient_dim)
    bool collapse_signs = false;
    int hd_stages = 3;  // pseudo only; 2 is a diagnostic variant, 3 the real scheme
};

/// Empirical collision rate of pairs p = e1, q = alpha e1 + beta e2 at
/// distance tau under fresh seeded hash functions, one per trial.
/// Deterministic per seed regardless of thread count.
McEstimate mc_collision_probability(const McFamilySpec& family, double tau, uint64_t trials,
                                    uint64_t seed);

/// Empirical collision rate of two independent uniform points on the sphere.
/// For orthogonal (pseudo) rotations the true value is exactly 1/range.
McEstimate mc_uniform_collision_probability(const McFamilySpec& family, uint64_t trials,
                                            uint64_t seed);

/// rho = (1/c^2) * (4 - c^2 r^2) / (4 - r^2), the ANN exponent achieved on
/// the sphere at approximation c and distance r. Requires c >= 1, 0 < cr < 2.
double rho_corollary(double c, double r);

/// Lower bound on rho for any hash family partitioning the sphere into at
/// most T parts: p2* >= 1/T, so with eta = phi_c_inv(1/T),
/// rho >= ln(1/Lambda(r1, eta)) / ln(T). Requires T >= 2.
double lower_bound_rho(double T, double r1);

/// Trade-off point achieved by the d'-dimensional cross-polytope hash:
/// T = 2d', p1 from the collision integral (d' = 1 falls back to the
/// hyperplane arc formula), p2 = 1/(2d'), rho = ln(1/p1)/ln(2d').
TradeoffPoint cp_tradeoff_rho(int dprime, double r1);

/// Closed planar set for Gaussian-measure experiments: a half-plane, an
/// intersection of two closed half-planes (wedge), or the complement of an
/// intersection of two symmetric slabs. Half-plane normals must be unit.
struct GaussianSetProbe {
    enum class Kind { half_plane, wedge, slab_complement };

    Kind kind;
    double n1x = 1, n1y = 0, c1 = 0;
    double n2x = 0, n2y = 1, c2 = 0;

    static GaussianSetProbe half_plane(double nx, double ny, double c);
    static GaussianSetProbe wedge(double n1x, double n1y, double c1, double n2x, double n2y,
                                  double c2);
    static GaussianSetProbe slab_complement(double a1x, double a1y, double c1, double a2x,
                                            double a2y, double c2);

    bool contains(double x, double y) const;
    /// Distance from the origin to the set.
    double dist_origin() const;
    /// Wedge only: whether the corner is the closest point to the origin.
    bool corner_closest() const;
    /// Wedge only: interior angle between the two half-planes, in (0, pi).
    double wedge_angle() const;
};

/// 2-D standard-Gaussian membership rate of the set.
McEstimate gaussian_measure_mc(const GaussianSetProbe& set, uint64_t trials, uint64_t seed);

/// Numerical concavity check of mu -> Lambda(tau, phi_c_inv(mu)) on a grid
/// in (0, 1/2): all second differences must be <= +1e-6.
struct ConcavityReport {
    bool concave;
    double max_second_difference;
};
ConcavityReport lambda_concavity_check(double tau, std::span<const double> mu_grid);

}  // namespace cplsh
