#include "cplsh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cplsh/fht.hpp"
#include "cplsh/hash_families.hpp"
#include "cplsh/quadrature.hpp"
#include "cplsh/rng.hpp"

namespace cplsh {

AlphaBeta distance_coefficients(double tau) {
    const double t2 = tau * tau;
    return AlphaBeta{1.0 - t2 / 2.0, std::sqrt(std::max(0.0, t2 - t2 * t2 / 4.0))};
}

double lambda(double tau, double eta) {
    if (!(tau >= 0.0 && tau <= kSqrt2 + 1e-12)) {
        throw std::invalid_argument("lambda: tau must lie in [0, sqrt(2)]");
    }
    const auto [alpha, beta] = distance_coefficients(std::min(tau, kSqrt2));
    if (beta == 0.0) {
        return 1.0;  // tau = 0: the two events coincide
    }
    const double denom = phi_c(eta);
    // numerator: int_eta^inf phi(x) * Phi_c((eta - alpha x)/beta) dx
    const double upper = std::max(0.0, eta) + 12.0;
    const auto f = [&](double x) {
        return normal_pdf(x) * phi_c((eta - alpha * x) / beta);
    };
    const double num = integrate_gk(f, eta, upper, 1e-300, 1e-11, 48);
    return num / denom;
}

double sigma(double u, double v, double tau) {
    if (!(tau > 0.0 && tau < 2.0)) {
        throw std::invalid_argument("sigma: tau must lie in (0, 2)");
    }
    const auto [alpha, beta] = distance_coefficients(tau);
    const double w = alpha * u + beta * v;
    if (u <= 0.0 || w <= 0.0) return 0.0;
    // Pr[|X| <= u and |alpha X + beta Y| <= w] via the conditional interval in Y
    const auto f = [&](double x) {
        const double hi = (w - alpha * x) / beta;
        const double lo = (-w - alpha * x) / beta;
        return normal_pdf(x) * (normal_cdf(hi) - normal_cdf(lo));
    };
    return integrate_gk(f, -u, u, 1e-11, 1e-9, 40);
}

double delta(double u, double v, double tau) {
    const auto [alpha, beta] = distance_coefficients(tau);
    return std::min(u, alpha * u + beta * v);
}

namespace {

// E[sigma(X1, Y1)^{d-1}] over N(0,1)^2 with an n-node tensor Gauss-Hermite
// rule; the sigma grid is shared across all requested dimensions.
std::vector<double> collision_expectation(std::span<const int> ds, double tau, int n_nodes) {
    const HermiteRule rule = gauss_hermite(n_nodes);
    const auto [alpha, beta] = distance_coefficients(tau);
    std::vector<double> acc(ds.size(), 0.0);
    for (int i = 0; i < n_nodes; ++i) {
        const double u = kSqrt2 * rule.nodes[i];
        if (u <= 0.0) continue;
        for (int j = 0; j < n_nodes; ++j) {
            const double v = kSqrt2 * rule.nodes[j];
            if (alpha * u + beta * v <= 0.0) continue;
            const double s = std::min(1.0, sigma(u, v, tau));
            if (s <= 0.0) continue;
            const double log_s = std::log(s);
            const double wij = rule.weights[i] * rule.weights[j];
            for (size_t k = 0; k < ds.size(); ++k) {
                const double e = (ds[k] - 1) * log_s;
                if (e > -745.0) acc[k] += wij * std::exp(e);
            }
        }
    }
    const double pi = 3.14159265358979323846;
    for (double& a : acc) a /= pi;
    return acc;
}

}  // namespace

std::vector<double> cp_collision_probability_many(std::span<const int> ds, double tau) {
    if (!(tau > 0.0 && tau < 2.0)) {
        throw std::invalid_argument("cp_collision_probability: tau must lie in (0, 2)");
    }
    for (int d : ds) {
        if (d < 2) {
            throw std::invalid_argument("cp_collision_probability: d must be at least 2");
        }
    }
    const auto main = collision_expectation(ds, tau, 192);
    const auto check = collision_expectation(ds, tau, 136);
    std::vector<double> out(ds.size());
    for (size_t k = 0; k < ds.size(); ++k) {
        const double p = 2.0 * ds[k] * main[k];
        const double p_check = 2.0 * ds[k] * check[k];
        if (std::fabs(p - p_check) > 2e-3 * std::max(p, 1e-12)) {
            std::ostringstream msg;
            msg << "cp_collision_probability: quadrature did not converge (d=" << ds[k]
                << ", tau=" << tau << ", 192-node=" << p << ", 136-node=" << p_check << ")";
            throw std::runtime_error(msg.str());
        }
        out[k] = std::min(1.0, p);
    }
    return out;
}

double cp_collision_probability(int d, double tau) {
    const int ds[1] = {d};
    return cp_collision_probability_many(ds, tau)[0];
}

namespace {

template <typename TrialFn>
McEstimate run_mc(uint64_t trials, const TrialFn& trial) {
    if (trials < 1) throw std::invalid_argument("monte carlo: trials must be positive");
    int64_t hits = 0;
    const int64_t n = static_cast<int64_t>(trials);
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (int64_t t = 0; t < n; ++t) {
        hits += trial(static_cast<uint64_t>(t)) ? 1 : 0;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return McEstimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

// One HD...HD chain with per-trial signs; x is transformed in place.
void apply_fresh_hd_chain(Rng& rng, std::span<double> x, int stages) {
    const size_t dim = x.size();
    for (int s = 0; s < stages; ++s) {
        for (size_t i = 0; i < dim; ++i) {
            if (rng.next_u64() >> 63) x[i] = -x[i];
        }
        fht(x);
    }
}

void validate_family(const McFamilySpec& family) {
    if (family.cp_dim == 0 || family.cp_dim > family.ambient_dim) {
        throw std::invalid_argument("McFamilySpec: need 1 <= cp_dim <= ambient_dim");
    }
    if (family.rotation == McFamilySpec::Rotation::pseudo) {
        if (!is_power_of_two(family.ambient_dim)) {
            throw std::invalid_argument("McFamilySpec: pseudo rotation needs power-of-two dim");
        }
        if (family.hd_stages != 2 && family.hd_stages != 3) {
            throw std::invalid_argument("McFamilySpec: hd_stages must be 2 or 3");
        }
    }
}

}  // namespace

McEstimate mc_collision_probability(const McFamilySpec& family, double tau, uint64_t trials,
                                    uint64_t seed) {
    validate_family(family);
    if (!(tau >= 0.0 && tau < 2.0)) {
        throw std::invalid_argument("mc_collision_probability: tau must lie in [0, 2)");
    }
    const auto [alpha, beta] = distance_coefficients(tau);
    const uint32_t d = family.cp_dim;
    const bool collapse = family.collapse_signs;

    if (family.rotation == McFamilySpec::Rotation::gaussian) {
        // only the rotations of e1 and e2 matter: two independent N(0, I_{d'})
        // vectors g1, g2 with y_p = g1, y_q = alpha g1 + beta g2
        return run_mc(trials, [&](uint64_t t) {
            Rng rng(derive_seed(seed, {0xA1u, t}));
            std::vector<double> g1(d), yq(d);
            for (uint32_t i = 0; i < d; ++i) g1[i] = rng.gaussian();
            for (uint32_t i = 0; i < d; ++i) yq[i] = alpha * g1[i] + beta * rng.gaussian();
            const uint32_t hp = cp_hash_rotated(std::span<const double>(g1), d, collapse);
            const uint32_t hq = cp_hash_rotated(std::span<const double>(yq), d, collapse);
            return hp == hq;
        });
    }

    const uint32_t dim = family.ambient_dim;
    const int stages = family.hd_stages;
    return run_mc(trials, [&](uint64_t t) {
        // rotate e1 and e2 with the same fresh chain; y_q follows by linearity
        std::vector<double> r1(dim, 0.0), r2(dim, 0.0);
        r1[0] = 1.0;
        r2[1] = 1.0;
        {
            Rng chain_rng(derive_seed(seed, {0xA3u, t}));
            apply_fresh_hd_chain(chain_rng, std::span<double>(r1), stages);
        }
        {
            Rng chain_rng(derive_seed(seed, {0xA3u, t}));
            apply_fresh_hd_chain(chain_rng, std::span<double>(r2), stages);
        }
        std::vector<double> yq(dim);
        for (uint32_t i = 0; i < dim; ++i) yq[i] = alpha * r1[i] + beta * r2[i];
        const uint32_t hp = cp_hash_rotated(std::span<const double>(r1), family.cp_dim, collapse);
        const uint32_t hq = cp_hash_rotated(std::span<const double>(yq), family.cp_dim, collapse);
        return hp == hq;
    });
}

McEstimate mc_uniform_collision_probability(const McFamilySpec& family, uint64_t trials,
                                            uint64_t seed) {
    validate_family(family);
    const uint32_t d = family.cp_dim;
    const uint32_t dim = family.ambient_dim;
    const bool collapse = family.collapse_signs;

    if (family.rotation == McFamilySpec::Rotation::gaussian) {
        // sample the pair's inner product c from the ambient sphere, then the
        // rotated pair is (g1, c g1 + sqrt(1-c^2) g2) coordinate-wise
        return run_mc(trials, [&](uint64_t t) {
            Rng rng(derive_seed(seed, {0xA4u, t}));
            double dot = 0.0, nu = 0.0, nv = 0.0;
            for (uint32_t i = 0; i < dim; ++i) {
                const double a = rng.gaussian();
                const double b = rng.gaussian();
                dot += a * b;
                nu += a * a;
                nv += b * b;
            }
            const double c = dot / std::sqrt(nu * nv);
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            std::vector<double> g1(d), yv(d);
            for (uint32_t i = 0; i < d; ++i) g1[i] = rng.gaussian();
            for (uint32_t i = 0; i < d; ++i) yv[i] = c * g1[i] + s * rng.gaussian();
            const uint32_t hu = cp_hash_rotated(std::span<const double>(g1), d, collapse);
            const uint32_t hv = cp_hash_rotated(std::span<const double>(yv), d, collapse);
            return hu == hv;
        });
    }

    const int stages = family.hd_stages;
    return run_mc(trials, [&](uint64_t t) {
        Rng rng(derive_seed(seed, {0xA5u, t}));
        // the hash is scale invariant, so raw Gaussian vectors stand in for
        // uniform sphere points
        std::vector<double> u(dim), v(dim);
        for (uint32_t i = 0; i < dim; ++i) u[i] = rng.gaussian();
        for (uint32_t i = 0; i < dim; ++i) v[i] = rng.gaussian();
        {
            Rng chain_rng(derive_seed(seed, {0xA6u, t}));
            apply_fresh_hd_chain(chain_rng, std::span<double>(u), stages);
        }
        {
            Rng chain_rng(derive_seed(seed, {0xA6u, t}));
            apply_fresh_hd_chain(chain_rng, std::span<double>(v), stages);
        }
        const uint32_t hu = cp_hash_rotated(std::span<const double>(u), d, collapse);
        const uint32_t hv = cp_hash_rotated(std::span<const double>(v), d, collapse);
        return hu == hv;
    });
}

double rho_corollary(double c, double r) {
    if (!(c >= 1.0)) throw std::invalid_argument("rho_corollary: c must be at least 1");
    if (!(r > 0.0) || !(c * r < 2.0)) {
        throw std::invalid_argument("rho_corollary: need 0 < r and c*r < 2");
    }
    return (1.0 / (c * c)) * (4.0 - c * c * r * r) / (4.0 - r * r);
}

double lower_bound_rho(double T, double r1) {
    if (!(T >= 2.0)) throw std::invalid_argument("lower_bound_rho: T must be at least 2");
    if (!(r1 > 0.0 && r1 < kSqrt2)) {
        throw std::invalid_argument("lower_bound_rho: r1 must lie in (0, sqrt(2))");
    }
    const double eta = phi_c_inv(1.0 / T);
    const double lam = lambda(r1, eta);
    return std::log(1.0 / lam) / std::log(T);
}

TradeoffPoint cp_tradeoff_rho(int dprime, double r1) {
    if (dprime < 1) throw std::invalid_argument("cp_tradeoff_rho: d' must be positive");
    double p1;
    if (dprime == 1) {
        // one cross-polytope dimension is a single hyperplane: collision
        // probability 1 - theta/pi at angle theta = arccos(1 - r1^2/2)
        p1 = 1.0 - std::acos(1.0 - r1 * r1 / 2.0) / 3.14159265358979323846;
    } else {
        p1 = cp_collision_probability(dprime, r1);
    }
    const double T = 2.0 * dprime;
    return TradeoffPoint{T, std::log(1.0 / p1) / std::log(T)};
}

GaussianSetProbe GaussianSetProbe::half_plane(double nx, double ny, double c) {
    GaussianSetProbe s;
    s.kind = Kind::half_plane;
    s.n1x = nx;
    s.n1y = ny;
    s.c1 = c;
    return s;
}

GaussianSetProbe GaussianSetProbe::wedge(double n1x, double n1y, double c1, double n2x,
                                         double n2y, double c2) {
    GaussianSetProbe s;
    s.kind = Kind::wedge;
    s.n1x = n1x;
    s.n1y = n1y;
    s.c1 = c1;
    s.n2x = n2x;
    s.n2y = n2y;
    s.c2 = c2;
    return s;
}

GaussianSetProbe GaussianSetProbe::slab_complement(double a1x, double a1y, double c1, double a2x,
                                                   double a2y, double c2) {
    GaussianSetProbe s;
    s.kind = Kind::slab_complement;
    s.n1x = a1x;
    s.n1y = a1y;
    s.c1 = c1;
    s.n2x = a2x;
    s.n2y = a2y;
    s.c2 = c2;
    return s;
}

bool GaussianSetProbe::contains(double x, double y) const {
    const double p1 = n1x * x + n1y * y;
    const double p2 = n2x * x + n2y * y;
    switch (kind) {
        case Kind::half_plane:
            return p1 >= c1;
        case Kind::wedge:
            return p1 >= c1 && p2 >= c2;
        case Kind::slab_complement:
            return std::fabs(p1) >= c1 || std::fabs(p2) >= c2;
    }
    return false;
}

double GaussianSetProbe::dist_origin() const {
    switch (kind) {
        case Kind::half_plane:
            return std::max(0.0, c1);
        case Kind::slab_complement:
            // distance to a union is the smaller slab offset
            return std::max(0.0, std::min(c1, c2));
        case Kind::wedge:
            break;
    }
    if (contains(0.0, 0.0)) return 0.0;
    // candidates: perpendicular foot on each boundary line, then the corner
    double best = std::numeric_limits<double>::infinity();
    const double f1x = c1 * n1x, f1y = c1 * n1y;
    if (n2x * f1x + n2y * f1y >= c2) best = std::min(best, std::fabs(c1));
    const double f2x = c2 * n2x, f2y = c2 * n2y;
    if (n1x * f2x + n1y * f2y >= c1) best = std::min(best, std::fabs(c2));
    const double det = n1x * n2y - n1y * n2x;
    if (det != 0.0) {
        const double cx = (c1 * n2y - c2 * n1y) / det;
        const double cy = (n1x * c2 - n2x * c1) / det;
        best = std::min(best, std::hypot(cx, cy));
    }
    return best;
}

bool GaussianSetProbe::corner_closest() const {
    if (kind != Kind::wedge) {
        throw std::logic_error("corner_closest: not a wedge");
    }
    const double f1x = c1 * n1x, f1y = c1 * n1y;
    const double f2x = c2 * n2x, f2y = c2 * n2y;
    return (n2x * f1x + n2y * f1y < c2) && (n1x * f2x + n1y * f2y < c1);
}

double GaussianSetProbe::wedge_angle() const {
    if (kind != Kind::wedge) {
        throw std::logic_error("wedge_angle: not a wedge");
    }
    const double cosn = std::clamp(n1x * n2x + n1y * n2y, -1.0, 1.0);
    return 3.14159265358979323846 - std::acos(cosn);
}

McEstimate gaussian_measure_mc(const GaussianSetProbe& set, uint64_t trials, uint64_t seed) {
    return run_mc(trials, [&](uint64_t t) {
        Rng rng(derive_seed(seed, {0xA7u, t}));
        return set.contains(rng.gaussian(), rng.gaussian());
    });
}

ConcavityReport lambda_concavity_check(double tau, std::span<const double> mu_grid) {
    if (mu_grid.size() < 3) {
        throw std::invalid_argument("lambda_concavity_check: need at least 3 grid points");
    }
    for (double mu : mu_grid) {
        if (!(mu > 0.0 && mu < 0.5)) {
            throw std::invalid_argument("lambda_concavity_check: grid must lie in (0, 1/2)");
        }
    }
    std::vector<double> values(mu_grid.size());
    for (size_t i = 0; i < mu_grid.size(); ++i) {
        values[i] = lambda(tau, phi_c_inv(mu_grid[i]));
    }
    double max_d2 = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < values.size(); ++i) {
        max_d2 = std::max(max_d2, values[i + 1] - 2.0 * values[i] + values[i - 1]);
    }
    return ConcavityReport{max_d2 <= 1e-6, max_d2};
}

}  // namespace cplsh
