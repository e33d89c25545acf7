#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cplsh/fht.hpp"
#include "cplsh/rng.hpp"

using namespace cplsh;

namespace {

// O(d^2) oracle: orthonormal Sylvester-Hadamard matrix product,
// H[i][j] = (-1)^{popcount(i & j)} / sqrt(d)
std::vector<double> naive_hadamard(const std::vector<double>& x) {
    const size_t n = x.size();
    std::vector<double> out(n, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const int bits = __builtin_popcountll(i & j);
            acc += (bits & 1) ? -x[j] : x[j];
        }
        out[i] = acc * scale;
    }
    return out;
}

}  // namespace

TEST_CASE("fht fixed values") {
    std::vector<double> x2 = {1.0, 0.0};
    fht(std::span<double>(x2));
    CHECK(x2[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(x2[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

    std::vector<double> x4 = {1.0, 2.0, 3.0, 4.0};
    fht(std::span<double>(x4));
    CHECK(x4[0] == doctest::Approx(5.0));
    CHECK(x4[1] == doctest::Approx(-1.0));
    CHECK(x4[2] == doctest::Approx(-2.0));
    CHECK(x4[3] == doctest::Approx(0.0));
}

TEST_CASE("fht rejects non-power-of-two lengths") {
    std::vector<double> x(3, 1.0);
    CHECK_THROWS_AS(fht(std::span<double>(x)), std::invalid_argument);
    std::vector<double> empty;
    CHECK_THROWS_AS(fht(std::span<double>(empty)), std::invalid_argument);
}

TEST_CASE("fht is an involution") {
    Rng rng(5);
    for (size_t n = 2; n <= 256; n *= 2) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.gaussian();
        std::vector<double> orig = x;
        fht(std::span<double>(x));
        fht(std::span<double>(x));
        for (size_t i = 0; i < n; ++i) {
            CHECK(x[i] == doctest::Approx(orig[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("fht matches the naive Hadamard product up to d = 1024") {
    Rng rng(17);
    for (size_t n = 2; n <= 1024; n *= 2) {
        // unit input
        std::vector<double> x(n);
        double norm = 0.0;
        for (auto& v : x) {
            v = rng.gaussian();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : x) v /= norm;

        const std::vector<double> expected = naive_hadamard(x);
        fht(std::span<double>(x));
        double max_err = 0.0;
        for (size_t i = 0; i < n; ++i) {
            max_err = std::max(max_err, std::fabs(x[i] - expected[i]));
        }
        CHECK(max_err <= 1e-6);
    }
}

TEST_CASE("fht float path preserves norm") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<float> x(128);
        double norm_in = 0.0;
        for (auto& v : x) {
            v = static_cast<float>(rng.gaussian());
            norm_in += static_cast<double>(v) * v;
        }
        fht(std::span<float>(x));
        double norm_out = 0.0;
        for (float v : x) norm_out += static_cast<double>(v) * v;
        CHECK(std::fabs(std::sqrt(norm_out) - std::sqrt(norm_in)) < 1e-5 * std::sqrt(norm_in));
    }
}
