#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace cplsh {

inline bool is_power_of_two(size_t n) {
    return n > 0 && (n & (n - 1)) == 0;
}

inline size_t next_power_of_two(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place orthonormal Fast Hadamard Transform: x <- H x with
/// H = Sylvester Hadamard matrix scaled by 1/sqrt(n). Involution: fht(fht(x)) = x.
template <typename T>
void fht(std::span<T> x) {
    const size_t n = x.size();
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("fht: length must be a power of two");
    }
    for (size_t h = 1; h < n; h <<= 1) {
        for (size_t i = 0; i < n; i += h << 1) {
            for (size_t j = i; j < i + h; ++j) {
                const T a = x[j];
                const T b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
        }
    }
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(n)));
    for (size_t i = 0; i < n; ++i) x[i] *= scale;
}

}  // namespace cplsh
