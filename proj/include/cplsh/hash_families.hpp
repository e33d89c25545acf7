#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "cplsh/rotations.hpp"
#include "cplsh/vectors.hpp"

namespace cplsh {

/// Combined bucket key for k concatenated hash values (mixed-radix encoding).
struct HashKey {
    uint64_t value = 0;

    friend bool operator==(const HashKey&, const HashKey&) = default;
};

/// True iff the product of the ranges fits in 64 bits.
bool key_width_ok(std::span<const uint32_t> ranges);

/// Mixed-radix encoding, first value most significant:
/// key = ((v0 * r1 + v1) * r2 + v2) ... Injective; throws if some value >= its range.
HashKey concat_key(std::span<const uint32_t> values, std::span<const uint32_t> ranges);

/// Inverse of concat_key.
std::vector<uint32_t> decode_key(HashKey key, std::span<const uint32_t> ranges);

/// One cross-polytope hash function: a random rotation restricted to the
/// first cp_dim coordinates, hashing to the nearest signed basis vector.
/// Range is 2*cp_dim, or cp_dim when signs are collapsed (+e_j and -e_j merged).
struct CrossPolytopeParams {
    std::variant<PseudoRotation, GaussianRotation> rotation;
    uint32_t cp_dim;
    bool collapse_signs = false;

    uint32_t range() const { return collapse_signs ? cp_dim : 2 * cp_dim; }
    size_t rotation_dim() const;
};

/// Hash of an already-rotated vector: argmax_j |y_j| over j < cp_dim.
/// Full variant encodes (index, sign) as 2*index + (sign < 0); collapsed
/// variant returns the index. Ties: lowest index wins; at y_j == 0 the sign
/// is taken as +. Scale-invariant, so the rotated vector need not be normalized.
template <typename T>
uint32_t cp_hash_rotated(std::span<const T> y, uint32_t cp_dim, bool collapse_signs) {
    uint32_t best = 0;
    T best_abs = y[0] < T(0) ? -y[0] : y[0];
    for (uint32_t j = 1; j < cp_dim; ++j) {
        const T a = y[j] < T(0) ? -y[j] : y[j];
        if (a > best_abs) {
            best_abs = a;
            best = j;
        }
    }
    if (collapse_signs) return best;
    return 2 * best + (y[best] < T(0) ? 1u : 0u);
}

/// Full pipeline: rotate x (zero-padded for the pseudo-rotation) and hash.
/// scratch is resized as needed; concurrent callers need distinct scratch.
uint32_t cp_hash(const CrossPolytopeParams& params, std::span<const float> x,
                 std::vector<float>& scratch);
uint32_t cp_hash(const CrossPolytopeParams& params, const UnitVector& x);

/// Hyperplane LSH baseline: k seeded standard-normal directions, one bit per
/// direction. Range 2^k.
struct HyperplaneParams {
    HyperplaneParams(size_t dim, int k, uint64_t seed);

    size_t dim;
    int k;
    std::vector<float> normals;  // k rows of length dim

    std::span<const float> normal(int i) const {
        return std::span<const float>(normals.data() + static_cast<size_t>(i) * dim, dim);
    }
    uint32_t range() const { return 1u << k; }
};

/// Bit i of the result is 1 iff <normal_i, x> >= 0; bit 0 is most significant
/// so the value matches concat_key over per-bit values with ranges of 2.
uint32_t hp_hash(const HyperplaneParams& params, std::span<const float> x);

/// Sparse evaluation in O(k * nnz).
uint32_t hp_hash(const HyperplaneParams& params, const SparseVector& x);

}  // namespace cplsh
