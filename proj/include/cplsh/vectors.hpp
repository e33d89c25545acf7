#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cplsh {

/// Dense unit-norm point on the sphere. Coordinates are stored as 32-bit
/// floats (dataset format); distance arithmetic accumulates in 64-bit.
struct UnitVector {
    std::vector<float> coords;

    size_t dim() const { return coords.size(); }
};

/// Sparse vector as a sorted (index, value) list plus its ambient dimension.
/// Indices are strictly increasing and explicit zeros are not stored.
struct SparseVector {
    std::vector<std::pair<uint32_t, float>> entries;
    uint32_t ambient_dim = 0;

    size_t nnz() const { return entries.size(); }
};

/// Validating constructor for SparseVector; throws on unsorted, duplicate or
/// out-of-range indices and drops nothing (explicit zeros are rejected).
SparseVector make_sparse(std::vector<std::pair<uint32_t, float>> entries, uint32_t ambient_dim);

double dot_f64(std::span<const float> a, std::span<const float> b);
double norm_f64(std::span<const float> v);

/// v / ||v||. Throws on the zero vector. Output norm is within 1e-6 of 1.
UnitVector normalize(std::span<const float> v);

/// sqrt(2 - 2<p,q>) for unit vectors; equals ||p - q|| on the sphere.
double unit_distance(const UnitVector& p, const UnitVector& q);
double unit_distance(std::span<const float> p, std::span<const float> q);

/// Exact sparse inner product by merging the sorted index lists.
double dot_sparse(const SparseVector& a, const SparseVector& b);

double sparse_norm(const SparseVector& v);
SparseVector normalize_sparse(const SparseVector& v);

/// sqrt(2 - 2<a,b>) for unit sparse vectors.
double unit_distance_sparse(const SparseVector& a, const SparseVector& b);

}  // namespace cplsh
