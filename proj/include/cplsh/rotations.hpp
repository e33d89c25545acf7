#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cplsh/vectors.hpp"

namespace cplsh {

/// Pseudo-random rotation H D3 H D2 H D1: three rounds of a random +-1
/// diagonal followed by the orthonormal Fast Hadamard Transform. Orthogonal,
/// O(d) storage, O(d log d) application. The stage count is fixed at three;
/// two rounds do not mix well enough to stand in for a random rotation.
class PseudoRotation {
  public:
    static constexpr int kStages = 3;

    /// dim must be a power of two; diagonals derive from the seed.
    PseudoRotation(size_t dim, uint64_t seed);

    size_t dim() const { return dim_; }

    /// In-place application; x.size() must equal dim().
    void apply(std::span<float> x) const;
    void apply(std::span<double> x) const;

    /// Sign diagonals D1, D2, D3 (entries +-1), exposed for stage-by-stage checks.
    const std::array<std::vector<float>, kStages>& diagonals() const { return signs_; }

  private:
    template <typename T>
    void apply_impl(std::span<T> x) const;

    size_t dim_;
    std::array<std::vector<float>, kStages> signs_;
};

/// Dense random rotation y = A x with A an i.i.d. standard-normal matrix,
/// reproducible from the seed. O(d^2) storage and application.
class GaussianRotation {
  public:
    GaussianRotation(size_t dim, uint64_t seed);

    /// Identity matrix stand-in (test hook for hashing fixed vectors).
    static GaussianRotation identity(size_t dim);

    size_t dim() const { return dim_; }

    /// out = A * in; both spans must have length dim().
    void apply(std::span<const float> in, std::span<float> out) const;
    void apply(std::span<const double> in, std::span<double> out) const;

    std::span<const float> row(size_t i) const {
        return std::span<const float>(matrix_.data() + i * dim_, dim_);
    }

  private:
    GaussianRotation() = default;

    size_t dim_ = 0;
    std::vector<float> matrix_;  // row-major
};

/// Sparse +-1 projection S: each input column maps to exactly one output row
/// with one random sign, so Sx is computable in O(nnz(x)).
class FeatureHashMap {
  public:
    FeatureHashMap(uint32_t in_dim, uint32_t out_dim, uint64_t seed);

    uint32_t in_dim() const { return in_dim_; }
    uint32_t out_dim() const { return out_dim_; }

    uint32_t row(uint32_t col) const { return rows_[col]; }
    float sign(uint32_t col) const { return signs_[col]; }

    /// Accumulates sign(j) * x_j into out[row(j)]; out must be zeroed by the
    /// caller (or use project). Throws if an index is out of range.
    void apply(const SparseVector& x, std::span<float> out) const;

    /// Convenience: returns Sx as a fresh dense vector of length out_dim().
    std::vector<float> project(const SparseVector& x) const;

  private:
    uint32_t in_dim_;
    uint32_t out_dim_;
    std::vector<uint32_t> rows_;
    std::vector<float> signs_;
};

/// Zero-pads x to rot.dim() and applies the rotation. Throws if x is longer
/// than the rotation dimension.
std::vector<float> apply_pseudo_rotation(const PseudoRotation& rot, std::span<const float> x);

/// y = A x. Throws on dimension mismatch.
std::vector<float> apply_gaussian_rotation(const GaussianRotation& rot, std::span<const float> x);

}  // namespace cplsh
