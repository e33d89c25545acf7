#include "cplsh/rotations.hpp"

#include <cstring>
#include <stdexcept>

#include "cplsh/fht.hpp"
#include "cplsh/rng.hpp"

namespace cplsh {

PseudoRotation::PseudoRotation(size_t dim, uint64_t seed) : dim_(dim) {
    if (!is_power_of_two(dim)) {
        throw std::invalid_argument("PseudoRotation: dim must be a power of two");
    }
    for (int stage = 0; stage < kStages; ++stage) {
        Rng rng(derive_seed(seed, {0x44u, static_cast<uint64_t>(stage)}));
        auto& d = signs_[stage];
        d.resize(dim_);
        for (size_t i = 0; i < dim_; ++i) {
            d[i] = static_cast<float>(rng.sign());
        }
    }
}

template <typename T>
void PseudoRotation::apply_impl(std::span<T> x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("PseudoRotation::apply: length mismatch");
    }
    for (int stage = 0; stage < kStages; ++stage) {
        const auto& d = signs_[stage];
        for (size_t i = 0; i < dim_; ++i) {
            x[i] *= static_cast<T>(d[i]);
        }
        fht(x);
    }
}

void PseudoRotation::apply(std::span<float> x) const { apply_impl(x); }
void PseudoRotation::apply(std::span<double> x) const { apply_impl(x); }

GaussianRotation::GaussianRotation(size_t dim, uint64_t seed) : dim_(dim) {
    matrix_.resize(dim * dim);
    Rng rng(derive_seed(seed, {0x47u}));
    for (auto& a : matrix_) {
        a = static_cast<float>(rng.gaussian());
    }
}

GaussianRotation GaussianRotation::identity(size_t dim) {
    GaussianRotation g;
    g.dim_ = dim;
    g.matrix_.assign(dim * dim, 0.0f);
    for (size_t i = 0; i < dim; ++i) {
        g.matrix_[i * dim + i] = 1.0f;
    }
    return g;
}

template <typename In, typename Out>
static void matvec(const std::vector<float>& m, size_t dim, std::span<const In> in,
                   std::span<Out> out) {
    if (in.size() != dim || out.size() != dim) {
        throw std::invalid_argument("GaussianRotation::apply: dimension mismatch");
    }
    for (size_t i = 0; i < dim; ++i) {
        const float* row = m.data() + i * dim;
        double acc = 0.0;
        for (size_t j = 0; j < dim; ++j) {
            acc += static_cast<double>(row[j]) * static_cast<double>(in[j]);
        }
        out[i] = static_cast<Out>(acc);
    }
}

void GaussianRotation::apply(std::span<const float> in, std::span<float> out) const {
    matvec(matrix_, dim_, in, out);
}

void GaussianRotation::apply(std::span<const double> in, std::span<double> out) const {
    matvec(matrix_, dim_, in, out);
}

FeatureHashMap::FeatureHashMap(uint32_t in_dim, uint32_t out_dim, uint64_t seed)
    : in_dim_(in_dim), out_dim_(out_dim) {
    if (out_dim == 0 || in_dim == 0) {
        throw std::invalid_argument("FeatureHashMap: dimensions must be positive");
    }
    rows_.resize(in_dim);
    signs_.resize(in_dim);
    Rng rng(derive_seed(seed, {0x46u}));
    for (uint32_t c = 0; c < in_dim; ++c) {
        rows_[c] = static_cast<uint32_t>(rng.below(out_dim));
        signs_[c] = static_cast<float>(rng.sign());
    }
}

void FeatureHashMap::apply(const SparseVector& x, std::span<float> out) const {
    if (x.ambient_dim != in_dim_) {
        throw std::invalid_argument("FeatureHashMap::apply: ambient dimension mismatch");
    }
    if (out.size() < out_dim_) {
        throw std::invalid_argument("FeatureHashMap::apply: output too small");
    }
    for (const auto& [idx, val] : x.entries) {
        if (idx >= in_dim_) {
            throw std::out_of_range("FeatureHashMap::apply: index out of range");
        }
        out[rows_[idx]] += signs_[idx] * val;
    }
}

std::vector<float> FeatureHashMap::project(const SparseVector& x) const {
    std::vector<float> out(out_dim_, 0.0f);
    apply(x, out);
    return out;
}

std::vector<float> apply_pseudo_rotation(const PseudoRotation& rot, std::span<const float> x) {
    if (x.size() > rot.dim()) {
        throw std::invalid_argument("apply_pseudo_rotation: input longer than rotation dim");
    }
    std::vector<float> buf(rot.dim(), 0.0f);
    std::memcpy(buf.data(), x.data(), x.size() * sizeof(float));
    rot.apply(std::span<float>(buf));
    return buf;
}

std::vector<float> apply_gaussian_rotation(const GaussianRotation& rot, std::span<const float> x) {
    std::vector<float> out(rot.dim());
    rot.apply(x, std::span<float>(out));
    return out;
}

}  // namespace cplsh
