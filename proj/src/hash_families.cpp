#include "cplsh/hash_families.hpp"

#include <cstring>
#include <stdexcept>

#include "cplsh/fht.hpp"
#include "cplsh/rng.hpp"

namespace cplsh {

bool key_width_ok(std::span<const uint32_t> ranges) {
    unsigned __int128 prod = 1;
    for (uint32_t r : ranges) {
        prod *= r;
        if (prod > static_cast<unsigned __int128>(UINT64_MAX)) return false;
    }
    return true;
}

HashKey concat_key(std::span<const uint32_t> values, std::span<const uint32_t> ranges) {
    if (values.size() != ranges.size()) {
        throw std::invalid_argument("concat_key: values/ranges size mismatch");
    }
    uint64_t key = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= ranges[i]) {
            throw std::invalid_argument("concat_key: value out of range");
        }
        key = key * ranges[i] + values[i];
    }
    return HashKey{key};
}

std::vector<uint32_t> decode_key(HashKey key, std::span<const uint32_t> ranges) {
    std::vector<uint32_t> values(ranges.size());
    uint64_t k = key.value;
    for (size_t i = ranges.size(); i-- > 0;) {
        values[i] = static_cast<uint32_t>(k % ranges[i]);
        k /= ranges[i];
    }
    return values;
}

size_t CrossPolytopeParams::rotation_dim() const {
    return std::visit([](const auto& r) { return r.dim(); }, rotation);
}

uint32_t cp_hash(const CrossPolytopeParams& params, std::span<const float> x,
                 std::vector<float>& scratch) {
    const size_t rdim = params.rotation_dim();
    if (x.size() > rdim) {
        throw std::invalid_argument("cp_hash: input longer than rotation dim");
    }
    scratch.assign(rdim, 0.0f);
    if (std::holds_alternative<PseudoRotation>(params.rotation)) {
        std::memcpy(scratch.data(), x.data(), x.size() * sizeof(float));
        std::get<PseudoRotation>(params.rotation).apply(std::span<float>(scratch));
    } else {
        if (x.size() != rdim) {
            throw std::invalid_argument("cp_hash: gaussian rotation needs exact dimension");
        }
        const auto& g = std::get<GaussianRotation>(params.rotation);
        // matvec needs separate in/out; reuse scratch tail-free via a copy
        std::vector<float> out(rdim);
        g.apply(x, std::span<float>(out));
        scratch.swap(out);
    }
    return cp_hash_rotated(std::span<const float>(scratch), params.cp_dim, params.collapse_signs);
}

uint32_t cp_hash(const CrossPolytopeParams& params, const UnitVector& x) {
    std::vector<float> scratch;
    return cp_hash(params, std::span<const float>(x.coords), scratch);
}

HyperplaneParams::HyperplaneParams(size_t dim_, int k_, uint64_t seed) : dim(dim_), k(k_) {
    if (k <= 0 || k > 31) {
        throw std::invalid_argument("HyperplaneParams: k must lie in [1, 31]");
    }
    normals.resize(static_cast<size_t>(k) * dim);
    for (int i = 0; i < k; ++i) {
        Rng rng(derive_seed(seed, {0x48u, static_cast<uint64_t>(i)}));
        for (size_t j = 0; j < dim; ++j) {
            normals[static_cast<size_t>(i) * dim + j] = static_cast<float>(rng.gaussian());
        }
    }
}

uint32_t hp_hash(const HyperplaneParams& params, std::span<const float> x) {
    if (x.size() != params.dim) {
        throw std::invalid_argument("hp_hash: dimension mismatch");
    }
    uint32_t value = 0;
    for (int i = 0; i < params.k; ++i) {
        value = (value << 1) | (dot_f64(params.normal(i), x) >= 0.0 ? 1u : 0u);
    }
    return value;
}

uint32_t hp_hash(const HyperplaneParams& params, const SparseVector& x) {
    if (x.ambient_dim != params.dim) {
        throw std::invalid_argument("hp_hash: dimension mismatch");
    }
    uint32_t value = 0;
    for (int i = 0; i < params.k; ++i) {
        const auto n = params.normal(i);
        double acc = 0.0;
        for (const auto& [idx, val] : x.entries) {
            acc += static_cast<double>(n[idx]) * static_cast<double>(val);
        }
        value = (value << 1) | (acc >= 0.0 ? 1u : 0u);
    }
    return value;
}

}  // namespace cplsh
