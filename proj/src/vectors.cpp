#include "cplsh/vectors.hpp"

#include <cmath>
#include <stdexcept>

namespace cplsh {

SparseVector make_sparse(std::vector<std::pair<uint32_t, float>> entries, uint32_t ambient_dim) {
    uint32_t prev = 0;
    bool first = true;
    for (const auto& [idx, val] : entries) {
        if (!first && idx <= prev) {
            throw std::invalid_argument("make_sparse: indices must be strictly increasing");
        }
        if (idx >= ambient_dim) {
            throw std::invalid_argument("make_sparse: index out of range");
        }
        if (val == 0.0f) {
            throw std::invalid_argument("make_sparse: explicit zero value");
        }
        prev = idx;
        first = false;
    }
    return SparseVector{std::move(entries), ambient_dim};
}

double dot_f64(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: dimension mismatch");
    }
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double norm_f64(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(acc);
}

UnitVector normalize(std::span<const float> v) {
    if (v.empty()) {
        throw std::invalid_argument("normalize: empty vector");
    }
    const double n = norm_f64(v);
    if (n == 0.0) {
        throw std::invalid_argument("cannot normalize zero vector");
    }
    UnitVector out;
    out.coords.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        out.coords[i] = static_cast<float>(v[i] / n);
    }
    return out;
}

double unit_distance(std::span<const float> p, std::span<const float> q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("unit_distance: dimension mismatch");
    }
    // direct difference accumulation: equal to sqrt(2 - 2<p,q>) on exactly
    // unit vectors, but free of the cancellation that formula hits for
    // near-identical float32 points
    double d2 = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - static_cast<double>(q[i]);
        d2 += d * d;
    }
    return std::sqrt(d2);
}

double unit_distance(const UnitVector& p, const UnitVector& q) {
    return unit_distance(std::span<const float>(p.coords), std::span<const float>(q.coords));
}

double dot_sparse(const SparseVector& a, const SparseVector& b) {
    if (a.ambient_dim != b.ambient_dim) {
        throw std::invalid_argument("dot_sparse: dimension mismatch");
    }
    double acc = 0.0;
    size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        const uint32_t ia = a.entries[i].first;
        const uint32_t ib = b.entries[j].first;
        if (ia == ib) {
            acc += static_cast<double>(a.entries[i].second) * static_cast<double>(b.entries[j].second);
            ++i;
            ++j;
        } else if (ia < ib) {
            ++i;
        } else {
            ++j;
        }
    }
    return acc;
}

double sparse_norm(const SparseVector& v) {
    double acc = 0.0;
    for (const auto& [idx, val] : v.entries) {
        acc += static_cast<double>(val) * static_cast<double>(val);
    }
    return std::sqrt(acc);
}

SparseVector normalize_sparse(const SparseVector& v) {
    const double n = sparse_norm(v);
    if (n == 0.0) {
        throw std::invalid_argument("cannot normalize zero vector");
    }
    SparseVector out = v;
    for (auto& [idx, val] : out.entries) {
        val = static_cast<float>(val / n);
    }
    return out;
}

double unit_distance_sparse(const SparseVector& a, const SparseVector& b) {
    if (a.ambient_dim != b.ambient_dim) {
        throw std::invalid_argument("unit_distance_sparse: dimension mismatch");
    }
    double d2 = 0.0;
    size_t i = 0, j = 0;
    while (i < a.entries.size() || j < b.entries.size()) {
        const bool a_left = i < a.entries.size();
        const bool b_left = j < b.entries.size();
        if (a_left && (!b_left || a.entries[i].first < b.entries[j].first)) {
            const double v = a.entries[i].second;
            d2 += v * v;
            ++i;
        } else if (b_left && (!a_left || b.entries[j].first < a.entries[i].first)) {
            const double v = b.entries[j].second;
            d2 += v * v;
            ++j;
        } else {
            const double d = static_cast<double>(a.entries[i].second) - b.entries[j].second;
            d2 += d * d;
            ++i;
            ++j;
        }
    }
    return std::sqrt(d2);
}

}  // namespace cplsh
