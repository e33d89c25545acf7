#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cplsh/vectors.hpp"

namespace cplsh {

/// Row-major dense float32 point set; every row is one vector.
struct DenseDataset {
    uint32_t dim = 0;
    std::vector<float> values;  // size() == n * dim

    size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
    std::span<const float> row(size_t i) const {
        return std::span<const float>(values.data() + i * dim, dim);
    }
    std::span<float> row(size_t i) {
        return std::span<float>(values.data() + i * dim, dim);
    }
};

struct GroundTruthEntry {
    uint32_t id;
    float distance;
};

/// A benchmark instance: point set, queries, and exact nearest neighbors.
struct Instance {
    DenseDataset points;
    DenseDataset queries;
    std::vector<GroundTruthEntry> ground_truth;  // one entry per query
    uint64_t seed = 0;
    double planted_distance = 0.0;
};

/// Random benchmark instance: n uniform unit-sphere points; each query sits
/// at exact spherical distance R from a random data point, via
/// q = (1 - R^2/2) p + sqrt(R^2 - R^4/4) t with t a random unit tangent.
/// Ground truth is recomputed by linear scan (the planted point need not win).
Instance generate_random_instance(size_t n, uint32_t d, double R, size_t num_queries,
                                  uint64_t seed);

/// Exact linear-scan nearest neighbors, ties to the lowest id.
std::vector<GroundTruthEntry> brute_force_ground_truth(const DenseDataset& points,
                                                       const DenseDataset& queries);
/// Serial reference implementation of the scan (kept for testing the
/// OpenMP version against).
std::vector<GroundTruthEntry> brute_force_ground_truth_serial(const DenseDataset& points,
                                                              const DenseDataset& queries);

std::vector<GroundTruthEntry> brute_force_ground_truth_sparse(
    const std::vector<SparseVector>& points, const std::vector<SparseVector>& queries);

/// Dense binary format: per vector a little-endian int32 dimension followed
/// by that many little-endian float32 values (the common .fvecs layout).
void write_dense(const std::string& path, const DenseDataset& data);
DenseDataset load_dense(const std::string& path);

/// Ground truth binary format: per query a little-endian uint32 id and a
/// float32 distance.
void write_ground_truth(const std::string& path, const std::vector<GroundTruthEntry>& gt);
std::vector<GroundTruthEntry> load_ground_truth(const std::string& path);

/// Sparse text format: one document per line of ascending `index:value`
/// pairs (0-based). In raw-counts mode values are term counts and get
/// tf-idf weighted (count * ln(n_docs / doc_frequency)); vectors are
/// L2-normalized on load either way.
std::vector<SparseVector> load_sparse_tfidf(const std::string& path, bool raw_counts = false);
void write_sparse(const std::string& path, const std::vector<SparseVector>& docs);

/// Indices of the queries whose inner product with their exact nearest
/// neighbor lies in [lo, hi] (the interesting-query filter).
std::vector<size_t> select_queries_by_ip_range(const std::vector<SparseVector>& points,
                                               const std::vector<SparseVector>& queries,
                                               double lo, double hi);

/// Instance manifest: JSON file naming the data/query/ground-truth files and
/// the generation parameters.
struct InstanceManifest {
    std::string data_path;
    std::string query_path;
    std::string ground_truth_path;
    uint64_t seed = 0;
    uint64_t n = 0;
    uint32_t d = 0;
    double R = 0.0;
};

void write_instance_manifest(const std::string& path, const InstanceManifest& m);
InstanceManifest load_instance_manifest(const std::string& path);

/// Writes all four instance files (data, queries, ground truth, manifest)
/// next to each other; `stem` is the path prefix.
InstanceManifest write_instance(const std::string& stem, const Instance& instance);
Instance load_instance(const std::string& manifest_path);

}  // namespace cplsh
