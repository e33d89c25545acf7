#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cplsh/data_io.hpp"
#include "cplsh/hash_families.hpp"
#include "cplsh/multiprobe.hpp"
#include "cplsh/rotations.hpp"
#include "cplsh/vectors.hpp"

namespace cplsh {

enum class HashFamily { cross_polytope, hyperplane };
enum class RotationKind { pseudo, gaussian };

/// Parameters of one LSH data structure: L tables of k concatenated hashes.
/// For the cross-polytope family all hashes act on the full (padded)
/// dimension except the last, whose dimension may be lowered ("partial"
/// polytope) for a finer trade-off.
struct IndexConfig {
    uint32_t num_tables = 10;       // L
    uint32_t hashes_per_table = 1;  // k
    uint32_t last_cp_dim = 0;       // 0 = full dimension
    HashFamily family = HashFamily::cross_polytope;
    RotationKind rotation = RotationKind::pseudo;
    bool collapse_signs = false;
    uint32_t feature_hash_dim = 0;  // sparse input only; power of two
    uint64_t seed = 1;
};

void save_index_config(const std::string& path, const IndexConfig& config);
IndexConfig load_index_config(const std::string& path);

struct QueryStats {
    uint64_t candidates_examined = 0;  // distinct ids scored
    uint32_t probes_used = 0;
    double hash_ms = 0.0;
    double distance_ms = 0.0;
    double total_ms = 0.0;
};

struct QueryResult {
    bool found = false;
    uint32_t id = 0;
    double distance = 0.0;
};

/// Static LSH index: build once, then query concurrently (queries are
/// read-only; each carries its own scratch). Buckets are stored per table as
/// a sorted key -> id-list map rebuilt deterministically from (data, config).
class LshIndex {
  public:
    static LshIndex build(std::shared_ptr<const DenseDataset> points, const IndexConfig& config);
    static LshIndex build(DenseDataset points, const IndexConfig& config);
    /// Serial reference build (no OpenMP); must produce identical tables.
    static LshIndex build_serial(std::shared_ptr<const DenseDataset> points,
                                 const IndexConfig& config);
    static LshIndex build_sparse(std::shared_ptr<const std::vector<SparseVector>> points,
                                 const IndexConfig& config);

    /// Collects ids from the first num_probes buckets of the multiprobe
    /// sequence (num_probes = L reproduces single-probe), deduplicates,
    /// re-ranks by exact distance and returns the minimizer.
    QueryResult query(std::span<const float> q, uint32_t num_probes,
                      QueryStats* stats = nullptr) const;
    QueryResult query(const SparseVector& q, uint32_t num_probes,
                      QueryStats* stats = nullptr) const;

    /// Distinct candidate ids for the first num_probes buckets, in discovery order.
    std::vector<uint32_t> candidates(std::span<const float> q, uint32_t num_probes) const;
    std::vector<uint32_t> candidates(const SparseVector& q, uint32_t num_probes) const;

    /// One pass over max_probes buckets recording, per probe index, the
    /// cumulative distinct-candidate count and where target_id first appears.
    /// Lets a parameter sweep read off recall and candidate cost for every
    /// probe budget at once.
    struct SweepResult {
        std::vector<uint64_t> cumulative_candidates;  // size max_probes (clipped to space)
        uint32_t first_hit_probe = UINT32_MAX;        // 0-based; UINT32_MAX = never
    };
    SweepResult sweep_query(std::span<const float> q, uint32_t max_probes,
                            uint32_t target_id) const;
    SweepResult sweep_query(const SparseVector& q, uint32_t max_probes, uint32_t target_id) const;

    /// First m elements of the query's probing sequence (for tracing).
    std::vector<ProbeCandidate> probe_trace(std::span<const float> q, uint32_t m) const;

    const IndexConfig& config() const { return config_; }
    size_t num_points() const;
    uint32_t data_dim() const;
    /// L * n (every point sits in exactly one bucket per table).
    uint64_t total_entries() const;
    /// Hash ranges of the k hashes of one table.
    const std::vector<uint32_t>& ranges() const { return ranges_; }

  private:
    struct CpHash {
        std::variant<PseudoRotation, GaussianRotation> rotation;
        uint32_t cp_dim;
    };
    struct Table {
        std::vector<uint64_t> keys;     // sorted distinct keys
        std::vector<uint32_t> offsets;  // keys.size() + 1
        std::vector<uint32_t> ids;

        std::span<const uint32_t> bucket(uint64_t key) const;
    };
    struct Scratch {
        std::vector<float> padded;
        std::vector<float> rotated;
        std::vector<uint32_t> values;
    };

    LshIndex() = default;

    static LshIndex prepare(std::shared_ptr<const DenseDataset> points,
                            std::shared_ptr<const std::vector<SparseVector>> sparse_points,
                            const IndexConfig& config);
    void fill_tables(bool parallel);
    void hash_point(uint32_t table, std::span<const float> x, Scratch& scratch) const;
    std::span<const float> dense_input(const SparseVector& x, Scratch& scratch) const;
    std::vector<std::vector<ProbeScoreList>> probe_lists(std::span<const float> q,
                                                         Scratch& scratch) const;
    std::vector<std::vector<ProbeScoreList>> probe_lists_sparse(const SparseVector& q,
                                                                Scratch& scratch) const;
    uint32_t walk(std::vector<std::vector<ProbeScoreList>>& lists, uint32_t max_probes,
                  const std::function<void(uint32_t, std::span<const uint32_t>)>& visit) const;
    QueryResult rerank(const std::vector<uint32_t>& ids, std::span<const float> dense_q,
                       const SparseVector* sparse_q) const;
    SweepResult sweep(std::vector<std::vector<ProbeScoreList>>& lists, uint32_t max_probes,
                      uint32_t target_id) const;

    IndexConfig config_;
    std::shared_ptr<const DenseDataset> points_;
    std::shared_ptr<const std::vector<SparseVector>> sparse_points_;
    std::optional<FeatureHashMap> feature_map_;
    uint32_t input_dim_ = 0;     // dense input dimension seen by the hashes
    uint32_t rotation_dim_ = 0;  // padded for pseudo, exact for gaussian
    std::vector<std::vector<CpHash>> cp_hashes_;       // [L][k]
    std::vector<HyperplaneParams> hp_params_;          // [L]
    std::vector<uint32_t> ranges_;                     // per-hash ranges (k entries)
    std::vector<Table> tables_;                        // [L]
};

}  // namespace cplsh
