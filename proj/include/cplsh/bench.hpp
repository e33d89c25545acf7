#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cplsh/analysis.hpp"
#include "cplsh/data_io.hpp"
#include "cplsh/index.hpp"

namespace cplsh {

/// Parameter grid for one hash family. Every (k, last_dim) pair becomes one
/// index build; every probe count m becomes one report row per build.
struct GridSpec {
    HashFamily family = HashFamily::cross_polytope;
    RotationKind rotation = RotationKind::pseudo;
    bool collapse_signs = false;            // cross-polytope only
    std::vector<uint32_t> ks;               // hashes per table
    std::vector<uint32_t> last_dims;        // last-hash d' candidates; {0} = full
    std::vector<uint32_t> probe_counts;     // m values, each >= L
    uint32_t num_tables = 10;               // 0 = derive from the memory rule
    uint32_t feature_hash_dim = 0;          // sparse instances only
    uint64_t seed = 1;

    /// Default grid for a dense instance of dimension d: k in 1..4, last d'
    /// over powers of two, m doubling from L.
    static GridSpec defaults(HashFamily family, uint32_t d, uint32_t L = 10);
};

enum class TimingMode { none, best_only, all };

struct ConfigRow {
    HashFamily family;
    RotationKind rotation;
    bool collapse_signs;
    uint32_t num_tables;
    uint32_t k;
    uint32_t last_dim;  // 0 = full
    uint32_t m;

    double recall = 0.0;
    double mean_candidates = 0.0;
    bool met_target = false;

    // medians over the measured passes; negative = not measured
    double mean_query_ms = -1.0;
    double mean_hash_ms = -1.0;
    double mean_distance_ms = -1.0;
};

struct BenchReport {
    std::vector<ConfigRow> rows;
    int best = -1;  // index into rows; -1 = no config met the target
    double recall_target = 0.0;
    uint64_t dataset_bytes = 0;
    uint64_t index_entry_bytes = 0;  // per entry accounting (id + key amortized)
    bool memory_rule_ok = false;     // L * entry_bytes <= bytes per point
};

/// Tables-count choice under the memory rule: the largest L whose index
/// entries fit in the dataset's own byte size (at 12 bytes per entry).
uint32_t memory_rule_tables(uint32_t dim);

/// Runs the grid on the instance: one build per (k, last_dim), one sweep pass
/// over all queries per build, then recall / mean-candidate readouts for
/// every m. Best = among rows meeting the recall target, the one with the
/// fewest mean candidates (query time breaks ties when measured).
BenchReport run_grid(const Instance& instance, const GridSpec& spec, double recall_target,
                     TimingMode timing = TimingMode::none);

void write_bench_csv(const std::string& path, const BenchReport& report);
BenchReport parse_bench_csv(const std::string& path);

/// Figure-style trade-off curves: rho versus number of parts.
std::vector<TradeoffPoint> lower_bound_curve(double r1, std::span<const double> num_parts);
std::vector<TradeoffPoint> cp_curve(double r1, std::span<const int> dprimes);

/// Two CSV blocks with columns num_parts,rho; failed points are emitted as
/// nan and flagged on stderr, the run continues.
void write_curves_csv(const std::string& path, const std::vector<TradeoffPoint>& lower_bound,
                      const std::vector<TradeoffPoint>& cross_polytope);

}  // namespace cplsh
