#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cplsh {

/// One alternative hash value for a single hash function, with its
/// perturbation score. Smaller score = more likely bucket.
struct ProbeEntry {
    uint32_t value;
    double score;
};

/// Per-hash-function probing order: entries sorted ascending by
/// (score, value), materialized lazily from a binary heap so only the ranks
/// actually probed get sorted. Rank 0 is the base hash with score 0.
class ProbeScoreList {
  public:
    ProbeScoreList() = default;
    explicit ProbeScoreList(std::vector<ProbeEntry> entries);

    size_t size() const { return sorted_.size() + heap_.size(); }

    /// Entry at the given rank; extends the sorted prefix on demand.
    const ProbeEntry& at(size_t rank);

    /// Number of entries materialized so far (for cost accounting in tests).
    size_t materialized() const { return sorted_.size(); }

  private:
    std::vector<ProbeEntry> heap_;
    std::vector<ProbeEntry> sorted_;
};

/// Scores every probe of one cross-polytope hash from the rotated vector y.
/// The score of value v is the squared length of the shortest single-coordinate
/// perturbation moving the argmax to v: with M = max_j |y_j| over j < cp_dim,
///   collapsed:        score(v)        = (M - |y_v|)^2
///   full, same sign:  score(v, sign)  = (M - |y_v|)^2
///   full, opposite:   score(v, -sign) = (M + |y_v|)^2   (y_v must cross 0)
/// Probe probability is modeled as exp(-score * const); the constant cancels
/// in the ranking, so knowing the query-to-neighbor distance is unnecessary.
ProbeScoreList probe_scores(std::span<const float> y, uint32_t cp_dim, bool collapse_signs);
ProbeScoreList probe_scores(std::span<const double> y, uint32_t cp_dim, bool collapse_signs);

/// Probe list for one hyperplane bit: rank 0 the observed bit (score 0),
/// rank 1 the flipped bit scored (2 * projection)^2, matching the full
/// cross-polytope list at cp_dim = 1.
ProbeScoreList probe_scores_bit(uint32_t bit, double projection);

/// One element of the global probing sequence: a table, the k per-hash
/// values of the bucket to probe, and the summed score.
struct ProbeCandidate {
    uint32_t table;
    std::vector<uint32_t> values;
    double total_score;
};

/// Lazily merges the per-hash probing orders of all L tables into one
/// sequence of buckets with non-decreasing total score. Ties break by
/// (total_score, table, values lexicographically). Each bucket appears at
/// most once; successors increment one rank at a time, never below the last
/// incremented position, so the lattice is enumerated without duplicates.
class ProbeSequenceGenerator {
  public:
    /// lists[t][i] is the probing order of hash i in table t. The generator
    /// keeps a reference; lists must outlive it.
    explicit ProbeSequenceGenerator(std::vector<std::vector<ProbeScoreList>>& lists);

    /// Next candidate, or false when the probe space is exhausted.
    bool next(ProbeCandidate& out);

  private:
    struct Node {
        double score;
        uint32_t table;
        std::vector<uint32_t> ranks;
        uint32_t last_incremented;
        std::vector<uint32_t> values;

        bool operator>(const Node& other) const;
    };

    void push_node(uint32_t table, std::vector<uint32_t> ranks, uint32_t last_incremented);

    std::vector<std::vector<ProbeScoreList>>* lists_;
    std::vector<Node> heap_;
};

/// First m candidates of the merged sequence (m >= L; every table's base
/// bucket is probed first). Truncates to the full probe space if m exceeds it.
std::vector<ProbeCandidate> probe_sequence(std::vector<std::vector<ProbeScoreList>>& lists,
                                           size_t m);

}  // namespace cplsh
