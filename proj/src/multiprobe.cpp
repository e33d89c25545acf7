#include "cplsh/multiprobe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cplsh {

namespace {

// Heap and tie-break order for per-hash entries: ascending (score, value).
inline bool entry_after(const ProbeEntry& a, const ProbeEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.value > b.value;
}

template <typename T>
ProbeScoreList probe_scores_impl(std::span<const T> y, uint32_t cp_dim, bool collapse_signs) {
    if (cp_dim == 0) {
        throw std::invalid_argument("probe_scores: cp_dim must be positive");
    }
    if (y.size() < cp_dim) {
        throw std::invalid_argument("probe_scores: rotated vector shorter than cp_dim");
    }
    double max_abs = 0.0;
    for (uint32_t j = 0; j < cp_dim; ++j) {
        max_abs = std::max(max_abs, std::fabs(static_cast<double>(y[j])));
    }
    std::vector<ProbeEntry> entries;
    entries.reserve(collapse_signs ? cp_dim : 2 * cp_dim);
    for (uint32_t j = 0; j < cp_dim; ++j) {
        const double a = std::fabs(static_cast<double>(y[j]));
        const double near = (max_abs - a) * (max_abs - a);
        if (collapse_signs) {
            entries.push_back({j, near});
        } else {
            const double far = (max_abs + a) * (max_abs + a);
            const bool neg = y[j] < T(0);
            entries.push_back({2 * j + (neg ? 1u : 0u), near});
            entries.push_back({2 * j + (neg ? 0u : 1u), far});
        }
    }
    return ProbeScoreList(std::move(entries));
}

}  // namespace

ProbeScoreList::ProbeScoreList(std::vector<ProbeEntry> entries) : heap_(std::move(entries)) {
    std::make_heap(heap_.begin(), heap_.end(), entry_after);
}

const ProbeEntry& ProbeScoreList::at(size_t rank) {
    while (sorted_.size() <= rank) {
        if (heap_.empty()) {
            throw std::out_of_range("ProbeScoreList::at: rank beyond probe range");
        }
        std::pop_heap(heap_.begin(), heap_.end(), entry_after);
        sorted_.push_back(heap_.back());
        heap_.pop_back();
    }
    return sorted_[rank];
}

ProbeScoreList probe_scores(std::span<const float> y, uint32_t cp_dim, bool collapse_signs) {
    return probe_scores_impl(y, cp_dim, collapse_signs);
}

ProbeScoreList probe_scores(std::span<const double> y, uint32_t cp_dim, bool collapse_signs) {
    return probe_scores_impl(y, cp_dim, collapse_signs);
}

ProbeScoreList probe_scores_bit(uint32_t bit, double projection) {
    const double flip_score = 4.0 * projection * projection;
    std::vector<ProbeEntry> entries = {{bit, 0.0}, {bit ^ 1u, flip_score}};
    return ProbeScoreList(std::move(entries));
}

bool ProbeSequenceGenerator::Node::operator>(const Node& other) const {
    if (score != other.score) return score > other.score;
    if (table != other.table) return table > other.table;
    return values > other.values;
}

ProbeSequenceGenerator::ProbeSequenceGenerator(std::vector<std::vector<ProbeScoreList>>& lists)
    : lists_(&lists) {
    for (uint32_t t = 0; t < lists.size(); ++t) {
        push_node(t, std::vector<uint32_t>(lists[t].size(), 0), 0);
    }
}

void ProbeSequenceGenerator::push_node(uint32_t table, std::vector<uint32_t> ranks,
                                       uint32_t last_incremented) {
    auto& hash_lists = (*lists_)[table];
    Node node;
    node.table = table;
    node.score = 0.0;
    node.values.resize(ranks.size());
    for (size_t i = 0; i < ranks.size(); ++i) {
        const ProbeEntry& e = hash_lists[i].at(ranks[i]);
        node.score += e.score;
        node.values[i] = e.value;
    }
    node.ranks = std::move(ranks);
    node.last_incremented = last_incremented;
    heap_.push_back(std::move(node));
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
}

bool ProbeSequenceGenerator::next(ProbeCandidate& out) {
    if (heap_.empty()) return false;
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    Node node = std::move(heap_.back());
    heap_.pop_back();

    auto& hash_lists = (*lists_)[node.table];
    for (uint32_t i = node.last_incremented; i < node.ranks.size(); ++i) {
        if (node.ranks[i] + 1 < hash_lists[i].size()) {
            auto ranks = node.ranks;
            ++ranks[i];
            push_node(node.table, std::move(ranks), i);
        }
    }

    out.table = node.table;
    out.values = std::move(node.values);
    out.total_score = node.score;
    return true;
}

std::vector<ProbeCandidate> probe_sequence(std::vector<std::vector<ProbeScoreList>>& lists,
                                           size_t m) {
    if (m < lists.size()) {
        throw std::invalid_argument("probe_sequence: m must be at least the number of tables");
    }
    ProbeSequenceGenerator gen(lists);
    std::vector<ProbeCandidate> out;
    out.reserve(m);
    ProbeCandidate cand;
    while (out.size() < m && gen.next(cand)) {
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace cplsh
