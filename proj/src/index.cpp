#include "cplsh/index.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cplsh/fht.hpp"
#include "cplsh/rng.hpp"

namespace cplsh {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr uint64_t kTagHash = 0x11;
constexpr uint64_t kTagHyperplane = 0x12;
constexpr uint64_t kTagFeatureHash = 0x13;

struct CandidateCollector {
    std::vector<uint8_t> visited;
    std::vector<uint32_t> ids;

    explicit CandidateCollector(size_t n) : visited(n, 0) {}

    void take(std::span<const uint32_t> bucket) {
        for (uint32_t id : bucket) {
            if (!visited[id]) {
                visited[id] = 1;
                ids.push_back(id);
            }
        }
    }
};

}  // namespace

void save_index_config(const std::string& path, const IndexConfig& c) {
    nlohmann::json j;
    j["num_tables"] = c.num_tables;
    j["hashes_per_table"] = c.hashes_per_table;
    j["last_cp_dim"] = c.last_cp_dim;
    j["family"] = c.family == HashFamily::cross_polytope ? "cross_polytope" : "hyperplane";
    j["rotation"] = c.rotation == RotationKind::pseudo ? "pseudo" : "gaussian";
    j["collapse_signs"] = c.collapse_signs;
    j["feature_hash_dim"] = c.feature_hash_dim;
    j["seed"] = c.seed;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_index_config: cannot open " + path);
    out << j.dump(2) << '\n';
}

IndexConfig load_index_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_index_config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    IndexConfig c;
    c.num_tables = j.at("num_tables").get<uint32_t>();
    c.hashes_per_table = j.at("hashes_per_table").get<uint32_t>();
    c.last_cp_dim = j.at("last_cp_dim").get<uint32_t>();
    c.family = j.at("family").get<std::string>() == "hyperplane" ? HashFamily::hyperplane
                                                                 : HashFamily::cross_polytope;
    c.rotation = j.at("rotation").get<std::string>() == "gaussian" ? RotationKind::gaussian
                                                                   : RotationKind::pseudo;
    c.collapse_signs = j.at("collapse_signs").get<bool>();
    c.feature_hash_dim = j.at("feature_hash_dim").get<uint32_t>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

std::span<const uint32_t> LshIndex::Table::bucket(uint64_t key) const {
    const auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return {};
    const size_t pos = static_cast<size_t>(it - keys.begin());
    return std::span<const uint32_t>(ids.data() + offsets[pos], offsets[pos + 1] - offsets[pos]);
}

LshIndex LshIndex::prepare(std::shared_ptr<const DenseDataset> points,
                           std::shared_ptr<const std::vector<SparseVector>> sparse_points,
                           const IndexConfig& config) {
    if (config.num_tables < 1 || config.hashes_per_table < 1) {
        throw std::invalid_argument("LshIndex: need L >= 1 and k >= 1");
    }
    LshIndex index;
    index.config_ = config;
    index.points_ = std::move(points);
    index.sparse_points_ = std::move(sparse_points);

    uint32_t ambient;
    if (index.points_) {
        if (index.points_->size() == 0) throw std::invalid_argument("LshIndex: empty dataset");
        ambient = index.points_->dim;
    } else {
        if (!index.sparse_points_ || index.sparse_points_->empty()) {
            throw std::invalid_argument("LshIndex: empty dataset");
        }
        ambient = (*index.sparse_points_)[0].ambient_dim;
        for (const auto& v : *index.sparse_points_) {
            if (v.ambient_dim != ambient) {
                throw std::invalid_argument("LshIndex: inconsistent dimensions");
            }
        }
    }

    const uint32_t L = config.num_tables;
    const uint32_t k = config.hashes_per_table;

    if (config.family == HashFamily::hyperplane) {
        // hyperplanes act on the raw input; sparse input stays sparse
        index.input_dim_ = ambient;
        index.rotation_dim_ = ambient;
        for (uint32_t t = 0; t < L; ++t) {
            index.hp_params_.emplace_back(ambient, static_cast<int>(k),
                                          derive_seed(config.seed, {kTagHyperplane, t}));
        }
        index.ranges_.assign(k, 2u);
        index.tables_.resize(L);
        return index;
    }

    // cross-polytope: sparse input routes through feature hashing first
    uint32_t dense_dim = ambient;
    if (index.sparse_points_) {
        if (config.feature_hash_dim == 0) {
            throw std::invalid_argument("LshIndex: sparse input needs feature_hash_dim");
        }
        dense_dim = config.feature_hash_dim;
        index.feature_map_.emplace(ambient, dense_dim,
                                   derive_seed(config.seed, {kTagFeatureHash}));
    }
    index.input_dim_ = dense_dim;
    index.rotation_dim_ = config.rotation == RotationKind::pseudo
                              ? static_cast<uint32_t>(next_power_of_two(dense_dim))
                              : dense_dim;

    const uint32_t full_dim = index.rotation_dim_;
    const uint32_t last_dim = config.last_cp_dim == 0 ? full_dim : config.last_cp_dim;
    if (last_dim < 1 || last_dim > full_dim) {
        throw std::invalid_argument("LshIndex: last_cp_dim out of range");
    }

    index.cp_hashes_.resize(L);
    for (uint32_t t = 0; t < L; ++t) {
        for (uint32_t i = 0; i < k; ++i) {
            const uint64_t seed = derive_seed(config.seed, {kTagHash, t, i});
            const uint32_t cp_dim = (i + 1 == k) ? last_dim : full_dim;
            if (config.rotation == RotationKind::pseudo) {
                index.cp_hashes_[t].push_back(CpHash{PseudoRotation(full_dim, seed), cp_dim});
            } else {
                index.cp_hashes_[t].push_back(CpHash{GaussianRotation(full_dim, seed), cp_dim});
            }
        }
    }
    index.ranges_.resize(k);
    for (uint32_t i = 0; i < k; ++i) {
        const uint32_t cp_dim = (i + 1 == k) ? last_dim : full_dim;
        index.ranges_[i] = config.collapse_signs ? cp_dim : 2 * cp_dim;
    }
    if (!key_width_ok(index.ranges_)) {
        throw std::invalid_argument("LshIndex: key overflow");
    }
    index.tables_.resize(L);
    return index;
}

void LshIndex::hash_point(uint32_t table, std::span<const float> x, Scratch& scratch) const {
    const uint32_t k = config_.hashes_per_table;
    scratch.values.resize(k);
    if (config_.family == HashFamily::hyperplane) {
        const uint32_t v = hp_hash(hp_params_[table], x);
        for (uint32_t i = 0; i < k; ++i) {
            scratch.values[i] = (v >> (k - 1 - i)) & 1u;
        }
        return;
    }
    scratch.rotated.resize(rotation_dim_);
    for (uint32_t i = 0; i < k; ++i) {
        const CpHash& h = cp_hashes_[table][i];
        if (std::holds_alternative<PseudoRotation>(h.rotation)) {
            std::memset(scratch.rotated.data(), 0, rotation_dim_ * sizeof(float));
            std::memcpy(scratch.rotated.data(), x.data(), x.size() * sizeof(float));
            std::get<PseudoRotation>(h.rotation).apply(std::span<float>(scratch.rotated));
        } else {
            std::get<GaussianRotation>(h.rotation).apply(x, std::span<float>(scratch.rotated));
        }
        scratch.values[i] = cp_hash_rotated(std::span<const float>(scratch.rotated), h.cp_dim,
                                            config_.collapse_signs);
    }
}

void LshIndex::fill_tables(bool parallel) {
    const uint32_t L = config_.num_tables;
    const size_t n = num_points();
    const int64_t tables = static_cast<int64_t>(L);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int64_t t = 0; t < tables; ++t) {
        Scratch scratch;
        std::vector<std::pair<uint64_t, uint32_t>> entries;
        entries.reserve(n);
        for (size_t p = 0; p < n; ++p) {
            if (points_) {
                hash_point(static_cast<uint32_t>(t), points_->row(p), scratch);
            } else if (config_.family == HashFamily::hyperplane) {
                const uint32_t k = config_.hashes_per_table;
                const uint32_t v = hp_hash(hp_params_[t], (*sparse_points_)[p]);
                scratch.values.resize(k);
                for (uint32_t i = 0; i < k; ++i) {
                    scratch.values[i] = (v >> (k - 1 - i)) & 1u;
                }
            } else {
                const auto dense = dense_input((*sparse_points_)[p], scratch);
                hash_point(static_cast<uint32_t>(t), dense, scratch);
            }
            const HashKey key = concat_key(scratch.values, ranges_);
            entries.emplace_back(key.value, static_cast<uint32_t>(p));
        }
        std::sort(entries.begin(), entries.end());
        Table& table = tables_[t];
        table.ids.resize(entries.size());
        for (size_t i = 0; i < entries.size(); ++i) {
            if (i == 0 || entries[i].first != entries[i - 1].first) {
                table.keys.push_back(entries[i].first);
                table.offsets.push_back(static_cast<uint32_t>(i));
            }
            table.ids[i] = entries[i].second;
        }
        table.offsets.push_back(static_cast<uint32_t>(entries.size()));
    }
}

LshIndex LshIndex::build(std::shared_ptr<const DenseDataset> points, const IndexConfig& config) {
    LshIndex index = prepare(std::move(points), nullptr, config);
    index.fill_tables(true);
    return index;
}

LshIndex LshIndex::build(DenseDataset points, const IndexConfig& config) {
    return build(std::make_shared<const DenseDataset>(std::move(points)), config);
}

LshIndex LshIndex::build_serial(std::shared_ptr<const DenseDataset> points,
                                const IndexConfig& config) {
    LshIndex index = prepare(std::move(points), nullptr, config);
    index.fill_tables(false);
    return index;
}

LshIndex LshIndex::build_sparse(std::shared_ptr<const std::vector<SparseVector>> points,
                                const IndexConfig& config) {
    LshIndex index = prepare(nullptr, std::move(points), config);
    index.fill_tables(true);
    return index;
}

std::span<const float> LshIndex::dense_input(const SparseVector& x, Scratch& scratch) const {
    scratch.padded.assign(input_dim_, 0.0f);
    feature_map_->apply(x, scratch.padded);
    return std::span<const float>(scratch.padded.data(), input_dim_);
}

std::vector<std::vector<ProbeScoreList>> LshIndex::probe_lists(std::span<const float> q,
                                                               Scratch& scratch) const {
    const uint32_t L = config_.num_tables;
    const uint32_t k = config_.hashes_per_table;
    std::vector<std::vector<ProbeScoreList>> lists(L);
    scratch.rotated.resize(rotation_dim_);
    for (uint32_t t = 0; t < L; ++t) {
        lists[t].reserve(k);
        if (config_.family == HashFamily::hyperplane) {
            for (uint32_t i = 0; i < k; ++i) {
                const double proj = dot_f64(hp_params_[t].normal(static_cast<int>(i)), q);
                lists[t].push_back(probe_scores_bit(proj >= 0.0 ? 1u : 0u, proj));
            }
            continue;
        }
        for (uint32_t i = 0; i < k; ++i) {
            const CpHash& h = cp_hashes_[t][i];
            if (std::holds_alternative<PseudoRotation>(h.rotation)) {
                std::memset(scratch.rotated.data(), 0, rotation_dim_ * sizeof(float));
                std::memcpy(scratch.rotated.data(), q.data(), q.size() * sizeof(float));
                std::get<PseudoRotation>(h.rotation).apply(std::span<float>(scratch.rotated));
            } else {
                std::get<GaussianRotation>(h.rotation).apply(q,
                                                             std::span<float>(scratch.rotated));
            }
            lists[t].push_back(probe_scores(std::span<const float>(scratch.rotated), h.cp_dim,
                                            config_.collapse_signs));
        }
    }
    return lists;
}

std::vector<std::vector<ProbeScoreList>> LshIndex::probe_lists_sparse(const SparseVector& q,
                                                                      Scratch& scratch) const {
    if (config_.family == HashFamily::hyperplane) {
        const uint32_t L = config_.num_tables;
        const uint32_t k = config_.hashes_per_table;
        std::vector<std::vector<ProbeScoreList>> lists(L);
        for (uint32_t t = 0; t < L; ++t) {
            lists[t].reserve(k);
            for (uint32_t i = 0; i < k; ++i) {
                const auto n = hp_params_[t].normal(static_cast<int>(i));
                double proj = 0.0;
                for (const auto& [idx, val] : q.entries) {
                    proj += static_cast<double>(n[idx]) * val;
                }
                lists[t].push_back(probe_scores_bit(proj >= 0.0 ? 1u : 0u, proj));
            }
        }
        return lists;
    }
    const auto dense_q = dense_input(q, scratch);
    return probe_lists(dense_q, scratch);
}

uint32_t LshIndex::walk(std::vector<std::vector<ProbeScoreList>>& lists, uint32_t max_probes,
                        const std::function<void(uint32_t, std::span<const uint32_t>)>& visit)
    const {
    ProbeSequenceGenerator gen(lists);
    uint32_t probes = 0;
    ProbeCandidate cand;
    while (probes < max_probes && gen.next(cand)) {
        const HashKey key = concat_key(cand.values, ranges_);
        visit(probes, tables_[cand.table].bucket(key.value));
        ++probes;
    }
    return probes;
}

QueryResult LshIndex::rerank(const std::vector<uint32_t>& ids, std::span<const float> dense_q,
                             const SparseVector* sparse_q) const {
    QueryResult result;
    for (uint32_t id : ids) {
        const double dist = points_ ? unit_distance(points_->row(id), dense_q)
                                    : unit_distance_sparse((*sparse_points_)[id], *sparse_q);
        if (!result.found || dist < result.distance ||
            (dist == result.distance && id < result.id)) {
            result.found = true;
            result.id = id;
            result.distance = dist;
        }
    }
    return result;
}

QueryResult LshIndex::query(std::span<const float> q, uint32_t num_probes,
                            QueryStats* stats) const {
    if (num_probes < config_.num_tables) {
        throw std::invalid_argument("query: num_probes must be at least L");
    }
    if (points_ && q.size() != points_->dim) {
        throw std::invalid_argument("query: dimension mismatch");
    }
    const auto t0 = Clock::now();
    Scratch scratch;
    auto lists = probe_lists(q, scratch);
    const double hash_ms = ms_since(t0);

    CandidateCollector collector(num_points());
    const uint32_t probes =
        walk(lists, num_probes,
             [&](uint32_t, std::span<const uint32_t> bucket) { collector.take(bucket); });

    const auto t_dist = Clock::now();
    const QueryResult result = rerank(collector.ids, q, nullptr);
    if (stats) {
        stats->candidates_examined = collector.ids.size();
        stats->probes_used = probes;
        stats->hash_ms = hash_ms;
        stats->distance_ms = ms_since(t_dist);
        stats->total_ms = ms_since(t0);
    }
    return result;
}

QueryResult LshIndex::query(const SparseVector& q, uint32_t num_probes, QueryStats* stats) const {
    if (num_probes < config_.num_tables) {
        throw std::invalid_argument("query: num_probes must be at least L");
    }
    const auto t0 = Clock::now();
    Scratch scratch;
    auto lists = probe_lists_sparse(q, scratch);
    const double hash_ms = ms_since(t0);

    CandidateCollector collector(num_points());
    const uint32_t probes =
        walk(lists, num_probes,
             [&](uint32_t, std::span<const uint32_t> bucket) { collector.take(bucket); });

    const auto t_dist = Clock::now();
    const QueryResult result = rerank(collector.ids, {}, &q);
    if (stats) {
        stats->candidates_examined = collector.ids.size();
        stats->probes_used = probes;
        stats->hash_ms = hash_ms;
        stats->distance_ms = ms_since(t_dist);
        stats->total_ms = ms_since(t0);
    }
    return result;
}

std::vector<uint32_t> LshIndex::candidates(std::span<const float> q, uint32_t num_probes) const {
    Scratch scratch;
    auto lists = probe_lists(q, scratch);
    CandidateCollector collector(num_points());
    walk(lists, num_probes,
         [&](uint32_t, std::span<const uint32_t> bucket) { collector.take(bucket); });
    return std::move(collector.ids);
}

std::vector<uint32_t> LshIndex::candidates(const SparseVector& q, uint32_t num_probes) const {
    Scratch scratch;
    auto lists = probe_lists_sparse(q, scratch);
    CandidateCollector collector(num_points());
    walk(lists, num_probes,
         [&](uint32_t, std::span<const uint32_t> bucket) { collector.take(bucket); });
    return std::move(collector.ids);
}

LshIndex::SweepResult LshIndex::sweep(std::vector<std::vector<ProbeScoreList>>& lists,
                                      uint32_t max_probes, uint32_t target_id) const {
    SweepResult result;
    CandidateCollector collector(num_points());
    result.cumulative_candidates.reserve(max_probes);
    walk(lists, max_probes, [&](uint32_t probe, std::span<const uint32_t> bucket) {
        collector.take(bucket);
        if (result.first_hit_probe == UINT32_MAX && collector.visited[target_id]) {
            result.first_hit_probe = probe;
        }
        result.cumulative_candidates.push_back(collector.ids.size());
    });
    return result;
}

LshIndex::SweepResult LshIndex::sweep_query(std::span<const float> q, uint32_t max_probes,
                                            uint32_t target_id) const {
    Scratch scratch;
    auto lists = probe_lists(q, scratch);
    return sweep(lists, max_probes, target_id);
}

LshIndex::SweepResult LshIndex::sweep_query(const SparseVector& q, uint32_t max_probes,
                                            uint32_t target_id) const {
    Scratch scratch;
    auto lists = probe_lists_sparse(q, scratch);
    return sweep(lists, max_probes, target_id);
}

std::vector<ProbeCandidate> LshIndex::probe_trace(std::span<const float> q, uint32_t m) const {
    Scratch scratch;
    auto lists = probe_lists(q, scratch);
    return probe_sequence(lists, m);
}

size_t LshIndex::num_points() const {
    return points_ ? points_->size() : sparse_points_->size();
}

uint32_t LshIndex::data_dim() const {
    return points_ ? points_->dim : (*sparse_points_)[0].ambient_dim;
}

uint64_t LshIndex::total_entries() const {
    return static_cast<uint64_t>(config_.num_tables) * num_points();
}

}  // namespace cplsh
