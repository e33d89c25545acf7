#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <set>

#include "cplsh/data_io.hpp"
#include "cplsh/index.hpp"
#include "cplsh/normal.hpp"
#include "cplsh/rng.hpp"

using namespace cplsh;

namespace {

double chi2_critical(double dof, double z) {
    const double a = 2.0 / (9.0 * dof);
    const double c = 1.0 - a + z * std::sqrt(a);
    return dof * c * c * c;
}

IndexConfig cp_config(uint32_t L, uint32_t k, uint32_t last_dim, bool collapse,
                      uint64_t seed = 1) {
    IndexConfig c;
    c.num_tables = L;
    c.hashes_per_table = k;
    c.last_cp_dim = last_dim;
    c.collapse_signs = collapse;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("single-point index") {
    DenseDataset one;
    one.dim = 16;
    one.values.assign(16, 0.0f);
    one.values[0] = 1.0f;
    const LshIndex index = LshIndex::build(std::move(one), cp_config(3, 2, 0, false));
    CHECK(index.num_points() == 1);
    CHECK(index.total_entries() == 3);
    const std::vector<float> q = {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    const QueryResult r = index.query(q, 3);
    CHECK(r.found);
    CHECK(r.id == 0);
    CHECK(r.distance == doctest::Approx(0.0));
}

TEST_CASE("rebuild with the same seed gives identical tables") {
    const Instance inst = generate_random_instance(300, 32, 0.7071, 10, 3);
    auto points = std::make_shared<const DenseDataset>(inst.points);
    const auto config = cp_config(4, 2, 8, true, 42);
    const LshIndex a = LshIndex::build(points, config);
    const LshIndex b = LshIndex::build(points, config);
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        const auto ca = a.candidates(inst.queries.row(qi), 16);
        const auto cb = b.candidates(inst.queries.row(qi), 16);
        CHECK(ca == cb);
    }
}

TEST_CASE("bucket occupancy is uniform for k=1 full cp") {
    const size_t n = 20000;
    const Instance inst = generate_random_instance(n, 64, 0.7071, 1, 17);
    const LshIndex index =
        LshIndex::build(std::make_shared<const DenseDataset>(inst.points), cp_config(1, 1, 0, false));
    // count points per hash value by probing every bucket via candidates of
    // each point is heavy; instead recover the histogram from the table via
    // one query per point
    std::vector<uint64_t> counts(128, 0);
    for (size_t i = 0; i < n; ++i) {
        const auto trace = index.probe_trace(inst.points.row(i), 1);
        ++counts[trace[0].values[0]];
    }
    const double expected = static_cast<double>(n) / 128.0;
    double chi2 = 0.0;
    for (uint64_t c : counts) {
        const double diff = static_cast<double>(c) - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < chi2_critical(127, 3.29));
}

TEST_CASE("key overflow detection") {
    DenseDataset data;
    data.dim = 128;
    data.values.assign(128 * 4, 0.1f);
    CHECK_THROWS_WITH_AS(LshIndex::build(std::move(data), cp_config(1, 9, 0, false)),
                         doctest::Contains("key overflow"), std::invalid_argument);
}

TEST_CASE("query finds an indexed point via self-collision") {
    const Instance inst = generate_random_instance(2000, 32, 0.7071, 1, 23);
    const LshIndex index = LshIndex::build(std::make_shared<const DenseDataset>(inst.points),
                                           cp_config(5, 2, 16, true, 7));
    for (size_t i = 0; i < 50; ++i) {
        const auto q = inst.points.row(i * 17);
        const QueryResult r = index.query(q, 5);
        CHECK(r.found);
        CHECK(r.id == i * 17);
        CHECK(r.distance == doctest::Approx(0.0));
    }
}

TEST_CASE("candidate sets are prefix-monotone in m") {
    const Instance inst = generate_random_instance(3000, 32, 0.7071, 20, 5);
    const LshIndex index = LshIndex::build(std::make_shared<const DenseDataset>(inst.points),
                                           cp_config(4, 2, 8, true));
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        const auto q = inst.queries.row(qi);
        std::set<uint32_t> prev;
        for (uint32_t m = 4; m <= 256; m *= 4) {
            const auto ids = index.candidates(q, m);
            const std::set<uint32_t> cur(ids.begin(), ids.end());
            CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            prev = cur;
        }
    }
}

TEST_CASE("exact re-ranking returns the nearest candidate") {
    const Instance inst = generate_random_instance(3000, 32, 0.7071, 50, 6);
    const LshIndex index = LshIndex::build(std::make_shared<const DenseDataset>(inst.points),
                                           cp_config(6, 2, 8, true));
    QueryStats stats;
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        const auto q = inst.queries.row(qi);
        const QueryResult r = index.query(q, 48, &stats);
        const auto ids = index.candidates(q, 48);
        CHECK(stats.candidates_examined == ids.size());
        if (!r.found) {
            CHECK(ids.empty());
            continue;
        }
        double best = 1e9;
        uint32_t best_id = 0;
        for (uint32_t id : ids) {
            const double d = unit_distance(inst.points.row(id), q);
            if (d < best) {
                best = d;
                best_id = id;
            }
        }
        CHECK(r.id == best_id);
        CHECK(r.distance == doctest::Approx(best));
    }
}

TEST_CASE("recall grows with m and with L") {
    const Instance inst = generate_random_instance(1 << 13, 64, 0.70710678, 500, 12);
    auto points = std::make_shared<const DenseDataset>(inst.points);

    auto recall_at = [&](const LshIndex& index, uint32_t m) {
        size_t hits = 0;
        for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
            const auto r =
                index.sweep_query(inst.queries.row(qi), m, inst.ground_truth[qi].id);
            if (r.first_hit_probe != UINT32_MAX) ++hits;
        }
        return static_cast<double>(hits) / inst.queries.size();
    };

    const LshIndex multi = LshIndex::build(points, cp_config(4, 2, 16, true, 5));
    const double r1 = recall_at(multi, 4);
    const double r2 = recall_at(multi, 32);
    const double r3 = recall_at(multi, 256);
    CHECK(r1 <= r2);
    CHECK(r2 <= r3);
    CHECK(r3 > r1);  // strictly better somewhere along the sweep

    const LshIndex l2 = LshIndex::build(points, cp_config(2, 1, 0, false, 5));
    const LshIndex l8 = LshIndex::build(points, cp_config(8, 1, 0, false, 5));
    const double rec_l2 = recall_at(l2, 2);
    const double rec_l8 = recall_at(l8, 8);
    CHECK(rec_l8 >= rec_l2);
}

TEST_CASE("full probe space yields every bucket-sharing point") {
    const Instance inst = generate_random_instance(500, 16, 0.9, 25, 8);
    const LshIndex index = LshIndex::build(std::make_shared<const DenseDataset>(inst.points),
                                           cp_config(3, 1, 4, true));
    // probe space = L * 4; probing all of it must reach every point, since
    // with d' = 4 every point lies in one of the 4 buckets per table
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        const auto ids = index.candidates(inst.queries.row(qi), 12);
        CHECK(ids.size() == inst.points.size());
    }
}

TEST_CASE("cp with d'=1 matches hyperplane collision statistics") {
    // both partition by one random sign; compare per-hash collision rates
    // between a query and its planted neighbor across many seeds
    const Instance inst = generate_random_instance(2, 32, 0.70710678, 200, 44);
    auto points = std::make_shared<const DenseDataset>(inst.points);
    const int seeds = 300;
    uint64_t cp_coll = 0, hp_coll = 0;
    for (int s = 0; s < seeds; ++s) {
        IndexConfig cp = cp_config(1, 1, 1, false, 1000 + s);
        cp.rotation = RotationKind::gaussian;
        IndexConfig hp = cp;
        hp.family = HashFamily::hyperplane;
        hp.last_cp_dim = 0;
        const LshIndex icp = LshIndex::build(points, cp);
        const LshIndex ihp = LshIndex::build(points, hp);
        for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
            const auto q = inst.queries.row(qi);
            const uint32_t target = inst.ground_truth[qi].id;
            cp_coll += icp.sweep_query(q, 1, target).first_hit_probe == 0 ? 1 : 0;
            hp_coll += ihp.sweep_query(q, 1, target).first_hit_probe == 0 ? 1 : 0;
        }
    }
    const double n = static_cast<double>(seeds) * inst.queries.size();
    const double p_cp = cp_coll / n;
    const double p_hp = hp_coll / n;
    const double se = std::sqrt((p_cp * (1 - p_cp) + p_hp * (1 - p_hp)) / n);
    CHECK(std::fabs(p_cp - p_hp) <= 3.5 * se);
}

TEST_CASE("sparse index end to end") {
    // random sparse corpus; queries are noisy copies of documents
    Rng rng(64);
    const uint32_t ambient = 4000;
    std::vector<SparseVector> docs;
    for (int i = 0; i < 400; ++i) {
        std::vector<std::pair<uint32_t, float>> entries;
        for (uint32_t j = 0; j < ambient; ++j) {
            if (rng.uniform01() < 0.01) entries.emplace_back(j, static_cast<float>(rng.gaussian()));
        }
        if (entries.empty()) entries.emplace_back(i, 1.0f);
        docs.push_back(normalize_sparse(make_sparse(std::move(entries), ambient)));
    }
    auto shared_docs = std::make_shared<const std::vector<SparseVector>>(docs);

    IndexConfig config = cp_config(8, 1, 64, true, 3);
    config.feature_hash_dim = 256;
    const LshIndex index = LshIndex::build_sparse(shared_docs, config);

    size_t hits = 0;
    for (int qi = 0; qi < 50; ++qi) {
        const QueryResult r = index.query(docs[qi * 7], 64);
        if (r.found && r.id == static_cast<uint32_t>(qi * 7)) ++hits;
    }
    CHECK(hits >= 45);  // self-queries collide in some table almost surely

    // hyperplane over raw sparse input
    IndexConfig hp;
    hp.family = HashFamily::hyperplane;
    hp.num_tables = 8;
    hp.hashes_per_table = 6;
    hp.seed = 4;
    const LshIndex hp_index = LshIndex::build_sparse(shared_docs, hp);
    size_t hp_hits = 0;
    for (int qi = 0; qi < 50; ++qi) {
        const QueryResult r = hp_index.query(docs[qi * 7], 8);
        if (r.found && r.id == static_cast<uint32_t>(qi * 7)) ++hp_hits;
    }
    CHECK(hp_hits == 50);  // identical points share every bit
}

TEST_CASE("config manifest round trip") {
    const auto path = std::filesystem::temp_directory_path() / "cplsh_cfg.json";
    IndexConfig c = cp_config(7, 3, 16, true, 99);
    c.rotation = RotationKind::gaussian;
    c.feature_hash_dim = 512;
    save_index_config(path.string(), c);
    const IndexConfig loaded = load_index_config(path.string());
    CHECK(loaded.num_tables == c.num_tables);
    CHECK(loaded.hashes_per_table == c.hashes_per_table);
    CHECK(loaded.last_cp_dim == c.last_cp_dim);
    CHECK(loaded.family == c.family);
    CHECK(loaded.rotation == c.rotation);
    CHECK(loaded.collapse_signs == c.collapse_signs);
    CHECK(loaded.feature_hash_dim == c.feature_hash_dim);
    CHECK(loaded.seed == c.seed);
    std::filesystem::remove(path);
}

TEST_CASE("query rejects bad arguments") {
    const Instance inst = generate_random_instance(100, 16, 0.7, 1, 1);
    const LshIndex index = LshIndex::build(std::make_shared<const DenseDataset>(inst.points),
                                           cp_config(4, 1, 0, false));
    const std::vector<float> wrong_dim(8, 0.5f);
    CHECK_THROWS_AS(index.query(wrong_dim, 4), std::invalid_argument);
    CHECK_THROWS_AS(index.query(inst.queries.row(0), 2), std::invalid_argument);
}
