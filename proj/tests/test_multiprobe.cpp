#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cplsh/hash_families.hpp"
#include "cplsh/multiprobe.hpp"
#include "cplsh/rng.hpp"

using namespace cplsh;

namespace {

// Brute-force oracle: materialize every (table, value-vector) candidate,
// sort by (total_score, table, values lexicographically).
std::vector<ProbeCandidate> brute_force_sequence(
    const std::vector<std::vector<std::vector<ProbeEntry>>>& raw, size_t m) {
    std::vector<ProbeCandidate> all;
    for (uint32_t t = 0; t < raw.size(); ++t) {
        std::vector<size_t> idx(raw[t].size(), 0);
        // odometer over the full product space
        while (true) {
            ProbeCandidate cand;
            cand.table = t;
            cand.total_score = 0.0;
            for (size_t i = 0; i < idx.size(); ++i) {
                cand.values.push_back(raw[t][i][idx[i]].value);
                cand.total_score += raw[t][i][idx[i]].score;
            }
            all.push_back(std::move(cand));
            size_t pos = idx.size();
            while (pos > 0) {
                --pos;
                if (++idx[pos] < raw[t][pos].size()) break;
                idx[pos] = 0;
                if (pos == 0) goto table_done;
            }
        }
    table_done:;
    }
    std::sort(all.begin(), all.end(), [](const ProbeCandidate& a, const ProbeCandidate& b) {
        if (a.total_score != b.total_score) return a.total_score < b.total_score;
        if (a.table != b.table) return a.table < b.table;
        return a.values < b.values;
    });
    if (all.size() > m) all.resize(m);
    return all;
}

std::vector<std::vector<std::vector<ProbeEntry>>> raw_entries_cp(
    const std::vector<std::vector<std::vector<double>>>& rotated, uint32_t cp_dim,
    bool collapse) {
    std::vector<std::vector<std::vector<ProbeEntry>>> raw(rotated.size());
    for (size_t t = 0; t < rotated.size(); ++t) {
        for (const auto& y : rotated[t]) {
            double max_abs = 0.0;
            for (uint32_t j = 0; j < cp_dim; ++j) max_abs = std::max(max_abs, std::fabs(y[j]));
            std::vector<ProbeEntry> entries;
            for (uint32_t j = 0; j < cp_dim; ++j) {
                const double a = std::fabs(y[j]);
                if (collapse) {
                    entries.push_back({j, (max_abs - a) * (max_abs - a)});
                } else {
                    const bool neg = y[j] < 0.0;
                    entries.push_back({2 * j + (neg ? 1u : 0u), (max_abs - a) * (max_abs - a)});
                    entries.push_back({2 * j + (neg ? 0u : 1u), (max_abs + a) * (max_abs + a)});
                }
            }
            raw[t].push_back(std::move(entries));
        }
    }
    return raw;
}

}  // namespace

TEST_CASE("probe_scores hand example, collapsed") {
    const std::vector<double> y = {3.0, -5.0, 2.0};
    ProbeScoreList list = probe_scores(std::span<const double>(y), 3, true);
    REQUIRE(list.size() == 3);
    CHECK(list.at(0).value == 1);
    CHECK(list.at(0).score == doctest::Approx(0.0));
    CHECK(list.at(1).value == 0);
    CHECK(list.at(1).score == doctest::Approx(4.0));
    CHECK(list.at(2).value == 2);
    CHECK(list.at(2).score == doctest::Approx(9.0));
}

TEST_CASE("probe_scores hand example, full variant") {
    const std::vector<double> y = {3.0, -5.0, 2.0};
    ProbeScoreList list = probe_scores(std::span<const double>(y), 3, false);
    REQUIRE(list.size() == 6);
    // sign-matched first: (1,-)=3 at 0, (0,+)=0 at 4, (2,+)=4 at 9,
    // then opposite-sign: (2,-)=5 at 49, (0,-)=1 at 64, (1,+)=2 at 100
    CHECK(list.at(0).value == 3);
    CHECK(list.at(0).score == doctest::Approx(0.0));
    CHECK(list.at(1).value == 0);
    CHECK(list.at(1).score == doctest::Approx(4.0));
    CHECK(list.at(2).value == 4);
    CHECK(list.at(2).score == doctest::Approx(9.0));
    CHECK(list.at(3).value == 5);
    CHECK(list.at(3).score == doctest::Approx(49.0));
    CHECK(list.at(4).value == 1);
    CHECK(list.at(4).score == doctest::Approx(64.0));
    CHECK(list.at(5).value == 2);
    CHECK(list.at(5).score == doctest::Approx(100.0));
}

TEST_CASE("probe_scores base probe comes first with score zero") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> y(16);
        for (auto& v : y) v = rng.gaussian();
        for (const bool collapse : {true, false}) {
            ProbeScoreList list = probe_scores(std::span<const double>(y), 16, collapse);
            CHECK(list.at(0).score == 0.0);
            CHECK(list.at(0).value ==
                  cp_hash_rotated(std::span<const double>(y), 16, collapse));
        }
    }
    CHECK_THROWS_AS(probe_scores(std::span<const double>(std::vector<double>{1.0}), 0, true),
                    std::invalid_argument);
}

TEST_CASE("probe_sequence on a single table follows the list order") {
    const std::vector<double> y = {3.0, -5.0, 2.0};
    std::vector<std::vector<ProbeScoreList>> lists(1);
    lists[0].push_back(probe_scores(std::span<const double>(y), 3, true));
    const auto seq = probe_sequence(lists, 3);
    REQUIRE(seq.size() == 3);
    CHECK(seq[0].values[0] == 1);
    CHECK(seq[1].values[0] == 0);
    CHECK(seq[2].values[0] == 2);
}

TEST_CASE("probe_sequence emits base buckets first") {
    Rng rng(21);
    const uint32_t L = 4, k = 2, dim = 8;
    std::vector<std::vector<ProbeScoreList>> lists(L);
    for (uint32_t t = 0; t < L; ++t) {
        for (uint32_t i = 0; i < k; ++i) {
            std::vector<double> y(dim);
            for (auto& v : y) v = rng.gaussian();
            lists[t].push_back(probe_scores(std::span<const double>(y), dim, true));
        }
    }
    const auto seq = probe_sequence(lists, L);
    REQUIRE(seq.size() == L);
    for (uint32_t t = 0; t < L; ++t) {
        CHECK(seq[t].table == t);
        CHECK(seq[t].total_score == 0.0);
    }
    CHECK_THROWS_AS(probe_sequence(lists, 2), std::invalid_argument);
}

TEST_CASE("probe_sequence matches brute force exactly, including ties") {
    Rng rng(99);
    for (uint32_t dim = 1; dim <= 8; ++dim) {
        for (uint32_t k = 1; k <= 3; ++k) {
            for (uint32_t L = 1; L <= 4; L += 3) {
                for (const bool collapse : {true, false}) {
                    for (int rep = 0; rep < 8; ++rep) {
                        std::vector<std::vector<std::vector<double>>> rotated(L);
                        std::vector<std::vector<ProbeScoreList>> lists(L);
                        for (uint32_t t = 0; t < L; ++t) {
                            for (uint32_t i = 0; i < k; ++i) {
                                std::vector<double> y(dim);
                                for (auto& v : y) v = rng.gaussian();
                                // inject exact ties now and then
                                if (dim >= 2 && rep % 3 == 0) y[1] = -y[0];
                                rotated[t].push_back(y);
                                lists[t].push_back(
                                    probe_scores(std::span<const double>(y), dim, collapse));
                            }
                        }
                        const auto raw = raw_entries_cp(rotated, dim, collapse);
                        const size_t space =
                            L * static_cast<size_t>(
                                    std::pow(collapse ? dim : 2 * dim, static_cast<double>(k)));
                        const size_t m = std::max<size_t>(L, space);
                        const auto expected = brute_force_sequence(raw, m);
                        const auto got = probe_sequence(lists, m);
                        REQUIRE(got.size() == expected.size());
                        for (size_t i = 0; i < got.size(); ++i) {
                            CHECK(got[i].table == expected[i].table);
                            CHECK(got[i].values == expected[i].values);
                            CHECK(got[i].total_score ==
                                  doctest::Approx(expected[i].total_score));
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("probe_sequence scores are non-decreasing and candidates unique") {
    Rng rng(4);
    const uint32_t L = 3, k = 2, dim = 6;
    std::vector<std::vector<ProbeScoreList>> lists(L);
    for (uint32_t t = 0; t < L; ++t) {
        for (uint32_t i = 0; i < k; ++i) {
            std::vector<double> y(dim);
            for (auto& v : y) v = rng.gaussian();
            lists[t].push_back(probe_scores(std::span<const double>(y), dim, true));
        }
    }
    const size_t space = L * dim * dim;
    const auto seq = probe_sequence(lists, space + 50);  // truncates to the space
    CHECK(seq.size() == space);
    std::vector<std::pair<uint32_t, std::vector<uint32_t>>> seen;
    for (size_t i = 0; i < seq.size(); ++i) {
        if (i > 0) CHECK(seq[i].total_score >= seq[i - 1].total_score);
        seen.emplace_back(seq[i].table, seq[i].values);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("rank frequency of a planted neighbor is non-increasing") {
    // for fixed rotated query y and neighbors at distance R, the empirical
    // probability that the neighbor hashes to the rank-j probe must fall
    // with j (the exp(-score) model orders probes correctly)
    const uint32_t dim = 8;
    const double tau = 0.70710678118654752;
    const double alpha = 1.0 - tau * tau / 2.0;
    const double beta = std::sqrt(tau * tau - std::pow(tau, 4) / 4.0);

    Rng y_rng(2024);
    std::vector<double> y(dim);
    for (auto& v : y) v = y_rng.gaussian();
    ProbeScoreList list = probe_scores(std::span<const double>(y), dim, true);
    std::vector<uint32_t> rank_of_value(dim);
    for (uint32_t r = 0; r < dim; ++r) rank_of_value[list.at(r).value] = r;

    const uint64_t trials = 200000;
    std::vector<uint64_t> hits(dim, 0);
    for (uint64_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(5150, {t}));
        std::vector<double> yq(dim);
        for (uint32_t i = 0; i < dim; ++i) yq[i] = alpha * y[i] + beta * rng.gaussian();
        ++hits[rank_of_value[cp_hash_rotated(std::span<const double>(yq), dim, true)]];
    }
    for (uint32_t r = 0; r + 1 < dim; ++r) {
        const double p0 = static_cast<double>(hits[r]) / trials;
        const double p1 = static_cast<double>(hits[r + 1]) / trials;
        const double se =
            std::sqrt((p0 * (1 - p0) + p1 * (1 - p1)) / static_cast<double>(trials));
        CHECK(p1 <= p0 + 3.0 * se);
    }
}
