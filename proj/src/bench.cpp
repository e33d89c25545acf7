#include "cplsh/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "cplsh/fht.hpp"

namespace cplsh {

namespace {

constexpr uint64_t kEntryBytes = 12;  // 4-byte id + 8-byte key, amortized

const char* family_name(HashFamily f) {
    return f == HashFamily::cross_polytope ? "cp" : "hp";
}

const char* rotation_name(RotationKind r) {
    return r == RotationKind::pseudo ? "pseudo" : "gaussian";
}

}  // namespace

uint32_t memory_rule_tables(uint32_t dim) {
    const uint64_t bytes_per_point = static_cast<uint64_t>(dim) * sizeof(float);
    return static_cast<uint32_t>(std::max<uint64_t>(1, bytes_per_point / kEntryBytes));
}

GridSpec GridSpec::defaults(HashFamily family, uint32_t d, uint32_t L) {
    GridSpec spec;
    spec.family = family;
    spec.num_tables = L;
    if (family == HashFamily::cross_polytope) {
        spec.ks = {1, 2, 3, 4};
        spec.collapse_signs = true;
        const uint32_t padded = static_cast<uint32_t>(next_power_of_two(d));
        for (uint32_t dd = 1; dd <= padded; dd *= 2) spec.last_dims.push_back(dd);
    } else {
        spec.ks = {4, 6, 8, 10, 12, 14, 16};
        spec.last_dims = {0};
    }
    for (uint32_t m = L; m <= 4096 * L; m *= 2) spec.probe_counts.push_back(m);
    return spec;
}

namespace {

struct SweepSummary {
    std::vector<LshIndex::SweepResult> per_query;
    uint32_t max_probes;
};

SweepSummary sweep_all(const LshIndex& index, const Instance& instance, uint32_t max_probes) {
    SweepSummary summary;
    summary.max_probes = max_probes;
    const size_t nq = instance.queries.size();
    summary.per_query.resize(nq);
    const int64_t n = static_cast<int64_t>(nq);
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t qi = 0; qi < n; ++qi) {
        summary.per_query[qi] = index.sweep_query(instance.queries.row(qi), max_probes,
                                                  instance.ground_truth[qi].id);
    }
    return summary;
}

void readout(const SweepSummary& summary, uint32_t m, double* recall, double* mean_candidates) {
    size_t hits = 0;
    double cand_sum = 0.0;
    for (const auto& s : summary.per_query) {
        if (s.first_hit_probe != UINT32_MAX && s.first_hit_probe < m) ++hits;
        if (!s.cumulative_candidates.empty()) {
            const size_t idx = std::min<size_t>(m, s.cumulative_candidates.size()) - 1;
            cand_sum += static_cast<double>(s.cumulative_candidates[idx]);
        }
    }
    *recall = static_cast<double>(hits) / static_cast<double>(summary.per_query.size());
    *mean_candidates = cand_sum / static_cast<double>(summary.per_query.size());
}

void measure_timings(const LshIndex& index, const Instance& instance, ConfigRow& row) {
    const size_t nq = instance.queries.size();
    QueryStats stats;
    // warm-up
    for (size_t qi = 0; qi < nq; ++qi) {
        index.query(instance.queries.row(qi), row.m, &stats);
    }
    std::vector<double> pass_total, pass_hash, pass_dist;
    for (int pass = 0; pass < 3; ++pass) {
        double total = 0.0, hash = 0.0, dist = 0.0;
        for (size_t qi = 0; qi < nq; ++qi) {
            index.query(instance.queries.row(qi), row.m, &stats);
            total += stats.total_ms;
            hash += stats.hash_ms;
            dist += stats.distance_ms;
        }
        pass_total.push_back(total / nq);
        pass_hash.push_back(hash / nq);
        pass_dist.push_back(dist / nq);
    }
    auto median3 = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        return v[1];
    };
    row.mean_query_ms = median3(pass_total);
    row.mean_hash_ms = median3(pass_hash);
    row.mean_distance_ms = median3(pass_dist);
}

bool better_row(const ConfigRow& a, const ConfigRow& b) {
    // both assumed to meet the target; prefer fewer candidates, then time
    if (a.mean_candidates != b.mean_candidates) return a.mean_candidates < b.mean_candidates;
    if (a.mean_query_ms >= 0 && b.mean_query_ms >= 0) return a.mean_query_ms < b.mean_query_ms;
    return false;
}

}  // namespace

BenchReport run_grid(const Instance& instance, const GridSpec& spec, double recall_target,
                     TimingMode timing) {
    if (spec.ks.empty() || spec.last_dims.empty() || spec.probe_counts.empty()) {
        throw std::invalid_argument("run_grid: empty grid");
    }
    BenchReport report;
    report.recall_target = recall_target;
    report.dataset_bytes = instance.points.values.size() * sizeof(float);
    report.index_entry_bytes = kEntryBytes;

    const uint32_t L =
        spec.num_tables == 0 ? memory_rule_tables(instance.points.dim) : spec.num_tables;
    report.memory_rule_ok = L * kEntryBytes <= static_cast<uint64_t>(instance.points.dim) * 4;

    auto points = std::make_shared<const DenseDataset>(instance.points);
    const uint32_t max_m = *std::max_element(spec.probe_counts.begin(), spec.probe_counts.end());

    for (uint32_t k : spec.ks) {
        for (uint32_t last_dim : spec.last_dims) {
            IndexConfig config;
            config.num_tables = L;
            config.hashes_per_table = k;
            config.last_cp_dim = spec.family == HashFamily::cross_polytope ? last_dim : 0;
            config.family = spec.family;
            config.rotation = spec.rotation;
            config.collapse_signs = spec.collapse_signs;
            config.feature_hash_dim = spec.feature_hash_dim;
            config.seed = spec.seed;

            LshIndex index = LshIndex::build(points, config);
            const SweepSummary summary = sweep_all(index, instance, max_m);

            const size_t first_row = report.rows.size();
            for (uint32_t m : spec.probe_counts) {
                if (m < L) continue;
                ConfigRow row;
                row.family = spec.family;
                row.rotation = spec.rotation;
                row.collapse_signs = spec.collapse_signs;
                row.num_tables = L;
                row.k = k;
                row.last_dim = config.last_cp_dim;
                row.m = m;
                readout(summary, m, &row.recall, &row.mean_candidates);
                row.met_target = row.recall >= recall_target;
                report.rows.push_back(row);
            }
            if (timing == TimingMode::all) {
                for (size_t r = first_row; r < report.rows.size(); ++r) {
                    measure_timings(index, instance, report.rows[r]);
                }
            }
        }
    }

    for (size_t r = 0; r < report.rows.size(); ++r) {
        if (!report.rows[r].met_target) continue;
        if (report.best < 0 || better_row(report.rows[r], report.rows[report.best])) {
            report.best = static_cast<int>(r);
        }
    }

    if (timing == TimingMode::best_only && report.best >= 0) {
        // rebuild the winning index once for a clean timed pass
        const ConfigRow& row = report.rows[report.best];
        IndexConfig config;
        config.num_tables = row.num_tables;
        config.hashes_per_table = row.k;
        config.last_cp_dim = row.last_dim;
        config.family = row.family;
        config.rotation = row.rotation;
        config.collapse_signs = row.collapse_signs;
        config.feature_hash_dim = spec.feature_hash_dim;
        config.seed = spec.seed;
        LshIndex index = LshIndex::build(points, config);
        measure_timings(index, instance, report.rows[report.best]);
    }
    return report;
}

void write_bench_csv(const std::string& path, const BenchReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_bench_csv: cannot open " + path);
    out << "family,rotation,collapse,L,k,last_dim,m,recall,mean_candidates,"
           "mean_query_ms,mean_hash_ms,mean_distance_ms,best\n";
    out.precision(10);
    for (size_t r = 0; r < report.rows.size(); ++r) {
        const ConfigRow& row = report.rows[r];
        out << family_name(row.family) << ',' << rotation_name(row.rotation) << ','
            << (row.collapse_signs ? 1 : 0) << ',' << row.num_tables << ',' << row.k << ','
            << row.last_dim << ',' << row.m << ',' << row.recall << ',' << row.mean_candidates
            << ',' << row.mean_query_ms << ',' << row.mean_hash_ms << ','
            << row.mean_distance_ms << ',' << (static_cast<int>(r) == report.best ? 1 : 0)
            << '\n';
    }
    if (!out) throw std::runtime_error("write_bench_csv: write failed for " + path);
}

BenchReport parse_bench_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_bench_csv: cannot open " + path);
    BenchReport report;
    std::string line;
    std::getline(in, line);  // header
    size_t idx = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        auto next = [&]() {
            if (!std::getline(ls, field, ',')) {
                throw std::runtime_error("parse_bench_csv: short row in " + path);
            }
            return field;
        };
        ConfigRow row;
        row.family = next() == "cp" ? HashFamily::cross_polytope : HashFamily::hyperplane;
        row.rotation = next() == "pseudo" ? RotationKind::pseudo : RotationKind::gaussian;
        row.collapse_signs = std::stoi(next()) != 0;
        row.num_tables = static_cast<uint32_t>(std::stoul(next()));
        row.k = static_cast<uint32_t>(std::stoul(next()));
        row.last_dim = static_cast<uint32_t>(std::stoul(next()));
        row.m = static_cast<uint32_t>(std::stoul(next()));
        row.recall = std::stod(next());
        row.mean_candidates = std::stod(next());
        row.mean_query_ms = std::stod(next());
        row.mean_hash_ms = std::stod(next());
        row.mean_distance_ms = std::stod(next());
        if (std::stoi(next()) == 1) report.best = static_cast<int>(idx);
        report.rows.push_back(row);
        ++idx;
    }
    return report;
}

std::vector<TradeoffPoint> lower_bound_curve(double r1, std::span<const double> num_parts) {
    std::vector<TradeoffPoint> curve;
    curve.reserve(num_parts.size());
    for (double T : num_parts) {
        try {
            curve.push_back(TradeoffPoint{T, lower_bound_rho(T, r1)});
        } catch (const std::exception& e) {
            std::cerr << "lower_bound_curve: T=" << T << " failed: " << e.what() << '\n';
            curve.push_back(TradeoffPoint{T, std::nan("")});
        }
    }
    return curve;
}

std::vector<TradeoffPoint> cp_curve(double r1, std::span<const int> dprimes) {
    std::vector<TradeoffPoint> curve;
    curve.reserve(dprimes.size());
    for (int dp : dprimes) {
        try {
            curve.push_back(cp_tradeoff_rho(dp, r1));
        } catch (const std::exception& e) {
            std::cerr << "cp_curve: d'=" << dp << " failed: " << e.what() << '\n';
            curve.push_back(TradeoffPoint{2.0 * dp, std::nan("")});
        }
    }
    return curve;
}

void write_curves_csv(const std::string& path, const std::vector<TradeoffPoint>& lower_bound,
                      const std::vector<TradeoffPoint>& cross_polytope) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_curves_csv: cannot open " + path);
    out.precision(10);
    out << "# lower_bound\n";
    out << "num_parts,rho\n";
    for (const auto& p : lower_bound) out << p.num_parts << ',' << p.rho << '\n';
    out << "# cross_polytope\n";
    out << "num_parts,rho\n";
    for (const auto& p : cross_polytope) out << p.num_parts << ',' << p.rho << '\n';
    if (!out) throw std::runtime_error("write_curves_csv: write failed for " + path);
}

}  // namespace cplsh
