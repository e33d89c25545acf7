#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cplsh/bench.hpp"
#include "cplsh/data_io.hpp"
#include "cplsh/index.hpp"

using namespace cplsh;

namespace {

int cmd_generate(size_t n, uint32_t d, double r, size_t queries, uint64_t seed,
                 const std::string& out_stem) {
    const Instance instance = generate_random_instance(n, d, r, queries, seed);
    const InstanceManifest manifest = write_instance(out_stem, instance);
    std::cout << "wrote " << manifest.data_path << ", " << manifest.query_path << ", "
              << manifest.ground_truth_path << ", " << out_stem << ".manifest.json\n";
    return 0;
}

GridSpec make_grid(const std::string& family, const std::string& rotation, bool collapse,
                   std::vector<uint32_t> ks, std::vector<uint32_t> last_dims,
                   std::vector<uint32_t> probes, uint32_t tables, uint32_t feature_dim,
                   uint64_t seed, uint32_t data_dim) {
    GridSpec spec = GridSpec::defaults(
        family == "hp" ? HashFamily::hyperplane : HashFamily::cross_polytope, data_dim,
        tables == 0 ? memory_rule_tables(data_dim) : tables);
    spec.rotation = rotation == "gaussian" ? RotationKind::gaussian : RotationKind::pseudo;
    spec.collapse_signs = collapse;
    spec.num_tables = tables == 0 ? memory_rule_tables(data_dim) : tables;
    spec.feature_hash_dim = feature_dim;
    spec.seed = seed;
    if (!ks.empty()) spec.ks = std::move(ks);
    if (!last_dims.empty()) spec.last_dims = std::move(last_dims);
    if (!probes.empty()) spec.probe_counts = std::move(probes);
    return spec;
}

int cmd_bench(const Instance& instance, const GridSpec& partial_spec, double target,
              const std::string& timing, const std::string& out_path) {
    TimingMode mode = TimingMode::best_only;
    if (timing == "none") mode = TimingMode::none;
    if (timing == "all") mode = TimingMode::all;
    const BenchReport report = run_grid(instance, partial_spec, target, mode);
    write_bench_csv(out_path, report);
    if (!report.memory_rule_ok) {
        std::cerr << "warning: L exceeds the memory rule (entries > dataset bytes)\n";
    }
    if (report.best < 0) {
        std::cerr << "no configuration reached recall " << target << '\n';
        return 2;
    }
    const ConfigRow& best = report.rows[report.best];
    std::cout << "best: k=" << best.k << " last_dim=" << best.last_dim << " m=" << best.m
              << " recall=" << best.recall << " mean_candidates=" << best.mean_candidates;
    if (best.mean_query_ms >= 0) std::cout << " mean_query_ms=" << best.mean_query_ms;
    std::cout << '\n';
    return 0;
}

int cmd_curves(double r1, double t_max, int points_per_decade, uint32_t dprime_max,
               const std::string& out_path) {
    std::vector<double> ts = {2.0};
    const double step = std::pow(10.0, 1.0 / points_per_decade);
    for (double t = 10.0; t <= t_max * (1 + 1e-9); t *= step) ts.push_back(t);
    std::vector<int> dps;
    for (uint32_t dp = 1; dp <= dprime_max; dp *= 2) dps.push_back(static_cast<int>(dp));
    const auto lb = lower_bound_curve(r1, ts);
    const auto cp = cp_curve(r1, dps);
    write_curves_csv(out_path, lb, cp);
    std::cout << "wrote " << out_path << " (" << lb.size() << " lower-bound rows, " << cp.size()
              << " cross-polytope rows)\n";
    return 0;
}

int cmd_probe_trace(const std::string& manifest_path, size_t query_id, uint32_t m,
                    const IndexConfig& config) {
    const Instance instance = load_instance(manifest_path);
    if (query_id >= instance.queries.size()) {
        std::cerr << "query id " << query_id << " out of range (have "
                  << instance.queries.size() << " queries)\n";
        return 1;
    }
    auto points = std::make_shared<const DenseDataset>(instance.points);
    const LshIndex index = LshIndex::build(points, config);
    const auto trace = index.probe_trace(instance.queries.row(query_id), m);
    std::cout << "probe\ttable\tscore\tvalues\n";
    for (size_t i = 0; i < trace.size(); ++i) {
        std::cout << i << '\t' << trace[i].table << '\t' << trace[i].total_score << '\t';
        for (size_t j = 0; j < trace[i].values.size(); ++j) {
            std::cout << (j ? "," : "") << trace[i].values[j];
        }
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Cross-polytope LSH benchmark driver. Thread count follows "
        "OMP_NUM_THREADS."};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a random sphere instance");
    size_t gen_n = 65536, gen_queries = 1000;
    uint32_t gen_d = 128;
    double gen_r = 0.70710678118654752;
    uint64_t gen_seed = 1;
    std::string gen_out = "instance";
    gen->add_option("--n", gen_n, "number of data points");
    gen->add_option("--d", gen_d, "dimension");
    gen->add_option("--r", gen_r, "planted neighbor distance");
    gen->add_option("--queries", gen_queries, "number of queries");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--out", gen_out, "output path stem");

    // bench
    auto* bench = app.add_subcommand("bench", "grid-search an LSH family on an instance");
    std::string bench_manifest, bench_family = "cp", bench_rotation = "pseudo";
    std::string bench_timing = "best", bench_out = "bench.csv";
    bool bench_collapse = true;
    std::vector<uint32_t> bench_ks, bench_last, bench_probes;
    uint32_t bench_tables = 10, bench_feature_dim = 0;
    uint64_t bench_seed = 1;
    double bench_target = 0.9;
    bench->add_option("--manifest", bench_manifest, "instance manifest path")->required();
    bench->add_option("--family", bench_family, "cp or hp")
        ->check(CLI::IsMember({"cp", "hp"}));
    bench->add_option("--rotation", bench_rotation, "pseudo or gaussian")
        ->check(CLI::IsMember({"pseudo", "gaussian"}));
    bench->add_flag("--collapse,!--no-collapse", bench_collapse,
                    "collapse +e_j / -e_j to one hash value (cp only)");
    bench->add_option("--k", bench_ks, "hashes per table (list)");
    bench->add_option("--last-dims", bench_last, "last-hash d' candidates (list; 0 = full)");
    bench->add_option("--probes", bench_probes, "probe counts m (list)");
    bench->add_option("--tables", bench_tables, "number of tables L (0 = memory rule)");
    bench->add_option("--feature-dim", bench_feature_dim, "feature hashing dimension (sparse)");
    bench->add_option("--seed", bench_seed, "hash seed");
    bench->add_option("--recall-target", bench_target, "recall target");
    bench->add_option("--timing", bench_timing, "none, best or all")
        ->check(CLI::IsMember({"none", "best", "all"}));
    bench->add_option("--out", bench_out, "output CSV path");

    // curves
    auto* curves = app.add_subcommand("curves", "emit the rho vs number-of-parts curves");
    double curves_r1 = 0.70710678118654752, curves_tmax = 1e16;
    int curves_ppd = 1;
    uint32_t curves_dmax = 32768;
    std::string curves_out = "curves.csv";
    curves->add_option("--r1", curves_r1, "near distance r1");
    curves->add_option("--t-max", curves_tmax, "largest number of parts");
    curves->add_option("--points-per-decade", curves_ppd, "T grid density");
    curves->add_option("--dprime-max", curves_dmax, "largest cross-polytope dimension");
    curves->add_option("--out", curves_out, "output CSV path");

    // probe-trace
    auto* trace = app.add_subcommand("probe-trace", "dump a query's probing sequence");
    std::string trace_manifest, trace_family = "cp", trace_rotation = "pseudo";
    size_t trace_query = 0;
    uint32_t trace_m = 10, trace_k = 1, trace_last = 0, trace_tables = 10;
    bool trace_collapse = true;
    uint64_t trace_seed = 1;
    trace->add_option("--manifest", trace_manifest, "instance manifest path")->required();
    trace->add_option("--query-id", trace_query, "query index");
    trace->add_option("--m", trace_m, "number of probes to dump");
    trace->add_option("--family", trace_family, "cp or hp")
        ->check(CLI::IsMember({"cp", "hp"}));
    trace->add_option("--rotation", trace_rotation, "pseudo or gaussian")
        ->check(CLI::IsMember({"pseudo", "gaussian"}));
    trace->add_option("--k", trace_k, "hashes per table");
    trace->add_option("--last-dim", trace_last, "last-hash d' (0 = full)");
    trace->add_option("--tables", trace_tables, "number of tables L");
    trace->add_flag("--collapse,!--no-collapse", trace_collapse, "collapsed variant");
    trace->add_option("--seed", trace_seed, "hash seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_generate(gen_n, gen_d, gen_r, gen_queries, gen_seed, gen_out);
        }
        if (bench->parsed()) {
            const Instance instance = load_instance(bench_manifest);
            const GridSpec spec =
                make_grid(bench_family, bench_rotation, bench_collapse, bench_ks, bench_last,
                          bench_probes, bench_tables, bench_feature_dim, bench_seed,
                          instance.points.dim);
            return cmd_bench(instance, spec, bench_target, bench_timing, bench_out);
        }
        if (curves->parsed()) {
            return cmd_curves(curves_r1, curves_tmax, curves_ppd, curves_dmax, curves_out);
        }
        if (trace->parsed()) {
            IndexConfig config;
            config.num_tables = trace_tables;
            config.hashes_per_table = trace_k;
            config.last_cp_dim = trace_last;
            config.family =
                trace_family == "hp" ? HashFamily::hyperplane : HashFamily::cross_polytope;
            config.rotation =
                trace_rotation == "gaussian" ? RotationKind::gaussian : RotationKind::pseudo;
            config.collapse_signs = trace_collapse;
            config.seed = trace_seed;
            return cmd_probe_trace(trace_manifest, trace_query, trace_m, config);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
