#include "cplsh/data_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cplsh/rng.hpp"

namespace cplsh {

namespace {

void gaussian_fill(Rng& rng, std::span<float> out) {
    for (float& x : out) x = static_cast<float>(rng.gaussian());
}

void normalize_in_place(std::span<float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * x;
    const double n = std::sqrt(acc);
    if (n == 0.0) throw std::runtime_error("generate: zero gaussian vector");
    for (float& x : v) x = static_cast<float>(x / n);
}

}  // namespace

Instance generate_random_instance(size_t n, uint32_t d, double R, size_t num_queries,
                                  uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_random_instance: n must be positive");
    if (!(R > 0.0 && R < 2.0)) {
        throw std::invalid_argument("generate_random_instance: R must lie in (0, 2)");
    }
    Instance inst;
    inst.seed = seed;
    inst.planted_distance = R;
    inst.points.dim = d;
    inst.points.values.resize(n * d);
    for (size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {0xD1u, i}));
        auto row = inst.points.row(i);
        gaussian_fill(rng, row);
        normalize_in_place(row);
    }

    inst.queries.dim = d;
    inst.queries.values.resize(num_queries * d);
    const double scale_p = 1.0 - R * R / 2.0;
    const double scale_t = std::sqrt(R * R - R * R * R * R / 4.0);
    for (size_t qi = 0; qi < num_queries; ++qi) {
        Rng rng(derive_seed(seed, {0xD2u, qi}));
        const size_t pick = rng.below(n);
        const auto base = inst.points.row(pick);
        auto q = inst.queries.row(qi);
        // random tangent direction: Gram-Schmidt a Gaussian against the base point
        gaussian_fill(rng, q);
        double dot = 0.0;
        for (uint32_t j = 0; j < d; ++j) dot += static_cast<double>(q[j]) * base[j];
        for (uint32_t j = 0; j < d; ++j) q[j] -= static_cast<float>(dot * base[j]);
        normalize_in_place(q);
        for (uint32_t j = 0; j < d; ++j) {
            q[j] = static_cast<float>(scale_p * base[j] + scale_t * q[j]);
        }
    }
    inst.ground_truth = brute_force_ground_truth(inst.points, inst.queries);
    return inst;
}

namespace {

GroundTruthEntry scan_one(const DenseDataset& points, std::span<const float> q) {
    uint32_t best_id = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < points.size(); ++i) {
        const double dist = unit_distance(points.row(i), q);
        if (dist < best) {
            best = dist;
            best_id = static_cast<uint32_t>(i);
        }
    }
    return GroundTruthEntry{best_id, static_cast<float>(best)};
}

}  // namespace

std::vector<GroundTruthEntry> brute_force_ground_truth(const DenseDataset& points,
                                                       const DenseDataset& queries) {
    if (points.dim != queries.dim) {
        throw std::invalid_argument("brute_force_ground_truth: dimension mismatch");
    }
    std::vector<GroundTruthEntry> gt(queries.size());
    const int64_t nq = static_cast<int64_t>(queries.size());
#pragma omp parallel for schedule(static)
    for (int64_t qi = 0; qi < nq; ++qi) {
        gt[qi] = scan_one(points, queries.row(qi));
    }
    return gt;
}

std::vector<GroundTruthEntry> brute_force_ground_truth_serial(const DenseDataset& points,
                                                              const DenseDataset& queries) {
    if (points.dim != queries.dim) {
        throw std::invalid_argument("brute_force_ground_truth: dimension mismatch");
    }
    std::vector<GroundTruthEntry> gt(queries.size());
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        gt[qi] = scan_one(points, queries.row(qi));
    }
    return gt;
}

std::vector<GroundTruthEntry> brute_force_ground_truth_sparse(
    const std::vector<SparseVector>& points, const std::vector<SparseVector>& queries) {
    std::vector<GroundTruthEntry> gt(queries.size());
    const int64_t nq = static_cast<int64_t>(queries.size());
#pragma omp parallel for schedule(static)
    for (int64_t qi = 0; qi < nq; ++qi) {
        uint32_t best_id = 0;
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < points.size(); ++i) {
            const double dist = unit_distance_sparse(points[i], queries[qi]);
            if (dist < best) {
                best = dist;
                best_id = static_cast<uint32_t>(i);
            }
        }
        gt[qi] = GroundTruthEntry{best_id, static_cast<float>(best)};
    }
    return gt;
}

void write_dense(const std::string& path, const DenseDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_dense: cannot open " + path);
    const int32_t d = static_cast<int32_t>(data.dim);
    for (size_t i = 0; i < data.size(); ++i) {
        out.write(reinterpret_cast<const char*>(&d), sizeof(d));
        out.write(reinterpret_cast<const char*>(data.row(i).data()),
                  static_cast<std::streamsize>(sizeof(float) * data.dim));
    }
    if (!out) throw std::runtime_error("write_dense: write failed for " + path);
}

DenseDataset load_dense(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("load_dense: cannot open " + path);
    const std::streamoff file_size = in.tellg();
    in.seekg(0);
    DenseDataset data;
    std::streamoff offset = 0;
    while (offset < file_size) {
        int32_t d = 0;
        if (!in.read(reinterpret_cast<char*>(&d), sizeof(d))) {
            throw std::runtime_error("load_dense: truncated header at byte offset " +
                                     std::to_string(offset) + " in " + path);
        }
        if (d <= 0) {
            throw std::runtime_error("load_dense: bad dimension at byte offset " +
                                     std::to_string(offset) + " in " + path);
        }
        if (data.dim == 0) {
            data.dim = static_cast<uint32_t>(d);
        } else if (data.dim != static_cast<uint32_t>(d)) {
            throw std::runtime_error("load_dense: inconsistent dimension at byte offset " +
                                     std::to_string(offset) + " in " + path);
        }
        const size_t old = data.values.size();
        data.values.resize(old + data.dim);
        if (!in.read(reinterpret_cast<char*>(data.values.data() + old),
                     static_cast<std::streamsize>(sizeof(float) * data.dim))) {
            throw std::runtime_error("load_dense: truncated record at byte offset " +
                                     std::to_string(offset) + " in " + path);
        }
        offset += static_cast<std::streamoff>(sizeof(int32_t) + sizeof(float) * data.dim);
    }
    return data;
}

void write_ground_truth(const std::string& path, const std::vector<GroundTruthEntry>& gt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ground_truth: cannot open " + path);
    for (const auto& e : gt) {
        out.write(reinterpret_cast<const char*>(&e.id), sizeof(e.id));
        out.write(reinterpret_cast<const char*>(&e.distance), sizeof(e.distance));
    }
    if (!out) throw std::runtime_error("write_ground_truth: write failed for " + path);
}

std::vector<GroundTruthEntry> load_ground_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_ground_truth: cannot open " + path);
    std::vector<GroundTruthEntry> gt;
    GroundTruthEntry e;
    while (in.read(reinterpret_cast<char*>(&e.id), sizeof(e.id))) {
        if (!in.read(reinterpret_cast<char*>(&e.distance), sizeof(e.distance))) {
            throw std::runtime_error("load_ground_truth: truncated record in " + path);
        }
        gt.push_back(e);
    }
    return gt;
}

std::vector<SparseVector> load_sparse_tfidf(const std::string& path, bool raw_counts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_sparse_tfidf: cannot open " + path);
    std::vector<std::vector<std::pair<uint32_t, float>>> docs;
    uint32_t max_index = 0;
    std::map<uint32_t, uint32_t> doc_freq;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::vector<std::pair<uint32_t, float>> entries;
        std::istringstream ls(line);
        std::string token;
        int64_t prev = -1;
        while (ls >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos) {
                throw std::runtime_error("load_sparse_tfidf: malformed token '" + token +
                                         "' on line " + std::to_string(line_no));
            }
            const uint32_t idx = static_cast<uint32_t>(std::stoul(token.substr(0, colon)));
            const float val = std::stof(token.substr(colon + 1));
            if (static_cast<int64_t>(idx) <= prev) {
                throw std::runtime_error(
                    "load_sparse_tfidf: indices not strictly increasing on line " +
                    std::to_string(line_no));
            }
            prev = idx;
            max_index = std::max(max_index, idx);
            if (val != 0.0f) entries.emplace_back(idx, val);
        }
        for (const auto& [idx, val] : entries) ++doc_freq[idx];
        docs.push_back(std::move(entries));
    }
    const uint32_t ambient = max_index + 1;
    const double n_docs = static_cast<double>(docs.size());
    std::vector<SparseVector> out;
    out.reserve(docs.size());
    for (auto& entries : docs) {
        if (raw_counts) {
            for (auto& [idx, val] : entries) {
                val = static_cast<float>(val * std::log(n_docs / doc_freq[idx]));
            }
            std::erase_if(entries, [](const auto& e) { return e.second == 0.0f; });
        }
        SparseVector v = make_sparse(std::move(entries), ambient);
        if (!v.entries.empty()) v = normalize_sparse(v);
        out.push_back(std::move(v));
    }
    return out;
}

void write_sparse(const std::string& path, const std::vector<SparseVector>& docs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sparse: cannot open " + path);
    for (const auto& doc : docs) {
        bool first = true;
        for (const auto& [idx, val] : doc.entries) {
            if (!first) out << ' ';
            out << idx << ':' << val;
            first = false;
        }
        out << '\n';
    }
}

std::vector<size_t> select_queries_by_ip_range(const std::vector<SparseVector>& points,
                                               const std::vector<SparseVector>& queries,
                                               double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("select_queries_by_ip_range: need lo < hi");
    const auto gt = brute_force_ground_truth_sparse(points, queries);
    std::vector<size_t> kept;
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        const double ip = dot_sparse(points[gt[qi].id], queries[qi]);
        if (ip >= lo && ip <= hi) kept.push_back(qi);
    }
    return kept;
}

void write_instance_manifest(const std::string& path, const InstanceManifest& m) {
    nlohmann::json j;
    j["data"] = m.data_path;
    j["queries"] = m.query_path;
    j["ground_truth"] = m.ground_truth_path;
    j["seed"] = m.seed;
    j["n"] = m.n;
    j["d"] = m.d;
    j["R"] = m.R;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_instance_manifest: cannot open " + path);
    out << j.dump(2) << '\n';
}

InstanceManifest load_instance_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_instance_manifest: cannot open " + path);
    nlohmann::json j;
    in >> j;
    InstanceManifest m;
    m.data_path = j.at("data").get<std::string>();
    m.query_path = j.at("queries").get<std::string>();
    m.ground_truth_path = j.at("ground_truth").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    m.n = j.at("n").get<uint64_t>();
    m.d = j.at("d").get<uint32_t>();
    m.R = j.at("R").get<double>();
    return m;
}

InstanceManifest write_instance(const std::string& stem, const Instance& instance) {
    InstanceManifest m;
    m.data_path = stem + ".data.fvecs";
    m.query_path = stem + ".queries.fvecs";
    m.ground_truth_path = stem + ".gt.bin";
    m.seed = instance.seed;
    m.n = instance.points.size();
    m.d = instance.points.dim;
    m.R = instance.planted_distance;
    write_dense(m.data_path, instance.points);
    write_dense(m.query_path, instance.queries);
    write_ground_truth(m.ground_truth_path, instance.ground_truth);
    write_instance_manifest(stem + ".manifest.json", m);
    return m;
}

Instance load_instance(const std::string& manifest_path) {
    const InstanceManifest m = load_instance_manifest(manifest_path);
    Instance inst;
    inst.points = load_dense(m.data_path);
    inst.queries = load_dense(m.query_path);
    inst.ground_truth = load_ground_truth(m.ground_truth_path);
    inst.seed = m.seed;
    inst.planted_distance = m.R;
    if (inst.points.size() != m.n || inst.points.dim != m.d) {
        throw std::runtime_error("load_instance: data file does not match manifest");
    }
    if (inst.ground_truth.size() != inst.queries.size()) {
        throw std::runtime_error("load_instance: ground truth count does not match queries");
    }
    return inst;
}

}  // namespace cplsh
