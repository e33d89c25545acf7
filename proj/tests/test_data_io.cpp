#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cplsh/data_io.hpp"
#include "cplsh/rng.hpp"

using namespace cplsh;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cplsh_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("generate_random_instance invariants") {
    const Instance inst = generate_random_instance(500, 32, 0.7071, 40, 9);
    REQUIRE(inst.points.size() == 500);
    REQUIRE(inst.queries.size() == 40);
    REQUIRE(inst.ground_truth.size() == 40);

    for (size_t i = 0; i < inst.points.size(); ++i) {
        CHECK(std::fabs(norm_f64(inst.points.row(i)) - 1.0) < 1e-5);
    }
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        CHECK(std::fabs(norm_f64(inst.queries.row(qi)) - 1.0) < 1e-5);
        // some data point sits at the planted distance
        double best = 1e9;
        for (size_t i = 0; i < inst.points.size(); ++i) {
            best = std::min(best, unit_distance(inst.points.row(i), inst.queries.row(qi)));
        }
        CHECK(best <= 0.7071 + 1e-5);
        CHECK(inst.ground_truth[qi].distance <= 0.7071f + 1e-5f);
    }
    CHECK_THROWS_AS(generate_random_instance(10, 8, 2.5, 1, 1), std::invalid_argument);
}

TEST_CASE("generation is deterministic per seed") {
    const Instance a = generate_random_instance(100, 16, 0.5, 10, 77);
    const Instance b = generate_random_instance(100, 16, 0.5, 10, 77);
    CHECK(a.points.values == b.points.values);
    CHECK(a.queries.values == b.queries.values);
    const Instance c = generate_random_instance(100, 16, 0.5, 10, 78);
    CHECK(a.points.values != c.points.values);
}

TEST_CASE("random pairwise distances concentrate near sqrt(2)") {
    const Instance inst = generate_random_instance(300, 128, 0.7071, 1, 123);
    Rng rng(5);
    double sum = 0.0;
    const int pairs = 2000;
    for (int i = 0; i < pairs; ++i) {
        const size_t a = rng.below(300);
        size_t b = rng.below(300);
        while (b == a) b = rng.below(300);
        sum += unit_distance(inst.points.row(a), inst.points.row(b));
    }
    CHECK(std::fabs(sum / pairs - kSqrt2) < 0.05);
}

TEST_CASE("ground truth: serial matches parallel and oracle properties") {
    const Instance inst = generate_random_instance(400, 24, 0.9, 30, 4);
    const auto serial = brute_force_ground_truth_serial(inst.points, inst.queries);
    REQUIRE(serial.size() == inst.ground_truth.size());
    for (size_t qi = 0; qi < serial.size(); ++qi) {
        CHECK(serial[qi].id == inst.ground_truth[qi].id);
        CHECK(serial[qi].distance == inst.ground_truth[qi].distance);
    }
    // query equal to an indexed point
    DenseDataset q;
    q.dim = inst.points.dim;
    const auto row7 = inst.points.row(7);
    q.values.assign(row7.begin(), row7.end());
    const auto gt = brute_force_ground_truth(inst.points, q);
    CHECK(gt[0].id == 7);
    CHECK(gt[0].distance == doctest::Approx(0.0));
}

TEST_CASE("dense file round trip") {
    TempDir tmp;
    const Instance inst = generate_random_instance(37, 19, 0.6, 5, 2);
    const std::string path = tmp.file("points.fvecs");
    write_dense(path, inst.points);
    const DenseDataset loaded = load_dense(path);
    CHECK(loaded.dim == inst.points.dim);
    REQUIRE(loaded.values.size() == inst.points.values.size());
    CHECK(loaded.values == inst.points.values);  // bit identical
}

TEST_CASE("dense loader reports corruption with a byte offset") {
    TempDir tmp;
    const std::string path = tmp.file("bad.fvecs");
    {
        std::ofstream out(path, std::ios::binary);
        const int32_t d = 4;
        out.write(reinterpret_cast<const char*>(&d), sizeof(d));
        const float vals[2] = {1.0f, 2.0f};  // record cut short
        out.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    }
    CHECK_THROWS_WITH_AS(load_dense(path),
                         doctest::Contains("byte offset"), std::runtime_error);
}

TEST_CASE("hand-built dense fixture parses exactly") {
    TempDir tmp;
    const std::string path = tmp.file("fixture.fvecs");
    const float rows[3][4] = {{1, 0, 0, 0}, {0.5f, 0.5f, 0.5f, 0.5f}, {-1, 2, -3, 4}};
    {
        std::ofstream out(path, std::ios::binary);
        const int32_t d = 4;
        for (const auto& row : rows) {
            out.write(reinterpret_cast<const char*>(&d), sizeof(d));
            out.write(reinterpret_cast<const char*>(row), sizeof(row));
        }
    }
    const DenseDataset data = load_dense(path);
    REQUIRE(data.size() == 3);
    REQUIRE(data.dim == 4);
    for (size_t i = 0; i < 3; ++i) {
        for (size_t j = 0; j < 4; ++j) CHECK(data.row(i)[j] == rows[i][j]);
    }
}

TEST_CASE("tf-idf loading on a toy corpus") {
    TempDir tmp;
    const std::string path = tmp.file("docs.txt");
    {
        std::ofstream out(path);
        out << "0:2 1:1\n";  // doc 0: t0 x2, t1 x1
        out << "0:1\n";      // doc 1: t0
        out << "2:3\n";      // doc 2: t2 x3
    }
    const auto docs = load_sparse_tfidf(path, /*raw_counts=*/true);
    REQUIRE(docs.size() == 3);

    // idf: t0 -> ln(3/2), t1 -> ln 3, t2 -> ln 3
    const double w0 = 2.0 * std::log(1.5);
    const double w1 = std::log(3.0);
    const double norm = std::hypot(w0, w1);
    REQUIRE(docs[0].entries.size() == 2);
    CHECK(docs[0].entries[0].second == doctest::Approx(w0 / norm).epsilon(1e-6));
    CHECK(docs[0].entries[1].second == doctest::Approx(w1 / norm).epsilon(1e-6));

    // single-term docs normalize to one unit entry
    REQUIRE(docs[1].entries.size() == 1);
    CHECK(docs[1].entries[0].second == doctest::Approx(1.0));
    REQUIRE(docs[2].entries.size() == 1);
    CHECK(docs[2].entries[0].second == doctest::Approx(1.0));

    // docs sharing no terms are orthogonal
    CHECK(dot_sparse(docs[1], docs[2]) == 0.0);

    // every loaded vector is unit norm
    for (const auto& d : docs) CHECK(std::fabs(sparse_norm(d) - 1.0) < 1e-5);
}

TEST_CASE("tf-idf loader rejects unsorted indices") {
    TempDir tmp;
    const std::string path = tmp.file("bad_docs.txt");
    {
        std::ofstream out(path);
        out << "3:1 1:1\n";
    }
    CHECK_THROWS_AS(load_sparse_tfidf(path), std::runtime_error);
}

TEST_CASE("query selection by inner-product range") {
    TempDir tmp;
    const std::string path = tmp.file("corpus.txt");
    {
        std::ofstream out(path);
        out << "0:1\n1:1\n0:1 1:1\n";
    }
    const auto points = load_sparse_tfidf(path);
    // three queries: a duplicate of point 0 (ip 1), a mixed one, an orthogonal one
    std::vector<SparseVector> queries;
    queries.push_back(points[0]);
    queries.push_back(points[2]);
    queries.push_back(make_sparse({{1, 1.0f}}, points[0].ambient_dim));

    const auto all = select_queries_by_ip_range(points, queries, -1.0, 1.0);
    CHECK(all.size() == 3);
    const auto filtered = select_queries_by_ip_range(points, queries, 0.3, 0.8);
    // the duplicate (ip = 1) drops out
    for (size_t idx : filtered) {
        const auto gt = brute_force_ground_truth_sparse(points, {queries[idx]});
        const double ip = dot_sparse(points[gt[0].id], queries[idx]);
        CHECK(ip >= 0.3);
        CHECK(ip <= 0.8);
    }
    CHECK(std::find(filtered.begin(), filtered.end(), 0) == filtered.end());
}

TEST_CASE("instance manifest round trip") {
    TempDir tmp;
    const Instance inst = generate_random_instance(64, 16, 0.7071, 8, 11);
    write_instance(tmp.file("inst"), inst);
    const Instance loaded = load_instance(tmp.file("inst.manifest.json"));
    CHECK(loaded.points.values == inst.points.values);
    CHECK(loaded.queries.values == inst.queries.values);
    REQUIRE(loaded.ground_truth.size() == inst.ground_truth.size());
    for (size_t i = 0; i < loaded.ground_truth.size(); ++i) {
        CHECK(loaded.ground_truth[i].id == inst.ground_truth[i].id);
        CHECK(loaded.ground_truth[i].distance == inst.ground_truth[i].distance);
    }
    CHECK(loaded.seed == 11);
    CHECK(loaded.planted_distance == doctest::Approx(0.7071));
}

TEST_CASE("ground truth is invariant under id relabeling") {
    const Instance inst = generate_random_instance(128, 12, 0.8, 16, 31);
    // reverse the points
    DenseDataset reversed;
    reversed.dim = inst.points.dim;
    reversed.values.resize(inst.points.values.size());
    const size_t n = inst.points.size();
    for (size_t i = 0; i < n; ++i) {
        const auto src = inst.points.row(n - 1 - i);
        std::copy(src.begin(), src.end(), reversed.row(i).begin());
    }
    const auto gt_rev = brute_force_ground_truth(reversed, inst.queries);
    for (size_t qi = 0; qi < gt_rev.size(); ++qi) {
        CHECK(gt_rev[qi].distance == doctest::Approx(inst.ground_truth[qi].distance));
    }
}
