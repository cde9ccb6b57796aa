#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "gladformer/dataset.hpp"
#include "gladformer/errors.hpp"
#include "gladformer/spectral.hpp"

using namespace gladformer;
using namespace gladformer::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gladformer_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

// two graphs: a 2-node edge and a 3-node path, with node labels
void write_mini_fixture(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir / name);
    write_file(dir / name / (name + "_A.txt"), "1, 2\n2, 1\n3, 4\n4, 3\n4, 5\n5, 4\n");
    write_file(dir / name / (name + "_graph_indicator.txt"), "1\n1\n2\n2\n2\n");
    write_file(dir / name / (name + "_graph_labels.txt"), "0\n1\n");
    write_file(dir / name / (name + "_node_labels.txt"), "7\n7\n9\n7\n9\n");
}

}  // namespace

TEST_CASE("loader parses the mini fixture") {
    TempDir tmp;
    write_mini_fixture(tmp.path, "MINI");
    auto ds = load_tudataset(tmp.path.string(), "MINI");

    REQUIRE(ds.size() == 2);
    CHECK(ds.d == 2);  // one-hot over labels {7, 9}

    const Graph& g0 = ds.graphs[0];
    CHECK(g0.n == 2);
    REQUIRE(g0.edges.size() == 1);
    CHECK(g0.edges[0] == std::pair<int, int>{0, 1});

    const Graph& g1 = ds.graphs[1];
    CHECK(g1.n == 3);
    CHECK(g1.edges.size() == 2);
    CHECK(g1.x(0, 1) == 1.0);  // node label 9 -> second one-hot slot
    CHECK(g1.x(1, 0) == 1.0);
}

TEST_CASE("loader remaps the minority class to 1") {
    TempDir tmp;
    fs::create_directories(tmp.path / "POLE");
    // three graphs of raw label 5, one of raw label 2 -> 2 is anomalous
    write_file(tmp.path / "POLE" / "POLE_A.txt", "");
    write_file(tmp.path / "POLE" / "POLE_graph_indicator.txt", "1\n2\n3\n4\n");
    write_file(tmp.path / "POLE" / "POLE_graph_labels.txt", "5\n5\n2\n5\n");
    auto ds = load_tudataset(tmp.path.string(), "POLE");
    CHECK(ds.graphs[0].y == 0);
    CHECK(ds.graphs[2].y == 1);
    CHECK(ds.anomaly_count() == 1);
    CHECK(ds.label_note.find("2") != std::string::npos);
    CHECK(ds.d == 1);  // constant-1 feature fallback
    CHECK(ds.graphs[0].x(0, 0) == 1.0);
}

TEST_CASE("loader errors name the offending file and line") {
    TempDir tmp;
    write_mini_fixture(tmp.path, "BAD");

    SUBCASE("missing mandatory file") {
        fs::remove(tmp.path / "BAD" / "BAD_graph_labels.txt");
        CHECK_THROWS_WITH_AS(load_tudataset(tmp.path.string(), "BAD"),
                             doctest::Contains("BAD_graph_labels.txt"), IngestError);
    }
    SUBCASE("edge references an unknown node") {
        write_file(tmp.path / "BAD" / "BAD_A.txt", "1, 2\n2, 9\n");
        CHECK_THROWS_WITH_AS(load_tudataset(tmp.path.string(), "BAD"),
                             doctest::Contains("line 2"), FormatError);
    }
    SUBCASE("inconsistent attribute arity") {
        write_file(tmp.path / "BAD" / "BAD_node_attributes.txt",
                   "0.1, 0.2\n0.3, 0.4\n0.5\n0.6, 0.7\n0.8, 0.9\n");
        CHECK_THROWS_WITH_AS(load_tudataset(tmp.path.string(), "BAD"),
                             doctest::Contains("line 3"), FormatError);
    }
    SUBCASE("attributes take priority over node labels") {
        write_file(tmp.path / "BAD" / "BAD_node_attributes.txt",
                   "0.1, 0.2, 0.3\n1, 2, 3\n4, 5, 6\n7, 8, 9\n1, 1, 1\n");
        auto ds = load_tudataset(tmp.path.string(), "BAD");
        CHECK(ds.d == 3);
        CHECK(ds.graphs[0].x(0, 2) == doctest::Approx(0.3));
    }
}

TEST_CASE("save/load round-trips a synthetic dataset") {
    TempDir tmp;
    auto ds = generate_synthetic(30, 0.2, 4, 9, 42);
    save_tudataset(ds, tmp.path.string());
    auto back = load_tudataset(tmp.path.string(), "SYNTH");

    REQUIRE(back.size() == ds.size());
    CHECK(back.d == ds.d);
    for (int i = 0; i < ds.size(); ++i) {
        const auto& a = ds.graphs[static_cast<std::size_t>(i)];
        const auto& b = back.graphs[static_cast<std::size_t>(i)];
        CHECK(a.n == b.n);
        CHECK(a.y == b.y);
        REQUIRE(a.edges == b.edges);
        CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("downsampling keeps ceil(fraction * anomalies) and all normals") {
    auto ds = generate_synthetic(500, 0.8, 4, 6, 9);  // 400 anomalies, 100 normals
    REQUIRE(ds.anomaly_count() == 400);
    auto down = downsample_anomalies(ds, 0.1, 7);
    CHECK(down.anomaly_count() == 40);
    CHECK(down.size() - down.anomaly_count() == 100);

    SUBCASE("identity at keep_fraction 1.0") {
        auto same = downsample_anomalies(ds, 1.0, 7);
        CHECK(same.size() == ds.size());
    }
    SUBCASE("deterministic retained set per seed") {
        auto again = downsample_anomalies(ds, 0.1, 7);
        std::set<int> a, b;
        for (const auto& g : down.graphs) a.insert(g.id);
        for (const auto& g : again.graphs) b.insert(g.id);
        CHECK(a == b);
    }
    SUBCASE("graph contents are untouched") {
        for (const auto& g : down.graphs) {
            const auto& orig = ds.graphs[static_cast<std::size_t>(g.id)];
            CHECK(orig.edges == g.edges);
            CHECK((orig.x - g.x).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("rejects fractions outside (0, 1]") {
        CHECK_THROWS_AS(downsample_anomalies(ds, 0.0, 1), ArgError);
        CHECK_THROWS_AS(downsample_anomalies(ds, 1.5, 1), ArgError);
    }
}

TEST_CASE("holdout split is stratified 70/15/15") {
    auto ds = generate_synthetic(100, 0.2, 4, 6, 3);
    REQUIRE(ds.anomaly_count() == 20);
    auto spec = make_holdout_split(ds, 0.70, 0.15, 11);

    CHECK(spec.train.size() == 70);
    CHECK(spec.val.size() == 15);
    CHECK(spec.test.size() == 15);

    auto anoms = [&](const std::vector<int>& part) {
        int c = 0;
        for (int i : part) c += ds.graphs[static_cast<std::size_t>(i)].y;
        return c;
    };
    CHECK(anoms(spec.train) == 14);
    CHECK(anoms(spec.val) == 3);
    CHECK(anoms(spec.test) == 3);

    // disjoint and exhaustive
    std::set<int> all(spec.train.begin(), spec.train.end());
    all.insert(spec.val.begin(), spec.val.end());
    all.insert(spec.test.begin(), spec.test.end());
    CHECK(all.size() == 100);

    SUBCASE("seed-deterministic") {
        auto again = make_holdout_split(ds, 0.70, 0.15, 11);
        CHECK(again.train == spec.train);
        CHECK(again.val == spec.val);
        CHECK(again.test == spec.test);
    }
    SUBCASE("different seed reshuffles") {
        auto other = make_holdout_split(ds, 0.70, 0.15, 12);
        CHECK(other.train != spec.train);
    }
}

TEST_CASE("kfold split deals five folds of twenty") {
    auto ds = generate_synthetic(100, 0.2, 4, 6, 3);
    auto spec = make_kfold_split(ds, 5, 21);
    REQUIRE(spec.folds.size() == 5);
    std::set<int> all;
    for (const auto& f : spec.folds) {
        CHECK(f.size() == 20);
        int anoms = 0;
        for (int i : f) anoms += ds.graphs[static_cast<std::size_t>(i)].y;
        CHECK(anoms == 4);  // stratified: 20% of 20
        all.insert(f.begin(), f.end());
    }
    CHECK(all.size() == 100);

    auto again = make_kfold_split(ds, 5, 21);
    CHECK(again.folds == spec.folds);
}

TEST_CASE("kfold refuses a class smaller than k") {
    auto ds = generate_synthetic(50, 0.04, 4, 6, 3);  // 2 anomalies
    CHECK_THROWS_AS(make_kfold_split(ds, 5, 1), SplitError);
}

TEST_CASE("synthetic generator plants the advertised anomaly count") {
    auto ds = generate_synthetic(200, 0.1, 8, 16, 7);
    CHECK(ds.size() == 200);
    CHECK(ds.anomaly_count() == 20);
    CHECK(ds.d == 4);

    SUBCASE("regeneration is byte-identical") {
        auto again = generate_synthetic(200, 0.1, 8, 16, 7);
        for (int i = 0; i < 200; ++i) {
            const auto& a = ds.graphs[static_cast<std::size_t>(i)];
            const auto& b = again.graphs[static_cast<std::size_t>(i)];
            CHECK(a.y == b.y);
            CHECK(a.edges == b.edges);
            CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("anomalies carry more Rayleigh energy on average") {
        double anom_sum = 0.0, norm_sum = 0.0;
        int anom_n = 0, norm_n = 0;
        for (const auto& g : ds.graphs) {
            auto lap = spectral::normalized_laplacian(g);
            auto r = spectral::rayleigh_vector(g.x, lap);
            const double mean_r = r.mean();
            if (g.y == 1) {
                anom_sum += mean_r;
                ++anom_n;
            } else {
                norm_sum += mean_r;
                ++norm_n;
            }
        }
        CHECK(anom_sum / anom_n > norm_sum / norm_n);
    }
    SUBCASE("rejects degenerate parameters") {
        CHECK_THROWS_AS(generate_synthetic(10, 0.0, 4, 6, 1), ArgError);
        CHECK_THROWS_AS(generate_synthetic(10, 0.1, 6, 4, 1), ArgError);
    }
}

TEST_CASE("dataset stats arithmetic") {
    GraphDataset ds;
    ds.name = "tiny";
    ds.d = 1;
    Graph g;
    g.n = 3;
    g.x = Eigen::MatrixXd::Ones(3, 1);
    ds.graphs.push_back(g);
    auto s = dataset_stats(ds);
    CHECK(s.n_graphs == 1);
    CHECK(s.avg_edges == 0.0);
    CHECK(s.avg_nodes == 3.0);

    auto synth = generate_synthetic(200, 0.1, 8, 16, 7);
    auto ss = dataset_stats(synth);
    CHECK(ss.n_anom == 20);
    CHECK(ss.ratio_pct == doctest::Approx(10.0));
}
