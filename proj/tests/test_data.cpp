#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "byrdie/baselines.hpp"
#include "byrdie/dataset.hpp"
#include "byrdie/errors.hpp"

using namespace byrdie;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(BYRDIE_TEST_TMP);
    std::string path = std::string(BYRDIE_TEST_TMP) + "/" + name;
    std::ofstream f(path);
    f << content;
    return path;
}

} // namespace

TEST_CASE("synthetic zero-noise points sit exactly on the signal direction") {
    Rng rng(11);
    Dataset ds = synth_two_class(2, 1.0, 0.0, 4, rng);
    REQUIRE(ds.size() == 4);
    const double inv = 1.0 / std::sqrt(2.0);
    int pos = 0;
    for (const auto& s : ds.samples) {
        CHECK(s.x[0] == doctest::Approx(s.y * inv).epsilon(1e-12));
        CHECK(s.x[1] == doctest::Approx(-s.y * inv).epsilon(1e-12));
        if (s.y > 0) ++pos;
    }
    CHECK(pos == 2); // balanced
    CHECK(ds.norm_bound == 1.0);
}

TEST_CASE("synthetic generation is reproducible") {
    Rng a(5), b(5);
    Dataset da = synth_two_class(6, 1.5, 0.7, 200, a);
    Dataset db = synth_two_class(6, 1.5, 0.7, 200, b);
    REQUIRE(da.size() == db.size());
    for (std::size_t i = 0; i < da.size(); ++i) {
        CHECK(da.samples[i].y == db.samples[i].y);
        CHECK(da.samples[i].x == db.samples[i].x);
    }
}

TEST_CASE("synthetic norm bound holds for every sample") {
    Rng rng(9);
    Dataset ds = synth_two_class(10, 2.0, 0.5, 1000, rng);
    for (const auto& s : ds.samples) {
        double sq = 0;
        for (double v : s.x) sq += v * v;
        CHECK(std::sqrt(sq) <= ds.norm_bound + 1e-12);
    }
}

TEST_CASE("separable synthetic data is fit to >= 99% by the centralized oracle") {
    Rng rng(21);
    Dataset ds = synth_two_class(10, 2.0, 0.5, 10000, rng);
    augment_bias(ds);
    LossModel model{LossKind::Logistic, 0.001, {}};
    CentralizedCdOptions opts;
    opts.tolerance = 1e-7;
    CdResult res = run_centralized_cd(ds.samples, model, opts);
    CHECK(accuracy(model, res.w, ds.samples) >= 0.99);
}

TEST_CASE("synthetic preconditions") {
    Rng rng(1);
    CHECK_THROWS_AS(synth_two_class(0, 1, 0, 10, rng), ConfigError);
    CHECK_THROWS_AS(synth_two_class(2, 1, 0, 1, rng), ConfigError);
    CHECK_THROWS_AS(synth_two_class(2, 0, 0, 10, rng), ConfigError);
}

TEST_CASE("iris csv loads with 3 classes, 4 features, 50 per class") {
    Dataset ds = load_csv(std::string(BYRDIE_REPO_DIR) + "/data/iris.csv", 0, true);
    CHECK(ds.size() == 150);
    CHECK(ds.dim == 4);
    CHECK(ds.class_count == 3);
    int counts[3] = {0, 0, 0};
    for (const auto& s : ds.samples) ++counts[class_of(s.y, 3)];
    CHECK(counts[0] == 50);
    CHECK(counts[1] == 50);
    CHECK(counts[2] == 50);
    // min-max normalization keeps every feature in [0,1]
    for (const auto& s : ds.samples)
        for (double v : s.x) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("csv: single row with trailing label column") {
    std::string path = write_temp("single.csv", "1.0,2.0,0\n");
    Dataset ds = load_csv(path, 2, false);
    REQUIRE(ds.size() == 1);
    CHECK(ds.samples[0].x == std::vector<double>{1.0, 2.0});
    CHECK(ds.samples[0].y == 0.0);
}

TEST_CASE("csv: empty file and malformed rows raise parse errors") {
    CHECK_THROWS_AS(load_csv(write_temp("empty.csv", ""), 0, false), ParseError);
    CHECK_THROWS_AS(load_csv(write_temp("ragged.csv", "1,2,3\n1,2\n"), 0, false), ParseError);
    CHECK_THROWS_AS(load_csv(write_temp("alpha.csv", "1,2,3\n1,abc,3\n"), 0, false), ParseError);
}

TEST_CASE("csv labels map to contiguous indices") {
    std::string path = write_temp("labels.csv", "5,1.0\n9,2.0\n5,3.0\n7,4.0\n");
    Dataset ds = load_csv(path, 0, false);
    CHECK(ds.class_count == 3);
    CHECK(ds.samples[0].y == 0.0); // 5 -> 0
    CHECK(ds.samples[1].y == 2.0); // 9 -> 2
    CHECK(ds.samples[3].y == 1.0); // 7 -> 1
}

TEST_CASE("binary relabeling to -1/+1") {
    std::string path = write_temp("binary.csv", "0,1.0\n1,2.0\n");
    Dataset ds = load_csv(path, 0, false);
    relabel_binary_pm1(ds);
    CHECK(ds.samples[0].y == -1.0);
    CHECK(ds.samples[1].y == 1.0);
}

TEST_CASE("partition: exact split leaves an empty test pool") {
    Rng rng(3);
    Dataset ds = synth_two_class(3, 1, 0.2, 100, rng);
    std::vector<int> honest;
    for (int i = 1; i <= 10; ++i) honest.push_back(i);
    Rng prng(4);
    Partition part = partition(ds, honest, 10, false, prng);
    CHECK(part.shards.size() == 10);
    CHECK(part.test.empty());
    std::set<int> seen;
    for (const auto& shard : part.shards) {
        CHECK(shard.sample_ids.size() == 10);
        for (int id : shard.sample_ids) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == 100);
}

TEST_CASE("partition: class-balanced shards split 50/50") {
    Rng rng(8);
    Dataset ds = synth_two_class(2, 1, 0.3, 100, rng);
    Rng prng(9);
    Partition part = partition(ds, {1, 2, 3, 4}, 10, true, prng);
    for (const auto& shard : part.shards) {
        int pos = 0;
        for (const auto& s : shard.samples)
            if (s.y > 0) ++pos;
        CHECK(pos == 5);
        CHECK(shard.samples.size() == 10);
    }
}

TEST_CASE("partition: disjointness and test remainder at scale") {
    Rng rng(17);
    Dataset ds = synth_two_class(4, 1, 0.5, 12000, rng);
    std::vector<int> honest;
    for (int i = 1; i <= 40; ++i) honest.push_back(i);
    Rng prng(18);
    Partition part = partition(ds, honest, 30, true, prng);
    std::set<int> ids;
    for (const auto& shard : part.shards)
        for (int id : shard.sample_ids) CHECK(ids.insert(id).second);
    for (int id : part.test_ids) CHECK(ids.insert(id).second);
    CHECK(ids.size() == 12000);
    CHECK(part.test.size() == 12000 - 40 * 30);
}

TEST_CASE("partition: insufficient samples is a configuration error") {
    Rng rng(2);
    Dataset ds = synth_two_class(2, 1, 0.1, 10, rng);
    Rng prng(2);
    CHECK_THROWS_AS(partition(ds, {1, 2, 3}, 5, false, prng), ConfigError);
}

TEST_CASE("partition is reproducible") {
    Rng rng(55);
    Dataset ds = synth_two_class(3, 1, 0.4, 60, rng);
    Rng p1(66), p2(66);
    Partition a = partition(ds, {1, 2, 3}, 15, true, p1);
    Partition b = partition(ds, {1, 2, 3}, 15, true, p2);
    for (std::size_t s = 0; s < a.shards.size(); ++s)
        CHECK(a.shards[s].sample_ids == b.shards[s].sample_ids);
    CHECK(a.test_ids == b.test_ids);
}

TEST_CASE("bias augmentation appends a constant feature and updates B") {
    Rng rng(4);
    Dataset ds = synth_two_class(3, 1, 0.2, 20, rng);
    augment_bias(ds);
    CHECK(ds.dim == 4);
    for (const auto& s : ds.samples) CHECK(s.x.back() == 1.0);
    CHECK(ds.norm_bound <= std::sqrt(2.0) + 1e-12);
    CHECK(ds.norm_bound >= 1.0);
}

TEST_CASE("dataset csv export round trips") {
    Rng rng(12);
    Dataset ds = synth_two_class(3, 1, 0.3, 25, rng);
    std::filesystem::create_directories(BYRDIE_TEST_TMP);
    std::string path = std::string(BYRDIE_TEST_TMP) + "/export.csv";
    save_csv(ds, path);
    Dataset back = load_csv(path, 0, false);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.samples[i].x == ds.samples[i].x); // full-precision round trip
    }
    save_metadata(ds, std::string(BYRDIE_TEST_TMP) + "/export.meta");
    std::ifstream meta(std::string(BYRDIE_TEST_TMP) + "/export.meta");
    std::string line;
    std::getline(meta, line);
    CHECK(line == "dim=3");
}

TEST_CASE("take_per_class caps the pool per class") {
    Rng rng(13);
    Dataset ds = synth_two_class(2, 1, 0.3, 100, rng);
    std::vector<Sample> capped = take_per_class(ds.samples, 2, 10);
    CHECK(capped.size() == 20);
}
