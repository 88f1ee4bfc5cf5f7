#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "eqg/datagen.hpp"
#include "eqg/graph_data.hpp"

using namespace eqg;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& n) const { return (path / n).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

const char* kNodesCsv =
    "id,label,sensitive,f0,f1\n"
    "a,0,0,1.5,2.0\n"
    "b,1,1,-0.5,0.25\n"
    "c,0,1,3.0,1.0\n"
    "d,1,0,0.0,-1.0\n";

}  // namespace

TEST_CASE("normalized adjacency of a ring has unit row sums") {
  // every node has degree 2, +1 self-loop: all nonzero entries are 1/3
  const int n = 8;
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  SparseCsr a = normalized_adjacency(n, edges);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int k = a.ptr[i]; k < a.ptr[i + 1]; ++k) {
      CHECK(a.val[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
      row += a.val[k];
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalized adjacency of a 3-node path, exact values") {
  // degrees with self-loops: 2, 3, 2
  SparseCsr a = normalized_adjacency(3, {{0, 1}, {1, 2}});
  CHECK(a.entry(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.entry(2, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a.entry(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(a.entry(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(a.entry(1, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(a.entry(0, 2) == 0.0);
}

TEST_CASE("adjacency deduplicates repeated and self edges") {
  SparseCsr a = normalized_adjacency(3, {{0, 1}, {1, 0}, {0, 1}, {2, 2}});
  // node 2 is isolated: only the self-loop with weight 1
  CHECK(a.entry(2, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.entry(0, 1) == doctest::Approx(0.5).epsilon(1e-15));  // both degree 2
}

TEST_CASE("load_dataset parses nodes and edges") {
  TempDir dir("eqg_gd_load");
  write_file(dir.file("nodes.csv"), kNodesCsv);
  write_file(dir.file("edges.txt"), "a b\nb c\n");
  GraphDataset ds = load_dataset(dir.file("nodes.csv"), dir.file("edges.txt"), {});
  CHECK(ds.node_count == 4);
  CHECK(ds.feature_dim == 2);
  CHECK(ds.class_count == 2);
  CHECK(ds.labels == std::vector<int>{0, 1, 0, 1});
  CHECK(ds.sensitive == std::vector<int>{0, 1, 1, 0});
  CHECK(ds.feature_matrix.at(0, 0) == 1.5);
  CHECK(ds.feature_matrix.at(3, 1) == -1.0);
  CHECK(ds.adjacency.entry(0, 1) != 0.0);
  CHECK(ds.adjacency.entry(0, 3) == 0.0);
}

TEST_CASE("load_dataset error diagnostics are distinct") {
  TempDir dir("eqg_gd_err");
  write_file(dir.file("edges.txt"), "a b\n");

  write_file(dir.file("n1.csv"), "id,label,f0\na,0,1.0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n1.csv"), dir.file("edges.txt"), {}),
                       doctest::Contains("missing column 'sensitive'"), DataError);

  write_file(dir.file("n2.csv"), "id,label,sensitive,f0\na,0,0,1.0\na,1,0,2.0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n2.csv"), dir.file("edges.txt"), {}),
                       doctest::Contains("duplicate node id 'a'"), DataError);

  write_file(dir.file("n3.csv"), "id,label,sensitive,f0\na,0,2,1.0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n3.csv"), dir.file("edges.txt"), {}),
                       doctest::Contains("outside {0,1}"), DataError);

  write_file(dir.file("n4.csv"), "id,label,sensitive,f0\na,0,0,oops\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n4.csv"), dir.file("edges.txt"), {}),
                       doctest::Contains("non-numeric feature value 'oops'"), DataError);

  write_file(dir.file("n5.csv"), "id,label,sensitive,f0\na,0,0,1.0\nb,0,0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n5.csv"), dir.file("edges.txt"), {}),
                       doctest::Contains("fields"), DataError);

  write_file(dir.file("n6.csv"), "id,label,sensitive,f0\na,0,0,1.0\n");
  write_file(dir.file("bad_edges.txt"), "a z\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n6.csv"), dir.file("bad_edges.txt"), {}),
                       doctest::Contains("unknown id 'z'"), DataError);

  write_file(dir.file("n7.csv"), "id,label,sensitive,f0\na,3,0,1.0\n");
  CHECK_THROWS_WITH_AS(load_dataset(dir.file("n7.csv"), dir.file("edges.txt"), {}, 2),
                       doctest::Contains("outside {0..1}"), DataError);
}

TEST_CASE("manifest resolves relative paths and schema names") {
  TempDir dir("eqg_gd_manifest");
  write_file(dir.file("n.csv"),
             "player,pos,gender,pts\n"
             "p1,0,0,10\n"
             "p2,1,1,20\n");
  write_file(dir.file("e.txt"), "p1 p2\n");
  write_file(dir.file("manifest.json"),
             "{\"nodes\":\"n.csv\",\"edges\":\"e.txt\",\"id_column\":\"player\","
             "\"label_column\":\"pos\",\"sensitive_column\":\"gender\","
             "\"class_count\":2}");
  GraphDataset ds = load_dataset(DatasetManifest::load(dir.file("manifest.json")));
  CHECK(ds.node_count == 2);
  CHECK(ds.feature_dim == 1);
  CHECK(ds.feature_names == std::vector<std::string>{"pts"});
}

TEST_CASE("save/load roundtrip preserves every value") {
  SynthConfig cfg;
  cfg.nodes = 40;
  cfg.features = 7;
  cfg.edges = 80;
  GraphDataset ds = generate_synthetic(cfg, 11);
  TempDir dir("eqg_gd_roundtrip");
  save_dataset(ds, dir.file("nodes.csv"), dir.file("edges.txt"));
  GraphDataset back = load_dataset(dir.file("nodes.csv"), dir.file("edges.txt"), {});
  REQUIRE(back.node_count == ds.node_count);
  REQUIRE(back.feature_dim == ds.feature_dim);
  CHECK(back.labels == ds.labels);
  CHECK(back.sensitive == ds.sensitive);
  CHECK(back.node_ids == ds.node_ids);
  for (size_t i = 0; i < ds.feature_matrix.size(); ++i)
    CHECK(back.feature_matrix.v[i] == ds.feature_matrix.v[i]);  // 17 digits: bit-exact
  REQUIRE(back.adjacency.idx == ds.adjacency.idx);
  REQUIRE(back.adjacency.ptr == ds.adjacency.ptr);
  for (size_t i = 0; i < ds.adjacency.val.size(); ++i)
    CHECK(back.adjacency.val[i] == doctest::Approx(ds.adjacency.val[i]).epsilon(1e-15));
}

TEST_CASE("split sizes floor with leftovers to train, then val, then test") {
  GraphDataset ds;
  ds.node_count = 100;
  Split s = make_split(ds, 1);
  CHECK(s.train_idx.size() == 50);
  CHECK(s.val_idx.size() == 25);
  CHECK(s.test_idx.size() == 25);

  ds.node_count = 4;
  Split t = make_split(ds, 1);
  CHECK(t.train_idx.size() == 2);
  CHECK(t.val_idx.size() == 1);
  CHECK(t.test_idx.size() == 1);

  ds.node_count = 7;  // 3/1/1 floored, leftovers -> train, val
  Split u = make_split(ds, 1);
  CHECK(u.train_idx.size() == 4);
  CHECK(u.val_idx.size() == 2);
  CHECK(u.test_idx.size() == 1);
}

TEST_CASE("split is a partition and deterministic in the seed") {
  GraphDataset ds;
  ds.node_count = 97;
  Split a = make_split(ds, 5);
  Split b = make_split(ds, 5);
  Split c = make_split(ds, 6);
  CHECK(a.train_idx == b.train_idx);
  CHECK(a.val_idx == b.val_idx);
  CHECK(a.test_idx == b.test_idx);
  CHECK(a.train_idx != c.train_idx);

  std::set<int> all;
  for (int i : a.train_idx) all.insert(i);
  for (int i : a.val_idx) all.insert(i);
  for (int i : a.test_idx) all.insert(i);
  CHECK(all.size() == 97);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 96);
}

TEST_CASE("make_split validates ratios") {
  GraphDataset ds;
  ds.node_count = 10;
  CHECK_THROWS_AS(make_split(ds, 1, 0.5, 0.4, 0.2), DataError);
}

TEST_CASE("standardize uses train statistics only and skips constant columns") {
  GraphDataset ds;
  ds.node_count = 4;
  ds.feature_dim = 2;
  ds.feature_matrix = Tensor(4, 2, {1.0, 7.0, 3.0, 7.0, 100.0, 7.0, -50.0, 7.0});
  Split split;
  split.train_idx = {0, 1};
  split.val_idx = {2};
  split.test_idx = {3};

  GraphDataset out = standardize_features(ds, split, true);
  // train column 0: mean 2, population std 1
  CHECK(out.feature_matrix.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(out.feature_matrix.at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.feature_matrix.at(2, 0) == doctest::Approx(98.0).epsilon(1e-12));
  CHECK(out.feature_matrix.at(3, 0) == doctest::Approx(-52.0).epsilon(1e-12));
  // constant column untouched
  for (int r = 0; r < 4; ++r) CHECK(out.feature_matrix.at(r, 1) == 7.0);

  GraphDataset off = standardize_features(ds, split, false);
  CHECK(off.feature_matrix.at(0, 0) == 1.0);
}

TEST_CASE("synthetic generator is deterministic and well formed") {
  SynthConfig cfg;
  cfg.nodes = 80;
  cfg.features = 10;
  cfg.edges = 150;
  GraphDataset a = generate_synthetic(cfg, 3);
  GraphDataset b = generate_synthetic(cfg, 3);
  GraphDataset c = generate_synthetic(cfg, 4);
  CHECK(a.feature_matrix.v == b.feature_matrix.v);
  CHECK(a.labels == b.labels);
  CHECK(a.adjacency.idx == b.adjacency.idx);
  CHECK(a.feature_matrix.v != c.feature_matrix.v);

  CHECK(a.node_count == 80);
  CHECK(a.class_count == 2);
  for (int y : a.labels) CHECK((y == 0 || y == 1));
  // no isolated nodes: every row has a non-self neighbor
  for (int i = 0; i < a.node_count; ++i)
    CHECK(a.adjacency.ptr[i + 1] - a.adjacency.ptr[i] >= 2);
}

TEST_CASE("dataset bundle roundtrips through the manifest loader") {
  SynthConfig cfg;
  cfg.nodes = 30;
  cfg.features = 5;
  cfg.edges = 60;
  GraphDataset ds = generate_synthetic(cfg, 9);
  TempDir dir("eqg_gd_bundle");
  write_dataset_bundle(ds, dir.path.string());
  GraphDataset back = load_dataset(DatasetManifest::load(dir.file("manifest.json")));
  CHECK(back.node_count == ds.node_count);
  CHECK(back.class_count == ds.class_count);
  CHECK(back.labels == ds.labels);
  CHECK(back.feature_matrix.v == ds.feature_matrix.v);
}
