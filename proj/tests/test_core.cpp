#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "krp/core.hpp"
#include "test_util.hpp"

using namespace krp;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = std::filesystem::temp_directory_path() /
           ("krp_test_" + std::to_string(stamp) + "_" + std::to_string(++counter));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

InstanceBundle line_bundle() {
  // points 0, 1, 3 on a line, d = absolute difference
  return InstanceBundle::validated(
      MetricSpace::validated(3, {0, 1, 3, 1, 0, 2, 3, 2, 0}),
      DemandDistribution::validated({0.25, 0.5, 0.25}), 2);
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("smallest metric validates") {
  const MetricSpace s = validate_metric({{0, 1}, {1, 0}});
  CHECK(s.size() == 2);
  CHECK(s(0, 1) == 1.0);
}

TEST_CASE("triangle violation is reported with the offending triple") {
  const auto report = MetricSpace::validate(3, {0, 1, 1, 1, 0, 3, 1, 3, 0});
  REQUIRE_FALSE(report.ok());
  REQUIRE(report.violations.size() == 1);
  const auto& v = report.violations.front();
  CHECK(v.kind == MetricViolation::TriangleViolation);
  CHECK(v.i == 1);
  CHECK(v.m == 0);
  CHECK(v.j == 2);
  CHECK(v.value == doctest::Approx(1.0));  // 3 - (1 + 1)
  CHECK_THROWS_AS(validate_metric({{0, 1, 1}, {1, 0, 3}, {1, 3, 0}}), Error);
}

TEST_CASE("every axiom kind is detected") {
  // asymmetric
  auto r = MetricSpace::validate(2, {0, 1, 2, 0});
  REQUIRE(!r.ok());
  CHECK(r.violations.front().kind == MetricViolation::AsymmetricPair);
  // negative entry
  r = MetricSpace::validate(2, {0, -1, -1, 0});
  REQUIRE(!r.ok());
  CHECK(r.violations.front().kind == MetricViolation::NegativeEntry);
  // nonzero diagonal
  r = MetricSpace::validate(2, {0.5, 1, 1, 0});
  REQUIRE(!r.ok());
  CHECK(r.violations.front().kind == MetricViolation::NonzeroDiagonal);
  // non-square
  r = MetricSpace::validate(2, {0, 1, 1});
  REQUIRE(!r.ok());
  CHECK(r.violations.front().kind == MetricViolation::NonSquare);
  // non-finite
  r = MetricSpace::validate(2, {0, std::nan(""), std::nan(""), 0});
  REQUIRE(!r.ok());
  CHECK(r.violations.front().kind == MetricViolation::NonFinite);
}

TEST_CASE("demand validation normalizes small drift and rejects the rest") {
  const auto d = DemandDistribution::validated({0.5, 0.5 + 3e-7});
  double sum = 0.0;
  for (double p : d.probs) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-9);
  CHECK_THROWS_AS(DemandDistribution::validated({0.5, 0.4}), Error);
  CHECK_THROWS_AS(DemandDistribution::validated({1.2, -0.2}), Error);
}

TEST_CASE("placement invariants") {
  CHECK(Placement{{1, 2, 0}}.k() == 3);
  CHECK_THROWS_AS(Placement::validated({1, -1, 2}), Error);
  CHECK_THROWS_AS(Placement::validated({0, 0}), Error);
  CHECK_THROWS_AS(Placement::validated({1, 1}, 3), Error);
  CHECK(Placement{{2, 0, 1}}.expand() == std::vector<PointId>{0, 0, 2});
}

TEST_CASE("binarize keeps an already-binary tree") {
  GeneralTree t;
  t.parent = {-1, 0, 0};
  t.edge_cost = {0, 1.5, 2.5};
  t.probs = {0.2, 0.3, 0.5};
  const TreeMetric bt = binarize_tree(t);
  CHECK(bt.node_count() == 3);
  CHECK(bt.root() == 0);
  CHECK(bt.left(0) == 1);
  CHECK(bt.right(0) == 2);
}

TEST_CASE("binarize a 4-spoke star preserves all pairwise distances exactly") {
  GeneralTree t;
  t.parent = {-1, 0, 0, 0, 0};
  t.edge_cost = {0, 1, 2, 3, 4};
  t.probs = {0.2, 0.2, 0.2, 0.2, 0.2};
  const auto before = testutil::general_tree_distances(t);
  const TreeMetric bt = binarize_tree(t);
  CHECK(bt.node_count() == 7);  // 5 original + 2 chain nodes
  const MetricSpace after = bt.induced_metric();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(after(int(i), int(j)) == before[i][j]);
}

TEST_CASE("binarize preserves distances on random trees") {
  SplitRng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + std::size_t(rng.next_double() * 9);
    GeneralTree t;
    t.parent.assign(n, -1);
    t.edge_cost.assign(n, 0.0);
    t.probs.assign(n, 1.0 / double(n));
    for (std::size_t i = 1; i < n; ++i) {
      t.parent[i] = int(rng.next_double() * double(i));
      t.edge_cost[i] = rng.next_double();
    }
    const auto before = testutil::general_tree_distances(t);
    const TreeMetric bt = binarize_tree(t);
    const MetricSpace after = bt.induced_metric();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(after(int(i), int(j)) == before[i][j]);
    // introduced nodes carry no probability
    for (std::size_t u = n; u < bt.node_count(); ++u) CHECK(bt.probs().probs[u] == 0.0);
  }
}

TEST_CASE("single edge gains a zero sibling leaf") {
  GeneralTree t;
  t.parent = {-1, 0};
  t.edge_cost = {0, 3.0};
  t.probs = {0.5, 0.5};
  const TreeMetric bt = binarize_tree(t);
  REQUIRE(bt.node_count() == 3);
  CHECK(bt.edge_cost(2) == 0.0);
  CHECK(bt.probs().probs[2] == 0.0);
  CHECK(bt.is_leaf(2));
}

TEST_CASE("malformed trees are rejected") {
  GeneralTree cyclic;
  cyclic.parent = {1, 0};
  cyclic.edge_cost = {1, 1};
  cyclic.probs = {0.5, 0.5};
  CHECK_THROWS_AS(binarize_tree(cyclic), Error);

  GeneralTree two_roots;
  two_roots.parent = {-1, -1};
  two_roots.edge_cost = {0, 0};
  two_roots.probs = {0.5, 0.5};
  CHECK_THROWS_AS(binarize_tree(two_roots), Error);

  GeneralTree negative;
  negative.parent = {-1, 0};
  negative.edge_cost = {0, -1};
  negative.probs = {0.5, 0.5};
  CHECK_THROWS_AS(binarize_tree(negative), Error);

  GeneralTree self_cycle;
  self_cycle.parent = {-1, 0, 2};
  self_cycle.edge_cost = {0, 1, 1};
  self_cycle.probs = {0.4, 0.3, 0.3};
  CHECK_THROWS_AS(binarize_tree(self_cycle), Error);
}

TEST_CASE("subtree masses") {
  SUBCASE("two leaves") {
    const TreeMetric t = TreeMetric::from_binary({-1, 0, 0}, {0, 1, 1}, {0, 0.5, 0.5});
    CHECK(t.subtree_mass(0) == doctest::Approx(1.0));
    CHECK(t.subtree_mass(1) == 0.5);
    CHECK(t.subtree_mass(2) == 0.5);
  }
  SUBCASE("zero-probability leaf") {
    const TreeMetric t = TreeMetric::from_binary({-1, 0, 0}, {0, 1, 1}, {0.5, 0.5, 0.0});
    CHECK(t.subtree_mass(2) == 0.0);
  }
  SUBCASE("chain root->a->b") {
    GeneralTree chain;
    chain.parent = {-1, 0, 1};
    chain.edge_cost = {0, 1, 1};
    chain.probs = {0.2, 0.3, 0.5};
    const TreeMetric t = binarize_tree(chain);
    CHECK(t.subtree_mass(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.subtree_mass(1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(t.subtree_mass(2) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("subtree masses agree with DFS enumeration") {
  SplitRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    GeneralTree t;
    const std::size_t n = 2 + std::size_t(rng.next_double() * 8);
    t.parent.assign(n, -1);
    t.edge_cost.assign(n, 0.0);
    t.probs.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) {
        t.parent[i] = int(rng.next_double() * double(i));
        t.edge_cost[i] = rng.next_double();
      }
      t.probs[i] = rng.next_double() + 0.01;
      total += t.probs[i];
    }
    for (double& p : t.probs) p /= total;
    const TreeMetric bt = binarize_tree(t);
    const auto mass = subtree_masses(bt);
    // independent route: collect each subtree by walking parent pointers
    for (std::size_t u = 0; u < bt.node_count(); ++u) {
      double sum = 0.0;
      for (std::size_t v = 0; v < bt.node_count(); ++v) {
        int w = int(v);
        while (w >= 0 && w != int(u)) w = bt.parent(w);
        if (w == int(u)) sum += bt.probs().probs[v];
      }
      CHECK(mass[u] == doctest::Approx(sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("bundle save/load round trip is bit identical") {
  TempDir dir;
  InstanceBundle b = line_bundle();
  b.allowable = std::vector<PointId>{0, 2};
  const auto path = dir.path / "bundle.json";
  save_bundle(b, path);
  const InstanceBundle loaded = load_bundle(path);
  CHECK(loaded.metric.data() == b.metric.data());
  CHECK(loaded.demand.probs == b.demand.probs);
  CHECK(loaded.k == b.k);
  REQUIRE(loaded.allowable.has_value());
  CHECK(*loaded.allowable == *b.allowable);

  // a second save/load must reproduce the same bytes
  const auto path2 = dir.path / "bundle2.json";
  save_bundle(loaded, path2);
  std::ifstream f1(path), f2(path2);
  const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("bundle load rejects bad probability sums and k = 0") {
  TempDir dir;
  const auto path = dir.path / "bad.json";
  {
    std::ofstream out(path);
    out << R"({"n":2,"k":1,"dist":[0,1,1,0],"probs":[0.5,0.4]})";
  }
  CHECK_THROWS_AS(load_bundle(path), Error);
  {
    std::ofstream out(path);
    out << R"({"n":2,"k":0,"dist":[0,1,1,0],"probs":[0.5,0.5]})";
  }
  CHECK_THROWS_AS(load_bundle(path), Error);
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK_THROWS_WITH_AS(load_bundle(path), doctest::Contains("parse"), Error);
}

TEST_CASE("malformed bundles raise domain errors, never crashes") {
  TempDir dir;
  const std::vector<std::string> bad_docs{
      R"({"n":2,"k":1,"dist":[0,1,1,0]})",                                    // probs missing
      R"({"n":2,"k":1,"probs":[0.5,0.5]})",                                   // no dist, no tree
      R"({"n":3,"k":1,"dist":[0,1,1,0],"probs":[0.5,0.5,0.0]})",              // dist too short
      R"({"n":2,"k":1,"dist":[[0,1],[1,0],[2,2]],"probs":[0.5,0.5]})",        // extra row
      R"({"n":2,"k":1,"dist":[0,1,1,0],"probs":[0.5,0.5],"allowable":[7]})",  // id range
      R"({"n":2,"k":1,"dist":[0,"x",1,0],"probs":[0.5,0.5]})",                // non-number
      R"({"n":2,"k":1,"dist":[0,1,1,0],"probs":[0.5,0.5],
          "tree":{"parent":[-1,0,0],"edge_cost":[0,1,1],"probs":[0,0.5,0.5]}})",  // n mismatch
      "[]",
      "42",
  };
  for (std::size_t i = 0; i < bad_docs.size(); ++i) {
    const auto path = dir.path / ("bad" + std::to_string(i) + ".json");
    std::ofstream(path) << bad_docs[i];
    CHECK_THROWS_AS(load_bundle(path), Error);
  }
}

TEST_CASE("allowable ids are deduplicated and sorted on ingest") {
  const InstanceBundle b = InstanceBundle::validated(
      MetricSpace::validated(3, {0, 1, 3, 1, 0, 2, 3, 2, 0}),
      DemandDistribution::validated({0.25, 0.5, 0.25}), 1,
      std::vector<PointId>{2, 0, 2});
  REQUIRE(b.allowable.has_value());
  CHECK(*b.allowable == std::vector<PointId>{0, 2});
  CHECK_THROWS_AS(InstanceBundle::validated(
                      MetricSpace::validated(2, {0, 1, 1, 0}),
                      DemandDistribution::validated({0.5, 0.5}), 1, std::vector<PointId>{}),
                  Error);
}

TEST_CASE("bundle accepts a dist_file CSV") {
  TempDir dir;
  {
    std::ofstream csv(dir.path / "m.csv");
    csv << "0,1,3\n1,0,2\n3,2,0\n";
    std::ofstream out(dir.path / "b.json");
    out << R"({"n":3,"k":2,"dist_file":"m.csv","probs":[0.25,0.5,0.25]})";
  }
  const InstanceBundle b = load_bundle(dir.path / "b.json");
  CHECK(b.metric(0, 2) == 3.0);
  CHECK(b.metric(1, 2) == 2.0);
}

TEST_CASE("bundle with a tree derives and cross-checks the matrix") {
  TempDir dir;
  {
    std::ofstream out(dir.path / "t.json");
    out << R"({"n":3,"k":2,"probs":[0,0.5,0.5],
               "tree":{"parent":[-1,0,0],"edge_cost":[0,1,1],"probs":[0,0.5,0.5]}})";
  }
  const InstanceBundle b = load_bundle(dir.path / "t.json");
  REQUIRE(b.tree.has_value());
  CHECK(b.metric(1, 2) == 2.0);

  // a valid matrix that disagrees with the tree must be rejected
  {
    std::ofstream out(dir.path / "bad.json");
    out << R"({"n":3,"k":2,"dist":[0,1,1,1,0,1.5,1,1.5,0],"probs":[0,0.5,0.5],
               "tree":{"parent":[-1,0,0],"edge_cost":[0,1,1],"probs":[0,0.5,0.5]}})";
  }
  CHECK_THROWS_AS(load_bundle(dir.path / "bad.json"), Error);
}

}  // TEST_SUITE
