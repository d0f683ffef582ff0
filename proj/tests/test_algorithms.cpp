#include <doctest.h>

#include <cmath>

#include "krp/algorithms.hpp"
#include "krp/eval.hpp"
#include "krp/instances.hpp"
#include "test_util.hpp"

using namespace krp;

TEST_SUITE("algorithms") {

TEST_CASE("rp on a point mass returns k copies") {
  std::vector<double> probs(4, 0.0);
  probs[2] = 1.0;
  const Placement s = rp_place(DemandDistribution{probs}, 5, 99);
  CHECK(s.counts == std::vector<std::int64_t>{0, 0, 5, 0});
}

TEST_CASE("rp is deterministic in the seed") {
  const DemandDistribution d = DemandDistribution::validated({0.2, 0.3, 0.5});
  CHECK(rp_place(d, 10, 7).counts == rp_place(d, 10, 7).counts);
  CHECK(rp_place(d, 10, 7).counts != rp_place(d, 10, 8).counts);
}

TEST_CASE("rp draw frequencies match the demand within 3 sigma") {
  const DemandDistribution d = DemandDistribution::validated({0.1, 0.2, 0.3, 0.4});
  const std::int64_t runs = 25000, k = 4;
  std::vector<double> freq(4, 0.0);
  for (std::int64_t r = 0; r < runs; ++r) {
    const Placement s = rp_place(d, k, 100000 + std::uint64_t(r));
    for (std::size_t i = 0; i < 4; ++i) freq[i] += double(s.counts[i]);
  }
  const double draws = double(runs * k);
  for (std::size_t i = 0; i < 4; ++i) {
    const double p = d.probs[i];
    const double sigma = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(freq[i] / draws - p) <= 3 * sigma);
  }
}

TEST_CASE("vrrp with zero residual is deterministic") {
  const Placement s = vrrp_place(DemandDistribution::validated({0.5, 0.5}), 2, 123);
  CHECK(s.counts == std::vector<std::int64_t>{1, 1});
  // every seed gives the same result
  CHECK(vrrp_place(DemandDistribution::validated({0.5, 0.5}), 2, 456).counts == s.counts);
}

TEST_CASE("vrrp residual draws follow the residual distribution") {
  // P = (0.6, 0.4), k = 2: one unit fixed at point 0, one residual unit with
  // probabilities (0.2, 0.8).
  const DemandDistribution d = DemandDistribution::validated({0.6, 0.4});
  std::int64_t extra_at_0 = 0;
  const std::int64_t runs = 100000;
  for (std::int64_t r = 0; r < runs; ++r) {
    const Placement s = vrrp_place(d, 2, 7777 + std::uint64_t(r));
    CHECK(s.counts[0] >= 1);  // deterministic floor
    extra_at_0 += s.counts[0] - 1;
  }
  const double freq = double(extra_at_0) / double(runs);
  const double sigma = std::sqrt(0.2 * 0.8 / double(runs));
  CHECK(std::abs(freq - 0.2) <= 3 * sigma);
}

TEST_CASE("vrrp expected counts equal k * P by residual enumeration") {
  SplitRng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + std::size_t(rng.next_double() * 3);
    const std::int64_t k = 1 + std::int64_t(rng.next_double() * 4);
    std::vector<double> probs(n);
    double total = 0.0;
    for (auto& p : probs) {
      p = rng.next_double() + 0.02;
      total += p;
    }
    for (auto& p : probs) p /= total;

    // expectation over residual outcomes, computed from the definition
    std::vector<double> floors(n), residual(n);
    double residual_total = 0.0;
    std::int64_t placed = 0;
    for (std::size_t x = 0; x < n; ++x) {
      floors[x] = std::floor(probs[x] * double(k));
      placed += std::int64_t(floors[x]);
      residual[x] = probs[x] - floors[x] / double(k);
      residual_total += residual[x];
    }
    const std::int64_t r = k - placed;
    std::vector<double> expected(floors.begin(), floors.end());
    if (r > 0)
      for (std::size_t x = 0; x < n; ++x)
        expected[x] += double(r) * residual[x] / residual_total;

    for (std::size_t x = 0; x < n; ++x)
      CHECK(expected[x] == doctest::Approx(double(k) * probs[x]).epsilon(1e-12));
  }
}

TEST_CASE("rrp equals rp when the support is allowable") {
  SplitRng rng(89);
  const InstanceBundle b = InstanceBundle::validated(
      testutil::random_metric(5, rng), DemandDistribution::validated({0.2, 0.2, 0.2, 0.2, 0.2}),
      3);
  const Placement direct = rp_place(b.demand, b.k, 31);
  CHECK(rrp_place(b, 31).counts == direct.counts);  // A defaults to all points

  InstanceBundle restricted = b;
  restricted.allowable = std::vector<PointId>{0, 1, 2, 3, 4};
  CHECK(rrp_place(restricted, 31).counts == direct.counts);
}

TEST_CASE("rrp projects a point-mass demand onto the allowable set") {
  InstanceBundle b = InstanceBundle::validated(
      MetricSpace::validated(3, {0, 1, 3, 1, 0, 2, 3, 2, 0}),
      DemandDistribution::validated({0.0, 1.0, 0.0}), 2,
      std::vector<PointId>{0, 2});
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    CHECK(rrp_place(b, seed).counts == std::vector<std::int64_t>{2, 0, 0});
}

TEST_CASE("tree dp on the two-leaf tree") {
  const TreeMetric tree = TreeMetric::from_binary({-1, 0, 0}, {0, 1, 1}, {0, 0.5, 0.5});
  const TreeDpResult result = tree_dp_solve(tree, 2);
  CHECK(result.cost == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.placement.counts == std::vector<std::int64_t>{0, 1, 1});
  CHECK(tree_exact_cost(tree, result.placement, 2) == doctest::Approx(result.cost));
}

TEST_CASE("tree dp on a single-node tree costs zero") {
  const TreeMetric tree = TreeMetric::from_binary({-1}, {0}, {1.0});
  const TreeDpResult result = tree_dp_solve(tree, 4);
  CHECK(result.cost == 0.0);
  CHECK(result.placement.counts == std::vector<std::int64_t>{4});
}

TEST_CASE("tree dp matches the exhaustive minimum on random trees") {
  SplitRng rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + std::size_t(rng.next_double() * 5);
    const TreeMetric tree = gen_random_tree(n, rng.next_u64());
    const std::int64_t k = 1 + std::int64_t(rng.next_double() * 3);
    const TreeDpResult result = tree_dp_solve(tree, k);

    double best = std::numeric_limits<double>::infinity();
    for_each_multiset(tree.node_count(), k, [&](const std::vector<std::int64_t>& counts) {
      best = std::min(best, tree_exact_cost(tree, Placement{counts}, k));
    });
    CHECK(result.cost == doctest::Approx(best).epsilon(1e-9));
    CHECK(tree_exact_cost(tree, result.placement, k) ==
          doctest::Approx(result.cost).epsilon(1e-9));
    CHECK(result.placement.k() == k);
  }
}

TEST_CASE("uckm: uniform demand over exactly k points is free") {
  SplitRng rng(101);
  const MetricSpace space = testutil::random_metric(5, rng);
  const DemandDistribution demand = DemandDistribution::validated({0, 1.0 / 3, 1.0 / 3, 0, 1.0 / 3});
  const UckmSolution sol = uckm_solve(space, demand, 3);
  CHECK(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sol.placement.counts == std::vector<std::int64_t>{0, 1, 1, 0, 1});
}

TEST_CASE("uckm two-point example") {
  const MetricSpace space = MetricSpace::validated(2, {0, 10, 10, 0});
  const UckmSolution sol = uckm_solve(space, DemandDistribution::validated({0.5, 0.5}), 1);
  CHECK(sol.objective == doctest::Approx(5.0));
  CHECK(sol.placement.k() == 1);
  CHECK(sol.status == SolveStatus::Optimal);
  CHECK(sol.optimality_gap == doctest::Approx(0.0));
}

TEST_CASE("uckm matches the exhaustive-Q oracle") {
  SplitRng rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + std::size_t(rng.next_double() * 4);
    const std::int64_t k = 1 + std::int64_t(rng.next_double() * 3);
    const MetricSpace space = testutil::random_metric(n, rng);
    std::vector<double> probs(n);
    double total = 0.0;
    for (auto& p : probs) {
      p = rng.next_double() + 0.01;
      total += p;
    }
    for (auto& p : probs) p /= total;
    const DemandDistribution demand = DemandDistribution::validated(probs);

    double best = std::numeric_limits<double>::infinity();
    for_each_multiset(n, k, [&](const std::vector<std::int64_t>& counts) {
      best = std::min(best,
                      wasserstein(space, point_mass(Placement{counts}), demand).total_cost);
    });

    const UckmSolution sol = uckm_solve(space, demand, k);
    CHECK(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-11));
    CHECK(sol.objective ==
          wasserstein(space, point_mass(sol.placement), demand).total_cost);
    CHECK(sol.transport.total_cost == sol.objective);
    // transport marginals: rows = Q/k, columns = P
    std::vector<double> row(n, 0.0), col(n, 0.0);
    for (const auto& e : sol.transport.entries) {
      row[std::size_t(e.source)] += e.mass;
      col[std::size_t(e.target)] += e.mass;
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(row[i] == doctest::Approx(double(sol.placement.counts[i]) / double(k)).epsilon(1e-7));
      CHECK(col[i] == doctest::Approx(demand.probs[i]).epsilon(1e-7));
    }
  }
}

TEST_CASE("uckm placement is within 3x of the true objective on tiny instances") {
  // exact solver for the surrogate (rho = 1), so the placement must be a
  // (rho + 2)-approximation of the matching objective
  SplitRng rng(113);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 2 + std::size_t(rng.next_double() * 3);
    const std::int64_t k = 1 + std::int64_t(rng.next_double() * 3);
    const InstanceBundle b = InstanceBundle::validated(
        testutil::random_metric(n, rng), gen_random_distribution(n, rng.next_u64(), 0.8), k);
    const UckmSolution sol = uckm_solve(b.metric, b.demand, k);
    const double uckm_cost = exact_cost_enumeration(b, sol.placement);
    double optimum = std::numeric_limits<double>::infinity();
    for_each_multiset(n, k, [&](const std::vector<std::int64_t>& counts) {
      optimum = std::min(optimum, exact_cost_enumeration(b, Placement{counts}));
    });
    CHECK(uckm_cost <= 3.0 * optimum + 1e-9);
  }
}

TEST_CASE("uckm honors the time limit and reports a bound") {
  SplitRng rng(107);
  const MetricSpace space = testutil::random_metric(8, rng);
  const DemandDistribution demand = gen_random_distribution(8, 5, 0.7);
  UckmOptions opt;
  opt.time_limit_s = 0.0;
  const UckmSolution sol = uckm_solve(space, demand, 4, opt);
  CHECK(sol.status == SolveStatus::TimeLimit);
  CHECK(sol.placement.k() == 4);
  CHECK(sol.lower_bound <= sol.objective + 1e-12);
  CHECK(sol.optimality_gap >= 0.0);
}

TEST_CASE("uckm logs incumbent improvements") {
  SplitRng rng(109);
  const MetricSpace space = testutil::random_metric(6, rng);
  const DemandDistribution demand = gen_random_distribution(6, 11, 0.8);
  UckmOptions opt;
  std::vector<UckmLogEntry> log;
  opt.on_incumbent = [&](const UckmLogEntry& e) { log.push_back(e); };
  const UckmSolution sol = uckm_solve(space, demand, 3, opt);
  CHECK(sol.status == SolveStatus::Optimal);
  REQUIRE(!log.empty());
  CHECK(log.back().incumbent >= sol.objective - 1e-12);
  for (const auto& e : log) CHECK(e.gap >= 0.0);
}

}  // TEST_SUITE
