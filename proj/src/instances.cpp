#include "krp/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "krp/rng.hpp"

namespace krp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CoverageInstance
// ---------------------------------------------------------------------------

CoverageInstance CoverageInstance::validated(std::int64_t universe_size, std::int64_t cover_budget,
                                             double epsilon,
                                             std::vector<std::vector<std::int32_t>> sets) {
  if (universe_size < 1 || cover_budget < 1)
    fail(Errc::invalid_argument, "coverage instance needs N >= 1 and l >= 1");
  if (universe_size % cover_budget != 0)
    fail(Errc::invalid_argument, "N = " + std::to_string(universe_size) +
                                     " is not a multiple of l = " + std::to_string(cover_budget));
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    fail(Errc::invariant_violation, "epsilon must lie in (0, 1] for the reduction metric");
  if (sets.empty()) fail(Errc::invariant_violation, "coverage instance has no sets");
  const std::int64_t set_size = universe_size / cover_budget;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (static_cast<std::int64_t>(sets[s].size()) != set_size)
      fail(Errc::invariant_violation, "set " + std::to_string(s) + " has " +
                                          std::to_string(sets[s].size()) + " elements, expected " +
                                          std::to_string(set_size));
    std::set<std::int32_t> seen;
    for (std::int32_t e : sets[s]) {
      if (e < 0 || e >= universe_size)
        fail(Errc::invariant_violation, "set " + std::to_string(s) + " has out-of-range element");
      if (!seen.insert(e).second)
        fail(Errc::invariant_violation, "set " + std::to_string(s) + " has a repeated element");
    }
  }
  CoverageInstance cov;
  cov.universe_size = universe_size;
  cov.cover_budget = cover_budget;
  cov.epsilon = epsilon;
  cov.sets = std::move(sets);
  return cov;
}

std::vector<std::string> CoverageInstance::hardness_warnings() const {
  std::vector<std::string> warnings;
  if (epsilon > 0.06)
    warnings.push_back("epsilon > 0.06: outside the hardness regime");
  const double lo = 2.0 * static_cast<double>(cover_budget) / static_cast<double>(universe_size);
  if (epsilon < lo)
    warnings.push_back("epsilon < 2l/N: optimal placements may use element points");
  return warnings;
}

CoverageInstance coverage_from_json(const json& doc) {
  try {
    return CoverageInstance::validated(doc.at("N").get<std::int64_t>(),
                                       doc.at("l").get<std::int64_t>(),
                                       doc.at("epsilon").get<double>(),
                                       doc.at("sets").get<std::vector<std::vector<std::int32_t>>>());
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("coverage JSON: ") + e.what());
  }
}

json coverage_to_json(const CoverageInstance& cov) {
  return json{{"N", cov.universe_size},
              {"l", cov.cover_budget},
              {"epsilon", cov.epsilon},
              {"sets", cov.sets}};
}

// ---------------------------------------------------------------------------
// Special instances
// ---------------------------------------------------------------------------

InstanceBundle gen_star(std::int64_t n, std::int64_t k) {
  if (n < 3) fail(Errc::invalid_argument, "star instance needs n >= 3");
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");
  const std::size_t sz = static_cast<std::size_t>(n);
  std::vector<double> dist(sz * sz, 2.0);
  std::vector<std::string> labels(sz);
  labels[0] = "C";
  for (std::size_t i = 0; i < sz; ++i) {
    dist[i * sz + i] = 0.0;
    dist[i] = dist[i * sz] = (i == 0) ? 0.0 : 1.0;  // center row/column
    if (i > 0) labels[i] = "x" + std::to_string(i);
  }
  std::vector<double> probs(sz, 1.0 / static_cast<double>(n - 1));
  probs[0] = 0.0;
  return InstanceBundle::validated(MetricSpace::validated(sz, std::move(dist), std::move(labels)),
                                   DemandDistribution::validated(std::move(probs)), k);
}

InstanceBundle gen_coverage_reduction(const CoverageInstance& cov) {
  const std::int64_t N = cov.universe_size;
  const std::int64_t m = static_cast<std::int64_t>(cov.sets.size());
  const std::size_t n = static_cast<std::size_t>(N + m);
  const double far = 2.0 - cov.epsilon;

  std::vector<std::vector<char>> member(cov.sets.size(), std::vector<char>(N, 0));
  for (std::size_t s = 0; s < cov.sets.size(); ++s)
    for (std::int32_t e : cov.sets[s]) member[s][e] = 1;

  std::vector<double> dist(n * n, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool i_elem = i < std::size_t(N);
      const bool j_elem = j < std::size_t(N);
      double d;
      if (i_elem && j_elem)
        d = 2.0;
      else if (!i_elem && !j_elem)
        d = 1.0;
      else {
        const std::size_t set_idx = (i_elem ? j : i) - std::size_t(N);
        const std::size_t elem_idx = i_elem ? i : j;
        d = member[set_idx][elem_idx] ? 1.0 : far;
      }
      at(i, j) = at(j, i) = d;
    }
  }

  std::vector<std::string> labels(n);
  for (std::int64_t e = 0; e < N; ++e) labels[e] = "e" + std::to_string(e);
  for (std::int64_t s = 0; s < m; ++s) labels[N + s] = "S" + std::to_string(s);

  std::vector<double> probs(n, 0.0);
  for (std::int64_t e = 0; e < N; ++e) probs[e] = 1.0 / static_cast<double>(N);

  return InstanceBundle::validated(MetricSpace::validated(n, std::move(dist), std::move(labels)),
                                   DemandDistribution::validated(std::move(probs)),
                                   cov.cover_budget);
}

CoverageInstance gen_full_cover_system(std::int64_t universe_size, std::int64_t cover_budget,
                                       std::int64_t decoy_sets, double epsilon,
                                       std::uint64_t seed) {
  if (universe_size < 1 || cover_budget < 1 || universe_size % cover_budget != 0)
    fail(Errc::invalid_argument, "l must divide N");
  const std::int64_t set_size = universe_size / cover_budget;

  std::vector<std::vector<std::int32_t>> sets;
  for (std::int64_t s = 0; s < cover_budget; ++s) {
    std::vector<std::int32_t> block(set_size);
    std::iota(block.begin(), block.end(), static_cast<std::int32_t>(s * set_size));
    sets.push_back(std::move(block));
  }
  SplitRng root(seed);
  for (std::int64_t d = 0; d < decoy_sets; ++d) {
    SplitRng rng = root.child(static_cast<std::uint64_t>(d));
    std::vector<std::int32_t> pool(universe_size);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::int64_t i = 0; i < set_size; ++i) {  // partial Fisher-Yates
      const std::size_t j =
          std::size_t(i) + std::size_t(rng.next_double() * double(universe_size - i));
      std::swap(pool[i], pool[std::min(j, pool.size() - 1)]);
    }
    pool.resize(set_size);
    std::sort(pool.begin(), pool.end());
    sets.push_back(std::move(pool));
  }

  // Set points dominate element points only when epsilon >= 2l/N; keep the
  // metric valid by capping at 1.
  const double floor_eps = 2.0 * static_cast<double>(cover_budget) / double(universe_size);
  const double eps = std::min(1.0, std::max(epsilon, floor_eps));
  return CoverageInstance::validated(universe_size, cover_budget, eps, std::move(sets));
}

// ---------------------------------------------------------------------------
// Random fixtures
// ---------------------------------------------------------------------------

MetricSpace gen_random_euclidean(std::size_t n, std::uint64_t seed) {
  if (n < 2) fail(Errc::invalid_argument, "need n >= 2 points");
  SplitRng rng{seed};
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rng.next_double();
    ys[i] = rng.next_double();
  }
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
      dist[i * n + j] = dist[j * n + i] = d;
    }
  return MetricSpace::unchecked(n, std::move(dist));
}

namespace {

double gaussian(SplitRng& rng) {
  const double u1 = rng.next_double_pos();
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Marsaglia-Tsang, with the standard boost for shape < 1.
double gamma_draw(SplitRng& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.next_double_pos();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = gaussian(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

DemandDistribution gen_random_distribution(std::size_t n, std::uint64_t seed,
                                           double concentration) {
  if (n < 1) fail(Errc::invalid_argument, "need n >= 1");
  if (!(concentration > 0.0)) fail(Errc::invalid_argument, "concentration must be > 0");
  SplitRng rng{seed};
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = gamma_draw(rng, concentration);
    total += w[i];
  }
  if (total <= 0.0) {  // all draws underflowed; fall back to uniform
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
  } else {
    for (double& v : w) v /= total;
  }
  return DemandDistribution::validated(std::move(w));
}

TreeMetric gen_random_tree(std::size_t n, std::uint64_t seed) {
  if (n < 2) fail(Errc::invalid_argument, "need n >= 2 nodes");
  SplitRng rng{seed};
  GeneralTree t;
  t.parent.resize(n);
  t.edge_cost.resize(n);
  t.parent[0] = -1;
  t.edge_cost[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    // uniform random recursive tree
    t.parent[i] = static_cast<int>(rng.next_double() * static_cast<double>(i));
    t.edge_cost[i] = rng.next_double_pos();
  }
  t.probs = gen_random_distribution(n, rng.child(0x7265657331ULL).next_u64(), 1.0).probs;
  return binarize_tree(t);
}

// ---------------------------------------------------------------------------
// Bundle builders
// ---------------------------------------------------------------------------

InstanceBundle gen_euclidean_bundle(std::size_t n, std::int64_t k, std::uint64_t seed,
                                    double concentration) {
  SplitRng root{seed};
  MetricSpace space = gen_random_euclidean(n, root.child(1).next_u64());
  DemandDistribution demand = gen_random_distribution(n, root.child(2).next_u64(), concentration);
  return InstanceBundle::validated(std::move(space), std::move(demand), k);
}

InstanceBundle gen_tree_bundle(std::size_t n, std::int64_t k, std::uint64_t seed) {
  TreeMetric tree = gen_random_tree(n, seed);
  MetricSpace space = tree.induced_metric();
  DemandDistribution demand = tree.probs();
  return InstanceBundle::validated(std::move(space), std::move(demand), k, std::nullopt,
                                   std::move(tree));
}

}  // namespace krp
