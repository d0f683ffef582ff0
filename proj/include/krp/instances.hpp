#ifndef KRP_INSTANCES_HPP
#define KRP_INSTANCES_HPP

#include <json.hpp>

#include "krp/core.hpp"

namespace krp {

// Maximum-coverage instance for the reduction: universe [N], m sets of size
// N/l each, cover budget l, gap parameter epsilon.
struct CoverageInstance {
  std::int64_t universe_size = 0;  // N
  std::int64_t cover_budget = 0;   // l (the reduction sets k = l)
  double epsilon = 0.05;
  std::vector<std::vector<std::int32_t>> sets;  // 0-based element ids

  // Hard checks: set sizes N/l, ids in range, l divides N, epsilon in (0,1].
  // The hardness-regime conditions (epsilon <= 0.06 and epsilon >= 2l/N) are
  // mutually unsatisfiable at small N, so they are reported as warnings.
  static CoverageInstance validated(std::int64_t universe_size, std::int64_t cover_budget,
                                    double epsilon, std::vector<std::vector<std::int32_t>> sets);
  std::vector<std::string> hardness_warnings() const;
};

CoverageInstance coverage_from_json(const nlohmann::json& doc);
nlohmann::json coverage_to_json(const CoverageInstance& cov);

// Star tightness instance: central point 0 at distance 1 from the n-1
// non-central points, which are at distance 2 from each other; demand
// uniform over the non-central points, zero at the center.
InstanceBundle gen_star(std::int64_t n, std::int64_t k);

// Reduction from coverage to placement: one point per element plus one per
// set; d(element, set) = 1 if member else 2 - epsilon, d between elements 2,
// d between sets 1; demand uniform over element points; k = cover budget.
InstanceBundle gen_coverage_reduction(const CoverageInstance& cov);

// Full-covering set system: l disjoint sets partitioning [N] plus
// `decoy_sets` additional random sets of the same size. epsilon is raised
// to 2l/N when the requested value is below it (capped at 1).
CoverageInstance gen_full_cover_system(std::int64_t universe_size, std::int64_t cover_budget,
                                       std::int64_t decoy_sets = 0, double epsilon = 0.05,
                                       std::uint64_t seed = 0);

// Test fixtures.
MetricSpace gen_random_euclidean(std::size_t n, std::uint64_t seed);
TreeMetric gen_random_tree(std::size_t n, std::uint64_t seed);
DemandDistribution gen_random_distribution(std::size_t n, std::uint64_t seed,
                                           double concentration = 1.0);

// Bundle builders used by the CLI `gen` subcommands.
InstanceBundle gen_euclidean_bundle(std::size_t n, std::int64_t k, std::uint64_t seed,
                                    double concentration = 1.0);
InstanceBundle gen_tree_bundle(std::size_t n, std::int64_t k, std::uint64_t seed);

}  // namespace krp

#endif
