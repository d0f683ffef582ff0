#ifndef KRP_MATCHING_HPP
#define KRP_MATCHING_HPP

#include <span>

#include <json.hpp>

#include "krp/core.hpp"

namespace krp {

// Minimum-cost perfect matching between two k-multisets, aggregated by
// distinct point: `multiplicity` units travel from `source` to `target`.
struct MatchingPlan {
  struct Pair {
    PointId source;
    PointId target;
    std::int64_t multiplicity;
    double distance;
  };
  std::vector<Pair> pairs;
  double total_cost = 0.0;
};

// Minimum-cost transport between two discrete distributions.
struct TransportPlan {
  struct Entry {
    PointId source;
    PointId target;
    double mass;
    double distance;
  };
  std::vector<Entry> entries;
  double total_cost = 0.0;
};

// d_k(u, v): cost of the min-cost perfect matching in the complete bipartite
// graph between the two k-multisets. Solved as min-cost flow on the support
// graph (aggregated by distinct points) via successive shortest augmenting
// paths with node potentials.
MatchingPlan matching_cost(const MetricSpace& space, const Placement& u, const Placement& v);

// d_W(mu, nu): minimum-cost transport plan between two distributions over
// the same space. Same engine as matching_cost with real-valued masses.
TransportPlan wasserstein(const MetricSpace& space, const DemandDistribution& mu,
                          const DemandDistribution& nu);

// D_u: the point-mass distribution with mass counts[x]/k at each point.
DemandDistribution point_mass(const Placement& u);

// T(S): map each unit of `s` to its nearest allowable point, ties broken by
// lowest point id. Minimizes d_k(s, .) over k-multisets drawn from
// `allowable` because the objective separates across the k units.
Placement project_to_allowable(const MetricSpace& space, const Placement& s,
                               std::span<const PointId> allowable);

// Testing oracle: minimum over all k! permutations of the expanded
// multisets. Rejects k > 8.
double brute_force_matching(const MetricSpace& space, const Placement& u, const Placement& v);

nlohmann::json to_json(const MatchingPlan& plan);
nlohmann::json to_json(const TransportPlan& plan);

}  // namespace krp

#endif
