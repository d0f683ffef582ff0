#ifndef KRP_EVAL_HPP
#define KRP_EVAL_HPP

#include <functional>
#include <span>

#include <json.hpp>

#include "krp/core.hpp"
#include "krp/rng.hpp"

namespace krp {

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;       // sample standard deviation / sqrt(samples)
  double ci95_halfwidth = 0.0;  // 1.96 * std_error
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const CostEstimate& est);

// Inverse-CDF sampler over a demand distribution. Zero-probability points
// are never drawn.
class DemandSampler {
 public:
  explicit DemandSampler(const DemandDistribution& demand) : DemandSampler(demand.probs) {}
  // Raw nonnegative weights; normalized internally.
  explicit DemandSampler(const std::vector<double>& weights);
  PointId draw(SplitRng& rng) const;
  // k i.i.d. draws as a count vector.
  Placement sample_multiset(std::int64_t k, SplitRng& rng) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

// Fixed-order pairwise summation; deterministic for a given value order.
double pairwise_sum(std::span<const double> values);

// Monte Carlo estimate of E_{X~P_k}[d_k(s, X)]. Each sample uses its own
// child RNG stream and the reduction is fixed-order, so the result is
// bit-identical for a given (seed, samples) regardless of `threads`.
CostEstimate mc_cost(const InstanceBundle& bundle, const Placement& s, std::int64_t samples,
                     std::uint64_t seed, int threads = 1);

// Number of k-multisets of n points, C(n+k-1, k); throws too_large on overflow.
std::uint64_t multiset_count(std::size_t n, std::int64_t k);

// Enumerates every k-multiset over n points in colexicographic order.
void for_each_multiset(std::size_t n, std::int64_t k,
                       const std::function<void(const std::vector<std::int64_t>&)>& fn);

// Multinomial probability of drawing the multiset `counts` in k i.i.d.
// draws from `demand`, computed in log space.
double multiset_probability(const DemandDistribution& demand,
                            const std::vector<std::int64_t>& counts);

// Exact objective by full enumeration of demand realizations. Requires
// C(n+k-1, k) <= 1e5.
double exact_cost_enumeration(const InstanceBundle& bundle, const Placement& s);

// B(t, p) = E|t - Binomial(k, p)| in O(k) via the multiplicative pmf
// recurrence, with a log-space fallback when the starting term underflows.
double binom_abs_dev(std::int64_t t, double p, std::int64_t k);

// Exact objective on a tree metric: sum over edges of B(|s in T_e|, p_e) * c(e).
double tree_exact_cost(const TreeMetric& tree, const Placement& s, std::int64_t k);

// Per-realization identity: sum_e ||x in T_e| - |s in T_e|| * c(e), equal to
// the matching cost on the tree's induced metric (no-crossing property).
double edge_discrepancy_cost(const TreeMetric& tree, const Placement& s, const Placement& x);

}  // namespace krp

#endif
