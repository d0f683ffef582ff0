#include "krp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "krp/matching.hpp"

namespace krp {

using nlohmann::json;

json to_json(const CostEstimate& est) {
  return json{{"mean", est.mean},
              {"stderr", est.std_error},
              {"ci95", est.ci95_halfwidth},
              {"samples", est.samples},
              {"seed", est.seed}};
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

DemandSampler::DemandSampler(const std::vector<double>& weights) {
  if (weights.empty()) fail(Errc::invalid_argument, "empty distribution");
  cdf_.resize(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) fail(Errc::invalid_argument, "negative weight");
    acc += weights[i];
    cdf_[i] = acc;
  }
  if (acc <= 0.0) fail(Errc::invalid_argument, "distribution has no mass");
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;  // guard against rounding below a drawn value
}

PointId DemandSampler::draw(SplitRng& rng) const {
  const double r = rng.next_double();  // in [0, 1)
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), r);
  return static_cast<PointId>(it - cdf_.begin());
}

Placement DemandSampler::sample_multiset(std::int64_t k, SplitRng& rng) const {
  Placement x = Placement::zeros(cdf_.size());
  for (std::int64_t i = 0; i < k; ++i) ++x.counts[draw(rng)];
  return x;
}

// ---------------------------------------------------------------------------
// Deterministic reduction
// ---------------------------------------------------------------------------

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

CostEstimate mc_cost(const InstanceBundle& bundle, const Placement& s, std::int64_t samples,
                     std::uint64_t seed, int threads) {
  if (samples < 2) fail(Errc::invalid_argument, "mc_cost requires samples >= 2");
  if (s.counts.size() != bundle.metric.size())
    fail(Errc::dimension_mismatch, "placement length does not match the metric space");
  if (s.k() != bundle.k)
    fail(Errc::k_mismatch, "placement has " + std::to_string(s.k()) + " units, bundle expects " +
                               std::to_string(bundle.k));
  threads = std::clamp(threads, 1, 64);

  const DemandSampler sampler(bundle.demand);
  const SplitRng root(seed);
  std::vector<double> costs(static_cast<std::size_t>(samples));

  // Sample j always uses child stream j, so the estimate is bit-identical
  // regardless of how samples are split across workers.
  auto worker = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t j = lo; j < hi; ++j) {
      SplitRng rng = root.child(static_cast<std::uint64_t>(j));
      const Placement x = sampler.sample_multiset(bundle.k, rng);
      costs[static_cast<std::size_t>(j)] = matching_cost(bundle.metric, s, x).total_cost;
    }
  };

  if (threads == 1 || samples < 4 * threads) {
    worker(0, samples);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::int64_t chunk = (samples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::int64_t lo = t * chunk;
      const std::int64_t hi = std::min<std::int64_t>(samples, lo + chunk);
      pool.emplace_back([&, t, lo, hi] {
        try {
          if (lo < hi) worker(lo, hi);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  CostEstimate est;
  est.samples = samples;
  est.seed = seed;
  est.mean = pairwise_sum(costs) / static_cast<double>(samples);
  std::vector<double> sq(costs.size());
  for (std::size_t j = 0; j < costs.size(); ++j) sq[j] = (costs[j] - est.mean) * (costs[j] - est.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(samples - 1);
  est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
  est.ci95_halfwidth = 1.96 * est.std_error;
  return est;
}

// ---------------------------------------------------------------------------
// Exact enumeration
// ---------------------------------------------------------------------------

std::uint64_t multiset_count(std::size_t n, std::int64_t k) {
  if (n == 0 || k < 0) fail(Errc::invalid_argument, "multiset_count needs n >= 1, k >= 0");
  // C(n+k-1, k), exact at every step; saturates instead of overflowing.
  std::uint64_t c = 1;
  const std::uint64_t a = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(k) - 1;
  for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(k); ++i) {
    if (c > (UINT64_MAX / 4) / (a - static_cast<std::uint64_t>(k) + i)) return UINT64_MAX;
    c = c * (a - static_cast<std::uint64_t>(k) + i) / i;
  }
  return c;
}

namespace {

void enumerate_rec(std::vector<std::int64_t>& counts, std::size_t pos, std::int64_t remaining,
                   const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  if (pos + 1 == counts.size()) {
    counts[pos] = remaining;
    fn(counts);
    counts[pos] = 0;
    return;
  }
  for (std::int64_t c = 0; c <= remaining; ++c) {
    counts[pos] = c;
    enumerate_rec(counts, pos + 1, remaining - c, fn);
  }
  counts[pos] = 0;
}

}  // namespace

void for_each_multiset(std::size_t n, std::int64_t k,
                       const std::function<void(const std::vector<std::int64_t>&)>& fn) {
  if (n == 0 || k < 0) fail(Errc::invalid_argument, "for_each_multiset needs n >= 1, k >= 0");
  std::vector<std::int64_t> counts(n, 0);
  enumerate_rec(counts, 0, k, fn);
}

double multiset_probability(const DemandDistribution& demand,
                            const std::vector<std::int64_t>& counts) {
  if (demand.size() != counts.size()) fail(Errc::dimension_mismatch, "length mismatch");
  std::int64_t k = 0;
  // log( k! / prod c_x! * prod P(x)^c_x ), safe for any k.
  double log_p = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::int64_t c = counts[i];
    if (c == 0) continue;
    if (demand.probs[i] == 0.0) return 0.0;
    k += c;
    log_p += static_cast<double>(c) * std::log(demand.probs[i]) - std::lgamma(double(c) + 1.0);
  }
  log_p += std::lgamma(static_cast<double>(k) + 1.0);
  return std::exp(log_p);
}

double exact_cost_enumeration(const InstanceBundle& bundle, const Placement& s) {
  const std::size_t n = bundle.metric.size();
  if (s.counts.size() != n)
    fail(Errc::dimension_mismatch, "placement length does not match the metric space");
  if (s.k() != bundle.k) fail(Errc::k_mismatch, "placement size differs from bundle k");
  if (multiset_count(n, bundle.k) > 100000)
    fail(Errc::too_large, "exact enumeration supports C(n+k-1,k) <= 1e5");

  double total = 0.0;
  for_each_multiset(n, bundle.k, [&](const std::vector<std::int64_t>& counts) {
    const double p = multiset_probability(bundle.demand, counts);
    if (p == 0.0) return;
    total += p * matching_cost(bundle.metric, s, Placement{counts}).total_cost;
  });
  return total;
}

// ---------------------------------------------------------------------------
// B(t, p) and tree evaluation
// ---------------------------------------------------------------------------

double binom_abs_dev(std::int64_t t, double p, std::int64_t k) {
  if (k < 1) fail(Errc::invalid_argument, "binom_abs_dev needs k >= 1");
  if (t < 0 || t > k)
    fail(Errc::invalid_argument, "binom_abs_dev needs 0 <= t <= k, got t = " + std::to_string(t));
  if (!(p >= 0.0 && p <= 1.0))
    fail(Errc::invalid_argument, "binom_abs_dev needs p in [0,1], got " + std::to_string(p));
  if (p == 0.0) return static_cast<double>(t);
  if (p == 1.0) return static_cast<double>(k - t);

  const double q = 1.0 - p;
  const double ratio = p / q;
  double pmf = std::pow(q, static_cast<double>(k));
  if (pmf >= std::numeric_limits<double>::min()) {
    // pmf(s+1) = pmf(s) * (k-s)/(s+1) * p/(1-p)
    double total = 0.0;
    for (std::int64_t s = 0; s <= k; ++s) {
      total += std::abs(static_cast<double>(t - s)) * pmf;
      pmf *= ratio * static_cast<double>(k - s) / static_cast<double>(s + 1);
    }
    return total;
  }

  // (1-p)^k underflows; evaluate each term in log space instead.
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  double log_choose = 0.0;  // log C(k, s), updated incrementally
  double total = 0.0;
  for (std::int64_t s = 0; s <= k; ++s) {
    const double log_term =
        log_choose + static_cast<double>(s) * log_p + static_cast<double>(k - s) * log_q;
    total += std::abs(static_cast<double>(t - s)) * std::exp(log_term);
    if (s < k) log_choose += std::log(static_cast<double>(k - s)) - std::log(static_cast<double>(s + 1));
  }
  return total;
}

namespace {

// Units of `s` inside each node's subtree, bottom-up.
std::vector<std::int64_t> below_counts(const TreeMetric& tree, const Placement& s) {
  std::vector<std::int64_t> below(tree.node_count(), 0);
  for (int u : tree.postorder()) {
    below[u] = s.counts[u];
    if (!tree.is_leaf(u)) below[u] += below[tree.left(u)] + below[tree.right(u)];
  }
  return below;
}

}  // namespace

double tree_exact_cost(const TreeMetric& tree, const Placement& s, std::int64_t k) {
  if (s.counts.size() != tree.node_count())
    fail(Errc::dimension_mismatch, "placement length does not match the tree");
  if (s.k() != k) fail(Errc::k_mismatch, "placement size differs from k");
  const auto below = below_counts(tree, s);
  double total = 0.0;
  for (std::size_t u = 0; u < tree.node_count(); ++u) {
    if (int(u) == tree.root()) continue;
    total += binom_abs_dev(below[u], tree.subtree_mass(int(u)), k) * tree.edge_cost(int(u));
  }
  return total;
}

double edge_discrepancy_cost(const TreeMetric& tree, const Placement& s, const Placement& x) {
  if (s.counts.size() != tree.node_count() || x.counts.size() != tree.node_count())
    fail(Errc::dimension_mismatch, "placement length does not match the tree");
  if (s.k() != x.k()) fail(Errc::k_mismatch, "multisets have different sizes");
  const auto below_s = below_counts(tree, s);
  const auto below_x = below_counts(tree, x);
  double total = 0.0;
  for (std::size_t u = 0; u < tree.node_count(); ++u) {
    if (int(u) == tree.root()) continue;
    total += static_cast<double>(std::abs(below_x[u] - below_s[u])) * tree.edge_cost(int(u));
  }
  return total;
}

}  // namespace krp
