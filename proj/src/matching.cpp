#include "krp/matching.hpp"

#include <algorithm>
#include <cmath>

#include "flow.hpp"

namespace krp {

using nlohmann::json;

namespace {

struct Support {
  std::vector<PointId> points;
  std::vector<double> amounts;
};

template <typename T>
Support support_of(const std::vector<T>& values) {
  Support s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > T(0)) {
      s.points.push_back(static_cast<PointId>(i));
      s.amounts.push_back(static_cast<double>(values[i]));
    }
  }
  return s;
}

// Transportation network: 0 = source, 1 = sink, then supply nodes, then
// demand nodes. Returns the flow on every (supply, demand) arc.
struct TransportResult {
  std::vector<std::vector<double>> flows;  // [supply][demand]
  double total = 0.0;
};

TransportResult solve_transport(const MetricSpace& space, const Support& from, const Support& to,
                                double amount) {
  const int ns = static_cast<int>(from.points.size());
  const int nt = static_cast<int>(to.points.size());
  flow::MinCostFlow net(2 + ns + nt);
  std::vector<std::vector<int>> mid_arcs(ns, std::vector<int>(nt));
  for (int i = 0; i < ns; ++i) net.add_arc(0, 2 + i, from.amounts[i], 0.0);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j)
      mid_arcs[i][j] = net.add_arc(2 + i, 2 + ns + j, amount, space(from.points[i], to.points[j]));
  for (int j = 0; j < nt; ++j) net.add_arc(2 + ns + j, 1, to.amounts[j], 0.0);

  const auto result = net.solve(0, 1, amount);
  if (std::abs(result.flow - amount) > 1e-9 * std::max(1.0, amount))
    fail(Errc::internal, "transport problem is infeasible");

  TransportResult out;
  out.flows.assign(ns, std::vector<double>(nt, 0.0));
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) out.flows[i][j] = net.arc_flow(mid_arcs[i][j]);
  out.total = result.cost;
  return out;
}

}  // namespace

MatchingPlan matching_cost(const MetricSpace& space, const Placement& u, const Placement& v) {
  const std::size_t n = space.size();
  if (u.counts.size() != n || v.counts.size() != n)
    fail(Errc::dimension_mismatch, "placement length does not match the metric space");
  const std::int64_t k = u.k();
  if (k != v.k())
    fail(Errc::size_mismatch, "multisets have different sizes: " + std::to_string(k) + " vs " +
                                  std::to_string(v.k()));
  if (k < 1) fail(Errc::invariant_violation, "multisets must be nonempty");

  // Canonical argument order makes d_k(u,v) and d_k(v,u) bitwise identical.
  const bool swapped = v.counts < u.counts;
  const Placement& a = swapped ? v : u;
  const Placement& b = swapped ? u : v;

  const Support sa = support_of(a.counts);
  const Support sb = support_of(b.counts);
  const TransportResult solved = solve_transport(space, sa, sb, static_cast<double>(k));

  MatchingPlan plan;
  double total = 0.0;
  for (std::size_t i = 0; i < sa.points.size(); ++i) {
    for (std::size_t j = 0; j < sb.points.size(); ++j) {
      const std::int64_t mult = std::llround(solved.flows[i][j]);
      if (mult == 0) continue;
      const PointId src = swapped ? sb.points[j] : sa.points[i];
      const PointId dst = swapped ? sa.points[i] : sb.points[j];
      plan.pairs.push_back({src, dst, mult, space(sa.points[i], sb.points[j])});
      total += static_cast<double>(mult) * space(sa.points[i], sb.points[j]);
    }
  }
  plan.total_cost = total;
  return plan;
}

TransportPlan wasserstein(const MetricSpace& space, const DemandDistribution& mu,
                          const DemandDistribution& nu) {
  const std::size_t n = space.size();
  if (mu.size() != n || nu.size() != n)
    fail(Errc::dimension_mismatch, "distribution length does not match the metric space");

  const Support sa = support_of(mu.probs);
  const Support sb = support_of(nu.probs);
  const TransportResult solved = solve_transport(space, sa, sb, 1.0);

  TransportPlan plan;
  double total = 0.0;
  for (std::size_t i = 0; i < sa.points.size(); ++i) {
    for (std::size_t j = 0; j < sb.points.size(); ++j) {
      const double mass = solved.flows[i][j];
      if (mass <= 0.0) continue;
      plan.entries.push_back({sa.points[i], sb.points[j], mass, space(sa.points[i], sb.points[j])});
      total += mass * space(sa.points[i], sb.points[j]);
    }
  }
  plan.total_cost = total;
  return plan;
}

DemandDistribution point_mass(const Placement& u) {
  const std::int64_t k = u.k();
  if (k < 1) fail(Errc::invariant_violation, "placement is empty");
  std::vector<double> probs(u.counts.size());
  for (std::size_t i = 0; i < u.counts.size(); ++i)
    probs[i] = static_cast<double>(u.counts[i]) / static_cast<double>(k);
  return DemandDistribution{std::move(probs)};
}

Placement project_to_allowable(const MetricSpace& space, const Placement& s,
                               std::span<const PointId> allowable) {
  if (allowable.empty()) fail(Errc::empty_allowable_set, "allowable set is empty");
  if (s.counts.size() != space.size())
    fail(Errc::dimension_mismatch, "placement length does not match the metric space");
  std::vector<PointId> sorted(allowable.begin(), allowable.end());
  std::sort(sorted.begin(), sorted.end());
  for (PointId a : sorted)
    if (a < 0 || std::size_t(a) >= space.size())
      fail(Errc::invalid_argument, "allowable point id out of range");

  Placement out = Placement::zeros(space.size());
  for (std::size_t i = 0; i < s.counts.size(); ++i) {
    if (s.counts[i] == 0) continue;
    PointId best = sorted.front();
    double best_d = space(static_cast<PointId>(i), best);
    for (PointId a : sorted) {
      const double d = space(static_cast<PointId>(i), a);
      if (d < best_d) {  // ties keep the lowest id
        best_d = d;
        best = a;
      }
    }
    out.counts[best] += s.counts[i];
  }
  return out;
}

double brute_force_matching(const MetricSpace& space, const Placement& u, const Placement& v) {
  const std::int64_t k = u.k();
  if (k != v.k()) fail(Errc::size_mismatch, "multisets have different sizes");
  if (k > 8) fail(Errc::too_large, "brute-force matching supports k <= 8");
  std::vector<PointId> left = u.expand();
  std::vector<PointId> right = v.expand();
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) cost += space(left[i], right[i]);
    best = std::min(best, cost);
  } while (std::next_permutation(right.begin(), right.end()));
  return best;
}

json to_json(const MatchingPlan& plan) {
  json pairs = json::array();
  for (const auto& p : plan.pairs)
    pairs.push_back({{"source", p.source},
                     {"target", p.target},
                     {"multiplicity", p.multiplicity},
                     {"distance", p.distance}});
  return json{{"pairs", pairs}, {"total_cost", plan.total_cost}};
}

json to_json(const TransportPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries)
    entries.push_back(
        {{"source", e.source}, {"target", e.target}, {"mass", e.mass}, {"distance", e.distance}});
  return json{{"entries", entries}, {"total_cost", plan.total_cost}};
}

}  // namespace krp
