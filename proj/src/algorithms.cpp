#include "krp/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <queue>

#include "flow.hpp"
#include "krp/eval.hpp"
#include "krp/rng.hpp"

namespace krp {

const char* solve_status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Randomized placements
// ---------------------------------------------------------------------------

Placement rp_place(const DemandDistribution& demand, std::int64_t k, std::uint64_t seed) {
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");
  const DemandSampler sampler(demand);
  const SplitRng root(seed);
  Placement s = Placement::zeros(demand.size());
  for (std::int64_t i = 0; i < k; ++i) {
    SplitRng unit = root.child(static_cast<std::uint64_t>(i));
    ++s.counts[sampler.draw(unit)];
  }
  return s;
}

Placement vrrp_place(const DemandDistribution& demand, std::int64_t k, std::uint64_t seed) {
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");
  const std::size_t n = demand.size();
  Placement s = Placement::zeros(n);
  std::vector<double> residual(n, 0.0);
  std::int64_t placed = 0;
  for (std::size_t x = 0; x < n; ++x) {
    const double scaled = demand.probs[x] * static_cast<double>(k);
    const std::int64_t floor_x = static_cast<std::int64_t>(std::floor(scaled));
    s.counts[x] = floor_x;
    placed += floor_x;
    residual[x] = std::max(0.0, demand.probs[x] - static_cast<double>(floor_x) / double(k));
  }
  const std::int64_t remaining = k - placed;
  if (remaining > 0) {
    const DemandSampler sampler(residual);  // normalizes the residual mass
    const SplitRng root(seed);
    for (std::int64_t i = 0; i < remaining; ++i) {
      SplitRng unit = root.child(static_cast<std::uint64_t>(i));
      ++s.counts[sampler.draw(unit)];
    }
  }
  return s;
}

Placement rrp_place(const InstanceBundle& bundle, std::uint64_t seed) {
  const Placement s = rp_place(bundle.demand, bundle.k, seed);
  if (bundle.allowable) return project_to_allowable(bundle.metric, s, *bundle.allowable);
  std::vector<PointId> all(bundle.metric.size());
  std::iota(all.begin(), all.end(), 0);
  return project_to_allowable(bundle.metric, s, all);
}

// ---------------------------------------------------------------------------
// Tree dynamic program
// ---------------------------------------------------------------------------

TreeDpResult tree_dp_solve(const TreeMetric& tree, std::int64_t k) {
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");
  const std::size_t n = tree.node_count();

  // W(u, t) = B(t, p_u) * c(parent(u), u); O(n*k^2) precomputation.
  std::vector<std::vector<double>> edge_term(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (int(u) == tree.root()) continue;
    auto& w = edge_term[u];
    w.resize(static_cast<std::size_t>(k) + 1);
    for (std::int64_t t = 0; t <= k; ++t)
      w[t] = binom_abs_dev(t, tree.subtree_mass(int(u)), k) * tree.edge_cost(int(u));
  }

  DpTable table;
  table.k = k;
  table.cells.assign(n * static_cast<std::size_t>(k + 1), {0.0, 0, 0});

  for (int u : tree.postorder()) {
    if (tree.is_leaf(u)) continue;  // V(u, t) = 0 for every leaf
    const int l = tree.left(u);
    const int r = tree.right(u);
    for (std::int64_t t = 0; t <= k; ++t) {
      auto& cell = table.at(u, t);
      cell.value = std::numeric_limits<double>::infinity();
      for (std::int64_t tl = 0; tl <= t; ++tl) {
        const double left_part = table.at(l, tl).value + edge_term[l][tl];
        for (std::int64_t tr = 0; tr + tl <= t; ++tr) {
          const double v = left_part + table.at(r, tr).value + edge_term[r][tr];
          if (v < cell.value) {  // strict: smallest t_l, then smallest t_r
            cell.value = v;
            cell.t_left = static_cast<std::int32_t>(tl);
            cell.t_right = static_cast<std::int32_t>(tr);
          }
        }
      }
    }
  }

  TreeDpResult result;
  result.cost = table.at(tree.root(), k).value;
  result.placement = Placement::zeros(n);
  // Units not sent into either child subtree sit at the node itself.
  std::vector<std::pair<int, std::int64_t>> stack{{tree.root(), k}};
  while (!stack.empty()) {
    auto [u, t] = stack.back();
    stack.pop_back();
    if (tree.is_leaf(u)) {
      result.placement.counts[u] += t;
      continue;
    }
    const auto& cell = table.at(u, t);
    result.placement.counts[u] += t - cell.t_left - cell.t_right;
    stack.push_back({tree.left(u), cell.t_left});
    stack.push_back({tree.right(u), cell.t_right});
  }
  result.table = std::move(table);
  return result;
}

// ---------------------------------------------------------------------------
// Uniform capacitated k-median
// ---------------------------------------------------------------------------

namespace {

struct Relaxation {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> q;  // fractional supply in units of vehicles
};

// Transportation LP with flexible supplies: q in [lb, ub] (vehicle units),
// sum q = k, demands P. Lower bounds are routed through dedicated
// source arcs, the slack through a shared free pool.
Relaxation solve_relaxation(const MetricSpace& space, const std::vector<double>& demand_probs,
                            std::int64_t k, const std::vector<std::int64_t>& lb,
                            const std::vector<std::int64_t>& ub) {
  const std::size_t n = space.size();
  Relaxation rel;
  std::int64_t lb_sum = 0, ub_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lb_sum += lb[i];
    ub_sum = ub_sum > k ? ub_sum : ub_sum + ub[i];  // saturating; only vs k matters
  }
  if (lb_sum > k || ub_sum < k) return rel;

  const double dk = static_cast<double>(k);
  const int source = 0, pool = 1, sink = 2 + 2 * static_cast<int>(n);
  flow::MinCostFlow net(3 + 2 * static_cast<int>(n));
  std::vector<int> supply_arc(n, -1), pool_arc(n, -1);
  if (k - lb_sum > 0) net.add_arc(source, pool, static_cast<double>(k - lb_sum) / dk, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (ub[i] == 0) continue;
    if (lb[i] > 0) supply_arc[i] = net.add_arc(source, 2 + int(i), double(lb[i]) / dk, 0.0);
    if (ub[i] > lb[i])
      pool_arc[i] = net.add_arc(pool, 2 + int(i), double(ub[i] - lb[i]) / dk, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (demand_probs[j] <= 0.0) continue;
      net.add_arc(2 + int(i), 2 + int(n) + int(j), 2.0, space(PointId(i), PointId(j)));
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (demand_probs[j] > 0.0) net.add_arc(2 + int(n) + int(j), sink, demand_probs[j], 0.0);

  const auto solved = net.solve(source, sink, 1.0);
  if (std::abs(solved.flow - 1.0) > 1e-9) return rel;

  rel.feasible = true;
  rel.value = solved.cost;
  rel.q.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double q = static_cast<double>(lb[i]);
    if (pool_arc[i] >= 0) q += net.arc_flow(pool_arc[i]) * dk;
    rel.q[i] = q;
  }
  return rel;
}

// Largest-remainder rounding of a fractional supply vector to integers
// summing to k within [lb, ub].
std::vector<std::int64_t> round_supplies(const std::vector<double>& q, std::int64_t k,
                                         const std::vector<std::int64_t>& lb,
                                         const std::vector<std::int64_t>& ub) {
  const std::size_t n = q.size();
  std::vector<std::int64_t> out(n);
  std::vector<std::pair<double, std::size_t>> fracs;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(q[i] + 1e-9)), lb[i],
                                      ub[i]);
    total += out[i];
    fracs.push_back({q[i] - std::floor(q[i] + 1e-9), i});
  }
  std::sort(fracs.begin(), fracs.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t pass = 0; total < k && pass < fracs.size(); ++pass) {
    const std::size_t i = fracs[pass].second;
    if (out[i] < ub[i]) {
      ++out[i];
      ++total;
    }
  }
  // Top up / trim against the bounds if the fractional pass fell short.
  for (std::size_t i = 0; i < n && total < k; ++i)
    while (out[i] < ub[i] && total < k) {
      ++out[i];
      ++total;
    }
  for (std::size_t i = 0; i < n && total > k; ++i)
    while (out[i] > lb[i] && total > k) {
      --out[i];
      --total;
    }
  return total == k ? out : std::vector<std::int64_t>{};
}

struct BnbNode {
  double bound = 0.0;
  std::vector<std::int64_t> lb, ub;
  std::vector<double> q;
  bool operator>(const BnbNode& other) const { return bound > other.bound; }
};

constexpr double kIntTol = 1e-7;

int most_fractional(const std::vector<double>& q) {
  int arg = -1;
  double best = kIntTol;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double frac = std::min(q[i] - std::floor(q[i]), std::ceil(q[i]) - q[i]);
    if (frac > best) {
      best = frac;
      arg = static_cast<int>(i);
    }
  }
  return arg;
}

}  // namespace

UckmSolution uckm_solve(const MetricSpace& space, const DemandDistribution& demand,
                        std::int64_t k, const UckmOptions& options) {
  const std::size_t n = space.size();
  if (demand.size() != n)
    fail(Errc::dimension_mismatch, "demand length does not match the metric space");
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");
  if (options.gap_tol < 0.0) fail(Errc::invalid_argument, "gap tolerance must be >= 0");

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed_s = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  const std::vector<std::int64_t> root_lb(n, 0), root_ub(n, k);
  Relaxation root = solve_relaxation(space, demand.probs, k, root_lb, root_ub);
  if (!root.feasible) fail(Errc::infeasible, "root relaxation is infeasible");

  UckmSolution sol;
  sol.nodes_explored = 1;

  double incumbent = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> incumbent_q;
  double best_bound = root.value;

  const auto eval_candidate = [&](const std::vector<std::int64_t>& q_int) {
    if (q_int.empty()) return;
    const double value =
        wasserstein(space, point_mass(Placement{q_int}), demand).total_cost;
    if (value < incumbent) {
      incumbent = value;
      incumbent_q = q_int;
      if (options.on_incumbent) {
        const double gap =
            (incumbent - best_bound) / std::max(std::abs(incumbent), 1e-12);
        options.on_incumbent({sol.nodes_explored, best_bound, incumbent, std::max(0.0, gap)});
      }
    }
  };

  // Warm start: round the root relaxation.
  eval_candidate(round_supplies(root.q, k, root_lb, root_ub));

  std::priority_queue<BnbNode, std::vector<BnbNode>, std::greater<BnbNode>> open;
  open.push({root.value, root_lb, root_ub, std::move(root.q)});

  const double abs_slack = 1e-9;
  bool timed_out = false;

  while (!open.empty()) {
    BnbNode node = std::move(const_cast<BnbNode&>(open.top()));
    open.pop();
    best_bound = node.bound;  // best-bound order: current node carries the global bound

    const double prune_at =
        incumbent - std::max(abs_slack * std::max(1.0, std::abs(incumbent)),
                             options.gap_tol * std::abs(incumbent));
    if (node.bound >= prune_at) {
      best_bound = std::min(node.bound, incumbent);
      break;  // best-bound order: nothing left can improve
    }
    if (elapsed_s() > options.time_limit_s) {
      timed_out = true;
      break;
    }

    const int branch = most_fractional(node.q);
    if (branch < 0) {
      eval_candidate(round_supplies(node.q, k, node.lb, node.ub));
      continue;
    }

    const std::int64_t floor_v = static_cast<std::int64_t>(std::floor(node.q[branch]));
    for (int side = 0; side < 2; ++side) {
      BnbNode child;
      child.lb = node.lb;
      child.ub = node.ub;
      if (side == 0)
        child.ub[branch] = floor_v;
      else
        child.lb[branch] = floor_v + 1;
      Relaxation rel = solve_relaxation(space, demand.probs, k, child.lb, child.ub);
      ++sol.nodes_explored;
      if (!rel.feasible) continue;
      if (most_fractional(rel.q) < 0) {
        eval_candidate(round_supplies(rel.q, k, child.lb, child.ub));
        continue;
      }
      if (rel.value < incumbent) {
        child.bound = rel.value;
        child.q = std::move(rel.q);
        open.push(std::move(child));
      }
    }
  }

  if (!timed_out && open.empty()) best_bound = incumbent;  // search exhausted

  if (incumbent_q.empty()) fail(Errc::internal, "no incumbent found");

  sol.placement = Placement{incumbent_q};
  sol.transport = wasserstein(space, point_mass(sol.placement), demand);
  sol.objective = sol.transport.total_cost;
  sol.lower_bound = std::min(best_bound, sol.objective);
  sol.optimality_gap =
      std::max(0.0, (sol.objective - sol.lower_bound) / std::max(std::abs(sol.objective), 1e-12));
  if (timed_out)
    sol.status = SolveStatus::TimeLimit;
  else if (sol.optimality_gap <= abs_slack)
    sol.status = SolveStatus::Optimal;
  else
    sol.status = SolveStatus::GapLimit;
  return sol;
}

}  // namespace krp
