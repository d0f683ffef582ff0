#ifndef KRP_ALGORITHMS_HPP
#define KRP_ALGORITHMS_HPP

#include <functional>
#include <limits>

#include "krp/core.hpp"
#include "krp/matching.hpp"

namespace krp {

// RP: k i.i.d. draws from the demand distribution. One child RNG stream per
// drawn unit index.
Placement rp_place(const DemandDistribution& demand, std::int64_t k, std::uint64_t seed);

// VRRP: floor(P(x)*k) units fixed at each point, remaining units drawn
// i.i.d. proportionally to the residual probability P(x) - floor(P(x)*k)/k.
Placement vrrp_place(const DemandDistribution& demand, std::int64_t k, std::uint64_t seed);

// RRP: rp_place followed by projection onto the bundle's allowable set
// (all points when the bundle has none).
Placement rrp_place(const InstanceBundle& bundle, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exact dynamic program for tree metrics.
// ---------------------------------------------------------------------------

// V(u, t): minimum expected edge-cost contribution within subtree T_u given
// t units placed inside it, with the (t_left, t_right) split that attains it.
struct DpTable {
  std::int64_t k = 0;
  struct Cell {
    double value = 0.0;
    std::int32_t t_left = 0;
    std::int32_t t_right = 0;
  };
  std::vector<Cell> cells;  // node-major, (k+1) per node

  Cell& at(int u, std::int64_t t) { return cells[static_cast<std::size_t>(u) * (k + 1) + t]; }
  const Cell& at(int u, std::int64_t t) const {
    return cells[static_cast<std::size_t>(u) * (k + 1) + t];
  }
};

struct TreeDpResult {
  Placement placement;
  double cost = 0.0;
  DpTable table;
};

// Bottom-up DP over V(u,t) = min over t_l + t_r <= t of
//   V(l,t_l) + B(t_l, p_l)*c(u,l) + V(r,t_r) + B(t_r, p_r)*c(u,r),
// O(n*k^3) with all B values precomputed in O(n*k^2). The placement is
// reconstructed from backpointers; residual t - t_l - t_r units sit at u.
// Ties are broken towards the smallest t_l, then smallest t_r.
TreeDpResult tree_dp_solve(const TreeMetric& tree, std::int64_t k);

// ---------------------------------------------------------------------------
// Exact uniform capacitated k-median.
// ---------------------------------------------------------------------------

enum class SolveStatus { Optimal, GapLimit, TimeLimit };

const char* solve_status_name(SolveStatus s);

struct UckmLogEntry {
  std::int64_t iteration = 0;
  double lower_bound = 0.0;
  double incumbent = 0.0;
  double gap = 0.0;
};

struct UckmOptions {
  double gap_tol = 0.0;
  double time_limit_s = std::numeric_limits<double>::infinity();
  std::function<void(const UckmLogEntry&)> on_incumbent;  // solver log hook
};

struct UckmSolution {
  Placement placement;     // integer Q(x)
  TransportPlan transport; // optimal plan from Q(x)/k to P
  double objective = 0.0;  // transport.total_cost = d_W(point_mass(Q), P)
  double optimality_gap = 0.0;  // (incumbent - bound)/max(|incumbent|,eps)
  double lower_bound = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  std::int64_t nodes_explored = 0;
};

// Branch-and-bound over the integer supply vector Q with sum Q = k. Each
// node's relaxation is the transportation LP with Q continuous inside the
// node's bounds, solved by the same min-cost-flow engine as the matching
// module; branching on the most fractional Q(x), best-bound node selection.
UckmSolution uckm_solve(const MetricSpace& space, const DemandDistribution& demand,
                        std::int64_t k, const UckmOptions& options = {});

}  // namespace krp

#endif
