#ifndef KRP_SRC_FLOW_HPP
#define KRP_SRC_FLOW_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "krp/error.hpp"

namespace krp::flow {

// Min-cost flow by successive shortest augmenting paths with node
// potentials (Dijkstra over reduced costs). Capacities and costs are
// double-valued; arc costs must be nonnegative. Residuals below cap_eps are
// treated as zero and reduced costs may dip to -1e-12 * cost scale before
// being clamped.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : adj_(nodes) {}

  int add_arc(int from, int to, double capacity, double cost) {
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back({to, capacity, cost});
    arcs_.push_back({from, 0.0, -cost});
    adj_[from].push_back(id);
    adj_[to].push_back(id + 1);
    cost_scale_ = std::max(cost_scale_, std::abs(cost));
    cap_scale_ = std::max(cap_scale_, capacity);
    return id;
  }

  struct Result {
    double flow = 0.0;
    double cost = 0.0;
  };

  // Routes up to `amount` from s to t; stops early when no augmenting path
  // remains. Costs are accumulated from the original arc costs as flow is
  // pushed, not from potentials.
  Result solve(int s, int t, double amount) {
    const int n = static_cast<int>(adj_.size());
    const double cap_eps = 1e-14 * std::max(1.0, cap_scale_);
    const double rc_tol = 1e-12 * std::max(1.0, cost_scale_);
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> pot(n, 0.0), dist(n);
    std::vector<int> parent_arc(n);
    std::vector<char> done(n);
    Result result;

    long iterations = 0;
    const long max_iterations = 1000 + 50 * static_cast<long>(arcs_.size());

    while (amount - result.flow > 1e-12 * std::max(1.0, amount)) {
      if (++iterations > max_iterations)
        fail(Errc::internal, "min-cost flow did not converge");

      std::fill(dist.begin(), dist.end(), inf);
      std::fill(done.begin(), done.end(), 0);
      dist[s] = 0.0;
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
      heap.push({0.0, s});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (done[u]) continue;
        done[u] = 1;
        for (int id : adj_[u]) {
          const Arc& a = arcs_[id];
          if (a.cap <= cap_eps || done[a.to]) continue;
          double rc = a.cost + pot[u] - pot[a.to];
          if (rc < 0.0) {
            if (rc < -rc_tol) fail(Errc::internal, "negative reduced cost in flow solver");
            rc = 0.0;
          }
          if (d + rc < dist[a.to]) {
            dist[a.to] = d + rc;
            parent_arc[a.to] = id;
            heap.push({dist[a.to], a.to});
          }
        }
      }
      if (dist[t] == inf) break;

      for (int v = 0; v < n; ++v) {
        if (dist[v] < inf)
          pot[v] += std::min(dist[v], dist[t]);
        else
          pot[v] += dist[t];
      }

      double push = amount - result.flow;
      for (int v = t; v != s; v = arcs_[parent_arc[v] ^ 1].to)
        push = std::min(push, arcs_[parent_arc[v]].cap);
      for (int v = t; v != s; v = arcs_[parent_arc[v] ^ 1].to) {
        Arc& a = arcs_[parent_arc[v]];
        a.cap -= push;
        arcs_[parent_arc[v] ^ 1].cap += push;
        result.cost += push * a.cost;
      }
      result.flow += push;
    }
    return result;
  }

  // Flow currently on the forward arc `id` (capacity accumulated on its
  // reverse arc).
  double arc_flow(int id) const { return arcs_[id ^ 1].cap; }

 private:
  struct Arc {
    int to;
    double cap;   // residual capacity
    double cost;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  double cost_scale_ = 0.0;
  double cap_scale_ = 0.0;
};

}  // namespace krp::flow

#endif
