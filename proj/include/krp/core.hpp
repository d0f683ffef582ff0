#ifndef KRP_CORE_HPP
#define KRP_CORE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "krp/error.hpp"

namespace krp {

using PointId = std::int32_t;

// ---------------------------------------------------------------------------
// Metric space: n points with a full symmetric distance matrix.
// ---------------------------------------------------------------------------

struct MetricViolation {
  enum Kind {
    NonSquare,
    NonFinite,
    NegativeEntry,
    NonzeroDiagonal,
    AsymmetricPair,
    TriangleViolation,
  };
  Kind kind;
  int i = -1, m = -1, j = -1;  // offending triple; unused slots stay -1
  double value = 0.0;          // entry value, or triangle slack d(i,j)-d(i,m)-d(m,j)
  std::string describe() const;
};

struct MetricValidation {
  std::vector<MetricViolation> violations;
  bool truncated = false;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

class MetricSpace {
 public:
  MetricSpace() = default;

  // Checks every metric axiom; the triangle inequality is checked with a
  // relative slack of 1e-9 * max entry (travel-time data is noisy).
  static MetricValidation validate(std::size_t n, const std::vector<double>& dist,
                                   std::size_t max_violations = SIZE_MAX);

  // Throws Error(invariant_violation) carrying the validation summary.
  static MetricSpace validated(std::size_t n, std::vector<double> dist,
                               std::vector<std::string> labels = {});

  // For matrices valid by construction (tree-induced metrics, Euclidean
  // point sets); skips the O(n^3) axiom scan.
  static MetricSpace unchecked(std::size_t n, std::vector<double> dist,
                               std::vector<std::string> labels = {});

  std::size_t size() const { return n_; }
  double operator()(PointId i, PointId j) const { return dist_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<double>& data() const { return dist_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double max_distance() const { return max_dist_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> dist_;  // row-major n*n
  std::vector<std::string> labels_;
  double max_dist_ = 0.0;
};

// Convenience wrapper matching the validator's operational signature.
MetricSpace validate_metric(const std::vector<std::vector<double>>& matrix);

// ---------------------------------------------------------------------------
// Demand distribution over points.
// ---------------------------------------------------------------------------

struct DemandDistribution {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }

  // Rejects negative entries; renormalizes when |sum-1| is in (1e-9, 1e-6]
  // (empirical data rounding), rejects anything further from 1. Sums that
  // are already within 1e-9 are kept bit-for-bit so file round trips are
  // stable.
  static DemandDistribution validated(std::vector<double> probs);
};

// ---------------------------------------------------------------------------
// Placement: a k-multiset of points encoded as a count vector.
// ---------------------------------------------------------------------------

struct Placement {
  std::vector<std::int64_t> counts;

  std::int64_t k() const;
  static Placement zeros(std::size_t n) { return Placement{std::vector<std::int64_t>(n, 0)}; }
  static Placement validated(std::vector<std::int64_t> counts, std::int64_t expected_k = -1);

  // Expansion to a sorted list of point ids, one entry per unit.
  std::vector<PointId> expand() const;
  bool operator==(const Placement& other) const { return counts == other.counts; }
};

// ---------------------------------------------------------------------------
// Tree metric: rooted binary tree with edge costs and node probabilities.
// ---------------------------------------------------------------------------

// Arbitrary rooted tree in parent-array form, input to binarize_tree.
struct GeneralTree {
  std::vector<int> parent;        // -1 at the root
  std::vector<double> edge_cost;  // cost of the edge to the parent; 0 at the root
  std::vector<double> probs;      // node probabilities; must sum to ~1
};

class TreeMetric {
 public:
  TreeMetric() = default;

  // Requires a binary tree: every non-leaf has exactly two children.
  // Children are ordered by node index (smaller index = left child).
  static TreeMetric from_binary(std::vector<int> parent, std::vector<double> edge_cost,
                                std::vector<double> probs);

  std::size_t node_count() const { return parent_.size(); }
  int root() const { return root_; }
  int parent(int u) const { return parent_[u]; }
  int left(int u) const { return left_[u]; }
  int right(int u) const { return right_[u]; }
  bool is_leaf(int u) const { return left_[u] < 0; }
  double edge_cost(int u) const { return edge_cost_[u]; }  // cost(parent(u), u)
  double subtree_mass(int u) const { return subtree_mass_[u]; }
  const DemandDistribution& probs() const { return probs_; }
  const std::vector<int>& parents() const { return parent_; }
  const std::vector<double>& edge_costs() const { return edge_cost_; }

  // Nodes in a bottom-up (children before parent) order.
  const std::vector<int>& postorder() const { return postorder_; }

  // All-pairs path distances, accumulated edge by edge along each path so
  // that sums of the same cost values stay bitwise stable.
  MetricSpace induced_metric() const;

 private:
  int root_ = -1;
  std::vector<int> parent_, left_, right_;
  std::vector<double> edge_cost_;
  DemandDistribution probs_;
  std::vector<double> subtree_mass_;
  std::vector<int> postorder_;
};

// Transforms an arbitrary rooted tree into a distance-preserving binary tree.
// A node with c > 2 children is expanded into a left-leaning chain of c-1
// binary nodes; every introduced edge has cost 0 and every introduced node
// has probability 0, with each original child-edge cost carried on the final
// edge to that child. A node with exactly one child gains a zero-cost,
// zero-probability sibling leaf.
TreeMetric binarize_tree(const GeneralTree& tree);

// Bottom-up subtree masses p_u = P(u) + p_left + p_right.
std::vector<double> subtree_masses(const TreeMetric& tree);

// ---------------------------------------------------------------------------
// Instance bundle.
// ---------------------------------------------------------------------------

struct InstanceBundle {
  MetricSpace metric;
  DemandDistribution demand;
  std::int64_t k = 1;
  std::optional<std::vector<PointId>> allowable;  // RRP's allowable set A
  std::optional<TreeMetric> tree;                 // present when the metric is a tree

  static InstanceBundle validated(MetricSpace metric, DemandDistribution demand, std::int64_t k,
                                  std::optional<std::vector<PointId>> allowable = std::nullopt,
                                  std::optional<TreeMetric> tree = std::nullopt);
};

// JSON instance format, see README. `base_dir` resolves a relative
// "dist_file" reference.
InstanceBundle bundle_from_json(const nlohmann::json& doc,
                                const std::filesystem::path& base_dir = {});
nlohmann::json bundle_to_json(const InstanceBundle& bundle);

InstanceBundle load_bundle(const std::filesystem::path& path);
void save_bundle(const InstanceBundle& bundle, const std::filesystem::path& path);

}  // namespace krp

#endif
