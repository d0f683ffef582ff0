#include "krp/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace krp {

using nlohmann::json;

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ok: return "ok";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::parse_error: return "parse_error";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::invariant_violation: return "invariant_violation";
    case Errc::size_mismatch: return "size_mismatch";
    case Errc::too_large: return "too_large";
    case Errc::empty_allowable_set: return "empty_allowable_set";
    case Errc::unknown_zone: return "unknown_zone";
    case Errc::empty_file: return "empty_file";
    case Errc::not_binary: return "not_binary";
    case Errc::k_mismatch: return "k_mismatch";
    case Errc::not_a_tree: return "not_a_tree";
    case Errc::infeasible: return "infeasible";
    case Errc::io_error: return "io_error";
    case Errc::unsupported: return "unsupported";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// MetricSpace
// ---------------------------------------------------------------------------

std::string MetricViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case NonSquare:
      os << "NonSquare: matrix is not n x n";
      break;
    case NonFinite:
      os << "NonFinite(" << i << "," << j << "): entry is not finite";
      break;
    case NegativeEntry:
      os << "NegativeEntry(" << i << "," << j << "): " << value;
      break;
    case NonzeroDiagonal:
      os << "NonzeroDiagonal(" << i << "): " << value;
      break;
    case AsymmetricPair:
      os << "AsymmetricPair(" << i << "," << j << ")";
      break;
    case TriangleViolation:
      os << "TriangleViolation(" << i << "," << m << "," << j << "): slack " << value;
      break;
  }
  return os.str();
}

std::string MetricValidation::summary() const {
  std::ostringstream os;
  os << violations.size() << (truncated ? "+ " : " ") << "metric axiom violation(s)";
  for (std::size_t v = 0; v < violations.size() && v < 8; ++v) os << "; " << violations[v].describe();
  return os.str();
}

MetricValidation MetricSpace::validate(std::size_t n, const std::vector<double>& dist,
                                       std::size_t max_violations) {
  MetricValidation report;
  auto push = [&](MetricViolation v) {
    if (report.violations.size() >= max_violations) {
      report.truncated = true;
      return false;
    }
    report.violations.push_back(v);
    return true;
  };

  if (dist.size() != n * n) {
    push({MetricViolation::NonSquare, -1, -1, -1, 0.0});
    return report;
  }
  const auto at = [&](std::size_t i, std::size_t j) { return dist[i * n + j]; };

  double max_entry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = at(i, j);
      if (!std::isfinite(d)) {
        if (!push({MetricViolation::NonFinite, int(i), -1, int(j), d})) return report;
        continue;
      }
      max_entry = std::max(max_entry, d);
      if (d < 0.0) {
        if (!push({MetricViolation::NegativeEntry, int(i), -1, int(j), d})) return report;
      }
      if (i == j && d != 0.0) {
        if (!push({MetricViolation::NonzeroDiagonal, int(i), -1, -1, d})) return report;
      }
      if (i < j && at(i, j) != at(j, i)) {
        if (!push({MetricViolation::AsymmetricPair, int(i), -1, int(j), at(i, j) - at(j, i)}))
          return report;
      }
    }
  }
  if (!report.violations.empty()) return report;  // triangle check needs clean entries

  const double tol_tri = 1e-9 * max_entry;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = at(i, j);
      for (std::size_t m = 0; m < n; ++m) {
        if (m == i || m == j) continue;
        const double slack = dij - (at(i, m) + at(m, j));
        if (slack > tol_tri) {
          if (!push({MetricViolation::TriangleViolation, int(i), int(m), int(j), slack}))
            return report;
        }
      }
    }
  }
  return report;
}

MetricSpace MetricSpace::validated(std::size_t n, std::vector<double> dist,
                                   std::vector<std::string> labels) {
  MetricValidation report = validate(n, dist, 64);
  if (!report.ok()) fail(Errc::invariant_violation, report.summary());
  return unchecked(n, std::move(dist), std::move(labels));
}

MetricSpace MetricSpace::unchecked(std::size_t n, std::vector<double> dist,
                                   std::vector<std::string> labels) {
  if (dist.size() != n * n) fail(Errc::dimension_mismatch, "distance matrix is not n x n");
  if (!labels.empty() && labels.size() != n)
    fail(Errc::dimension_mismatch, "labels length does not match point count");
  MetricSpace s;
  s.n_ = n;
  s.dist_ = std::move(dist);
  s.labels_ = std::move(labels);
  for (double d : s.dist_) s.max_dist_ = std::max(s.max_dist_, d);
  return s;
}

MetricSpace validate_metric(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  std::vector<double> flat;
  flat.reserve(n * n);
  for (const auto& row : matrix) {
    if (row.size() != n) fail(Errc::invariant_violation, "NonSquare: matrix is not n x n");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return MetricSpace::validated(n, std::move(flat));
}

// ---------------------------------------------------------------------------
// DemandDistribution / Placement
// ---------------------------------------------------------------------------

DemandDistribution DemandDistribution::validated(std::vector<double> probs) {
  if (probs.empty()) fail(Errc::invariant_violation, "demand distribution is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < 0.0)
      fail(Errc::invariant_violation,
           "probability " + std::to_string(i) + " = " + std::to_string(probs[i]) +
               " is not a finite nonnegative number");
    sum += probs[i];
  }
  const double off = std::abs(sum - 1.0);
  if (off > 1e-6)
    fail(Errc::invariant_violation, "probabilities sum to " + std::to_string(sum) + ", not 1");
  if (off > 1e-9) {
    for (double& p : probs) p /= sum;  // empirical rounding; renormalize
  }
  return DemandDistribution{std::move(probs)};
}

std::int64_t Placement::k() const {
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  return total;
}

Placement Placement::validated(std::vector<std::int64_t> counts, std::int64_t expected_k) {
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] < 0)
      fail(Errc::invariant_violation, "placement count " + std::to_string(i) + " is negative");
  Placement p{std::move(counts)};
  const std::int64_t total = p.k();
  if (total < 1) fail(Errc::invariant_violation, "placement is empty (k must be >= 1)");
  if (expected_k >= 0 && total != expected_k)
    fail(Errc::k_mismatch, "placement has " + std::to_string(total) + " units, expected " +
                               std::to_string(expected_k));
  return p;
}

std::vector<PointId> Placement::expand() const {
  std::vector<PointId> out;
  out.reserve(static_cast<std::size_t>(k()));
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::int64_t c = 0; c < counts[i]; ++c) out.push_back(static_cast<PointId>(i));
  return out;
}

// ---------------------------------------------------------------------------
// TreeMetric
// ---------------------------------------------------------------------------

TreeMetric TreeMetric::from_binary(std::vector<int> parent, std::vector<double> edge_cost,
                                   std::vector<double> probs) {
  const std::size_t n = parent.size();
  if (n == 0) fail(Errc::not_a_tree, "tree has no nodes");
  if (edge_cost.size() != n || probs.size() != n)
    fail(Errc::dimension_mismatch, "tree arrays have mismatched lengths");

  TreeMetric t;
  t.parent_ = std::move(parent);
  t.edge_cost_ = std::move(edge_cost);
  t.left_.assign(n, -1);
  t.right_.assign(n, -1);

  int root = -1;
  for (std::size_t u = 0; u < n; ++u) {
    const int p = t.parent_[u];
    if (p < 0) {
      if (root >= 0) fail(Errc::not_a_tree, "tree has more than one root");
      root = int(u);
      continue;
    }
    if (p >= int(n)) fail(Errc::not_a_tree, "parent index out of range");
    if (t.edge_cost_[u] < 0.0)
      fail(Errc::invariant_violation, "negative edge cost at node " + std::to_string(u));
    if (t.left_[p] < 0)
      t.left_[p] = int(u);
    else if (t.right_[p] < 0)
      t.right_[p] = int(u);
    else
      fail(Errc::not_binary, "node " + std::to_string(p) + " has more than two children");
  }
  if (root < 0) fail(Errc::not_a_tree, "tree has no root");
  t.root_ = root;

  for (std::size_t u = 0; u < n; ++u)
    if ((t.left_[u] < 0) != (t.right_[u] < 0))
      fail(Errc::not_binary, "node " + std::to_string(u) + " has exactly one child");

  // Iterative postorder; also detects disconnected nodes.
  t.postorder_.reserve(n);
  std::vector<std::pair<int, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [u, stage] = stack.back();
    if (t.is_leaf(u) || stage == 2) {
      t.postorder_.push_back(u);
      stack.pop_back();
    } else if (stage == 0) {
      stage = 1;
      stack.push_back({t.left_[u], 0});
    } else {
      stage = 2;
      stack.push_back({t.right_[u], 0});
    }
  }
  if (t.postorder_.size() != n)
    fail(Errc::not_a_tree, "tree is disconnected or contains a cycle");

  t.probs_ = DemandDistribution::validated(std::move(probs));
  t.subtree_mass_ = subtree_masses(t);
  if (std::abs(t.subtree_mass_[root] - 1.0) > 1e-9)
    fail(Errc::invariant_violation, "root subtree mass differs from 1");
  return t;
}

std::vector<double> subtree_masses(const TreeMetric& tree) {
  std::vector<double> mass(tree.node_count(), 0.0);
  for (int u : tree.postorder()) {
    mass[u] = tree.probs().probs[u];
    if (!tree.is_leaf(u)) mass[u] += mass[tree.left(u)] + mass[tree.right(u)];
  }
  return mass;
}

MetricSpace TreeMetric::induced_metric() const {
  const std::size_t n = node_count();
  std::vector<double> dist(n * n, 0.0);
  // BFS from each source accumulating costs edge by edge along the path.
  std::vector<int> queue;
  queue.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    double* row = dist.data() + s * n;
    std::vector<char> seen(n, 0);
    queue.clear();
    queue.push_back(int(s));
    seen[s] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      auto visit = [&](int v, double cost) {
        if (v < 0 || seen[v]) return;
        seen[v] = 1;
        row[v] = row[u] + cost;
        queue.push_back(v);
      };
      visit(parent_[u], edge_cost_[u]);
      visit(left_[u], left_[u] >= 0 ? edge_cost_[left_[u]] : 0.0);
      visit(right_[u], right_[u] >= 0 ? edge_cost_[right_[u]] : 0.0);
    }
  }
  // Paths u->v and v->u accumulate in opposite orders; force exact symmetry.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[j * n + i] = dist[i * n + j];
  return MetricSpace::unchecked(n, std::move(dist));
}

TreeMetric binarize_tree(const GeneralTree& tree) {
  const std::size_t n = tree.parent.size();
  if (n == 0) fail(Errc::not_a_tree, "tree has no nodes");
  if (tree.edge_cost.size() != n || tree.probs.size() != n)
    fail(Errc::dimension_mismatch, "tree arrays have mismatched lengths");

  int root = -1;
  std::vector<std::vector<int>> children(n);
  for (std::size_t u = 0; u < n; ++u) {
    const int p = tree.parent[u];
    if (p < 0) {
      if (root >= 0) fail(Errc::not_a_tree, "tree has more than one root");
      root = int(u);
      continue;
    }
    if (p >= int(n) || p == int(u)) fail(Errc::not_a_tree, "bad parent index");
    if (tree.edge_cost[u] < 0.0)
      fail(Errc::invariant_violation, "negative edge cost at node " + std::to_string(u));
    children[p].push_back(int(u));
  }
  if (root < 0) fail(Errc::not_a_tree, "tree has no root");

  // Reachability from the root; anything unreached is a cycle or a separate
  // component.
  {
    std::vector<int> stack{root};
    std::size_t reached = 0;
    std::vector<char> seen(n, 0);
    seen[root] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++reached;
      for (int c : children[u]) {
        if (seen[c]) fail(Errc::not_a_tree, "cycle detected");
        seen[c] = 1;
        stack.push_back(c);
      }
    }
    if (reached != n) fail(Errc::not_a_tree, "tree is disconnected or contains a cycle");
  }

  // Original nodes keep their ids; helper nodes are appended.
  std::vector<int> parent(tree.parent.begin(), tree.parent.end());
  std::vector<double> cost(tree.edge_cost.begin(), tree.edge_cost.end());
  std::vector<double> probs(tree.probs.begin(), tree.probs.end());
  auto new_node = [&](int p, double c) {
    parent.push_back(p);
    cost.push_back(c);
    probs.push_back(0.0);
    return int(parent.size()) - 1;
  };

  for (std::size_t u = 0; u < n; ++u) {
    const auto& cs = children[u];
    if (cs.size() == 1) {
      new_node(int(u), 0.0);  // zero-cost, zero-probability sibling leaf
    } else if (cs.size() > 2) {
      // Left-leaning chain: each chain node adopts one original child and
      // hands the rest down; all chain edges cost 0, original child-edge
      // costs stay on the final edge to that child.
      int hook = int(u);
      for (std::size_t i = 1; i + 1 < cs.size(); ++i) {
        const int v = new_node(hook, 0.0);
        parent[cs[i]] = v;
        hook = v;
      }
      parent[cs.back()] = hook;
    }
  }
  return TreeMetric::from_binary(std::move(parent), std::move(cost), std::move(probs));
}

// ---------------------------------------------------------------------------
// InstanceBundle
// ---------------------------------------------------------------------------

InstanceBundle InstanceBundle::validated(MetricSpace metric, DemandDistribution demand,
                                         std::int64_t k,
                                         std::optional<std::vector<PointId>> allowable,
                                         std::optional<TreeMetric> tree) {
  const std::size_t n = metric.size();
  if (n == 0) fail(Errc::invariant_violation, "metric space is empty");
  if (demand.size() != n)
    fail(Errc::dimension_mismatch, "demand length " + std::to_string(demand.size()) +
                                       " does not match point count " + std::to_string(n));
  if (k < 1) fail(Errc::invariant_violation, "fleet size k must be >= 1");
  if (allowable) {
    if (allowable->empty()) fail(Errc::empty_allowable_set, "allowable set is empty");
    std::sort(allowable->begin(), allowable->end());
    allowable->erase(std::unique(allowable->begin(), allowable->end()), allowable->end());
    for (PointId a : *allowable)
      if (a < 0 || std::size_t(a) >= n)
        fail(Errc::invariant_violation, "allowable point id out of range");
  }
  if (tree) {
    if (tree->node_count() != n)
      fail(Errc::dimension_mismatch, "tree node count does not match point count");
    const auto& tp = tree->probs().probs;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(tp[i] - demand.probs[i]) > 1e-12)
        fail(Errc::invariant_violation, "tree node probabilities differ from demand");
    const MetricSpace induced = tree->induced_metric();
    const double tol = 1e-9 * std::max(1.0, induced.max_distance());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(induced(int(i), int(j)) - metric(int(i), int(j))) > tol)
          fail(Errc::invariant_violation, "distance matrix disagrees with the tree metric");
  }
  InstanceBundle b;
  b.metric = std::move(metric);
  b.demand = std::move(demand);
  b.k = k;
  b.allowable = std::move(allowable);
  b.tree = std::move(tree);
  return b;
}

namespace {

std::vector<double> read_dist_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open distance file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t rows = 0, cols = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::size_t row_cols = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(Errc::parse_error,
             "bad number '" + cell + "' at line " + std::to_string(rows) + " of " + path.string());
      }
      ++row_cols;
    }
    if (cols == 0)
      cols = row_cols;
    else if (row_cols != cols)
      fail(Errc::parse_error, "ragged row at line " + std::to_string(rows) + " of " + path.string());
  }
  if (rows != cols)
    fail(Errc::dimension_mismatch, "distance file is " + std::to_string(rows) + " x " +
                                       std::to_string(cols) + ", expected square");
  return values;
}

std::vector<double> parse_dist(const json& doc, std::size_t n,
                               const std::filesystem::path& base_dir) {
  if (doc.contains("dist_file")) {
    std::filesystem::path p = doc.at("dist_file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    auto values = read_dist_csv(p);
    if (values.size() != n * n)
      fail(Errc::dimension_mismatch, "distance file size does not match n");
    return values;
  }
  const json& d = doc.at("dist");
  std::vector<double> flat;
  flat.reserve(n * n);
  if (!d.is_array()) fail(Errc::parse_error, "'dist' must be an array");
  if (!d.empty() && d.front().is_array()) {
    for (const auto& row : d) {
      if (row.size() != n) fail(Errc::dimension_mismatch, "distance row length does not match n");
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
    if (d.size() != n) fail(Errc::dimension_mismatch, "distance row count does not match n");
  } else {
    for (const auto& v : d) flat.push_back(v.get<double>());
    if (flat.size() != n * n)
      fail(Errc::dimension_mismatch, "flat distance array length does not match n*n");
  }
  return flat;
}

}  // namespace

InstanceBundle bundle_from_json(const json& doc, const std::filesystem::path& base_dir) {
  try {
    const std::size_t n = doc.at("n").get<std::size_t>();
    const std::int64_t k = doc.at("k").get<std::int64_t>();
    auto probs = doc.at("probs").get<std::vector<double>>();
    if (probs.size() != n) fail(Errc::dimension_mismatch, "'probs' length does not match n");

    std::optional<TreeMetric> tree;
    if (doc.contains("tree")) {
      const json& t = doc.at("tree");
      tree = TreeMetric::from_binary(t.at("parent").get<std::vector<int>>(),
                                     t.at("edge_cost").get<std::vector<double>>(),
                                     t.at("probs").get<std::vector<double>>());
    }

    std::vector<double> dist;
    if (!doc.contains("dist") && !doc.contains("dist_file")) {
      if (!tree) fail(Errc::parse_error, "bundle has neither 'dist' nor 'tree'");
      dist = tree->induced_metric().data();
    } else {
      dist = parse_dist(doc, n, base_dir);
    }

    std::vector<std::string> labels;
    if (doc.contains("labels")) labels = doc.at("labels").get<std::vector<std::string>>();

    std::optional<std::vector<PointId>> allowable;
    if (doc.contains("allowable")) allowable = doc.at("allowable").get<std::vector<PointId>>();

    return InstanceBundle::validated(MetricSpace::validated(n, std::move(dist), std::move(labels)),
                                     DemandDistribution::validated(std::move(probs)), k,
                                     std::move(allowable), std::move(tree));
  } catch (const json::exception& e) {
    fail(Errc::parse_error, std::string("bundle JSON: ") + e.what());
  }
}

json bundle_to_json(const InstanceBundle& bundle) {
  json doc;
  doc["n"] = bundle.metric.size();
  doc["k"] = bundle.k;
  doc["dist"] = bundle.metric.data();
  doc["probs"] = bundle.demand.probs;
  if (!bundle.metric.labels().empty()) doc["labels"] = bundle.metric.labels();
  if (bundle.allowable) doc["allowable"] = *bundle.allowable;
  if (bundle.tree) {
    doc["tree"] = {{"parent", bundle.tree->parents()},
                   {"edge_cost", bundle.tree->edge_costs()},
                   {"probs", bundle.tree->probs().probs}};
  }
  return doc;
}

InstanceBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Map the byte offset to a line number for the error message.
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
      if (text[i] == '\n') ++line;
    fail(Errc::parse_error, path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
  return bundle_from_json(doc, path.has_parent_path() ? path.parent_path()
                                                      : std::filesystem::path("."));
}

void save_bundle(const InstanceBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  out << bundle_to_json(bundle).dump(2) << '\n';
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

}  // namespace krp
