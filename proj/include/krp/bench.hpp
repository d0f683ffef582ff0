#ifndef KRP_BENCH_HPP
#define KRP_BENCH_HPP

#include <json.hpp>

#include "krp/algorithms.hpp"
#include "krp/core.hpp"

namespace krp {

struct BenchOptions {
  std::vector<std::string> algos;  // rp | vrrp | rrp | tree-dp | uckm | fixed
  std::int64_t runs = 20;          // R placements per randomized algorithm
  std::int64_t demand_sets = 100;  // M shared demand realizations
  std::uint64_t seed = 0;
  int threads = 1;
  bool independent_demand = false;  // fresh realizations per (algo, run)
  double uckm_gap = 0.0;
  double uckm_time_limit_s = std::numeric_limits<double>::infinity();
  std::optional<Placement> fixed_placement;  // scored under algo name "fixed"
};

struct BenchRow {
  std::string algo;
  std::int64_t runs = 0;
  std::int64_t demand_sets = 0;
  std::int64_t k = 0;
  double mean_per_rider_eta = 0.0;
  double ci95_halfwidth = 0.0;  // across the run-level means
  double min_per_rider_eta = 0.0;
  double mean_total_cost = 0.0;
  double wall_time_s = 0.0;
};

struct ScatterRecord {
  std::string algo;
  std::int64_t run = 0;
  std::int64_t realization = 0;
  double total_cost = 0.0;
  double per_rider_eta = 0.0;
};

struct BenchReport {
  std::int64_t k = 0;
  std::int64_t runs = 0;
  std::int64_t demand_sets = 0;
  std::uint64_t seed = 0;
  bool independent_demand = false;
  std::string realization_digest;  // FNV-1a over the shared realization stream
  std::vector<BenchRow> rows;
  std::vector<ScatterRecord> scatter;
};

// Table-1 style protocol: R placements per randomized algorithm, each scored
// against the same M demand realizations (common random numbers across
// algorithms and runs unless disabled); deterministic solvers run once.
BenchReport run_bench(const InstanceBundle& bundle, const BenchOptions& options);

// Deterministic report content; wall times are excluded on purpose so the
// emitted JSON is byte-identical for a fixed (flags, seed).
nlohmann::json report_to_json(const BenchReport& report);

// Per-algorithm wall times, kept apart from the deterministic report.
nlohmann::json timing_to_json(const BenchReport& report);

// CSV scatter records: algo,run,realization,total_cost,per_rider_eta.
std::string scatter_to_csv(const BenchReport& report);

// Human-readable summary (includes wall times).
std::string summary_table(const BenchReport& report);

}  // namespace krp

#endif
