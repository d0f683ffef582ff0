#include "krp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "krp/eval.hpp"
#include "krp/matching.hpp"

namespace krp {

using nlohmann::json;

namespace {

// Stable stream ids per algorithm so adding an algorithm to a run never
// shifts another algorithm's draws.
std::uint64_t algo_stream_id(const std::string& algo) {
  if (algo == "rp") return 1;
  if (algo == "vrrp") return 2;
  if (algo == "rrp") return 3;
  if (algo == "tree-dp") return 4;
  if (algo == "uckm") return 5;
  if (algo == "fixed") return 6;
  fail(Errc::invalid_argument, "unknown algorithm '" + algo + "'");
}

bool is_deterministic(const std::string& algo) {
  return algo == "tree-dp" || algo == "uckm" || algo == "fixed";
}

struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void feed(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      state ^= (v >> (8 * b)) & 0xffULL;
      state *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << state;
    return os.str();
  }
};

std::vector<Placement> sample_realizations(const InstanceBundle& bundle, std::int64_t m,
                                           const SplitRng& stream, Fnv1a* digest) {
  const DemandSampler sampler(bundle.demand);
  std::vector<Placement> xs;
  xs.reserve(static_cast<std::size_t>(m));
  for (std::int64_t j = 0; j < m; ++j) {
    SplitRng rng = stream.child(static_cast<std::uint64_t>(j));
    Placement x = Placement::zeros(bundle.metric.size());
    for (std::int64_t i = 0; i < bundle.k; ++i) {
      const PointId id = sampler.draw(rng);
      ++x.counts[id];
      if (digest) digest->feed(static_cast<std::uint64_t>(id));
    }
    xs.push_back(std::move(x));
  }
  return xs;
}

// Scores every (placement, realization) pair; parallel-safe because each
// task writes its own slot.
std::vector<double> score_grid(const MetricSpace& space, const std::vector<Placement>& placements,
                               const std::vector<std::vector<Placement>>& realizations,
                               int threads) {
  const std::size_t runs = placements.size();
  const std::size_t m = realizations.front().size();
  std::vector<double> costs(runs * m);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const std::size_t r = idx / m;
      const std::size_t j = idx % m;
      const auto& xs = realizations[realizations.size() == 1 ? 0 : r];
      costs[idx] = matching_cost(space, placements[r], xs[j]).total_cost;
    }
  };
  threads = std::clamp(threads, 1, 64);
  const std::size_t total = costs.size();
  if (threads == 1 || total < 8) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (total + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t lo = std::min(total, std::size_t(t) * chunk);
      const std::size_t hi = std::min(total, lo + chunk);
      pool.emplace_back([&, t, lo, hi] {
        try {
          work(lo, hi);
        } catch (...) {
          errors[std::size_t(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return costs;
}

}  // namespace

BenchReport run_bench(const InstanceBundle& bundle, const BenchOptions& options) {
  if (options.algos.empty()) fail(Errc::invalid_argument, "no algorithms selected");
  if (options.runs < 1 || options.demand_sets < 1)
    fail(Errc::invalid_argument, "runs and demand_sets must be >= 1");
  for (const auto& algo : options.algos) algo_stream_id(algo);  // validate names up front

  const SplitRng root(options.seed);
  BenchReport report;
  report.k = bundle.k;
  report.runs = options.runs;
  report.demand_sets = options.demand_sets;
  report.seed = options.seed;
  report.independent_demand = options.independent_demand;

  // Common random numbers: one realization set shared by every algorithm
  // and run, drawn from stream 0.
  Fnv1a digest;
  std::vector<std::vector<Placement>> shared;
  if (!options.independent_demand)
    shared.push_back(sample_realizations(bundle, options.demand_sets, root.child(0), &digest));

  const double dk = static_cast<double>(bundle.k);
  for (const auto& algo : options.algos) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t stream = algo_stream_id(algo);
    const std::int64_t runs = is_deterministic(algo) ? 1 : options.runs;

    std::vector<Placement> placements;
    for (std::int64_t r = 0; r < runs; ++r) {
      const std::uint64_t run_seed = root.child(stream).child(std::uint64_t(r)).next_u64();
      if (algo == "rp") {
        placements.push_back(rp_place(bundle.demand, bundle.k, run_seed));
      } else if (algo == "vrrp") {
        placements.push_back(vrrp_place(bundle.demand, bundle.k, run_seed));
      } else if (algo == "rrp") {
        placements.push_back(rrp_place(bundle, run_seed));
      } else if (algo == "tree-dp") {
        if (!bundle.tree) fail(Errc::not_a_tree, "tree-dp needs a tree metric bundle");
        placements.push_back(tree_dp_solve(*bundle.tree, bundle.k).placement);
      } else if (algo == "uckm") {
        UckmOptions uopt;
        uopt.gap_tol = options.uckm_gap;
        uopt.time_limit_s = options.uckm_time_limit_s;
        placements.push_back(uckm_solve(bundle.metric, bundle.demand, bundle.k, uopt).placement);
      } else {  // fixed
        if (!options.fixed_placement)
          fail(Errc::invalid_argument, "algorithm 'fixed' needs a placement");
        placements.push_back(
            Placement::validated(options.fixed_placement->counts, bundle.k));
      }
    }

    std::vector<std::vector<Placement>> own;
    const auto& realizations = [&]() -> const std::vector<std::vector<Placement>>& {
      if (!options.independent_demand) return shared;
      for (std::int64_t r = 0; r < runs; ++r)
        own.push_back(sample_realizations(bundle, options.demand_sets,
                                          root.child(stream).child(std::uint64_t(r)).child(1),
                                          &digest));
      return own;
    }();

    const std::vector<double> costs =
        score_grid(bundle.metric, placements, realizations, options.threads);

    std::vector<double> run_means(placements.size());
    for (std::size_t r = 0; r < placements.size(); ++r) {
      const std::span<const double> row(costs.data() + r * options.demand_sets,
                                        static_cast<std::size_t>(options.demand_sets));
      run_means[r] = pairwise_sum(row) / static_cast<double>(options.demand_sets);
      for (std::int64_t j = 0; j < options.demand_sets; ++j) {
        const double c = costs[r * options.demand_sets + std::size_t(j)];
        report.scatter.push_back({algo, std::int64_t(r), j, c, c / dk});
      }
    }

    BenchRow row;
    row.algo = algo;
    row.runs = static_cast<std::int64_t>(placements.size());
    row.demand_sets = options.demand_sets;
    row.k = bundle.k;
    row.mean_total_cost = pairwise_sum(run_means) / static_cast<double>(run_means.size());
    row.mean_per_rider_eta = row.mean_total_cost / dk;
    row.min_per_rider_eta = *std::min_element(run_means.begin(), run_means.end()) / dk;
    if (run_means.size() >= 2) {
      double ss = 0.0;
      for (double v : run_means) ss += (v / dk - row.mean_per_rider_eta) * (v / dk - row.mean_per_rider_eta);
      row.ci95_halfwidth =
          1.96 * std::sqrt(ss / double(run_means.size() - 1) / double(run_means.size()));
    }
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rows.push_back(std::move(row));
  }

  report.realization_digest = digest.hex();
  return report;
}

json report_to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"algo", r.algo},
                    {"runs", r.runs},
                    {"demand_sets", r.demand_sets},
                    {"k", r.k},
                    {"mean_per_rider_eta", r.mean_per_rider_eta},
                    {"ci95_halfwidth", r.ci95_halfwidth},
                    {"min_per_rider_eta", r.min_per_rider_eta},
                    {"mean_total_cost", r.mean_total_cost}});
  }
  return json{{"k", report.k},
              {"runs", report.runs},
              {"demand_sets", report.demand_sets},
              {"seed", report.seed},
              {"independent_demand", report.independent_demand},
              {"realization_digest", report.realization_digest},
              {"rows", rows}};
}

json timing_to_json(const BenchReport& report) {
  json timing = json::object();
  for (const auto& r : report.rows) timing[r.algo] = r.wall_time_s;
  return json{{"wall_time_s", timing}};
}

std::string scatter_to_csv(const BenchReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "algo,run,realization,total_cost,per_rider_eta\n";
  for (const auto& s : report.scatter)
    os << s.algo << ',' << s.run << ',' << s.realization << ',' << s.total_cost << ','
       << s.per_rider_eta << '\n';
  return os.str();
}

std::string summary_table(const BenchReport& report) {
  std::ostringstream os;
  os << "algo      runs     M  mean/rider     ci95  min/rider   wall_s\n";
  for (const auto& r : report.rows) {
    os << std::left << std::setw(8) << r.algo << std::right << std::setw(6) << r.runs
       << std::setw(6) << r.demand_sets << std::fixed << std::setprecision(4) << std::setw(12)
       << r.mean_per_rider_eta << std::setw(9) << r.ci95_halfwidth << std::setw(11)
       << r.min_per_rider_eta << std::setprecision(2) << std::setw(9) << r.wall_time_s << '\n';
    os.unsetf(std::ios::fixed);
    os << std::setprecision(6);
  }
  return os.str();
}

}  // namespace krp
