#include "krp/krp.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include <json.hpp>

#include "krp/bench.hpp"
#include "krp/core.hpp"
#include "krp/eval.hpp"
#include "krp/instances.hpp"
#include "krp/matching.hpp"
#include "krp/trips.hpp"

using nlohmann::json;

struct krp_bundle {
  krp::InstanceBundle b;
};

namespace {

thread_local std::string g_last_error;

krp_status status_from(krp::Errc code) {
  switch (code) {
    case krp::Errc::ok: return KRP_OK;
    case krp::Errc::invalid_argument: return KRP_ERR_INVALID_ARGUMENT;
    case krp::Errc::parse_error: return KRP_ERR_PARSE;
    case krp::Errc::dimension_mismatch: return KRP_ERR_DIMENSION_MISMATCH;
    case krp::Errc::invariant_violation: return KRP_ERR_INVARIANT;
    case krp::Errc::size_mismatch: return KRP_ERR_SIZE_MISMATCH;
    case krp::Errc::too_large: return KRP_ERR_TOO_LARGE;
    case krp::Errc::empty_allowable_set: return KRP_ERR_EMPTY_ALLOWABLE_SET;
    case krp::Errc::unknown_zone: return KRP_ERR_UNKNOWN_ZONE;
    case krp::Errc::empty_file: return KRP_ERR_EMPTY_FILE;
    case krp::Errc::not_binary: return KRP_ERR_NOT_BINARY;
    case krp::Errc::k_mismatch: return KRP_ERR_K_MISMATCH;
    case krp::Errc::not_a_tree: return KRP_ERR_NOT_A_TREE;
    case krp::Errc::infeasible: return KRP_ERR_INFEASIBLE;
    case krp::Errc::io_error: return KRP_ERR_IO;
    case krp::Errc::unsupported: return KRP_ERR_UNSUPPORTED;
    case krp::Errc::internal: return KRP_ERR_INTERNAL;
  }
  return KRP_ERR_INTERNAL;
}

template <typename Fn>
krp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return KRP_OK;
  } catch (const krp::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return KRP_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KRP_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) krp::fail(krp::Errc::invalid_argument, what);
}

std::vector<std::int64_t> counts_vector(const krp_bundle* bundle, const int64_t* counts) {
  require(counts != nullptr, "counts pointer is null");
  return std::vector<std::int64_t>(counts, counts + bundle->b.metric.size());
}

json parse_options(const char* options_json) {
  if (options_json == nullptr || *options_json == '\0') return json::object();
  return json::parse(options_json);
}

}  // namespace

extern "C" {

const char* krp_version(void) { return "0.1.0"; }

const char* krp_last_error(void) { return g_last_error.c_str(); }

void krp_string_free(char* s) { std::free(s); }

void krp_bundle_free(krp_bundle* bundle) { delete bundle; }

krp_status krp_bundle_load(const char* path, krp_bundle** out) {
  return guarded([&] {
    require(path && out, "path/out must not be null");
    *out = new krp_bundle{krp::load_bundle(path)};
  });
}

krp_status krp_bundle_from_json(const char* json_text, krp_bundle** out) {
  return guarded([&] {
    require(json_text && out, "json_text/out must not be null");
    *out = new krp_bundle{krp::bundle_from_json(json::parse(json_text))};
  });
}

krp_status krp_bundle_save(const krp_bundle* bundle, const char* path) {
  return guarded([&] {
    require(bundle && path, "bundle/path must not be null");
    krp::save_bundle(bundle->b, path);
  });
}

krp_status krp_bundle_to_json(const krp_bundle* bundle, char** json_out) {
  return guarded([&] {
    require(bundle && json_out, "bundle/json_out must not be null");
    *json_out = dup_string(krp::bundle_to_json(bundle->b).dump());
  });
}

int64_t krp_bundle_num_points(const krp_bundle* bundle) {
  return bundle ? static_cast<int64_t>(bundle->b.metric.size()) : 0;
}

int64_t krp_bundle_fleet_size(const krp_bundle* bundle) { return bundle ? bundle->b.k : 0; }

int krp_bundle_has_tree(const krp_bundle* bundle) {
  return bundle && bundle->b.tree.has_value() ? 1 : 0;
}

krp_status krp_bundle_set_demand(krp_bundle* bundle, const double* probs, int64_t n) {
  return guarded([&] {
    require(bundle && probs, "bundle/probs must not be null");
    require(n == static_cast<int64_t>(bundle->b.metric.size()),
            "probs length must match the point count");
    auto demand = krp::DemandDistribution::validated(std::vector<double>(probs, probs + n));
    bundle->b =
        krp::InstanceBundle::validated(bundle->b.metric, std::move(demand), bundle->b.k,
                                       bundle->b.allowable, std::nullopt);
  });
}

krp_status krp_bundle_set_fleet_size(krp_bundle* bundle, int64_t k) {
  return guarded([&] {
    require(bundle != nullptr, "bundle must not be null");
    require(k >= 1, "k must be >= 1");
    bundle->b.k = k;
  });
}

krp_status krp_validate_matrix(const char* matrix_json, char** report_json) {
  return guarded([&] {
    require(matrix_json && report_json, "matrix_json/report_json must not be null");
    const json doc = json::parse(matrix_json);
    std::vector<double> flat;
    std::size_t n = 0;
    if (!doc.is_array()) krp::fail(krp::Errc::parse_error, "matrix must be a JSON array");
    if (!doc.empty() && doc.front().is_array()) {
      n = doc.size();
      for (const auto& row : doc)
        for (const auto& v : row) flat.push_back(v.get<double>());
      if (flat.size() != n * n) krp::fail(krp::Errc::invariant_violation, "matrix is not square");
    } else {
      flat = doc.get<std::vector<double>>();
      n = static_cast<std::size_t>(std::llround(std::sqrt(double(flat.size()))));
      if (n * n != flat.size())
        krp::fail(krp::Errc::invariant_violation, "flat matrix length is not a perfect square");
    }
    const auto report = krp::MetricSpace::validate(n, flat);
    json violations = json::array();
    for (const auto& v : report.violations) {
      violations.push_back({{"kind", int(v.kind)},
                            {"description", v.describe()},
                            {"i", v.i},
                            {"m", v.m},
                            {"j", v.j},
                            {"value", v.value}});
    }
    *report_json = dup_string(
        json{{"valid", report.ok()}, {"n", n}, {"violations", violations}}.dump());
  });
}

krp_status krp_gen_star(int64_t n, int64_t k, krp_bundle** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new krp_bundle{krp::gen_star(n, k)};
  });
}

krp_status krp_gen_coverage_bundle(const char* coverage_json, krp_bundle** out) {
  return guarded([&] {
    require(coverage_json && out, "coverage_json/out must not be null");
    *out = new krp_bundle{
        krp::gen_coverage_reduction(krp::coverage_from_json(json::parse(coverage_json)))};
  });
}

krp_status krp_gen_full_cover_system(int64_t universe_size, int64_t cover_budget,
                                     int64_t decoy_sets, double epsilon, uint64_t seed,
                                     char** coverage_json) {
  return guarded([&] {
    require(coverage_json != nullptr, "coverage_json must not be null");
    const auto cov =
        krp::gen_full_cover_system(universe_size, cover_budget, decoy_sets, epsilon, seed);
    *coverage_json = dup_string(krp::coverage_to_json(cov).dump());
  });
}

krp_status krp_gen_euclidean(int64_t n, int64_t k, double concentration, uint64_t seed,
                             krp_bundle** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    require(n >= 2, "n must be >= 2");
    *out = new krp_bundle{
        krp::gen_euclidean_bundle(static_cast<std::size_t>(n), k, seed, concentration)};
  });
}

krp_status krp_gen_tree(int64_t n, int64_t k, uint64_t seed, krp_bundle** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    require(n >= 2, "n must be >= 2");
    *out = new krp_bundle{krp::gen_tree_bundle(static_cast<std::size_t>(n), k, seed)};
  });
}

krp_status krp_place(const krp_bundle* bundle, const char* algo, uint64_t seed,
                     const char* options_json, int64_t* counts_out, char** info_json_out) {
  return guarded([&] {
    require(bundle && algo && counts_out, "bundle/algo/counts_out must not be null");
    const json opts = parse_options(options_json);
    const std::string name = algo;
    krp::Placement placement;
    json info{{"algo", name}, {"k", bundle->b.k}, {"seed", seed}};

    if (name == "rp") {
      placement = krp::rp_place(bundle->b.demand, bundle->b.k, seed);
    } else if (name == "vrrp") {
      placement = krp::vrrp_place(bundle->b.demand, bundle->b.k, seed);
    } else if (name == "rrp") {
      placement = krp::rrp_place(bundle->b, seed);
    } else if (name == "tree-dp") {
      if (!bundle->b.tree) krp::fail(krp::Errc::not_a_tree, "bundle has no tree metric");
      auto result = krp::tree_dp_solve(*bundle->b.tree, bundle->b.k);
      placement = std::move(result.placement);
      info["objective"] = result.cost;
    } else if (name == "uckm") {
      krp::UckmOptions uopt;
      if (opts.contains("gap")) uopt.gap_tol = opts.at("gap").get<double>();
      if (opts.contains("time_limit_s")) uopt.time_limit_s = opts.at("time_limit_s").get<double>();
      json log = json::array();
      uopt.on_incumbent = [&log](const krp::UckmLogEntry& e) {
        log.push_back({{"iteration", e.iteration},
                       {"lower_bound", e.lower_bound},
                       {"incumbent", e.incumbent},
                       {"gap", e.gap}});
      };
      auto solution = krp::uckm_solve(bundle->b.metric, bundle->b.demand, bundle->b.k, uopt);
      info["log"] = std::move(log);
      placement = std::move(solution.placement);
      info["objective"] = solution.objective;
      info["lower_bound"] = solution.lower_bound;
      info["optimality_gap"] = solution.optimality_gap;
      info["status"] = krp::solve_status_name(solution.status);
      info["nodes_explored"] = solution.nodes_explored;
      if (opts.value("dump_plan", false)) info["transport"] = krp::to_json(solution.transport);
    } else {
      krp::fail(krp::Errc::invalid_argument, "unknown algorithm '" + name + "'");
    }

    for (std::size_t i = 0; i < placement.counts.size(); ++i) counts_out[i] = placement.counts[i];
    if (info_json_out) {
      info["counts"] = placement.counts;
      *info_json_out = dup_string(info.dump());
    }
  });
}

krp_status krp_evaluate_mc(const krp_bundle* bundle, const int64_t* counts, int64_t samples,
                           uint64_t seed, int threads, char** estimate_json) {
  return guarded([&] {
    require(bundle && estimate_json, "bundle/estimate_json must not be null");
    const krp::Placement s{counts_vector(bundle, counts)};
    const auto est = krp::mc_cost(bundle->b, s, samples, seed, threads);
    json doc = krp::to_json(est);
    doc["per_rider_mean"] = est.mean / double(bundle->b.k);
    doc["per_rider_ci95"] = est.ci95_halfwidth / double(bundle->b.k);
    *estimate_json = dup_string(doc.dump());
  });
}

krp_status krp_evaluate_exact(const krp_bundle* bundle, const int64_t* counts, double* cost_out) {
  return guarded([&] {
    require(bundle && cost_out, "bundle/cost_out must not be null");
    *cost_out = krp::exact_cost_enumeration(bundle->b, krp::Placement{counts_vector(bundle, counts)});
  });
}

krp_status krp_evaluate_tree_exact(const krp_bundle* bundle, const int64_t* counts,
                                   double* cost_out) {
  return guarded([&] {
    require(bundle && cost_out, "bundle/cost_out must not be null");
    if (!bundle->b.tree) krp::fail(krp::Errc::not_a_tree, "bundle has no tree metric");
    *cost_out = krp::tree_exact_cost(*bundle->b.tree,
                                     krp::Placement{counts_vector(bundle, counts)}, bundle->b.k);
  });
}

krp_status krp_matching_cost(const krp_bundle* bundle, const int64_t* u_counts,
                             const int64_t* v_counts, double* cost_out, char** plan_json_out) {
  return guarded([&] {
    require(bundle && cost_out, "bundle/cost_out must not be null");
    const auto plan = krp::matching_cost(bundle->b.metric, krp::Placement{counts_vector(bundle, u_counts)},
                                         krp::Placement{counts_vector(bundle, v_counts)});
    *cost_out = plan.total_cost;
    if (plan_json_out) *plan_json_out = dup_string(krp::to_json(plan).dump());
  });
}

krp_status krp_wasserstein(const krp_bundle* bundle, const double* mu, const double* nu,
                           double* cost_out, char** plan_json_out) {
  return guarded([&] {
    require(bundle && mu && nu && cost_out, "bundle/mu/nu/cost_out must not be null");
    const std::size_t n = bundle->b.metric.size();
    const auto plan = krp::wasserstein(
        bundle->b.metric, krp::DemandDistribution::validated(std::vector<double>(mu, mu + n)),
        krp::DemandDistribution::validated(std::vector<double>(nu, nu + n)));
    *cost_out = plan.total_cost;
    if (plan_json_out) *plan_json_out = dup_string(krp::to_json(plan).dump());
  });
}

krp_status krp_bench(const krp_bundle* bundle, const char* algos_csv, int64_t runs,
                     int64_t demand_sets, uint64_t seed, const char* options_json,
                     char** report_json_out, char** scatter_csv_out, char** timing_json_out) {
  return guarded([&] {
    require(bundle && algos_csv && report_json_out,
            "bundle/algos_csv/report_json_out must not be null");
    const json opts = parse_options(options_json);

    krp::BenchOptions bopt;
    bopt.runs = runs;
    bopt.demand_sets = demand_sets;
    bopt.seed = seed;
    std::string token;
    for (const char* p = algos_csv;; ++p) {
      if (*p == ',' || *p == '\0') {
        if (!token.empty()) bopt.algos.push_back(token);
        token.clear();
        if (*p == '\0') break;
      } else {
        token += *p;
      }
    }
    bopt.threads = opts.value("threads", 1);
    bopt.independent_demand = opts.value("independent_demand", false);
    bopt.uckm_gap = opts.value("gap", 0.0);
    if (opts.contains("time_limit_s")) bopt.uckm_time_limit_s = opts.at("time_limit_s").get<double>();
    if (opts.contains("fixed_counts")) {
      bopt.fixed_placement =
          krp::Placement::validated(opts.at("fixed_counts").get<std::vector<std::int64_t>>());
    }

    const auto report = krp::run_bench(bundle->b, bopt);
    *report_json_out = dup_string(krp::report_to_json(report).dump(2));
    if (scatter_csv_out) *scatter_csv_out = dup_string(krp::scatter_to_csv(report));
    if (timing_json_out) *timing_json_out = dup_string(krp::timing_to_json(report).dump(2));
  });
}

krp_status krp_ingest_trips(const char* csv_path, int64_t zone_count, const char* options_json,
                            char** probs_json_out) {
  return guarded([&] {
    require(csv_path && probs_json_out, "csv_path/probs_json_out must not be null");
    const json opts = parse_options(options_json);
    krp::TripIngestOptions topt;
    if (opts.contains("zone_column")) topt.zone_column = opts.at("zone_column").get<std::string>();
    if (opts.contains("zone_map")) {
      std::map<std::string, std::int64_t> map;
      for (const auto& [key, value] : opts.at("zone_map").items())
        map[key] = value.get<std::int64_t>();
      topt.zone_map = std::move(map);
    }
    const auto demand = krp::ingest_trips_file(csv_path, zone_count, topt);
    *probs_json_out =
        dup_string(json{{"n", zone_count}, {"probs", demand.probs}}.dump());
  });
}

}  // extern "C"
