// Command-line front end for the krp shared library. Talks to the library
// exclusively through the C API in krp/krp.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "krp/krp.h"

using nlohmann::json;

namespace {

struct StringOut {
  char* ptr = nullptr;
  ~StringOut() { krp_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct BundleHandle {
  krp_bundle* ptr = nullptr;
  ~BundleHandle() { krp_bundle_free(ptr); }
};

[[noreturn]] void die(krp_status status) {
  json err{{"error", {{"code", int(status)}, {"message", krp_last_error()}}}};
  std::cerr << err.dump() << '\n';
  std::exit(1);
}

void check(krp_status status) {
  if (status != KRP_OK) die(status);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << json{{"error", {{"code", int(KRP_ERR_IO)},
                                 {"message", "cannot write " + path}}}}.dump()
              << '\n';
    std::exit(1);
  }
  out << content;
}

void emit_json(const std::string& out_path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << json{{"error", {{"code", int(KRP_ERR_IO)},
                                 {"message", "cannot read " + path}}}}.dump()
              << '\n';
    std::exit(1);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BundleHandle load_bundle_arg(const std::string& path) {
  BundleHandle h;
  check(krp_bundle_load(path.c_str(), &h.ptr));
  return h;
}

std::vector<int64_t> read_counts(const std::string& path, int64_t expect_n) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    std::cerr << json{{"error", {{"code", int(KRP_ERR_PARSE)}, {"message", e.what()}}}}.dump()
              << '\n';
    std::exit(1);
  }
  std::vector<int64_t> counts;
  if (doc.is_array())
    counts = doc.get<std::vector<int64_t>>();
  else
    counts = doc.at("counts").get<std::vector<int64_t>>();
  if (expect_n >= 0 && int64_t(counts.size()) != expect_n) {
    std::cerr << json{{"error",
                       {{"code", int(KRP_ERR_DIMENSION_MISMATCH)},
                        {"message", "placement length does not match the bundle"}}}}.dump()
              << '\n';
    std::exit(1);
  }
  return counts;
}

// Accepts a headerless CSV matrix or a JSON array file.
std::string matrix_file_to_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    json parsed = json::parse(text);
    return parsed.dump();
  } catch (const json::exception&) {
    // CSV fallback
  }
  json rows = json::array();
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    json row = json::array();
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krp: stochastic fleet placement toolkit"};
  app.require_subcommand(1);

  // --- validate ---
  std::string v_in, v_matrix, v_out;
  auto* validate = app.add_subcommand("validate", "check metric axioms of a bundle or matrix");
  validate->add_option("--in", v_in, "instance bundle JSON");
  validate->add_option("--matrix", v_matrix, "distance matrix (CSV or JSON array)");
  validate->add_option("--out", v_out, "write the validation report here");

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "generate instances");
  gen->require_subcommand(1);
  int64_t g_n = 10, g_k = 1, g_universe = 25, g_budget = 5, g_decoys = 0;
  uint64_t g_seed = 0;
  double g_epsilon = 0.05, g_concentration = 1.0;
  std::string g_out, g_cov_in, g_cov_out;

  auto* gen_star = gen->add_subcommand("star", "tightness instance");
  gen_star->add_option("--n", g_n, "points (1 center + n-1 spokes)")->required();
  gen_star->add_option("--k", g_k, "fleet size")->required();
  gen_star->add_option("--out", g_out, "bundle output path");

  auto* gen_cov = gen->add_subcommand("coverage", "coverage-reduction instance");
  gen_cov->add_option("--universe", g_universe, "universe size N");
  gen_cov->add_option("--budget", g_budget, "cover budget l (k = l)");
  gen_cov->add_option("--decoys", g_decoys, "extra random sets");
  gen_cov->add_option("--epsilon", g_epsilon, "gap parameter");
  gen_cov->add_option("--seed", g_seed, "seed for decoy sets");
  gen_cov->add_option("--cov", g_cov_in, "existing coverage instance JSON");
  gen_cov->add_option("--cov-out", g_cov_out, "write the coverage system here");
  gen_cov->add_option("--out", g_out, "bundle output path");

  auto* gen_euclid = gen->add_subcommand("euclidean", "random points in the unit square");
  gen_euclid->add_option("--n", g_n, "point count")->required();
  gen_euclid->add_option("--k", g_k, "fleet size")->required();
  gen_euclid->add_option("--seed", g_seed, "seed");
  gen_euclid->add_option("--concentration", g_concentration, "demand Dirichlet concentration");
  gen_euclid->add_option("--out", g_out, "bundle output path");

  auto* gen_tree = gen->add_subcommand("tree", "random binarized tree metric");
  gen_tree->add_option("--n", g_n, "node count before binarization")->required();
  gen_tree->add_option("--k", g_k, "fleet size")->required();
  gen_tree->add_option("--seed", g_seed, "seed");
  gen_tree->add_option("--out", g_out, "bundle output path");

  // --- place ---
  std::string p_in, p_algo, p_out;
  uint64_t p_seed = 0;
  double p_gap = 0.0, p_time_limit = 0.0;
  bool p_dump_plan = false;
  auto* place = app.add_subcommand("place", "compute a placement");
  place->add_option("--in", p_in, "instance bundle JSON")->required();
  place->add_option("--algo", p_algo, "rp | vrrp | rrp | tree-dp | uckm")->required();
  place->add_option("--seed", p_seed, "seed");
  place->add_option("--gap", p_gap, "uckm relative gap tolerance");
  place->add_option("--time-limit-s", p_time_limit, "uckm time limit in seconds (0 = none)");
  place->add_flag("--dump-plan", p_dump_plan, "include the uckm transport plan");
  place->add_option("--out", p_out, "placement output path");

  // --- evaluate ---
  std::string e_in, e_placement, e_vs, e_out;
  int64_t e_mc = 0;
  bool e_exact = false, e_tree_exact = false, e_dump_plan = false;
  uint64_t e_seed = 0;
  int e_threads = 1;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a placement");
  evaluate->add_option("--in", e_in, "instance bundle JSON")->required();
  evaluate->add_option("--placement", e_placement, "placement JSON")->required();
  evaluate->add_option("--mc", e_mc, "Monte Carlo with this many samples");
  evaluate->add_flag("--exact", e_exact, "exact enumeration (tiny instances)");
  evaluate->add_flag("--tree-exact", e_tree_exact, "closed form on the tree metric");
  evaluate->add_option("--vs", e_vs, "matching distance to this other placement");
  evaluate->add_flag("--dump-plan", e_dump_plan, "include the matching plan (--vs only)");
  evaluate->add_option("--seed", e_seed, "seed (Monte Carlo)");
  evaluate->add_option("--threads", e_threads, "worker threads (Monte Carlo)");
  evaluate->add_option("--out", e_out, "estimate output path");

  // --- bench ---
  std::string b_in, b_algos = "rp,vrrp", b_out, b_csv, b_timing_out, b_fixed;
  int64_t b_runs = 20, b_demand_sets = 100;
  uint64_t b_seed = 0;
  int b_threads = 1;
  bool b_independent = false;
  double b_gap = 0.0, b_time_limit = 0.0;
  auto* bench = app.add_subcommand("bench", "run the benchmark protocol");
  bench->add_option("--in", b_in, "instance bundle JSON")->required();
  bench->add_option("--algos", b_algos, "comma-separated: rp,vrrp,rrp,tree-dp,uckm,fixed");
  bench->add_option("--runs", b_runs, "independent runs per randomized algorithm");
  bench->add_option("--demand-sets", b_demand_sets, "demand realizations per run");
  bench->add_option("--seed", b_seed, "seed");
  bench->add_option("--threads", b_threads, "worker threads for scoring");
  bench->add_flag("--independent-demand", b_independent,
                  "fresh realizations per run instead of common random numbers");
  bench->add_option("--gap", b_gap, "uckm gap tolerance");
  bench->add_option("--time-limit-s", b_time_limit, "uckm time limit (0 = none)");
  bench->add_option("--fixed", b_fixed, "placement JSON scored as algorithm 'fixed'");
  bench->add_option("--out", b_out, "report output path");
  bench->add_option("--csv", b_csv, "per-realization scatter records (CSV)");
  bench->add_option("--timing-out", b_timing_out, "wall-time sidecar JSON");

  // --- ingest ---
  std::string i_trips, i_column = "PULocationID", i_zone_map, i_out, i_bundle, i_bundle_out;
  int64_t i_zones = 0;
  auto* ingest = app.add_subcommand("ingest", "trip CSV to demand distribution");
  ingest->add_option("--trips", i_trips, "headered trip CSV")->required();
  ingest->add_option("--zones", i_zones, "zone count n")->required();
  ingest->add_option("--column", i_column, "pickup zone column name");
  ingest->add_option("--zone-map", i_zone_map, "JSON map raw id -> dense index");
  ingest->add_option("--out", i_out, "demand output path");
  ingest->add_option("--bundle", i_bundle, "bundle whose demand to replace");
  ingest->add_option("--bundle-out", i_bundle_out, "where to write the updated bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors exit 2; --help exits 0
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*validate) {
    std::string matrix_json;
    if (!v_matrix.empty()) {
      matrix_json = matrix_file_to_json(v_matrix);
    } else if (!v_in.empty()) {
      json doc;
      try {
        doc = json::parse(read_file(v_in));
      } catch (const json::exception& e) {
        std::cerr << json{{"error", {{"code", int(KRP_ERR_PARSE)}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 1;
      }
      if (doc.contains("dist")) {
        matrix_json = doc.at("dist").dump();
      } else {
        // No inline matrix; a full load validates everything including the tree.
        BundleHandle h = load_bundle_arg(v_in);
        emit_json(v_out, json{{"valid", true}, {"n", krp_bundle_num_points(h.ptr)}});
        std::cout << "valid metric\n";
        return 0;
      }
    } else {
      std::cerr << "validate needs --in or --matrix\n";
      return 2;
    }
    StringOut report;
    check(krp_validate_matrix(matrix_json.c_str(), &report.ptr));
    const json doc = json::parse(report.str());
    emit_json(v_out, doc);
    std::cout << (doc.at("valid").get<bool>() ? "valid metric\n" : "INVALID metric\n");
    return doc.at("valid").get<bool>() ? 0 : 1;
  }

  if (*gen) {
    BundleHandle h;
    if (*gen_star) {
      check(krp_gen_star(g_n, g_k, &h.ptr));
    } else if (*gen_cov) {
      std::string cov_json;
      if (!g_cov_in.empty()) {
        cov_json = read_file(g_cov_in);
      } else {
        StringOut cov;
        check(krp_gen_full_cover_system(g_universe, g_budget, g_decoys, g_epsilon, g_seed,
                                        &cov.ptr));
        cov_json = cov.str();
      }
      if (!g_cov_out.empty()) write_file(g_cov_out, cov_json + "\n");
      check(krp_gen_coverage_bundle(cov_json.c_str(), &h.ptr));
    } else if (*gen_euclid) {
      check(krp_gen_euclidean(g_n, g_k, g_concentration, g_seed, &h.ptr));
    } else {
      check(krp_gen_tree(g_n, g_k, g_seed, &h.ptr));
    }
    if (g_out.empty()) {
      StringOut text;
      check(krp_bundle_to_json(h.ptr, &text.ptr));
      std::cout << text.str() << '\n';
    } else {
      check(krp_bundle_save(h.ptr, g_out.c_str()));
      std::cout << "wrote " << g_out << " (n=" << krp_bundle_num_points(h.ptr)
                << ", k=" << krp_bundle_fleet_size(h.ptr) << ")\n";
    }
    return 0;
  }

  if (*place) {
    BundleHandle h = load_bundle_arg(p_in);
    std::vector<int64_t> counts(static_cast<size_t>(krp_bundle_num_points(h.ptr)));
    json opts{{"gap", p_gap}, {"dump_plan", p_dump_plan}};
    if (p_time_limit > 0.0) opts["time_limit_s"] = p_time_limit;
    StringOut info;
    check(krp_place(h.ptr, p_algo.c_str(), p_seed, opts.dump().c_str(), counts.data(),
                    &info.ptr));
    const json doc = json::parse(info.str());
    if (doc.contains("log")) {
      for (const auto& e : doc.at("log"))
        std::cerr << "[uckm] it=" << e.at("iteration").get<long long>()
                  << " lb=" << e.at("lower_bound").get<double>()
                  << " incumbent=" << e.at("incumbent").get<double>()
                  << " gap=" << e.at("gap").get<double>() << '\n';
    }
    emit_json(p_out, doc);
    if (doc.contains("objective"))
      std::cout << p_algo << " objective: " << doc.at("objective").get<double>() << '\n';
    return 0;
  }

  if (*evaluate) {
    BundleHandle h = load_bundle_arg(e_in);
    const int64_t n = krp_bundle_num_points(h.ptr);
    const std::vector<int64_t> counts = read_counts(e_placement, n);
    const int modes = int(e_mc > 0) + int(e_exact) + int(e_tree_exact) + int(!e_vs.empty());
    if (modes != 1) {
      std::cerr << "evaluate needs exactly one of --mc N, --exact, --tree-exact, --vs\n";
      return 2;
    }
    json doc;
    if (e_mc > 0) {
      StringOut est;
      check(krp_evaluate_mc(h.ptr, counts.data(), e_mc, e_seed, e_threads, &est.ptr));
      doc = json::parse(est.str());
    } else if (e_exact || e_tree_exact) {
      double cost = 0.0;
      check(e_exact ? krp_evaluate_exact(h.ptr, counts.data(), &cost)
                    : krp_evaluate_tree_exact(h.ptr, counts.data(), &cost));
      doc = json{{"mean", cost},
                 {"per_rider_mean", cost / double(krp_bundle_fleet_size(h.ptr))},
                 {"method", e_exact ? "exact" : "tree-exact"}};
    } else {
      const std::vector<int64_t> other = read_counts(e_vs, n);
      double cost = 0.0;
      StringOut plan;
      check(krp_matching_cost(h.ptr, counts.data(), other.data(), &cost,
                              e_dump_plan ? &plan.ptr : nullptr));
      doc = json{{"matching_cost", cost}};
      if (e_dump_plan) doc["plan"] = json::parse(plan.str());
    }
    emit_json(e_out, doc);
    return 0;
  }

  if (*bench) {
    BundleHandle h = load_bundle_arg(b_in);
    json opts{{"threads", b_threads}, {"independent_demand", b_independent}, {"gap", b_gap}};
    if (b_time_limit > 0.0) opts["time_limit_s"] = b_time_limit;
    if (!b_fixed.empty()) opts["fixed_counts"] = read_counts(b_fixed, krp_bundle_num_points(h.ptr));
    StringOut report, scatter, timing;
    check(krp_bench(h.ptr, b_algos.c_str(), b_runs, b_demand_sets, b_seed, opts.dump().c_str(),
                    &report.ptr, b_csv.empty() ? nullptr : &scatter.ptr,
                    b_timing_out.empty() ? nullptr : &timing.ptr));
    if (!b_out.empty())
      write_file(b_out, report.str() + "\n");
    else
      std::cout << report.str() << '\n';
    if (!b_csv.empty()) write_file(b_csv, scatter.str());
    if (!b_timing_out.empty()) write_file(b_timing_out, timing.str() + "\n");

    // Human summary with wall time on stderr so --out stdout stays machine-readable.
    const json doc = json::parse(report.str());
    for (const auto& row : doc.at("rows"))
      std::cerr << row.at("algo").get<std::string>() << ": mean/rider "
                << row.at("mean_per_rider_eta").get<double>() << " +/- "
                << row.at("ci95_halfwidth").get<double>() << ", min "
                << row.at("min_per_rider_eta").get<double>() << '\n';
    return 0;
  }

  if (*ingest) {
    json opts{{"zone_column", i_column}};
    if (!i_zone_map.empty()) opts["zone_map"] = json::parse(read_file(i_zone_map));
    StringOut probs;
    check(krp_ingest_trips(i_trips.c_str(), i_zones, opts.dump().c_str(), &probs.ptr));
    const json doc = json::parse(probs.str());
    emit_json(i_out, doc);
    if (!i_bundle.empty()) {
      BundleHandle h = load_bundle_arg(i_bundle);
      const auto p = doc.at("probs").get<std::vector<double>>();
      check(krp_bundle_set_demand(h.ptr, p.data(), int64_t(p.size())));
      const std::string out = i_bundle_out.empty() ? i_bundle : i_bundle_out;
      check(krp_bundle_save(h.ptr, out.c_str()));
      std::cout << "updated " << out << '\n';
    }
    return 0;
  }

  return 2;
}
