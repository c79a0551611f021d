#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "yaq/bench.hpp"
#include "yaq/csv.hpp"
#include "yaq/dsl.hpp"
#include "yaq/generalized.hpp"
#include "yaq/generators.hpp"
#include "yaq/oracle.hpp"
#include "yaq/path.hpp"

namespace {

using nlohmann::json;
using namespace yaq;

json stats_to_json(const EvalStats& stats, const std::string& algo, const std::string& semiring,
                   std::size_t input_size, std::size_t output_size) {
  json per_node = json::object();
  for (const auto& [node, size] : stats.per_node_sizes) per_node[std::to_string(node)] = size;
  return json{{"schema", 1},
              {"algo", algo},
              {"semiring", semiring},
              {"input_size", input_size},
              {"output_size", output_size},
              {"max_intermediate", stats.max_intermediate},
              {"total_intermediate", stats.total_intermediate},
              {"tuple_ops", stats.tuple_ops},
              {"doubling_rounds", stats.doubling_rounds},
              {"delta_final", stats.delta_final},
              {"fallback_used", stats.fallback_used},
              {"per_node_sizes", per_node}};
}

struct EvalArgs {
  std::string query_file;
  std::string data_dir;
  std::string algo = "genyan";
  std::optional<std::uint64_t> delta;
  double alpha = kDefaultAlpha;
  std::string out_file;
  std::string stats_file;
  std::string semiring_override;
};

template <Semiring S>
int run_eval(const QuerySpec& spec, const EvalArgs& args) {
  IngestResult<S> ing = ingest_csv<S>(spec.query, args.data_dir);
  EvalStats stats;
  Relation<S> result{schema_of(spec.query.free)};

  if (args.algo == "yannakakis") {
    result = yannakakis_eval(spec.query, ing.db, stats);
  } else if (args.algo == "genyan") {
    result = eval_general_cq(spec.query, ing.db, stats, args.delta, args.alpha);
  } else if (args.algo == "path") {
    if (args.delta) std::cerr << "warning: --delta is ignored for --algo path (driven by doubling)\n";
    result = path_eval_doubling<S>(spec.query, ing.db, args.alpha, stats);
  } else if (args.algo == "oracle") {
    result = brute_force_eval(spec.query, ing.db);
  } else {
    throw ConfigError("unknown --algo '" + args.algo + "'");
  }

  auto decode = [&](Value v) { return ing.dict.decode(v); };
  if (args.out_file.empty()) {
    emit_relation_csv<S>(std::cout, result, spec.query, decode);
  } else {
    std::ofstream f(args.out_file);
    if (!f) throw DataError("cannot write output file '" + args.out_file + "'");
    emit_relation_csv<S>(f, result, spec.query, decode);
  }
  if (!args.stats_file.empty()) {
    std::ofstream f(args.stats_file);
    if (!f) throw DataError("cannot write stats file '" + args.stats_file + "'");
    f << stats_to_json(stats, args.algo, S::name(), ing.db.total_size(), result.size()).dump(2) << "\n";
  }
  return 0;
}

int cmd_analyze(const std::string& query_file, bool as_json) {
  QuerySpec spec = load_query_spec(query_file);
  const Query& q = spec.query;
  bool acyclic = is_acyclic(q);
  json out;
  out["query"] = spec.name;
  out["atoms"] = q.atoms.size();
  out["variables"] = q.var_names.size();
  out["acyclic"] = acyclic;
  if (acyclic) {
    ReduceResult rr = reduce_query(q);
    Decomposition d = decompose_reduced(rr.reduced);
    out["free_connex"] = is_free_connex(q);
    out["projection_width"] = projection_width(q);
    out["free_width"] = free_width(q);
    json reduced = json::array();
    for (const auto& a : rr.reduced.atoms) {
      json vars = json::array();
      a.vars.for_each([&](VarId v) { vars.push_back(q.var_names[v]); });
      reduced.push_back({{"atom", a.name}, {"vars", vars}});
    }
    out["reduced"] = reduced;
    json comps = json::array();
    for (const auto& c : d.components) {
      json atoms = json::array();
      for (const auto& a : c.atoms) atoms.push_back(a.name);
      json fv = json::array();
      c.free.for_each([&](VarId v) { fv.push_back(q.var_names[v]); });
      comps.push_back({{"atoms", atoms}, {"free", fv}});
    }
    out["components"] = comps;
  }
  if (as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "query " << spec.name << ": " << q.atoms.size() << " atoms, " << q.var_names.size()
            << " variables\n";
  std::cout << "acyclic: " << (acyclic ? "yes" : "no") << "\n";
  if (!acyclic) return 0;
  std::cout << "free-connex: " << (out["free_connex"].get<bool>() ? "yes" : "no") << "\n";
  std::cout << "projection width: " << out["projection_width"] << "\n";
  std::cout << "free width: " << out["free_width"] << "\n";
  std::cout << "reduced atoms:";
  for (const auto& a : out["reduced"]) {
    std::cout << " " << a["atom"].get<std::string>() << "(";
    bool first = true;
    for (const auto& v : a["vars"]) {
      std::cout << (first ? "" : ",") << v.get<std::string>();
      first = false;
    }
    std::cout << ")";
  }
  std::cout << "\ncomponents:";
  for (const auto& c : out["components"]) {
    std::cout << " {";
    bool first = true;
    for (const auto& a : c["atoms"]) {
      std::cout << (first ? "" : ",") << a.get<std::string>();
      first = false;
    }
    std::cout << "}";
  }
  std::cout << "\n";
  return 0;
}

int cmd_bench(const std::string& shape_name, int k, int ell, std::size_t d, const std::string& grid_str,
              const std::string& algos_str, double alpha, const std::string& out_file) {
  std::vector<std::size_t> grid;
  {
    std::stringstream ss(grid_str);
    std::string part;
    while (std::getline(ss, part, ',')) grid.push_back(std::stoull(part));
  }
  std::vector<std::string> algos;
  {
    std::stringstream ss(algos_str);
    std::string part;
    while (std::getline(ss, part, ',')) algos.push_back(part);
  }
  FamilyShape shape;
  int param = 0;
  if (shape_name == "fig1") {
    shape = FamilyShape::kFig1;
  } else if (shape_name == "star") {
    shape = FamilyShape::kStar;
    param = ell;
  } else if (shape_name == "path") {
    shape = FamilyShape::kPath;
    param = k;
  } else {
    throw ConfigError("unknown --shape '" + shape_name + "'");
  }

  json report;
  report["schema"] = 1;
  report["shape"] = shape_name;
  report["d_target"] = d;
  json algo_reports = json::object();
  for (const auto& algo : algos) {
    std::vector<BenchPoint> pts;
    json jpts = json::array();
    for (std::size_t out_t : grid) {
      Instance<BooleanSemiring> inst;
      try {
        inst = gen_family_point(shape, d, out_t, param);
      } catch (const ConfigError& e) {
        std::cerr << "note: skipping infeasible grid point |OUT|=" << out_t << ": " << e.what() << "\n";
        continue;
      }
      if (algo == "oracle" && static_cast<double>(inst.exact_d) > 3000) {
        std::cerr << "note: skipping oracle at |D|=" << inst.exact_d << " (too large)\n";
        continue;
      }
      BenchPoint p = bench_run(algo, inst, alpha);
      pts.push_back(p);
      jpts.push_back({{"out", p.exact_out},
                      {"d", p.exact_d},
                      {"output_size", p.output_size},
                      {"max_intermediate", p.max_intermediate},
                      {"tuple_ops", p.tuple_ops},
                      {"doubling_rounds", p.doubling_rounds},
                      {"delta_final", p.delta_final}});
      std::cerr << shape_name << " " << algo << " out=" << p.exact_out << " d=" << p.exact_d
                << " max_intermediate=" << p.max_intermediate << " tuple_ops=" << p.tuple_ops << "\n";
    }
    SlopeFit fit = fit_max_intermediate(pts);
    algo_reports[algo] = {{"points", jpts},
                          {"slope", fit.slope},
                          {"intercept", fit.intercept},
                          {"max_abs_residual", fit.max_abs_residual}};
    std::cout << algo << ": fitted max_intermediate ~ |OUT|^" << fit.slope
              << " (residual " << fit.max_abs_residual << ")\n";
  }
  report["algos"] = algo_reports;
  if (!out_file.empty()) {
    std::ofstream f(out_file);
    if (!f) throw DataError("cannot write report file '" + out_file + "'");
    f << report.dump(2) << "\n";
  }
  return 0;
}

int cmd_gen(const std::string& shape, std::size_t d, std::size_t out_size, int k, int ell,
            std::uint64_t seed, const std::string& dir) {
  if (shape == "random") {
    Instance<BooleanSemiring> inst = gen_random_acyclic<BooleanSemiring>(seed);
    emit_instance(inst.q, inst.db, SemiringKind::kBoolean, "random", dir);
    std::cout << "wrote random instance (|D|=" << inst.exact_d << ") to " << dir << "\n";
    return 0;
  }
  Instance<BooleanSemiring> inst;
  std::string name;
  if (shape == "fig1") {
    inst = gen_fig1_instance(d, out_size);
    name = "fig1";
  } else if (shape == "star") {
    inst = gen_family_point(FamilyShape::kStar, d, out_size, ell);
    name = "star";
  } else if (shape == "path") {
    inst = gen_family_point(FamilyShape::kPath, d, out_size, k);
    name = "path";
  } else if (shape == "fconnex") {
    inst = gen_free_connex_instance(d, out_size);
    name = "fconnex";
  } else {
    throw ConfigError("unknown --shape '" + shape + "'");
  }
  emit_instance(inst.q, inst.db, SemiringKind::kBoolean, name, dir);
  std::cout << "wrote " << name << " instance (|D|=" << inst.exact_d << ", |OUT|=" << inst.exact_out
            << ") to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"yaq: output-sensitive acyclic query evaluation"};
  app.require_subcommand(1);

  std::string query_file, data_dir, out_file, stats_file, shape, grid, algos, dir;
  bool as_json = false;
  EvalArgs eargs;
  std::uint64_t delta_flag = 0;
  std::size_t d_target = 200000, out_size = 1024;
  int k = 3, ell = 2;
  std::uint64_t seed = 1;
  double alpha = kDefaultAlpha;

  CLI::App* analyze = app.add_subcommand("analyze", "structural analysis of a query");
  analyze->add_option("query", query_file, "query file")->required();
  analyze->add_flag("--json", as_json, "emit JSON");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a query over CSV data");
  eval->add_option("query", eargs.query_file, "query file")->required();
  eval->add_option("--data", eargs.data_dir, "directory with <atom>.csv files")->required();
  eval->add_option("--algo", eargs.algo, "yannakakis|genyan|path|oracle");
  eval->add_option("--delta", delta_flag, "fixed degree threshold (genyan)");
  eval->add_option("--alpha", eargs.alpha, "doubling budget constant");
  eval->add_option("--out", eargs.out_file, "output CSV (stdout when omitted)");
  eval->add_option("--stats", eargs.stats_file, "stats JSON file");
  eval->add_option("--semiring", eargs.semiring_override, "override the query file's semiring");

  CLI::App* bench = app.add_subcommand("bench", "scaling families and exponent fits");
  bench->add_option("--shape", shape, "fig1|star|path")->required();
  bench->add_option("--k", k, "path length (shape=path)");
  bench->add_option("--ell", ell, "star arms (shape=star)");
  bench->add_option("--d", d_target, "input size target");
  bench->add_option("--grid", grid, "comma-separated |OUT| targets")->required();
  bench->add_option("--algos", algos, "comma-separated algorithm list")->required();
  bench->add_option("--alpha", alpha, "doubling budget constant");
  bench->add_option("--out", out_file, "JSON report file");

  CLI::App* gen = app.add_subcommand("gen", "write a generated instance as query + CSV files");
  gen->add_option("--shape", shape, "fig1|star|path|fconnex|random")->required();
  gen->add_option("--d", d_target, "input size target");
  gen->add_option("--out-size", out_size, "output size target");
  gen->add_option("--k", k, "path length");
  gen->add_option("--ell", ell, "star arms");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--dir", dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(query_file, as_json);
    if (eval->parsed()) {
      if (delta_flag > 0) eargs.delta = delta_flag;
      QuerySpec spec = load_query_spec(eargs.query_file);
      if (!eargs.semiring_override.empty()) {
        if (eargs.semiring_override == "boolean")
          spec.semiring = SemiringKind::kBoolean;
        else if (eargs.semiring_override == "count")
          spec.semiring = SemiringKind::kCounting;
        else if (eargs.semiring_override == "tropical")
          spec.semiring = SemiringKind::kTropical;
        else
          throw ConfigError("unknown --semiring '" + eargs.semiring_override + "'");
      }
      switch (spec.semiring) {
        case SemiringKind::kBoolean: return run_eval<BooleanSemiring>(spec, eargs);
        case SemiringKind::kCounting: return run_eval<CountingSemiring>(spec, eargs);
        case SemiringKind::kTropical: return run_eval<TropicalSemiring>(spec, eargs);
      }
    }
    if (bench->parsed()) return cmd_bench(shape, k, ell, d_target, grid, algos, alpha, out_file);
    if (gen->parsed()) return cmd_gen(shape, d_target, out_size, k, ell, seed, dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
