// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and grid sizes are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "yaq/bench.hpp"
#include "yaq/generalized.hpp"
#include "yaq/generators.hpp"
#include "yaq/oracle.hpp"
#include "yaq/path.hpp"

using namespace yaq;

namespace {

struct Failure {
  std::string message;
};

void fail(const std::string& msg) { throw Failure{msg}; }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << x;
  return os.str();
}

// ---------------------------------------------------------------------------

constexpr int kRandomSeeds = 1000;

template <Semiring S>
void check_random_instance(std::uint64_t seed) {
  auto inst = gen_random_acyclic<S>(seed);
  auto expected = brute_force_eval(inst.q, inst.db);

  EvalStats s1;
  require(relations_equal(yannakakis_eval(inst.q, inst.db, s1), expected),
          "classic output mismatch at seed " + std::to_string(seed) + " (" + S::name() + ")");
  EvalStats s2;
  require(relations_equal(eval_general_cq(inst.q, inst.db, s2), expected),
          "general pipeline mismatch at seed " + std::to_string(seed) + " (" + S::name() + ")");

  ReduceResult rr = reduce_query(inst.q);
  EvalStats sp;
  Database<S> dbp = prepare_reduced_instance(inst.q, inst.db, rr, sp);
  for (const auto& comp : decompose_reduced(rr.reduced).components) {
    Database<S> cdb;
    for (const auto& a : comp.atoms) cdb.relations[a.name] = dbp.at(a.name);
    auto comp_expected = brute_force_eval(comp, cdb);
    GyoResult g = gyo_tree(comp);
    std::uint64_t n = std::max<std::uint64_t>(cdb.total_size(), 1);
    for (std::uint64_t delta : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{4}}) {
      if (delta > n) continue;
      EvalStats st;
      GenOptions<S> opts;
      opts.delta = delta;
      require(relations_equal(generalized_eval(comp, cdb, g.tree, opts, st).output, comp_expected),
              "generalized mismatch at seed " + std::to_string(seed) + " delta " + std::to_string(delta));
    }
    EvalStats st;
    require(relations_equal(eval_with_doubling<S>(comp, cdb, kDefaultAlpha, st), comp_expected),
            "doubling mismatch at seed " + std::to_string(seed));
  }
}

std::string criterion1() {
  for (std::uint64_t seed = 1; seed <= kRandomSeeds; ++seed) {
    check_random_instance<BooleanSemiring>(seed);
    check_random_instance<CountingSemiring>(seed);
    check_random_instance<TropicalSemiring>(seed);
  }
  return "1000 instances x 3 semirings x {classic, generalized(1,2,4), doubling, pipeline}";
}

std::string criterion2() {
  for (int k = 2; k <= 6; ++k)
    require(projection_width(make_path_query(k)) == k, "wout(P_" + std::to_string(k) + ") != k");
  for (int ell = 2; ell <= 5; ++ell)
    require(projection_width(make_star_query(ell)) == ell, "wout(star " + std::to_string(ell) + ") != ell");
  Query wide;
  for (int i = 0; i < 7; ++i) wide.var_names.push_back("x" + std::to_string(i + 1));
  wide.atoms = {{"R12", VarSet::of(0, 1)}, {"R23", VarSet::of(1, 2)}, {"R34", VarSet::of(2, 3)},
                {"R25", VarSet::of(1, 4)}, {"R46", VarSet::of(3, 5)}, {"R57", VarSet::of(4, 6)}};
  wide.free = VarSet::of(0, 3, 4, 5, 6);
  require(projection_width(wide) == 4, "wout of the seven-variable query != 4");
  for (std::uint64_t seed = 1; seed <= kRandomSeeds; ++seed) {
    auto inst = gen_random_acyclic<BooleanSemiring>(seed);
    require(is_free_connex(inst.q) == (projection_width(inst.q) == 1),
            "free-connex <-> wout=1 failed at seed " + std::to_string(seed));
  }
  return "path/star/seven-variable widths exact; free-connex <-> wout=1 on the suite";
}

// Shared fig1 grid for criteria 3-5 and 8.
const std::size_t kFig1D = 200000;
std::vector<std::size_t> fig1_grid() {
  std::vector<std::size_t> g;
  for (int e = 4; e <= 12; ++e) g.push_back(std::size_t{1} << e);
  return g;
}

std::string criterion3() {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t out : fig1_grid()) {
    auto inst = gen_fig1_instance(kFig1D, out);
    EvalStats stats;
    auto res = yannakakis_eval(inst.q, inst.db, stats);
    require(res.size() == inst.exact_out, "fig1 output size mismatch");
    pts.push_back({static_cast<double>(inst.exact_out), static_cast<double>(stats.max_intermediate)});
  }
  SlopeFit fit = fit_loglog(pts);
  require(fit.slope >= 0.85 && fit.slope <= 1.15,
          "classic slope " + fmt(fit.slope) + " outside 1.0 +/- 0.15");
  return "classic max_intermediate ~ |OUT|^" + fmt(fit.slope) + " (want 1.0 +/- 0.15)";
}

std::string criterion4() {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t out : fig1_grid()) {
    auto inst = gen_fig1_instance(kFig1D, out);
    EvalStats stats;
    auto res = eval_with_doubling<BooleanSemiring>(inst.q, inst.db, kDefaultAlpha, stats);
    require(res.size() == inst.exact_out, "fig1 output size mismatch (doubling)");
    pts.push_back({static_cast<double>(inst.exact_out), static_cast<double>(stats.max_intermediate)});
  }
  SlopeFit fit = fit_loglog(pts);
  require(fit.slope <= 2.0 / 3.0 + 0.10, "generalized slope " + fmt(fit.slope) + " above 2/3 + 0.10");
  return "generalized max_intermediate ~ |OUT|^" + fmt(fit.slope) + " (want <= " + fmt(2.0 / 3.0 + 0.10) + ")";
}

std::string criterion5() {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t out : fig1_grid()) {
    auto inst = gen_fig1_instance(kFig1D, out);
    EvalStats stats;
    auto res = path_eval_doubling<BooleanSemiring>(inst.q, inst.db, kDefaultAlpha, stats);
    require(res.size() == inst.exact_out, "fig1 output size mismatch (path)");
    pts.push_back({static_cast<double>(inst.exact_out), static_cast<double>(stats.max_intermediate)});
  }
  SlopeFit fit = fit_loglog(pts);
  require(fit.slope <= 0.5 + 0.10, "path slope " + fmt(fit.slope) + " above 1/2 + 0.10");
  return "staged-path max_intermediate ~ |OUT|^" + fmt(fit.slope) + " (want <= 0.600)";
}

std::string criterion6() {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t q : {4, 8, 16, 32, 64}) {
    auto inst = gen_star_instance(2, 200000, q);
    EvalStats stats;
    auto res = eval_with_doubling<BooleanSemiring>(inst.q, inst.db, kDefaultAlpha, stats);
    require(res.size() == inst.exact_out, "star output size mismatch");
    pts.push_back({static_cast<double>(inst.exact_out), static_cast<double>(stats.max_intermediate)});
  }
  SlopeFit fit = fit_loglog(pts);
  require(fit.slope <= 0.5 + 0.10, "star slope " + fmt(fit.slope) + " above 1/2 + 0.10");
  return "star(2) max_intermediate ~ |OUT|^" + fmt(fit.slope) + " (want <= 0.600)";
}

std::string criterion7() {
  const std::size_t d = 20000;
  std::size_t max_out = 0;
  for (std::size_t t : {1, 2, 4, 8, 12, 16, 20}) {
    auto inst = gen_free_connex_instance(d, t);
    require(is_free_connex(inst.q), "family instance is not free-connex");
    EvalStats stats;
    auto res = yannakakis_eval(inst.q, inst.db, stats);
    require(res.size() == inst.exact_out, "free-connex output size mismatch");
    require(stats.max_intermediate <= 4 * (inst.exact_d + inst.exact_out),
            "max_intermediate " + std::to_string(stats.max_intermediate) + " exceeds 4(|D|+|OUT|) at t=" +
                std::to_string(t));
    max_out = std::max(max_out, inst.exact_out);
  }
  return "max_intermediate <= 4(|D|+|OUT|) with |OUT| swept to " + std::to_string(max_out) +
         " (10x|D|)";
}

std::string criterion8() {
  double worst = 0;
  for (std::size_t out : fig1_grid()) {
    auto inst = gen_fig1_instance(kFig1D, out);
    EvalStats doubling;
    eval_with_doubling<BooleanSemiring>(inst.q, inst.db, kDefaultAlpha, doubling);

    std::uint64_t opt_delta =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(
                                       std::ceil(std::cbrt(static_cast<double>(inst.exact_out)))));
    EvalStats direct;
    GenOptions<BooleanSemiring> opts;
    opts.delta = opt_delta;
    generalized_eval(inst.q, inst.db, gyo_tree(inst.q).tree, opts, direct);

    double ratio = static_cast<double>(doubling.tuple_ops) /
                   static_cast<double>(std::max<std::uint64_t>(direct.tuple_ops, 1));
    worst = std::max(worst, ratio);
    require(ratio <= 8.0, "doubling overhead " + fmt(ratio) + "x at |OUT|=" + std::to_string(out));
  }
  return "doubling tuple_ops <= 8x optimal-delta run (worst " + fmt(worst) + "x)";
}

template <Semiring S>
void bound_check_instance(std::uint64_t seed) {
  auto inst = gen_random_acyclic<S>(seed);
  ReduceResult rr = reduce_query(inst.q);
  EvalStats sp;
  Database<S> dbp = prepare_reduced_instance(inst.q, inst.db, rr, sp);
  for (const auto& comp : decompose_reduced(rr.reduced).components) {
    Database<S> cdb;
    for (const auto& a : comp.atoms) cdb.relations[a.name] = dbp.at(a.name);
    GyoResult g = gyo_tree(comp);
    std::uint64_t n = std::max<std::uint64_t>(cdb.total_size(), 1);
    for (std::uint64_t delta : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{4}}) {
      if (delta > n) continue;
      EvalStats st;
      GenOptions<S> opts;
      opts.delta = delta;
      opts.materialization_bound_check = true;  // throws on any violation
      generalized_eval(comp, cdb, g.tree, opts, st);
    }
  }
}

std::string criterion9() {
  for (std::uint64_t seed = 1; seed <= kRandomSeeds; ++seed) {
    bound_check_instance<BooleanSemiring>(seed);
    bound_check_instance<CountingSemiring>(seed);
    bound_check_instance<TropicalSemiring>(seed);
  }
  return "every internal join <= 4*N*Delta^(#s-1) across the suite";
}

template <Semiring S>
int split_identity_instance(std::uint64_t seed) {
  int events = 0;
  auto inst = gen_random_acyclic<S>(seed, 6, 5, 0.3);
  ReduceResult rr = reduce_query(inst.q);
  EvalStats sp;
  Database<S> dbp = prepare_reduced_instance(inst.q, inst.db, rr, sp);
  for (const auto& comp : decompose_reduced(rr.reduced).components) {
    Database<S> cdb;
    for (const auto& a : comp.atoms) cdb.relations[a.name] = dbp.at(a.name);
    if (cdb.total_size() < 2) continue;
    EvalStats st;
    GenOptions<S> opts;
    opts.delta = std::min<std::uint64_t>(2, std::max<std::uint64_t>(cdb.total_size(), 1));
    opts.on_split = [&](const SplitEvent<S>& ev) {
      ++events;
      auto phi = [&](const RelPtr<S>& part) {
        Database<S> variant = ev.base;
        variant.relations[ev.split_atom] = part;
        return brute_force_eval(ev.config, variant);
      };
      Relation<S> whole = brute_force_eval(ev.config, ev.base);
      Relation<S> sum = plus_union(phi(ev.heavy), phi(ev.light));
      require(relations_equal(whole, sum), "distributivity identity failed at seed " + std::to_string(seed));
    };
    generalized_eval(comp, cdb, gyo_tree(comp).tree, opts, st);
  }
  return events;
}

std::string criterion10() {
  long events = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    events += split_identity_instance<BooleanSemiring>(seed);
    events += split_identity_instance<CountingSemiring>(seed);
    events += split_identity_instance<TropicalSemiring>(seed);
  }
  require(events > 200, "too few split events exercised");
  return "phi(D) = phi(D_heavy) (+) phi(D_light) at " + std::to_string(events) + " splits";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string title;
    std::function<std::string()> run;
  };
  std::vector<Criterion> criteria = {
      {1, "oracle equivalence over the random suite", criterion1},
      {2, "width analysis exactness", criterion2},
      {3, "classic lower-bound exhibit (slope 1.0 +/- 0.15)", criterion3},
      {4, "generalized exponent (slope <= 2/3 + 0.10)", criterion4},
      {5, "staged-path exponent (slope <= 1/2 + 0.10)", criterion5},
      {6, "star exponent (slope <= 1/2 + 0.10)", criterion6},
      {7, "free-connex linear intermediates", criterion7},
      {8, "doubling overhead within 8x", criterion8},
      {9, "internal-node materialization bound", criterion9},
      {10, "heavy/light distributivity identity", criterion10},
  };

  int failures = 0;
  for (auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const Failure& f) {
      ok = false;
      detail = f.message;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("unexpected error: ") + e.what();
    }
    double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
            .count() /
        1000.0;
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title << " — "
              << detail << " (" << fmt(secs) << "s)" << std::endl;
    failures += ok ? 0 : 1;
  }
  if (failures) std::cout << failures << " criterion(s) failed" << std::endl;
  return failures == 0 ? 0 : 1;
}
