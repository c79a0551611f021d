#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include <thread>

#include "yaq/yannakakis.hpp"

using namespace yt;

namespace {
constexpr Value A = 100, B = 200;
}

TEST_CASE("two-path evaluation across semirings", "[yannakakis]") {
  Query q = p2_query(VarSet::of(0, 2));
  EvalStats stats;
  SECTION("boolean") {
    Database<BooleanSemiring> db;
    db.relations["R12"] = brel(VarSet::of(0, 1), {{A, 1}, {A, 2}});
    db.relations["R23"] = brel(VarSet::of(1, 2), {{1, B}, {2, B}});
    auto out = yannakakis_eval(q, db, stats);
    CHECK(as_map(out) == std::map<std::vector<Value>, bool>{{{A, B}, true}});
  }
  SECTION("counting: two witnesses") {
    Database<CountingSemiring> db;
    db.relations["R12"] = rel<CountingSemiring>(VarSet::of(0, 1), {{{A, 1}, 1}, {{A, 2}, 1}});
    db.relations["R23"] = rel<CountingSemiring>(VarSet::of(1, 2), {{{1, B}, 1}, {{2, B}, 1}});
    auto out = yannakakis_eval(q, db, stats);
    CHECK(as_map(out) == std::map<std::vector<Value>, std::uint64_t>{{{A, B}, 2}});
    CHECK(relations_equal(out, brute_force_eval(q, db)));
  }
  SECTION("tropical: min over both paths") {
    Database<TropicalSemiring> db;
    db.relations["R12"] = rel<TropicalSemiring>(VarSet::of(0, 1), {{{A, 1}, 1}, {{A, 2}, 4}});
    db.relations["R23"] = rel<TropicalSemiring>(VarSet::of(1, 2), {{{1, B}, 2}, {{2, B}, 2}});
    auto out = yannakakis_eval(q, db, stats);
    CHECK(as_map(out) == std::map<std::vector<Value>, std::int64_t>{{{A, B}, 3}});
    CHECK(relations_equal(out, brute_force_eval(q, db)));
  }
}

TEST_CASE("three-path adversary instance evaluates to its designed output", "[yannakakis]") {
  auto inst = gen_fig1_instance(48, 8);
  EvalStats stats;
  auto out = yannakakis_eval(inst.q, inst.db, stats);
  CHECK(out.size() == inst.exact_out);
  CHECK(relations_equal(out, brute_force_eval(inst.q, inst.db)));
}

TEMPLATE_TEST_CASE("classic evaluation matches the oracle on random instances", "[yannakakis]",
                   BooleanSemiring, CountingSemiring, TropicalSemiring) {
  using S = TestType;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    auto inst = gen_random_acyclic<S>(seed);
    EvalStats stats;
    auto out = yannakakis_eval(inst.q, inst.db, stats);
    auto expected = brute_force_eval(inst.q, inst.db);
    REQUIRE(relations_equal(out, expected));
    CHECK(no_zero_annotations(out));
  }
}

TEST_CASE("node relations satisfy the subtree-projection invariant", "[yannakakis]") {
  // After processing node s, its relation equals the subtree join projected
  // onto the widened bag, taken over the full-reduced instance.
  for (std::uint64_t seed = 50; seed < 80; ++seed) {
    auto inst = gen_random_acyclic<CountingSemiring>(seed);
    GyoResult g = gyo_tree(inst.q);
    EvalStats stats;
    Database<CountingSemiring> reduced = full_reducer(inst.q, inst.db, g.tree, stats);

    JoinTree tree = g.tree;
    tree.reroot(default_root(tree, inst.q.free));
    std::vector<RelPtr<CountingSemiring>> slots = bind_slots(inst.q, reduced, tree, stats);
    JoinTree frozen = tree;  // pre-evaluation copy for subtree queries

    ClassicOptions<CountingSemiring> opts;
    opts.check_running_intersection = true;
    opts.on_node = [&](int s, const Relation<CountingSemiring>& observed) {
      // Build the subtree query with the widened bag as the free set.
      Query sub;
      sub.var_names = inst.q.var_names;
      sub.free = observed.var_set();
      Database<CountingSemiring> sub_db;
      std::function<void(int)> collect = [&](int node) {
        for (int a : frozen.nodes[node].atoms) {
          sub.atoms.push_back(inst.q.atoms[a]);
          sub_db.relations[inst.q.atoms[a].name] = reduced.at(inst.q.atoms[a].name);
        }
        for (int c : frozen.nodes[node].children) collect(c);
      };
      collect(s);
      REQUIRE(relations_equal(observed, brute_force_eval(sub, sub_db)));
    };
    yannakakis_core(tree, slots, inst.q.free, stats, opts);
  }
}

TEST_CASE("free-connex instances stay within linear intermediates", "[yannakakis]") {
  for (std::size_t t : {1, 2, 5, 10, 20}) {
    auto inst = gen_free_connex_instance(2000, t);
    REQUIRE(is_free_connex(inst.q));
    EvalStats stats;
    auto out = yannakakis_eval(inst.q, inst.db, stats);
    CHECK(out.size() == inst.exact_out);
    CHECK(stats.max_intermediate <= 4 * (inst.exact_d + inst.exact_out));
  }
}

TEST_CASE("classic tuple-ops stay within the |D|*(|OUT|+1) envelope", "[yannakakis]") {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    auto inst = gen_random_acyclic<BooleanSemiring>(seed);
    EvalStats stats;
    auto out = yannakakis_eval(inst.q, inst.db, stats);
    double envelope = static_cast<double>(inst.exact_d) * (static_cast<double>(out.size()) + 1.0);
    worst = std::max(worst, static_cast<double>(stats.tuple_ops) / std::max(envelope, 1.0));
  }
  CHECK(worst <= 16.0);
}

TEST_CASE("budget exhaustion surfaces as the control signal", "[yannakakis]") {
  auto inst = gen_fig1_instance(512, 16);
  EvalStats stats;
  stats.budget = 10;
  CHECK_THROWS_AS(yannakakis_eval(inst.q, inst.db, stats), BudgetExhausted);
}

TEST_CASE("concurrent evaluations over shared immutable inputs agree", "[yannakakis]") {
  auto inst = gen_fig1_instance(600, 16);
  auto expected = brute_force_eval(inst.q, inst.db);
  constexpr int kThreads = 4;
  std::vector<Relation<BooleanSemiring>> results(kThreads, Relation<BooleanSemiring>{});
  std::vector<std::thread> workers;
  for (int t = 0; t < kThreads; ++t)
    workers.emplace_back([&, t] {
      EvalStats stats;
      results[t] = yannakakis_eval(inst.q, inst.db, stats);
    });
  for (auto& w : workers) w.join();
  for (const auto& r : results) CHECK(relations_equal(r, expected));
}

TEST_CASE("tree and query must agree", "[yannakakis]") {
  Query q = p2_query(VarSet::of(0, 2));
  Database<BooleanSemiring> db;
  db.relations["R12"] = brel(VarSet::of(0, 1), {{1, 2}});
  db.relations["R23"] = brel(VarSet::of(1, 2), {{2, 3}});
  JoinTree bogus = gyo_tree(make_path_query(3)).tree;
  EvalStats stats;
  CHECK_THROWS_AS(yannakakis_eval(q, db, bogus, stats), ContractError);
}
