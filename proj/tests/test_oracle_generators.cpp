#include <catch2/catch_amalgamated.hpp>
#include <algorithm>

#include "helpers.hpp"
#include "yaq/bench.hpp"

using namespace yt;

TEST_CASE("oracle basics", "[oracle]") {
  SECTION("counting two-path by hand") {
    Query q = p2_query(VarSet::of(0, 2));
    Database<CountingSemiring> db;
    db.relations["R12"] = rel<CountingSemiring>(VarSet::of(0, 1), {{{7, 1}, 1}, {{7, 2}, 1}});
    db.relations["R23"] = rel<CountingSemiring>(VarSet::of(1, 2), {{{1, 9}, 1}, {{2, 9}, 1}});
    auto out = brute_force_eval(q, db);
    CHECK(as_map(out) == std::map<std::vector<Value>, std::uint64_t>{{{7, 9}, 2}});
  }
  SECTION("boolean query over the empty free set") {
    Query q = p2_query(VarSet::of());
    Database<BooleanSemiring> db;
    db.relations["R12"] = brel(VarSet::of(0, 1), {{1, 2}});
    db.relations["R23"] = brel(VarSet::of(1, 2), {{2, 3}});
    auto out = brute_force_eval(q, db);
    CHECK(out.width() == 0);
    CHECK(out.size() == 1);
  }
  SECTION("enumeration cap") {
    Query q = p2_query(VarSet::of(0, 2));
    Database<BooleanSemiring> db;
    db.relations["R12"] = brel(VarSet::of(0, 1), {{1, 2}, {3, 4}});
    db.relations["R23"] = brel(VarSet::of(1, 2), {{2, 3}});
    CHECK_THROWS_AS(brute_force_eval(q, db, 1), OracleTooLargeError);
  }
}

TEMPLATE_TEST_CASE("oracle is evaluation-order independent", "[oracle]", BooleanSemiring,
                   CountingSemiring, TropicalSemiring) {
  using S = TestType;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto inst = gen_random_acyclic<S>(seed);
    auto base = brute_force_eval(inst.q, inst.db);
    Query permuted = inst.q;
    Rng rng(seed);
    for (std::size_t i = permuted.atoms.size(); i > 1; --i)
      std::swap(permuted.atoms[i - 1], permuted.atoms[rng.below(i)]);
    CHECK(relations_equal(base, brute_force_eval(permuted, inst.db)));
  }
}

TEST_CASE("generators are deterministic in the seed", "[generators]") {
  auto a = gen_random_acyclic<TropicalSemiring>(1234);
  auto b = gen_random_acyclic<TropicalSemiring>(1234);
  REQUIRE(a.q.atoms.size() == b.q.atoms.size());
  for (std::size_t i = 0; i < a.q.atoms.size(); ++i) {
    CHECK(a.q.atoms[i].vars == b.q.atoms[i].vars);
    CHECK(relations_equal(*a.db.at(a.q.atoms[i].name), *b.db.at(b.q.atoms[i].name)));
  }
  CHECK(a.q.free == b.q.free);
}

TEST_CASE("random instances are acyclic and within the oracle cap", "[generators]") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto inst = gen_random_acyclic<BooleanSemiring>(seed);
    CHECK(is_acyclic(inst.q));
    long double combos = 1;
    for (const auto& a : inst.q.atoms) combos *= static_cast<long double>(inst.db.at(a.name)->size());
    CHECK(combos <= static_cast<long double>(kDefaultOracleCap));
  }
}

TEST_CASE("adversary instance matches its designed combinatorics", "[generators]") {
  auto inst = gen_fig1_instance(96, 8);
  auto out = brute_force_eval(inst.q, inst.db);
  CHECK(out.size() == inst.exact_out);
  // Upper block: every a reaches the single top sink; lower block: the single
  // bottom source reaches every d.
  std::size_t upper = 0, lower = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.row(i)[1] == 0) ++upper;
    if (out.row(i)[0] == static_cast<Value>(inst.exact_out / 2)) ++lower;
  }
  CHECK(upper == inst.exact_out / 2);
  CHECK(lower == inst.exact_out / 2);
}

TEST_CASE("family points verify against the oracle at small scale", "[generators]") {
  SECTION("fig1") {
    auto inst = gen_family_point(FamilyShape::kFig1, 128, 8, 0);
    CHECK(brute_force_eval(inst.q, inst.db).size() == inst.exact_out);
  }
  SECTION("star") {
    auto inst = gen_family_point(FamilyShape::kStar, 60, 9, 2);
    CHECK(brute_force_eval(inst.q, inst.db).size() == inst.exact_out);
  }
  SECTION("path k=3 combo") {
    auto inst = gen_family_point(FamilyShape::kPath, 160, 16, 3);
    CHECK(brute_force_eval(inst.q, inst.db).size() == inst.exact_out);
  }
  SECTION("pathstress k=4 and k=5") {
    for (int k : {4, 5}) {
      auto inst = gen_pathstress(k, 60, 2);
      CHECK(brute_force_eval(inst.q, inst.db).size() == inst.exact_out);
    }
  }
  SECTION("hub") {
    auto inst = gen_hub_p3(60, 8);
    CHECK(brute_force_eval(inst.q, inst.db).size() == inst.exact_out);
  }
  SECTION("free-connex") {
    auto inst = gen_free_connex_instance(60, 3);
    CHECK(brute_force_eval(inst.q, inst.db).size() == inst.exact_out);
  }
}

TEST_CASE("slope fitting recovers planted exponents", "[generators]") {
  std::vector<std::pair<double, double>> xy;
  for (double x : {16.0, 64.0, 256.0, 1024.0}) xy.push_back({x, 3.0 * std::pow(x, 0.5)});
  SlopeFit fit = fit_loglog(xy);
  CHECK(fit.slope == Catch::Approx(0.5).margin(1e-9));
  CHECK(fit.max_abs_residual < 1e-9);
}
