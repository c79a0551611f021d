#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "yaq/analysis.hpp"
#include "yaq/core.hpp"

namespace yaq {

// Deterministic splitmix64 stream; identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return hash_mix(state_);
  }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Query shapes
// ---------------------------------------------------------------------------

// P_k(x1, x_{k+1}) ← R12(x1,x2) ∧ ... ∧ R{k}{k+1}(xk, x_{k+1}).
inline Query make_path_query(int k) {
  Query q;
  for (int i = 0; i <= k; ++i) q.var_names.push_back("x" + std::to_string(i + 1));
  for (int i = 0; i < k; ++i)
    q.atoms.push_back({"R" + std::to_string(i + 1) + std::to_string(i + 2), VarSet::of(i, i + 1)});
  q.free = VarSet::of(0, k);
  return q;
}

inline Query make_full_path_query(int k) {
  Query q = make_path_query(k);
  q.free = VarSet::full(k + 1);
  return q;
}

// Q*_ℓ(x1..xℓ) ← R1(x1,y) ∧ ... ∧ Rℓ(xℓ,y); y has id ℓ.
inline Query make_star_query(int ell) {
  Query q;
  for (int i = 0; i < ell; ++i) q.var_names.push_back("x" + std::to_string(i + 1));
  q.var_names.push_back("y");
  for (int i = 0; i < ell; ++i) q.atoms.push_back({"R" + std::to_string(i + 1), VarSet::of(i, ell)});
  q.free = VarSet::full(ell + 1);
  q.free.erase(ell);
  return q;
}

// ---------------------------------------------------------------------------
// Tuple-list helper
// ---------------------------------------------------------------------------

template <Semiring S>
class TupleSink {
 public:
  explicit TupleSink(VarSet vars) : builder_(vars) {}
  void add(std::initializer_list<Value> row, typename S::Value a) {
    std::vector<Value> r(row);
    builder_.add(r.data(), a);
  }
  void add2(Value a, Value b, typename S::Value w) {
    Value r[2] = {a, b};
    builder_.add(r, w);
  }
  RelPtr<S> take() { return make_rel(builder_.take()); }

 private:
  RelationBuilder<S> builder_;
};

template <Semiring S>
struct Instance {
  Query q;
  Database<S> db;
  std::size_t exact_out = 0;  // meaningful only for the closed-form families
  std::size_t exact_d = 0;
};

// Merge block databases over the same query shape (⊕ on collisions; blocks
// use disjoint value pools so collisions do not occur in practice).
template <Semiring S>
void merge_into(Database<S>& target, const Database<S>& extra) {
  for (const auto& [name, rel] : extra.relations) {
    auto it = target.relations.find(name);
    if (it == target.relations.end())
      target.relations[name] = rel;
    else
      it->second = make_rel(plus_union(*it->second, *rel));
  }
}

// ---------------------------------------------------------------------------
// Three-path adversary. Two value blocks over P3:
//   upper: A×B complete, B×C complete, C→{d1};    |A| = |C| = out/2
//   lower: the mirror image driven from a single a-value.
// Any classic bottom-up pass materializes Θ(|D|·|OUT|) tuples on one of the
// blocks regardless of root choice, while degree-split plans stay linear.
// Exact sizes are computed from the rounded block parameters.
// ---------------------------------------------------------------------------

inline Instance<BooleanSemiring> gen_fig1_instance(std::size_t d_target, std::size_t out_target) {
  using S = BooleanSemiring;
  if (out_target < 2 || out_target % 2 != 0) throw ConfigError("fig1 generator needs an even output target >= 2");
  if (out_target > d_target / 2) throw ConfigError("fig1 generator needs |OUT| <= |D|/2");
  const std::size_t half = out_target / 2;
  const std::size_t b_u = std::max<std::size_t>(1, d_target / (2 * out_target));

  Instance<S> inst;
  inst.q = make_path_query(3);

  // Value pools. Distinct variables live in distinct columns, so ranges only
  // need to be disjoint per variable between blocks.
  const Value up_b0 = 0, lo_b0 = static_cast<Value>(b_u);
  const Value up_c0 = 0, lo_c0 = static_cast<Value>(half);
  const Value up_a0 = 0, lo_a = static_cast<Value>(half);
  const Value up_d = 0, lo_d0 = 1;

  TupleSink<S> r12(VarSet::of(0, 1)), r23(VarSet::of(1, 2)), r34(VarSet::of(2, 3));
  for (std::size_t a = 0; a < half; ++a)
    for (std::size_t b = 0; b < b_u; ++b) r12.add2(up_a0 + static_cast<Value>(a), up_b0 + static_cast<Value>(b), true);
  for (std::size_t b = 0; b < b_u; ++b)
    for (std::size_t c = 0; c < half; ++c) r23.add2(up_b0 + static_cast<Value>(b), up_c0 + static_cast<Value>(c), true);
  for (std::size_t c = 0; c < half; ++c) r34.add2(up_c0 + static_cast<Value>(c), up_d, true);

  for (std::size_t b = 0; b < half; ++b) r12.add2(lo_a, lo_b0 + static_cast<Value>(b), true);
  for (std::size_t b = 0; b < half; ++b)
    for (std::size_t c = 0; c < b_u; ++c) r23.add2(lo_b0 + static_cast<Value>(b), lo_c0 + static_cast<Value>(c), true);
  for (std::size_t c = 0; c < b_u; ++c)
    for (std::size_t d = 0; d < half; ++d) r34.add2(lo_c0 + static_cast<Value>(c), lo_d0 + static_cast<Value>(d), true);

  inst.db.relations["R12"] = r12.take();
  inst.db.relations["R23"] = r23.take();
  inst.db.relations["R34"] = r34.take();
  inst.exact_out = 2 * half;
  inst.exact_d = inst.db.total_size();
  return inst;
}

// Hub block over P3: a single x2 hub feeding a complete C×W fan whose degree
// always exceeds the split threshold, so the generalized pass pays the full
// |D|·|OUT|/Δ heavy-call cost. Output is |A|·|W|.
inline Instance<BooleanSemiring> gen_hub_p3(std::size_t d_target, std::size_t out_target) {
  using S = BooleanSemiring;
  Instance<S> inst;
  inst.q = make_path_query(3);
  // The fan width only needs to stay above the split thresholds the doubling
  // driver reaches before its budget covers the Θ(|D|·|OUT|^(2/3)) heavy
  // call, which happens at a guess far below |OUT|.
  const std::size_t w = std::max<std::size_t>(
      4, static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(2 * out_target)))));
  const std::size_t na = std::max<std::size_t>(1, out_target / w);
  const std::size_t gamma = std::max<std::size_t>(1, d_target / (2 * w));

  TupleSink<S> r12(VarSet::of(0, 1)), r23(VarSet::of(1, 2)), r34(VarSet::of(2, 3));
  const Value hub = 1000000;  // outside other blocks' x2 pools
  for (std::size_t a = 0; a < na; ++a) r12.add2(static_cast<Value>(2000000 + a), hub, true);
  for (std::size_t c = 0; c < gamma; ++c) r23.add2(hub, static_cast<Value>(2000000 + c), true);
  for (std::size_t c = 0; c < gamma; ++c)
    for (std::size_t j = 0; j < w; ++j)
      r34.add2(static_cast<Value>(2000000 + c), static_cast<Value>(2000000 + j), true);

  inst.db.relations["R12"] = r12.take();
  inst.db.relations["R23"] = r23.take();
  inst.db.relations["R34"] = r34.take();
  inst.exact_out = na * w;
  inst.exact_d = inst.db.total_size();
  return inst;
}

// Families stressing the staged path evaluator, parameterized by q:
//   k=3: A×B complete, B−E matching, E×W complete with |A| = |W| = q (OUT = q²).
//   k=4,5: two blocks (OUT = 4q³ total).
//     Saturation block: q-sized x2 bundles of fresh x1 values, B×C complete,
//     a matching spine, E×W complete with |W| = q. At the driver's final
//     threshold the midpoint split lands on its light/heavy boundary and
//     either route materializes Θ(|D|·q²).
//     Amplifier block: an x2 hub behind a C×{e} funnel fanning out to 3q²
//     sinks. Its upper-chain join costs Θ(|D|·q²) whenever the hub is in the
//     heavy partition, which keeps early doubling rounds over budget.
// Net effect: max_intermediate grows as |D|·OUT^(1−1/λ), λ = ⌈(k+1)/2⌉.
inline Instance<BooleanSemiring> gen_pathstress(int k, std::size_t d_target, std::size_t q) {
  using S = BooleanSemiring;
  if (k < 3 || k > 5) throw ConfigError("pathstress supports k in {3,4,5}");
  if (q < 2) throw ConfigError("pathstress needs q >= 2");
  Instance<S> inst;
  inst.q = make_path_query(k);
  std::vector<TupleSink<S>> rel;
  for (int i = 0; i < k; ++i) rel.emplace_back(VarSet::of(i, i + 1));
  const Value base = 5000000;
  auto v = [&](std::size_t off) { return static_cast<Value>(base + off); };

  if (k == 3) {
    const std::size_t g = std::max<std::size_t>(1, d_target / (2 * q + 1));
    for (std::size_t a = 0; a < q; ++a)
      for (std::size_t b = 0; b < g; ++b) rel[0].add2(v(a), v(b), true);
    for (std::size_t b = 0; b < g; ++b) rel[1].add2(v(b), v(b), true);
    for (std::size_t e = 0; e < g; ++e)
      for (std::size_t j = 0; j < q; ++j) rel[2].add2(v(e), v(j), true);
    inst.exact_out = q * q;
  } else {
    // Saturation block (value offsets 0..).
    const std::size_t half = d_target / 2;
    const std::size_t g = std::max<std::size_t>(1, half / (2 * q));
    for (std::size_t b = 0; b < q; ++b)
      for (std::size_t s = 0; s < q; ++s) rel[0].add2(v(b * q + s), v(b), true);
    for (std::size_t b = 0; b < q; ++b)
      for (std::size_t c = 0; c < g; ++c) rel[1].add2(v(b), v(c), true);
    for (int layer = 2; layer + 1 < k; ++layer)
      for (std::size_t c = 0; c < g; ++c) rel[layer].add2(v(c), v(c), true);
    for (std::size_t e = 0; e < g; ++e)
      for (std::size_t j = 0; j < q; ++j) rel[k - 1].add2(v(e), v(j), true);

    // Amplifier block (value offsets from 7000000).
    const Value hub_x2 = 7000000;
    const Value hub_e = 7000000;
    auto w2 = [&](std::size_t off) { return static_cast<Value>(7000000 + off); };
    const std::size_t gamma = std::max<std::size_t>(1, half / 3);
    const std::size_t fan = 3 * q * q;
    for (std::size_t s = 0; s < q; ++s) rel[0].add2(w2(s), hub_x2, true);       // A_b × {b*}
    for (std::size_t c = 0; c < gamma; ++c) rel[1].add2(hub_x2, w2(c), true);   // {b*} × C
    for (std::size_t c = 0; c < gamma; ++c) rel[2].add2(w2(c), hub_e, true);    // C × {e*}
    if (k == 4) {
      for (std::size_t j = 0; j < fan; ++j) rel[3].add2(hub_e, w2(j), true);    // {e*} × W
    } else {
      for (std::size_t j = 0; j < fan; ++j) rel[3].add2(hub_e, w2(j), true);
      for (std::size_t j = 0; j < fan; ++j) rel[4].add2(w2(j), w2(j), true);    // W matching tail
    }
    inst.exact_out = q * q * q + q * fan;
  }
  for (int i = 0; i < k; ++i) inst.db.relations[inst.q.atoms[i].name] = rel[i].take();
  inst.exact_d = inst.db.total_size();
  return inst;
}

// Star family: each arm is X_i×Y complete with |X_i| = q, giving OUT = q^ℓ
// exactly. Every center value joins q tuples per arm, so the bottom-up join
// materializes Θ(|Y|·q^ℓ) = Θ(|D|·OUT^(1−1/ℓ)) tuples.
inline Instance<BooleanSemiring> gen_star_instance(int ell, std::size_t d_target, std::size_t q) {
  using S = BooleanSemiring;
  if (ell < 2) throw ConfigError("star generator needs ell >= 2");
  if (q < 1) throw ConfigError("star generator needs q >= 1");
  Instance<S> inst;
  inst.q = make_star_query(ell);
  const std::size_t m = std::max<std::size_t>(1, d_target / (static_cast<std::size_t>(ell) * q));
  for (int i = 0; i < ell; ++i) {
    TupleSink<S> sink(VarSet::of(i, ell));
    for (std::size_t x = 0; x < q; ++x)
      for (std::size_t y = 0; y < m; ++y)
        sink.add2(static_cast<Value>(1000 * (i + 1) + static_cast<Value>(x)), static_cast<Value>(y), true);
    inst.db.relations[inst.q.atoms[i].name] = sink.take();
  }
  std::size_t out = 1;
  for (int i = 0; i < ell; ++i) out *= q;
  inst.exact_out = out;
  inst.exact_d = inst.db.total_size();
  return inst;
}

// Free-connex sweep family: the full two-path query with complete bipartite
// layers; OUT = t·|B| scales past |D| while ingest stays linear.
inline Instance<BooleanSemiring> gen_free_connex_instance(std::size_t d_target, std::size_t t) {
  using S = BooleanSemiring;
  Instance<S> inst;
  inst.q = make_full_path_query(2);
  const std::size_t b = std::max<std::size_t>(1, d_target / (2 * std::max<std::size_t>(t, 1)));
  TupleSink<S> r12(VarSet::of(0, 1)), r23(VarSet::of(1, 2));
  for (std::size_t a = 0; a < t; ++a)
    for (std::size_t x = 0; x < b; ++x) r12.add2(static_cast<Value>(a), static_cast<Value>(x), true);
  for (std::size_t x = 0; x < b; ++x)
    for (std::size_t c = 0; c < t; ++c) r23.add2(static_cast<Value>(x), static_cast<Value>(c), true);
  inst.db.relations["R12"] = r12.take();
  inst.db.relations["R23"] = r23.take();
  inst.exact_out = t * b * t;
  inst.exact_d = inst.db.total_size();
  return inst;
}

// ---------------------------------------------------------------------------
// Random acyclic instances (seed-deterministic)
// ---------------------------------------------------------------------------

template <Semiring S>
typename S::Value random_annotation(Rng& rng) {
  if constexpr (std::is_same_v<S, CountingSemiring>)
    return 1;  // counts equal witness counts
  else if constexpr (std::is_same_v<S, TropicalSemiring>)
    return static_cast<typename S::Value>(rng.below(101));
  else {
    (void)rng;
    return S::one();
  }
}

// Draws a join-tree shape (branching capped at two), assigns shared variables
// along tree edges plus private variables, marks a random free subset, and
// fills relations with random tuples.
template <Semiring S>
Instance<S> gen_random_acyclic(std::uint64_t seed, int max_atoms = 5, int domain = 6,
                               double free_fraction = 0.5) {
  Rng rng(seed);
  Instance<S> inst;
  const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_atoms)));

  std::vector<int> parent(m, -1);
  std::vector<int> child_count(m, 0);
  for (int i = 1; i < m; ++i) {
    int p = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    for (int tries = 0; child_count[p] >= 2 && tries < m; ++tries)
      p = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    if (child_count[p] >= 2) {
      for (int c = 0; c < i; ++c)
        if (child_count[c] < 2) {
          p = c;
          break;
        }
    }
    parent[i] = p;
    ++child_count[p];
  }

  std::vector<VarSet> bags(m);
  int next_var = 0;
  // Fresh variables only; reusing an arbitrary existing variable could break
  // the running-intersection structure the tree shape guarantees.
  auto fresh = [&]() -> VarId { return next_var < 12 ? next_var++ : -1; };
  auto parent_pool_pick = [&](int i) -> VarId {
    std::vector<VarId> pool;
    bags[parent[i]].for_each([&](VarId x) { pool.push_back(x); });
    return pool.empty() ? -1 : pool[rng.below(pool.size())];
  };
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      bags[0].insert(fresh());
    } else {
      int links = 1 + static_cast<int>(rng.below(2));
      for (int l = 0; l < links && bags[i].size() < 3; ++l) {
        VarId v = (rng.below(3) == 0) ? parent_pool_pick(i) : fresh();
        if (v < 0) v = parent_pool_pick(i);
        if (v < 0) continue;
        bags[i].insert(v);
        bags[parent[i]].insert(v);
      }
      if (bags[i].empty()) {
        VarId v = parent_pool_pick(i);
        bags[i].insert(v);
        bags[parent[i]].insert(v);
      }
    }
    int privates = static_cast<int>(rng.below(2)) + (i == 0 ? 1 : 0);
    for (int pv = 0; pv < privates && bags[i].size() < 4; ++pv) {
      VarId v = fresh();
      if (v >= 0) bags[i].insert(v);
    }
  }

  inst.q.var_names.resize(next_var);
  for (int v = 0; v < next_var; ++v) inst.q.var_names[v] = "x" + std::to_string(v + 1);
  for (int i = 0; i < m; ++i) inst.q.atoms.push_back({"E" + std::to_string(i), bags[i]});
  VarSet all = inst.q.atom_vars();
  all.for_each([&](VarId v) {
    if (rng.unit() < free_fraction) inst.q.free.insert(v);
  });

  for (int i = 0; i < m; ++i) {
    RelationBuilder<S> b(bags[i]);
    const std::size_t width = bags[i].size();
    const std::size_t rows = 1 + rng.below(10);
    std::vector<Value> buf(width);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < width; ++c) buf[c] = static_cast<Value>(rng.below(domain));
      b.add(buf.data(), random_annotation<S>(rng));
    }
    inst.db.relations[inst.q.atoms[i].name] = make_rel(b.take());
  }
  inst.exact_d = inst.db.total_size();
  return inst;
}

// ---------------------------------------------------------------------------
// Scaling families for the exponent regressions
// ---------------------------------------------------------------------------

enum class FamilyShape { kFig1, kStar, kPath };

inline Instance<BooleanSemiring> gen_family_point(FamilyShape shape, std::size_t d_target,
                                                  std::size_t out_target, int k_or_ell) {
  switch (shape) {
    case FamilyShape::kFig1:
      return gen_fig1_instance(d_target, out_target);
    case FamilyShape::kStar: {
      const double root = std::pow(static_cast<double>(out_target), 1.0 / k_or_ell);
      const std::size_t q = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(root)));
      return gen_star_instance(k_or_ell, d_target, q);
    }
    case FamilyShape::kPath: {
      if (k_or_ell == 3) {
        // Blocks stressing, respectively: the classic pass, the generalized
        // pass at its Δ tradeoff, and the staged path evaluation.
        Instance<BooleanSemiring> combo = gen_fig1_instance(d_target / 2, std::max<std::size_t>(2, out_target / 2));
        Instance<BooleanSemiring> hub = gen_hub_p3(3 * d_target / 8, std::max<std::size_t>(2, out_target / 4));
        std::size_t q = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(
                                                     std::sqrt(static_cast<double>(out_target / 4)))));
        Instance<BooleanSemiring> ps = gen_pathstress(3, d_target / 8, q);
        merge_into(combo.db, hub.db);
        merge_into(combo.db, ps.db);
        combo.exact_out += hub.exact_out + ps.exact_out;
        combo.exact_d = combo.db.total_size();
        return combo;
      }
      const int lambda = (k_or_ell + 2) / 2;
      const std::size_t q = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(out_target), 1.0 / lambda))));
      return gen_pathstress(k_or_ell, d_target, q);
    }
  }
  throw ConfigError("unknown family shape");
}

}  // namespace yaq
