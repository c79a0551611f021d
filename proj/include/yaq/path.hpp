#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "yaq/generalized.hpp"

namespace yaq {

// Chain recognition: k binary atoms forming a simple path x_1 - ... - x_(k+1)
// with free = {x_1, x_(k+1)} (or the whole schema for k = 1 handled by the
// same shape). atom_order[i] is the atom carrying {x_(i+1), x_(i+2)}.
struct PathShape {
  int k = 0;
  std::vector<int> atom_order;
  std::vector<VarId> chain;  // x_1 .. x_(k+1)
};

inline std::optional<PathShape> detect_path(const Query& q) {
  const int k = static_cast<int>(q.atoms.size());
  if (k < 1) return std::nullopt;
  for (const auto& a : q.atoms)
    if (a.vars.size() != 2) return std::nullopt;
  VarSet vars = q.atom_vars();
  if (vars.size() != k + 1) return std::nullopt;

  std::vector<int> deg(64, 0);
  for (const auto& a : q.atoms) a.vars.for_each([&](VarId v) { ++deg[v]; });
  VarId start = -1;
  int endpoints = 0;
  vars.for_each([&](VarId v) {
    if (deg[v] == 1) {
      ++endpoints;
      if (start < 0 || v < start) start = v;
    } else if (deg[v] != 2) {
      endpoints = -100;  // branching vertex: not a path
    }
  });
  if (k == 1) {
    if (q.free != vars) return std::nullopt;
    return PathShape{1, {0}, {q.atoms[0].vars.lowest(), (q.atoms[0].vars - VarSet::of(q.atoms[0].vars.lowest())).lowest()}};
  }
  if (endpoints != 2) return std::nullopt;

  PathShape shape;
  shape.k = k;
  shape.chain.push_back(start);
  std::vector<bool> used(k, false);
  VarId cur = start;
  for (int step = 0; step < k; ++step) {
    int next_atom = -1;
    for (int i = 0; i < k; ++i)
      if (!used[i] && q.atoms[i].vars.contains(cur)) {
        next_atom = i;
        break;
      }
    if (next_atom < 0) return std::nullopt;
    used[next_atom] = true;
    shape.atom_order.push_back(next_atom);
    VarSet rest = q.atoms[next_atom].vars;
    rest.erase(cur);
    cur = rest.lowest();
    shape.chain.push_back(cur);
  }
  if (q.free != VarSet::of(shape.chain.front(), shape.chain.back())) return std::nullopt;
  return shape;
}

namespace detail {

inline JoinTree chain_tree(const Query& q, const PathShape& shape) {
  JoinTree tree;
  tree.nodes.resize(shape.k);
  for (int i = 0; i < shape.k; ++i) {
    tree.nodes[i].bag = q.atoms[shape.atom_order[i]].vars;
    tree.nodes[i].atoms = {shape.atom_order[i]};
    if (i + 1 < shape.k) tree.nodes[i].parent = i + 1;
  }
  for (int i = 1; i < shape.k; ++i) tree.nodes[i].children = {i - 1};
  tree.root = shape.k - 1;
  tree.compute_subtree_sizes();
  return tree;
}

}  // namespace detail

// Staged path evaluation. Stage 1 runs the generalized pass restricted to the
// lower half of the chain (rooted at the top), leaving the materialized
// midpoint relation over {x_1, x_(m+1)}. Stage 2 splits it on x_1 with
// Δ' = |R_mid|·Δ/T; stage 3 sends the heavy part through the classic pass;
// stage 4 runs the restricted generalized pass over the upper half rooted at
// the midpoint; stage 5 joins the two survivors. T is the driver's current
// output-size guess (Δ' needs one).
template <Semiring S>
Relation<S> path_eval(const Query& q, const Database<S>& db, std::uint64_t delta, std::uint64_t out_guess,
                      EvalStats& stats, const GenOptions<S>& base_opts = {}) {
  std::optional<PathShape> shape = detect_path(q);
  if (!shape) throw ContractError("path evaluation supports only simple chain queries with endpoint free variables");
  db.validate_against(q);
  const std::uint64_t n_input = db.total_size();
  if (delta < 1 || delta > std::max<std::uint64_t>(n_input, 1)) throw ConfigError("delta must lie in [1, |D|]");
  if (out_guess < 1) throw ConfigError("output guess must be positive");

  const int k = shape->k;
  JoinTree tree = detail::chain_tree(q, *shape);
  std::vector<RelPtr<S>> slots = bind_slots(q, db, tree, stats);

  if (k == 1) return project(*slots[0], q.free);

  full_reducer_slots(tree, slots, stats);
  const int m = k / 2;

  // Stage 1: lower half, rooted at the top bag.
  GenOptions<S> opts1 = base_opts;
  opts1.delta = delta;
  opts1.out_guess = out_guess;
  std::vector<int> lower(m);
  for (int i = 0; i < m; ++i) lower[i] = i;
  Relation<S> j1 = detail::generalized_core(tree, slots, q.free, lower, stats, opts1);

  const int mid = m - 1;  // collapsed after stage 1 (bag {x_1, x_(m+1)}); for m = 1 it is the bottom atom
  const std::size_t mid_size = slots[mid]->size();

  // Stage 2: split the midpoint relation on x_1 with Δ' = |R_mid|·Δ/T.
  std::uint64_t delta_p = static_cast<std::uint64_t>(
      static_cast<unsigned __int128>(mid_size) * delta / std::max<std::uint64_t>(out_guess, 1));
  if (delta_p < 1) delta_p = 1;
  if (delta_p > std::max<std::uint64_t>(n_input, 1)) delta_p = std::max<std::uint64_t>(n_input, 1);
  VarSet x1 = VarSet::of(shape->chain.front());
  HeavyLightSplit<S> split = partition_heavy_light(*slots[mid], x1, delta_p);

  // Heavy x_1 groups have more than Δ' tuples each, so the heavy part spans
  // at most |heavy|/Δ' distinct x_1 values.
  if (!split.heavy->empty() &&
      count_distinct_keys(*split.heavy, x1) > split.heavy->size() / std::max<std::uint64_t>(delta_p, 1))
    throw ContractError("heavy midpoint partition violates the distinct-key bound");

  // Stage 3: classic pass on the heavy side, still rooted at the top bag.
  Relation<S> j2{schema_of(q.free)};
  if (!split.heavy->empty()) {
    JoinTree heavy_tree = tree;
    std::vector<RelPtr<S>> heavy_slots = slots;
    heavy_slots[mid] = split.heavy;
    heavy_tree.reroot(k - 1);
    ClassicOptions<S> copts;
    copts.check_running_intersection = base_opts.check_running_intersection;
    j2 = yannakakis_core(heavy_tree, heavy_slots, q.free, stats, copts);
  }
  slots[mid] = split.light;

  // Stage 4: upper half, rooted at the midpoint bag.
  tree.reroot(mid);
  GenOptions<S> opts4 = base_opts;
  opts4.delta = delta;
  opts4.out_guess = out_guess;
  std::vector<int> upper;
  for (int i = k - 1; i >= m; --i) upper.push_back(i);
  Relation<S> j3 = detail::generalized_core(tree, slots, q.free, upper, stats, opts4);

  // Stage 5: join the two remaining relations.
  Relation<S> pair = join(*slots[mid], *slots[m], stats);
  stats.record_intermediate(pair.size());
  Relation<S> j4 = project(pair, q.free);

  Relation<S> out = plus_union(j1, j2);
  out = plus_union(out, j3);
  out = plus_union(out, j4);
  return out;
}

// Doubling driver for the staged path evaluation; exponent 1 − 1/⌈(k+1)/2⌉.
template <Semiring S>
Relation<S> path_eval_doubling(const Query& q, const Database<S>& db, double alpha, EvalStats& stats,
                               const GenOptions<S>& base_opts = {}) {
  if (alpha <= 0) throw ConfigError("alpha must be positive");
  std::optional<PathShape> shape = detect_path(q);
  if (!shape) throw ContractError("path evaluation supports only simple chain queries with endpoint free variables");
  const int lambda = (shape->k + 2) / 2;  // ⌈(k+1)/2⌉
  const std::uint64_t n = db.total_size();

  long double cap_ld = 1.0L;
  for (const auto& a : q.atoms) cap_ld *= static_cast<long double>(std::max<std::size_t>(db.at(a.name)->size(), 1));
  const std::uint64_t t_cap = (cap_ld > 4e18L) ? static_cast<std::uint64_t>(4e18L)
                                               : std::max<std::uint64_t>(static_cast<std::uint64_t>(cap_ld), 1);

  std::uint64_t t = 1;
  while (true) {
    ++stats.doubling_rounds;
    const double inv = 1.0 / static_cast<double>(lambda);
    std::uint64_t delta = static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<double>(t), inv) - 1e-9));
    delta = std::clamp<std::uint64_t>(delta, 1, std::max<std::uint64_t>(n, 1));
    const double round_budget =
        std::ceil(alpha * static_cast<double>(n + 1) * std::pow(static_cast<double>(t), 1.0 - inv));
    stats.budget = stats.tuple_ops + static_cast<std::uint64_t>(round_budget);
    try {
      Relation<S> res = path_eval(q, db, delta, t, stats, base_opts);
      stats.budget.reset();
      stats.delta_final = delta;
      return res;
    } catch (const BudgetExhausted&) {
      stats.budget.reset();
      if (t >= t_cap) {
        stats.fallback_used = true;
        return yannakakis_eval(q, db, stats);
      }
      t *= 2;
    }
  }
}

}  // namespace yaq
