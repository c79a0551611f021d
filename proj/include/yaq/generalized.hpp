#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "yaq/yannakakis.hpp"

namespace yaq {

inline constexpr double kDefaultAlpha = 64.0;  // tuple-ops per input tuple per round

// Snapshot handed to the split hook: the current tree configuration as a
// query over synthetic atom names, the database before the split, and the
// two parts. Supports checking φ(D) = φ(D with heavy) ⊕ φ(D with light).
template <Semiring S>
struct SplitEvent {
  Query config;
  Database<S> base;
  std::string split_atom;
  RelPtr<S> heavy;
  RelPtr<S> light;
  std::uint64_t threshold = 0;
};

template <Semiring S>
struct GenOptions {
  std::uint64_t delta = 1;
  std::optional<int> root;
  // Restricted bag order (front popped first). When the stack runs out with
  // more than one node left, the run stops without the root projection; the
  // path evaluator drives the remaining stages itself.
  std::optional<std::vector<int>> bag_order;
  std::optional<std::uint64_t> out_guess;  // enables the soft heavy-call bound check
  bool heavy_bound_hard = false;
  bool materialization_bound_check = false;  // internal joins ≤ c · N · Δ^(#s − 1)
  double materialization_bound_c = 4.0;
  bool check_running_intersection = false;
  std::function<void(const SplitEvent<S>&)> on_split;
  std::vector<int>* visit_log = nullptr;
};

template <Semiring S>
struct GenResult {
  Relation<S> output;
  JoinTree tree;
  Database<S> db;
};

namespace detail {

template <Semiring S>
SplitEvent<S> make_split_event(const JoinTree& tree, const std::vector<RelPtr<S>>& slots, VarSet free,
                               int split_node, const HeavyLightSplit<S>& split) {
  SplitEvent<S> ev;
  VarSet vars;
  for (int id : tree.alive_ids()) vars |= tree.nodes[id].bag;
  int n = 0;
  vars.for_each([&](VarId v) { n = std::max(n, v + 1); });
  ev.config.var_names.resize(n);
  for (int v = 0; v < n; ++v) ev.config.var_names[v] = "v" + std::to_string(v);
  ev.config.free = free & vars;
  for (int id : tree.alive_ids()) {
    std::string name = "n" + std::to_string(id);
    ev.config.atoms.push_back({name, tree.nodes[id].bag});
    ev.base.relations[name] = slots[id];
    if (id == split_node) ev.split_atom = name;
  }
  ev.heavy = split.heavy;
  ev.light = split.light;
  ev.threshold = split.threshold;
  return ev;
}

// Core of the generalized pass. Owns tree/slots mutation; callers pass the
// pop stack explicitly (post-order for full runs).
template <Semiring S>
Relation<S> generalized_core(JoinTree& tree, std::vector<RelPtr<S>>& slots, VarSet free,
                             std::vector<int> pop_order, EvalStats& stats, const GenOptions<S>& opts) {
  full_reducer_slots(tree, slots, stats);
  std::uint64_t n0 = 0;
  for (int id : tree.alive_ids()) n0 += slots[id]->size();
  const std::uint64_t n_ref = std::max<std::uint64_t>(n0, 1);

  // Stack with the first element popped first.
  std::vector<int> stack(pop_order.rbegin(), pop_order.rend());
  Relation<S> acc{schema_of(free)};

  auto accumulate = [&](Relation<S>&& part) { acc = plus_union(acc, part); };

  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (!tree.nodes[s].alive) continue;
    if (opts.visit_log) opts.visit_log->push_back(s);

    if (tree.is_leaf(s)) {
      if (s == tree.root) {
        if (tree.alive_count() == 1) accumulate(project(*slots[s], free));
        continue;
      }
      const std::size_t ts = slots[s]->size();
      // Δ_s = ceil(Δ · (|T_s| + N) / N); the ceiling keeps Δ ≤ Δ_s.
      const std::uint64_t delta_s = static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(opts.delta) * (ts + n_ref) + n_ref - 1) / n_ref);
      VarSet key = tree.join_vars(s);
      HeavyLightSplit<S> split = partition_heavy_light(*slots[s], key, delta_s);
      if (opts.on_split) opts.on_split(make_split_event(tree, slots, free, s, split));
      if (!split.heavy->empty()) {
        ClassicOptions<S> copts;
        copts.heavy_bound_hard = opts.heavy_bound_hard;
        copts.check_running_intersection = opts.check_running_intersection;
        if (opts.out_guess)
          copts.heavy_bound_factor = static_cast<double>(*opts.out_guess) / static_cast<double>(delta_s);
        JoinTree heavy_tree = tree;
        std::vector<RelPtr<S>> heavy_slots = slots;
        heavy_slots[s] = split.heavy;
        accumulate(heavy_leaf_eval(std::move(heavy_tree), std::move(heavy_slots), free, s, delta_s,
                                   stats, copts));
      }
      slots[s] = split.light;
      full_reducer_slots(tree, slots, stats);
      continue;
    }

    // Internal node: join in each child (all are leaves by now), then shed
    // the children and any variable that became private and non-free.
    Relation<S> joined = *slots[s];
    VarSet fs = tree.subtree_free(s, free);
    const double bound = opts.materialization_bound_c * static_cast<double>(n_ref) *
                         std::pow(static_cast<double>(opts.delta), tree.nodes[s].subtree_size - 1);
    for (int c : tree.nodes[s].children) {
      if (!tree.nodes[c].alive) continue;
      VarSet ft = tree.subtree_free(c, free);
      Relation<S> proj = project(*slots[c], ft | (tree.nodes[s].bag & tree.nodes[c].bag));
      joined = join(joined, proj, stats);
      stats.record_intermediate(joined.size());
      if (opts.materialization_bound_check && static_cast<double>(joined.size()) > bound)
        throw ContractError("internal join exceeds c*N*Delta^(#s-1) at node " + std::to_string(s));
    }
    stats.record_node(s, joined.size());
    tree.truncate_children(s);
    VarSet new_bag = tree.nodes[s].bag | fs;
    VarSet dead = (new_bag - free) - tree.external_vars(s);
    tree.nodes[s].bag = new_bag - dead;
    if (dead.empty())
      slots[s] = make_rel(std::move(joined));
    else
      slots[s] = make_rel(project(joined, tree.nodes[s].bag));
    if (opts.check_running_intersection && !tree.running_intersection_ok())
      throw ContractError("bag rewrite broke the running-intersection property");

    if (!stack.empty()) {
      stack.push_back(s);  // re-enter as a leaf
    } else if (tree.alive_count() == 1) {
      accumulate(project(*slots[s], free));
    }
  }
  return acc;
}

}  // namespace detail

// Generalized bottom-up evaluation of a reduced, existentially connected
// acyclic query with degree threshold Δ. Returns the ⊕-accumulated output,
// the final join tree (truncated nodes removed), and the final instance.
template <Semiring S>
GenResult<S> generalized_eval(const Query& q, const Database<S>& db, JoinTree tree,
                              const GenOptions<S>& opts, EvalStats& stats) {
  db.validate_against(q);
  validate_tree<S>(q, tree);
  const std::uint64_t n = db.total_size();
  if (opts.delta < 1 || opts.delta > std::max<std::uint64_t>(n, 1))
    throw ConfigError("delta must lie in [1, |D|]");
  if (!reduce_query(q).log.empty()) throw ContractError("generalized_eval requires a reduced query");
  if (decompose_reduced(q).components.size() != 1)
    throw ContractError("generalized_eval requires an existentially connected query");

  tree.reroot(opts.root ? *opts.root : default_root(tree, q.free));
  std::vector<RelPtr<S>> slots = bind_slots(q, db, tree, stats);
  std::vector<int> order = opts.bag_order ? *opts.bag_order : tree.post_order();

  GenResult<S> res;
  res.output = detail::generalized_core(tree, slots, q.free, std::move(order), stats, opts);
  for (int id : tree.alive_ids()) {
    const auto& nd = tree.nodes[id];
    std::string name = nd.atoms.empty() ? ("n" + std::to_string(id)) : q.atoms[nd.atoms[0]].name;
    res.db.relations[name] = slots[id];
  }
  tree.compact();
  res.tree = std::move(tree);
  return res;
}

// Output-size doubling driver: guesses T, runs with Δ = ceil(T^(1/k)) under a
// tuple-ops budget of alpha·(|D|+1)·T^(1−1/k), and doubles the guess from a
// pristine instance whenever the budget runs out. A guess cap triggers an
// unbudgeted classic fallback so undersized alpha cannot loop forever.
template <Semiring S>
Relation<S> eval_with_doubling(const Query& q, const Database<S>& db, double alpha, EvalStats& stats,
                               GenOptions<S> opts = {}) {
  if (alpha <= 0) throw ConfigError("alpha must be positive");
  GyoResult g = gyo_tree(q);
  if (!g.acyclic) throw AnalysisError("eval_with_doubling requires an acyclic query");
  const int k = static_cast<int>(q.atoms.size());
  const std::uint64_t n = db.total_size();

  // Upper bound on any possible output size, saturated.
  long double cap_ld = 1.0L;
  for (const auto& a : q.atoms) cap_ld *= static_cast<long double>(std::max<std::size_t>(db.at(a.name)->size(), 1));
  const std::uint64_t t_cap = (cap_ld > 4e18L) ? static_cast<std::uint64_t>(4e18L)
                                               : std::max<std::uint64_t>(static_cast<std::uint64_t>(cap_ld), 1);

  std::uint64_t t = 1;
  while (true) {
    ++stats.doubling_rounds;
    const double inv_k = 1.0 / static_cast<double>(k);
    std::uint64_t delta = static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<double>(t), inv_k) - 1e-9));
    delta = std::clamp<std::uint64_t>(delta, 1, std::max<std::uint64_t>(n, 1));
    const double round_budget =
        std::ceil(alpha * static_cast<double>(n + 1) * std::pow(static_cast<double>(t), 1.0 - inv_k));
    stats.budget = stats.tuple_ops + static_cast<std::uint64_t>(round_budget);
    GenOptions<S> ropts = opts;
    ropts.delta = delta;
    ropts.out_guess = t;
    try {
      GenResult<S> res = generalized_eval(q, db, g.tree, ropts, stats);
      stats.budget.reset();
      stats.delta_final = delta;
      return std::move(res.output);
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

// ---------------------------------------------------------------------------
// General acyclic queries: reduce, evaluate each existentially connected
// component, then join the materialized component results (a full acyclic
// query) with the classic pass.
// ---------------------------------------------------------------------------

// Replays the reduction log on the instance: a dropped isolated variable is
// ⊕-projected away inside its atom; an absorbed atom is ⊗-folded into its
// absorber (tuples without a partner vanish with it).
template <Semiring S>
Database<S> prepare_reduced_instance(const Query& q, const Database<S>& db, const ReduceResult& rr,
                                     EvalStats& stats) {
  db.validate_against(q);
  std::vector<RelPtr<S>> rels(q.atoms.size());
  for (std::size_t i = 0; i < q.atoms.size(); ++i) rels[i] = db.at(q.atoms[i].name);
  for (const auto& step : rr.log) {
    if (step.kind == ReductionStep::kRemoveVar) {
      VarSet keep = rels[step.edge]->var_set();
      keep.erase(step.var);
      rels[step.edge] = make_rel(project(*rels[step.edge], keep));
    } else {
      rels[step.into] = make_rel(join(*rels[step.into], *rels[step.edge], stats));
      rels[step.edge] = nullptr;
    }
  }
  Database<S> out;
  for (std::size_t i = 0; i < rr.atom_map.size(); ++i)
    out.relations[rr.reduced.atoms[i].name] = rels[rr.atom_map[i]];
  return out;
}

template <Semiring S>
Relation<S> eval_general_cq(const Query& q, const Database<S>& db, EvalStats& stats,
                            std::optional<std::uint64_t> fixed_delta = std::nullopt,
                            double alpha = kDefaultAlpha, const GenOptions<S>& base_opts = {}) {
  if (!is_acyclic(q)) throw AnalysisError("query is cyclic; only acyclic queries are supported");
  ReduceResult rr = reduce_query(q);
  Database<S> dbp = prepare_reduced_instance(q, db, rr, stats);
  Decomposition d = decompose_reduced(rr.reduced);

  std::vector<Relation<S>> parts;
  for (const Query& comp : d.components) {
    Database<S> cdb;
    for (const auto& a : comp.atoms) cdb.relations[a.name] = dbp.at(a.name);
    if (fixed_delta) {
      GenOptions<S> go = base_opts;
      go.delta = std::clamp<std::uint64_t>(*fixed_delta, 1, std::max<std::uint64_t>(cdb.total_size(), 1));
      parts.push_back(generalized_eval(comp, cdb, gyo_tree(comp).tree, go, stats).output);
    } else {
      parts.push_back(eval_with_doubling(comp, cdb, alpha, stats, base_opts));
    }
  }
  if (parts.size() == 1) return std::move(parts[0]);

  // The component results form a full acyclic query over the free variables.
  Query fq;
  fq.var_names = q.var_names;
  fq.free = q.free;
  Database<S> fdb;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string name = "__q" + std::to_string(i);
    fq.atoms.push_back({name, parts[i].var_set()});
    fdb.relations[name] = make_rel(std::move(parts[i]));
  }
  GyoResult g = gyo_tree(fq);
  if (!g.acyclic) throw ContractError("component join unexpectedly cyclic");
  return yannakakis_eval(fq, fdb, std::move(g.tree), stats);
}

}  // namespace yaq
