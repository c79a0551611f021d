#pragma once

#include <cmath>
#include <functional>
#include <optional>

#include "yaq/analysis.hpp"
#include "yaq/kernel.hpp"

namespace yaq {

template <Semiring S>
struct ClassicOptions {
  // When > 0, each internal-node join must stay within
  // ceil(heavy_bound_factor * |T_s|) tuples (the heavy-call intermediate bound).
  // Violations throw when hard, otherwise bump stats.heavy_bound_soft_violations.
  double heavy_bound_factor = 0;
  bool heavy_bound_hard = false;
  bool check_running_intersection = false;
  // Debug hook: called after a node is fully processed with its relation.
  std::function<void(int, const Relation<S>&)> on_node;
};

// Most free variables in the bag, ties broken by lowest node id.
inline int default_root(const JoinTree& tree, VarSet free) {
  int best = -1, best_count = -1;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!tree.nodes[i].alive) continue;
    int c = (tree.nodes[i].bag & free).size();
    if (c > best_count) {
      best_count = c;
      best = static_cast<int>(i);
    }
  }
  return best;
}

// Bottom-up semiring evaluation over a rooted join tree. Processes nodes in
// post-order; an internal node joins each child's relation projected onto
// F_t ∪ (χ(s) ∩ χ(t)), aggregating projected-away variables with ⊕, then
// widens its bag by the subtree free variables. Mutates tree and slots.
template <Semiring S>
Relation<S> yannakakis_core(JoinTree& tree, std::vector<RelPtr<S>>& slots, VarSet free,
                            EvalStats& stats, const ClassicOptions<S>& opts = {}) {
  full_reducer_slots(tree, slots, stats);
  for (int s : tree.post_order()) {
    if (tree.is_leaf(s)) {
      stats.record_node(s, slots[s]->size());
      if (opts.on_node) opts.on_node(s, *slots[s]);
      continue;
    }
    std::size_t own_size = slots[s]->size();
    Relation<S> joined = *slots[s];
    for (int c : tree.nodes[s].children) {
      if (!tree.nodes[c].alive) continue;
      VarSet ft = tree.subtree_free(c, free);
      Relation<S> proj = project(*slots[c], ft | (tree.nodes[s].bag & tree.nodes[c].bag));
      joined = join(joined, proj, stats);
      stats.record_intermediate(joined.size());
      if (opts.heavy_bound_factor > 0) {
        double bound = std::ceil(opts.heavy_bound_factor * static_cast<double>(own_size));
        if (static_cast<double>(joined.size()) > bound) {
          if (opts.heavy_bound_hard)
            throw ContractError("heavy-call intermediate exceeds |OUT|/delta bound");
          ++stats.heavy_bound_soft_violations;
        }
      }
    }
    stats.record_node(s, joined.size());
    tree.nodes[s].bag |= tree.subtree_free(s, free);
    slots[s] = make_rel(std::move(joined));
    if (opts.check_running_intersection && !tree.running_intersection_ok())
      throw ContractError("bag widening broke the running-intersection property");
    if (opts.on_node) opts.on_node(s, *slots[s]);
  }
  return project(*slots[tree.root], free);
}

template <Semiring S>
void validate_tree(const Query& q, const JoinTree& tree) {
  std::vector<int> bound(q.atoms.size(), 0);
  for (const auto& nd : tree.nodes) {
    if (!nd.alive) continue;
    for (int a : nd.atoms) {
      if (a < 0 || a >= static_cast<int>(q.atoms.size())) throw ContractError("tree binds unknown atom");
      if (q.atoms[a].vars != nd.bag) throw ContractError("tree bag does not match atom variables");
      ++bound[a];
    }
  }
  for (std::size_t a = 0; a < bound.size(); ++a)
    if (bound[a] != 1) throw ContractError("atom '" + q.atoms[a].name + "' not bound to exactly one tree node");
  if (!tree.running_intersection_ok()) throw ContractError("tree violates running intersection");
}

// Classic evaluation of an acyclic query: full reducer, then one bottom-up
// pass, then the root projection onto the free variables.
template <Semiring S>
Relation<S> yannakakis_eval(const Query& q, const Database<S>& db, JoinTree tree, EvalStats& stats,
                            const ClassicOptions<S>& opts = {}, std::optional<int> root = std::nullopt) {
  db.validate_against(q);
  validate_tree<S>(q, tree);
  tree.reroot(root ? *root : default_root(tree, q.free));
  std::vector<RelPtr<S>> slots = bind_slots(q, db, tree, stats);
  return yannakakis_core(tree, slots, q.free, stats, opts);
}

template <Semiring S>
Relation<S> yannakakis_eval(const Query& q, const Database<S>& db, EvalStats& stats) {
  GyoResult g = gyo_tree(q);
  if (!g.acyclic) throw AnalysisError("yannakakis_eval requires an acyclic query");
  return yannakakis_eval(q, db, std::move(g.tree), stats);
}

// One heavy-partition call: the tree is rooted at a leaf whose relation only
// holds key groups above the degree threshold. Checks the two preconditions,
// then runs the classic pass.
template <Semiring S>
Relation<S> heavy_leaf_eval(JoinTree tree, std::vector<RelPtr<S>> slots, VarSet free, int leaf_root,
                            std::uint64_t delta, EvalStats& stats, const ClassicOptions<S>& opts = {}) {
  VarSet isolated_free = (tree.nodes[leaf_root].bag & free) - tree.external_vars(leaf_root);
  if (isolated_free.empty())
    throw ContractError("heavy-leaf call: root bag has no isolated free variable");
  const Relation<S>& root_rel = *slots[leaf_root];
  if (!root_rel.empty()) {
    VarSet key = tree.join_vars(leaf_root);
    GroupIndex idx(root_rel, detail::cols_of(root_rel.schema(), key));
    idx.for_each_group([&](std::span<const std::uint32_t> rows) {
      if (rows.size() <= delta)
        throw ContractError("heavy-leaf call: key group at or below the degree threshold");
    });
  }
  tree.reroot(leaf_root);
  return yannakakis_core(tree, slots, free, stats, opts);
}

}  // namespace yaq
