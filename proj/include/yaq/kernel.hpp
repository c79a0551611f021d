#pragma once

#include <vector>

#include "yaq/analysis.hpp"
#include "yaq/core.hpp"

namespace yaq {

// left ⋉ right: tuples of left with at least one partner in right on the
// shared variables, annotations untouched. No shared variables: left survives
// iff right is nonempty. One tuple_op is charged per probed left tuple.
template <Semiring S>
Relation<S> semijoin(const Relation<S>& left, const Relation<S>& right, EvalStats& stats) {
  VarSet shared = left.var_set() & right.var_set();
  if (shared.empty()) {
    stats.charge(left.size());
    if (right.empty()) return Relation<S>(left.schema());
    return left;
  }
  std::vector<int> rkey = detail::cols_of(right.schema(), shared);
  std::vector<int> lkey = detail::cols_of(left.schema(), shared);
  GroupIndex idx(right, rkey);
  RelationBuilder<S> out(left.var_set(), /*fold=*/false);
  std::vector<Value> key(lkey.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    stats.charge();
    const Value* r = left.row(i);
    for (std::size_t k = 0; k < lkey.size(); ++k) key[k] = r[lkey[k]];
    if (!idx.lookup(key.data()).empty()) out.add_distinct(r, left.annot(i));
  }
  return out.take();
}

namespace detail {

template <Semiring S>
void semijoin_slot(std::vector<RelPtr<S>>& slots, int target, int filter, EvalStats& stats) {
  Relation<S> reduced = semijoin(*slots[target], *slots[filter], stats);
  if (reduced.size() != slots[target]->size()) slots[target] = make_rel(std::move(reduced));
}

}  // namespace detail

// Two semijoin passes along the tree (leaves-to-root, then root-to-leaves).
// Afterwards the instance is globally consistent: every remaining tuple
// participates in at least one full-join result.
template <Semiring S>
void full_reducer_slots(const JoinTree& tree, std::vector<RelPtr<S>>& slots, EvalStats& stats) {
  std::vector<int> order = tree.post_order();
  for (int s : order) {
    int p = tree.nodes[s].parent;
    if (p >= 0) detail::semijoin_slot(slots, p, s, stats);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int p = tree.nodes[*it].parent;
    if (p >= 0) detail::semijoin_slot(slots, *it, p, stats);
  }
}

// Binds relations to tree nodes. Atoms merged into one node (duplicate
// schemas) are ⊗-folded into a single slot relation.
template <Semiring S>
std::vector<RelPtr<S>> bind_slots(const Query& q, const Database<S>& db, const JoinTree& tree,
                                  EvalStats& stats) {
  std::vector<RelPtr<S>> slots(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& nd = tree.nodes[i];
    if (!nd.alive) continue;
    if (nd.atoms.empty()) throw ContractError("join tree node without a bound atom");
    RelPtr<S> rel = db.at(q.atoms[nd.atoms[0]].name);
    if (rel->var_set() != nd.bag) throw ContractError("join tree bag does not match relation schema");
    for (std::size_t k = 1; k < nd.atoms.size(); ++k)
      rel = make_rel(join(*rel, *db.at(q.atoms[nd.atoms[k]].name), stats));
    slots[i] = rel;
  }
  return slots;
}

template <Semiring S>
Database<S> full_reducer(const Query& q, const Database<S>& db, const JoinTree& tree, EvalStats& stats) {
  db.validate_against(q);
  std::vector<RelPtr<S>> slots = bind_slots(q, db, tree, stats);
  full_reducer_slots(tree, slots, stats);
  // Filter on tuple existence only: each original relation keeps its own
  // annotations (atoms merged into one node share the node's survivor set).
  Database<S> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!tree.nodes[i].alive) continue;
    for (int a : tree.nodes[i].atoms) {
      const std::string& name = q.atoms[a].name;
      out.relations[name] = make_rel(semijoin(*db.at(name), *slots[i], stats));
    }
  }
  return out;
}

// Degree-threshold split of a relation on a key set. Every key group with
// more than `threshold` tuples lands in heavy, the rest in light.
template <Semiring S>
struct HeavyLightSplit {
  RelPtr<S> heavy;
  RelPtr<S> light;
  std::uint64_t threshold = 0;
  VarSet key;
};

template <Semiring S>
HeavyLightSplit<S> partition_heavy_light(const Relation<S>& rel, VarSet key, std::uint64_t threshold) {
  if (threshold < 1) throw ConfigError("heavy/light threshold must be at least 1");
  if (!key.subset_of(rel.var_set())) throw SchemaError("partition key not in relation schema");
  std::vector<int> key_cols = detail::cols_of(rel.schema(), key);
  GroupIndex idx(rel, key_cols);
  RelationBuilder<S> heavy(rel.var_set(), /*fold=*/false);
  RelationBuilder<S> light(rel.var_set(), /*fold=*/false);
  idx.for_each_group([&](std::span<const std::uint32_t> rows) {
    auto& side = rows.size() > threshold ? heavy : light;
    for (std::uint32_t r : rows) side.add_distinct(rel.row(r), rel.annot(r));
  });
  HeavyLightSplit<S> out;
  out.heavy = make_rel(heavy.take());
  out.light = make_rel(light.take());
  out.threshold = threshold;
  out.key = key;
  return out;
}

template <Semiring S>
std::size_t count_distinct_keys(const Relation<S>& rel, VarSet key) {
  if (!key.subset_of(rel.var_set())) throw SchemaError("count_distinct_keys: key not in schema");
  if (rel.empty()) return 0;
  GroupIndex idx(rel, detail::cols_of(rel.schema(), key));
  return idx.group_count();
}

}  // namespace yaq
