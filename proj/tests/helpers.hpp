#pragma once

#include <map>
#include <string>
#include <vector>

#include "yaq/analysis.hpp"
#include "yaq/core.hpp"
#include "yaq/generalized.hpp"
#include "yaq/generators.hpp"
#include "yaq/oracle.hpp"

namespace yt {

using namespace yaq;

template <Semiring S>
struct Component {
  Query q;
  Database<S> db;
};

// Reduced, existentially connected sub-instances of a random acyclic query;
// the valid inputs for the generalized evaluator.
template <Semiring S>
std::vector<Component<S>> connected_components(const Instance<S>& inst) {
  EvalStats stats;
  ReduceResult rr = reduce_query(inst.q);
  Database<S> dbp = prepare_reduced_instance(inst.q, inst.db, rr, stats);
  Decomposition d = decompose_reduced(rr.reduced);
  std::vector<Component<S>> out;
  for (const auto& comp : d.components) {
    Component<S> c;
    c.q = comp;
    for (const auto& a : comp.atoms) c.db.relations[a.name] = dbp.at(a.name);
    out.push_back(std::move(c));
  }
  return out;
}

template <Semiring S>
RelPtr<S> rel(VarSet vars, std::vector<std::pair<std::vector<Value>, typename S::Value>> rows) {
  RelationBuilder<S> b(vars);
  for (auto& [r, a] : rows) b.add(r.data(), a);
  return make_rel(b.take());
}

inline RelPtr<BooleanSemiring> brel(VarSet vars, std::vector<std::vector<Value>> rows) {
  RelationBuilder<BooleanSemiring> b(vars);
  for (auto& r : rows) b.add(r.data(), true);
  return make_rel(b.take());
}

template <Semiring S>
std::map<std::vector<Value>, typename S::Value> as_map(const Relation<S>& r) {
  std::map<std::vector<Value>, typename S::Value> m;
  for (std::size_t i = 0; i < r.size(); ++i)
    m[std::vector<Value>(r.row(i), r.row(i) + r.width())] = r.annot(i);
  return m;
}

template <Semiring S>
bool no_zero_annotations(const Relation<S>& r) {
  for (std::size_t i = 0; i < r.size(); ++i)
    if (S::is_zero(r.annot(i))) return false;
  return true;
}

// Two-atom path query R12(x1,x2), R23(x2,x3) with the given free set.
inline Query p2_query(VarSet free) {
  Query q = make_path_query(2);
  q.free = free;
  return q;
}

}  // namespace yt
