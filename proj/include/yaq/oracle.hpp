#pragma once

#include <array>
#include <vector>

#include "yaq/core.hpp"

namespace yaq {

inline constexpr std::uint64_t kDefaultOracleCap = 10'000'000;

// Ground truth by exhaustive enumeration: every combination of one tuple per
// atom is checked for consistency, consistent products are ⊗-combined and
// ⊕-aggregated onto the free variables. Deliberately index-free so it shares
// nothing with the evaluation path it certifies.
template <Semiring S>
Relation<S> brute_force_eval(const Query& q, const Database<S>& db,
                             std::uint64_t cap = kDefaultOracleCap) {
  db.validate_against(q);
  const int m = static_cast<int>(q.atoms.size());
  if (m == 0) throw ContractError("query has no atoms");

  std::vector<const Relation<S>*> rels;
  rels.reserve(m);
  long double combos = 1.0L;
  for (const auto& a : q.atoms) {
    rels.push_back(db.at(a.name).get());
    combos *= static_cast<long double>(rels.back()->size());
  }
  if (combos > static_cast<long double>(cap))
    throw OracleTooLargeError("brute-force enumeration exceeds the configured cap");

  RelationBuilder<S> out(q.free);
  Schema free_schema = schema_of(q.free);
  std::vector<Value> key(free_schema.size());
  std::array<Value, 64> binding{};
  std::array<bool, 64> bound{};

  std::vector<std::size_t> idx(m, 0);
  for (const auto* r : rels)
    if (r->empty()) return out.take();

  while (true) {
    bound.fill(false);
    bool ok = true;
    typename S::Value prod = S::one();
    for (int i = 0; i < m && ok; ++i) {
      const Relation<S>& r = *rels[i];
      const Value* row = r.row(idx[i]);
      const Schema& sch = r.schema();
      for (std::size_t c = 0; c < sch.size(); ++c) {
        VarId v = sch[c];
        if (bound[v]) {
          if (binding[v] != row[c]) {
            ok = false;
            break;
          }
        } else {
          bound[v] = true;
          binding[v] = row[c];
        }
      }
      if (ok) prod = S::times(prod, r.annot(idx[i]));
    }
    if (ok) {
      for (std::size_t c = 0; c < free_schema.size(); ++c) key[c] = binding[free_schema[c]];
      out.add(key.data(), prod);
    }
    int level = m - 1;
    while (level >= 0) {
      if (++idx[level] < rels[level]->size()) break;
      idx[level] = 0;
      --level;
    }
    if (level < 0) break;
  }
  return out.take();
}

}  // namespace yaq
