#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "yaq/common.hpp"
#include "yaq/semiring.hpp"
#include "yaq/stats.hpp"

namespace yaq {

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

struct Atom {
  std::string name;
  VarSet vars;
};

// Hypergraph query: vertex set [n] with names, one hyperedge per atom, and a
// free-variable set. Edges may repeat variable sets (multihypergraph); atom
// names are unique. Internal rewrites (reduction, decomposition) reuse the
// parent's variable id space, so ids may be sparse in derived queries.
struct Query {
  std::vector<std::string> var_names;
  std::vector<Atom> atoms;
  VarSet free;

  int var_count() const { return static_cast<int>(var_names.size()); }

  VarSet atom_vars() const {
    VarSet u;
    for (const auto& a : atoms) u |= a.vars;
    return u;
  }

  int atom_index(const std::string& name) const {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i].name == name) return static_cast<int>(i);
    return -1;
  }

  // Parse-time invariants for user-facing queries.
  void validate() const {
    if (var_count() > 64) throw SchemaError("queries are limited to 64 variables");
    VarSet used = atom_vars();
    if (!free.subset_of(used)) throw SchemaError("free variable not used in any atom");
    for (int v = 0; v < var_count(); ++v)
      if (!used.contains(v)) throw SchemaError("variable '" + var_names[v] + "' appears in no atom");
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        if (atoms[i].name == atoms[j].name) throw SchemaError("duplicate atom name '" + atoms[i].name + "'");
  }
};

// Partial map variable -> value, defined on a declared variable set.
class Valuation {
 public:
  Valuation() = default;

  void set(VarId v, Value x) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                               [](const auto& e, VarId w) { return e.first < w; });
    if (it != entries_.end() && it->first == v)
      it->second = x;
    else
      entries_.insert(it, {v, x});
  }

  std::optional<Value> get(VarId v) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                               [](const auto& e, VarId w) { return e.first < w; });
    if (it != entries_.end() && it->first == v) return it->second;
    return std::nullopt;
  }

  VarSet vars() const {
    VarSet s;
    for (const auto& [v, x] : entries_) s.insert(v);
    return s;
  }

  const std::vector<std::pair<VarId, Value>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<VarId, Value>> entries_;  // sorted by variable id
};

// ---------------------------------------------------------------------------
// Relations. Schema order is canonical: ascending variable id. Tuples are a
// set; each distinct tuple carries one annotation, never the semiring zero.
// ---------------------------------------------------------------------------

using Schema = std::vector<VarId>;

inline Schema schema_of(VarSet vars) {
  Schema s;
  s.reserve(vars.size());
  vars.for_each([&](VarId v) { s.push_back(v); });
  return s;
}

template <Semiring S>
class Relation {
 public:
  using Annot = typename S::Value;

  Relation() = default;
  explicit Relation(Schema schema) : schema_(std::move(schema)) {
    for (std::size_t i = 1; i < schema_.size(); ++i)
      if (schema_[i - 1] >= schema_[i]) throw SchemaError("relation schema must be ascending variable ids");
    for (VarId v : schema_) vars_.insert(v);
  }

  const Schema& schema() const { return schema_; }
  VarSet var_set() const { return vars_; }
  std::size_t width() const { return schema_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  const Value* row(std::size_t i) const { return data_.data() + i * schema_.size(); }
  Annot annot(std::size_t i) const { return annots_[i]; }

  int col_of(VarId v) const {
    auto it = std::lower_bound(schema_.begin(), schema_.end(), v);
    if (it == schema_.end() || *it != v) return -1;
    return static_cast<int>(it - schema_.begin());
  }

  // Storage handles for builders and index structures.
  const std::vector<Value>& data() const { return data_; }

 private:
  template <Semiring>
  friend class RelationBuilder;

  Schema schema_;
  VarSet vars_;
  std::vector<Value> data_;
  std::vector<Annot> annots_;
  std::size_t size_ = 0;
};

template <Semiring S>
using RelPtr = std::shared_ptr<const Relation<S>>;

template <Semiring S>
RelPtr<S> make_rel(Relation<S>&& r) {
  return std::make_shared<const Relation<S>>(std::move(r));
}

// Accumulates tuples. In folding mode duplicate rows are merged with ⊕; in
// distinct mode the caller guarantees rows are new (join outputs are distinct
// by construction) and no hash table is kept.
template <Semiring S>
class RelationBuilder {
 public:
  using Annot = typename S::Value;

  explicit RelationBuilder(Schema schema, bool fold = true)
      : rel_(std::move(schema)), fold_(fold) {}

  explicit RelationBuilder(VarSet vars, bool fold = true)
      : RelationBuilder(schema_of(vars), fold) {}

  void reserve(std::size_t rows) {
    rel_.data_.reserve(rows * rel_.width());
    rel_.annots_.reserve(rows);
    if (fold_) heads_.reserve(rows * 2);
  }

  std::size_t size() const { return rel_.size_; }

  void add(const Value* row, Annot a) {
    if (S::is_zero(a)) return;
    if (!fold_) {
      append(row, a);
      return;
    }
    const std::size_t w = rel_.width();
    std::uint64_t h = hash_values(row, w);
    auto [it, inserted] = heads_.try_emplace(h, 0);
    if (!inserted) {
      for (std::uint32_t i = it->second;; i = next_[i]) {
        if (std::equal(row, row + w, rel_.row(i))) {
          rel_.annots_[i] = S::plus(rel_.annots_[i], a);
          return;
        }
        if (next_[i] == kEnd) break;
      }
    }
    std::uint32_t idx = append(row, a);
    if (!inserted) {
      next_[idx] = it->second;  // prepend to chain
    }
    it->second = idx;
  }

  void add_distinct(const Value* row, Annot a) {
    if (S::is_zero(a)) return;
    append(row, a);
  }

  Relation<S> take() {
    // ⊕ can in principle fold to zero; compact if it did.
    bool any_zero = false;
    for (std::size_t i = 0; i < rel_.size_; ++i)
      if (S::is_zero(rel_.annots_[i])) {
        any_zero = true;
        break;
      }
    if (any_zero) {
      Relation<S> out(rel_.schema_);
      const std::size_t w = rel_.width();
      for (std::size_t i = 0; i < rel_.size_; ++i) {
        if (S::is_zero(rel_.annots_[i])) continue;
        out.data_.insert(out.data_.end(), rel_.row(i), rel_.row(i) + w);
        out.annots_.push_back(rel_.annots_[i]);
        ++out.size_;
      }
      return out;
    }
    heads_.clear();
    next_.clear();
    return std::move(rel_);
  }

 private:
  std::uint32_t append(const Value* row, Annot a) {
    rel_.data_.insert(rel_.data_.end(), row, row + rel_.width());
    rel_.annots_.push_back(a);
    std::uint32_t idx = static_cast<std::uint32_t>(rel_.size_++);
    if (fold_) next_.push_back(kEnd);
    return idx;
  }

  static constexpr std::uint32_t kEnd = 0xffffffffu;
  Relation<S> rel_;
  bool fold_;
  std::unordered_map<std::uint64_t, std::uint32_t> heads_;
  std::vector<std::uint32_t> next_;
};

// ---------------------------------------------------------------------------
// Group index: rows of a relation grouped by a key column set (CSR layout).
// ---------------------------------------------------------------------------

class GroupIndex {
 public:
  template <Semiring S>
  GroupIndex(const Relation<S>& rel, const std::vector<int>& key_cols)
      : data_(rel.data().data()), width_(rel.width()), key_cols_(key_cols) {
    const std::size_t n = rel.size();
    std::vector<std::uint32_t> group_of(n);
    std::vector<std::uint32_t> group_sizes;
    buckets_.reserve(n * 2);
    key_buf_.resize(key_cols_.size());
    for (std::size_t i = 0; i < n; ++i) {
      const Value* r = row(i);
      std::uint64_t h = hash_key_of_row(r);
      auto [it, inserted] = buckets_.try_emplace(h);
      std::uint32_t g = kNone;
      if (!inserted) {
        for (auto [rep, gid] : it->second)
          if (key_equal(row(rep), r)) {
            g = gid;
            break;
          }
      }
      if (g == kNone) {
        g = static_cast<std::uint32_t>(group_sizes.size());
        group_sizes.push_back(0);
        it->second.push_back({static_cast<std::uint32_t>(i), g});
      }
      group_of[i] = g;
      ++group_sizes[g];
    }
    offsets_.assign(group_sizes.size() + 1, 0);
    for (std::size_t g = 0; g < group_sizes.size(); ++g) offsets_[g + 1] = offsets_[g] + group_sizes[g];
    perm_.resize(n);
    std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) perm_[cursor[group_of[i]]++] = static_cast<std::uint32_t>(i);
  }

  std::size_t group_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  // Rows whose key columns equal the given key values (width = key arity).
  std::span<const std::uint32_t> lookup(const Value* key) const {
    std::uint64_t h = hash_values(key, key_cols_.size());
    auto it = buckets_.find(h);
    if (it == buckets_.end()) return {};
    for (auto [rep, gid] : it->second)
      if (key_matches(row(rep), key)) return group(gid);
    return {};
  }

  std::span<const std::uint32_t> group(std::uint32_t g) const {
    return {perm_.data() + offsets_[g], perm_.data() + offsets_[g + 1]};
  }

  template <typename F>
  void for_each_group(F&& f) const {
    for (std::uint32_t g = 0; g + 1 < offsets_.size(); ++g) f(group(g));
  }

 private:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  const Value* row(std::size_t i) const { return data_ + i * width_; }

  std::uint64_t hash_key_of_row(const Value* r) {
    for (std::size_t k = 0; k < key_cols_.size(); ++k) key_buf_[k] = r[key_cols_[k]];
    return hash_values(key_buf_.data(), key_buf_.size());
  }

  bool key_equal(const Value* a, const Value* b) const {
    for (int c : key_cols_)
      if (a[c] != b[c]) return false;
    return true;
  }

  bool key_matches(const Value* r, const Value* key) const {
    for (std::size_t k = 0; k < key_cols_.size(); ++k)
      if (r[key_cols_[k]] != key[k]) return false;
    return true;
  }

  const Value* data_;
  std::size_t width_;
  std::vector<int> key_cols_;
  std::vector<Value> key_buf_;
  std::vector<std::uint32_t> perm_;
  std::vector<std::uint32_t> offsets_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> buckets_;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> cols_of(const Schema& schema, VarSet vars) {
  std::vector<int> cols;
  cols.reserve(vars.size());
  for (std::size_t c = 0; c < schema.size(); ++c)
    if (vars.contains(schema[c])) cols.push_back(static_cast<int>(c));
  return cols;
}

}  // namespace detail

// π_vars(rel): annotations of collapsed tuples combined with ⊕.
template <Semiring S>
Relation<S> project(const Relation<S>& rel, VarSet vars) {
  if (!vars.subset_of(rel.var_set())) throw SchemaError("project: variable not in relation schema");
  if (vars == rel.var_set()) return rel;
  std::vector<int> cols = detail::cols_of(rel.schema(), vars);
  RelationBuilder<S> b(vars);
  std::vector<Value> buf(cols.size());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    const Value* r = rel.row(i);
    for (std::size_t k = 0; k < cols.size(); ++k) buf[k] = r[cols[k]];
    b.add(buf.data(), rel.annot(i));
  }
  return b.take();
}

// σ_{vars = valuation}(rel): tuples agreeing with the valuation, annotations kept.
template <Semiring S>
Relation<S> select_eq(const Relation<S>& rel, const Valuation& on) {
  if (!on.vars().subset_of(rel.var_set())) throw SchemaError("select_eq: variable not in relation schema");
  std::vector<std::pair<int, Value>> conds;
  for (const auto& [v, x] : on.entries()) conds.push_back({rel.col_of(v), x});
  RelationBuilder<S> b(rel.var_set(), /*fold=*/false);
  for (std::size_t i = 0; i < rel.size(); ++i) {
    const Value* r = rel.row(i);
    bool ok = true;
    for (const auto& [c, x] : conds)
      if (r[c] != x) {
        ok = false;
        break;
      }
    if (ok) b.add_distinct(r, rel.annot(i));
  }
  return b.take();
}

// d(v, vars, rel) = |σ_{vars = v}(rel)|.
template <Semiring S>
std::size_t degree(const Relation<S>& rel, VarSet vars, const Valuation& on) {
  if (on.vars() != vars) throw SchemaError("degree: valuation must be defined exactly on the key set");
  return select_eq(rel, on).size();
}

// Natural join with ⊗-combined annotations; disjoint schemas degrade to the
// cartesian product. Hash-based, building on the smaller input. Every produced
// candidate tuple is charged to stats.tuple_ops.
template <Semiring S>
Relation<S> join(const Relation<S>& left, const Relation<S>& right, EvalStats& stats) {
  const bool left_builds = left.size() <= right.size();
  const Relation<S>& bld = left_builds ? left : right;
  const Relation<S>& prb = left_builds ? right : left;

  VarSet out_vars = left.var_set() | right.var_set();
  Schema out_schema = schema_of(out_vars);
  const std::size_t out_w = out_schema.size();

  // Column plan: each output column comes from the probe row or the build row.
  std::vector<std::pair<bool, int>> plan;  // {from_probe, source col}
  plan.reserve(out_w);
  for (VarId v : out_schema) {
    int pc = prb.col_of(v);
    if (pc >= 0)
      plan.push_back({true, pc});
    else
      plan.push_back({false, bld.col_of(v)});
  }

  VarSet shared = left.var_set() & right.var_set();
  std::vector<int> bld_key = detail::cols_of(bld.schema(), shared);
  std::vector<int> prb_key = detail::cols_of(prb.schema(), shared);

  RelationBuilder<S> out(out_schema, /*fold=*/false);
  std::vector<Value> buf(out_w);

  if (shared.empty()) {
    out.reserve(bld.size() * prb.size());
    for (std::size_t p = 0; p < prb.size(); ++p) {
      const Value* pr = prb.row(p);
      for (std::size_t b = 0; b < bld.size(); ++b) {
        stats.charge();
        const Value* br = bld.row(b);
        for (std::size_t c = 0; c < out_w; ++c) buf[c] = plan[c].first ? pr[plan[c].second] : br[plan[c].second];
        out.add_distinct(buf.data(), S::times(prb.annot(p), bld.annot(b)));
      }
    }
    return out.take();
  }

  GroupIndex idx(bld, bld_key);
  std::vector<Value> key(prb_key.size());

  // Exact-size pass keeps peak memory at one final allocation.
  std::size_t total = 0;
  for (std::size_t p = 0; p < prb.size(); ++p) {
    const Value* pr = prb.row(p);
    for (std::size_t k = 0; k < prb_key.size(); ++k) key[k] = pr[prb_key[k]];
    total += idx.lookup(key.data()).size();
  }
  out.reserve(total);

  for (std::size_t p = 0; p < prb.size(); ++p) {
    const Value* pr = prb.row(p);
    for (std::size_t k = 0; k < prb_key.size(); ++k) key[k] = pr[prb_key[k]];
    for (std::uint32_t b : idx.lookup(key.data())) {
      stats.charge();
      const Value* br = bld.row(b);
      for (std::size_t c = 0; c < out_w; ++c) buf[c] = plan[c].first ? pr[plan[c].second] : br[plan[c].second];
      out.add_distinct(buf.data(), S::times(prb.annot(p), bld.annot(b)));
    }
  }
  return out.take();
}

// ---------------------------------------------------------------------------
// Databases
// ---------------------------------------------------------------------------

template <Semiring S>
struct Database {
  std::map<std::string, RelPtr<S>> relations;

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& [_, r] : relations) n += r->size();
    return n;
  }

  const RelPtr<S>& at(const std::string& name) const {
    auto it = relations.find(name);
    if (it == relations.end()) throw ContractError("database has no relation for atom '" + name + "'");
    return it->second;
  }

  void validate_against(const Query& q) const {
    for (const auto& a : q.atoms) {
      const auto& r = at(a.name);
      if (r->var_set() != a.vars) throw ContractError("relation schema mismatch for atom '" + a.name + "'");
    }
  }
};

// Annotation-exact multiset-free equality (schemas, tuples, annotations).
template <Semiring S>
bool relations_equal(const Relation<S>& a, const Relation<S>& b) {
  if (a.var_set() != b.var_set() || a.size() != b.size()) return false;
  std::map<std::vector<Value>, typename S::Value> ma;
  for (std::size_t i = 0; i < a.size(); ++i)
    ma.emplace(std::vector<Value>(a.row(i), a.row(i) + a.width()), a.annot(i));
  for (std::size_t i = 0; i < b.size(); ++i) {
    auto it = ma.find(std::vector<Value>(b.row(i), b.row(i) + b.width()));
    if (it == ma.end() || it->second != b.annot(i)) return false;
  }
  return true;
}

// ⊕-union of two relations over the same schema.
template <Semiring S>
Relation<S> plus_union(const Relation<S>& a, const Relation<S>& b) {
  if (a.var_set() != b.var_set()) throw SchemaError("plus_union: schema mismatch");
  RelationBuilder<S> out(a.var_set());
  out.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.add(a.row(i), a.annot(i));
  for (std::size_t i = 0; i < b.size(); ++i) out.add(b.row(i), b.annot(i));
  return out.take();
}

}  // namespace yaq
