#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "yaq/core.hpp"

namespace yaq {

// ---------------------------------------------------------------------------
// Join trees. Bags correspond to atoms; atoms with identical variable sets
// are merged into one node. Structure survives rerooting; `alive` supports
// truncation during evaluation.
// ---------------------------------------------------------------------------

struct JoinTreeNode {
  VarSet bag;
  std::vector<int> atoms;  // query atom indices bound here
  int parent = -1;
  std::vector<int> children;
  bool alive = true;
  int subtree_size = 1;  // node count of the initial rooted subtree
};

struct JoinTree {
  std::vector<JoinTreeNode> nodes;
  int root = -1;

  int alive_count() const {
    int n = 0;
    for (const auto& nd : nodes) n += nd.alive ? 1 : 0;
    return n;
  }

  std::vector<int> alive_ids() const {
    std::vector<int> ids;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].alive) ids.push_back(static_cast<int>(i));
    return ids;
  }

  bool is_leaf(int s) const { return nodes[s].children.empty(); }

  // Post-order over alive nodes, children in ascending id order, root last.
  std::vector<int> post_order() const {
    std::vector<int> out;
    out.reserve(nodes.size());
    std::function<void(int)> rec = [&](int s) {
      for (int c : nodes[s].children)
        if (nodes[c].alive) rec(c);
      out.push_back(s);
    };
    if (root >= 0 && nodes[root].alive) rec(root);
    return out;
  }

  // Reorients parent/child links so `new_root` becomes the root.
  void reroot(int new_root) {
    std::vector<std::vector<int>> adj(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].alive) continue;
      int p = nodes[i].parent;
      if (p >= 0 && nodes[p].alive) {
        adj[i].push_back(p);
        adj[p].push_back(static_cast<int>(i));
      }
    }
    for (auto& nd : nodes) {
      nd.parent = -1;
      nd.children.clear();
    }
    std::vector<int> stack{new_root};
    std::vector<bool> seen(nodes.size(), false);
    seen[new_root] = true;
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      std::sort(adj[s].begin(), adj[s].end());
      for (int t : adj[s]) {
        if (seen[t]) continue;
        seen[t] = true;
        nodes[t].parent = s;
        nodes[s].children.push_back(t);
        stack.push_back(t);
      }
    }
    for (auto& nd : nodes) std::sort(nd.children.begin(), nd.children.end());
    root = new_root;
    compute_subtree_sizes();
  }

  void compute_subtree_sizes() {
    for (int s : post_order()) {
      nodes[s].subtree_size = 1;
      for (int c : nodes[s].children)
        if (nodes[c].alive) nodes[s].subtree_size += nodes[c].subtree_size;
    }
  }

  // Union of the bags of alive nodes other than s.
  VarSet external_vars(int s) const {
    VarSet u;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].alive && static_cast<int>(i) != s) u |= nodes[i].bag;
    return u;
  }

  // Join variables of node s: bag vars shared with the rest of the tree.
  VarSet join_vars(int s) const { return nodes[s].bag & external_vars(s); }

  // Free variables appearing in the alive subtree rooted at s (bags included).
  VarSet subtree_free(int s, VarSet free) const {
    VarSet out = nodes[s].bag & free;
    for (int c : nodes[s].children)
      if (nodes[c].alive) out |= subtree_free(c, free);
    return out;
  }

  void truncate_children(int s) {
    for (int c : nodes[s].children) {
      if (!nodes[c].alive) continue;
      nodes[c].alive = false;
    }
    nodes[s].children.clear();
  }

  // Running-intersection check over alive nodes.
  bool running_intersection_ok() const {
    VarSet all;
    for (const auto& nd : nodes)
      if (nd.alive) all |= nd.bag;
    bool ok = true;
    all.for_each([&](VarId v) {
      // Nodes containing v must form a connected subtree.
      int count = 0;
      for (const auto& nd : nodes)
        if (nd.alive && nd.bag.contains(v)) ++count;
      if (count <= 1) return;
      // BFS restricted to nodes containing v, starting from any of them.
      int start = -1;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].alive && nodes[i].bag.contains(v)) {
          start = static_cast<int>(i);
          break;
        }
      std::vector<int> stack{start};
      std::vector<bool> seen(nodes.size(), false);
      seen[start] = true;
      int reached = 0;
      while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        ++reached;
        auto visit = [&](int t) {
          if (t >= 0 && nodes[t].alive && !seen[t] && nodes[t].bag.contains(v)) {
            seen[t] = true;
            stack.push_back(t);
          }
        };
        visit(nodes[s].parent);
        for (int c : nodes[s].children) visit(c);
      }
      if (reached != count) ok = false;
    });
    return ok;
  }

  // Physically drop dead nodes; remaining node ids are compacted.
  void compact() {
    std::vector<int> remap(nodes.size(), -1);
    std::vector<JoinTreeNode> kept;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].alive) {
        remap[i] = static_cast<int>(kept.size());
        kept.push_back(nodes[i]);
      }
    for (auto& nd : kept) {
      nd.parent = (nd.parent >= 0) ? remap[nd.parent] : -1;
      for (auto& c : nd.children) c = remap[c];
      nd.children.erase(std::remove(nd.children.begin(), nd.children.end(), -1), nd.children.end());
    }
    nodes = std::move(kept);
    root = (root >= 0) ? remap[root] : -1;
  }
};

// ---------------------------------------------------------------------------
// GYO reduction (acyclicity test + ear-decomposition join tree witness)
// ---------------------------------------------------------------------------

struct GyoResult {
  bool acyclic = false;
  JoinTree tree;  // valid only when acyclic
};

namespace detail {

inline int count_edges_with(const std::vector<VarSet>& cur, const std::vector<bool>& alive, VarId v) {
  int n = 0;
  for (std::size_t i = 0; i < cur.size(); ++i)
    if (alive[i] && cur[i].contains(v)) ++n;
  return n;
}

}  // namespace detail

// Ear decomposition: repeatedly drop isolated variables and edges contained in
// other edges. Succeeds iff the hypergraph collapses to a single edge. When
// edge e is absorbed by f, node(e) hangs below node(f); edges with identical
// original variable sets merge into one node.
inline GyoResult gyo_tree(const Query& q) {
  const int m = static_cast<int>(q.atoms.size());
  std::vector<VarSet> cur(m);
  for (int i = 0; i < m; ++i) cur[i] = q.atoms[i].vars;
  std::vector<bool> alive(m, true);
  std::vector<int> node_of(m);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<int> parent_atom(m, -1);  // absorbing atom, resolved to a node at the end

  JoinTree tree;
  tree.nodes.resize(m);
  for (int i = 0; i < m; ++i) {
    tree.nodes[i].bag = q.atoms[i].vars;
    tree.nodes[i].atoms = {i};
  }

  int alive_n = m;
  bool changed = true;
  while (changed && alive_n > 1) {
    changed = false;
    // Lowest-id variable present in exactly one alive edge.
    VarSet all;
    for (int i = 0; i < m; ++i)
      if (alive[i]) all |= cur[i];
    VarId iso = -1;
    all.for_each([&](VarId v) {
      if (iso < 0 && detail::count_edges_with(cur, alive, v) == 1) iso = v;
    });
    if (iso >= 0) {
      for (int i = 0; i < m; ++i)
        if (alive[i] && cur[i].contains(iso)) cur[i].erase(iso);
      changed = true;
      continue;
    }
    // Lexicographically smallest (i, j) with cur[i] ⊆ cur[j].
    for (int i = 0; i < m && !changed; ++i) {
      if (!alive[i]) continue;
      for (int j = 0; j < m && !changed; ++j) {
        if (j == i || !alive[j]) continue;
        if (cur[i].subset_of(cur[j])) {
          if (q.atoms[i].vars == q.atoms[j].vars) {
            // Duplicate schema: merge node(i) into node(j).
            int ni = node_of[i], nj = node_of[j];
            for (int a : tree.nodes[ni].atoms) {
              tree.nodes[nj].atoms.push_back(a);
              node_of[a] = nj;
            }
            tree.nodes[ni].atoms.clear();
            tree.nodes[ni].alive = false;
          } else {
            parent_atom[i] = j;
          }
          alive[i] = false;
          --alive_n;
          changed = true;
        }
      }
    }
  }
  if (alive_n != 1) return {};

  int root_atom = -1;
  for (int i = 0; i < m; ++i)
    if (alive[i]) root_atom = i;
  GyoResult res;
  res.acyclic = true;
  res.tree = std::move(tree);
  res.tree.root = node_of[root_atom];
  for (int i = 0; i < m; ++i) {
    if (parent_atom[i] < 0) continue;
    int ni = node_of[i], np = node_of[parent_atom[i]];
    if (ni != np) res.tree.nodes[ni].parent = np;
  }
  for (std::size_t i = 0; i < res.tree.nodes.size(); ++i) {
    auto& nd = res.tree.nodes[i];
    if (!nd.alive) continue;
    if (nd.parent >= 0) res.tree.nodes[nd.parent].children.push_back(static_cast<int>(i));
  }
  res.tree.compact();
  for (auto& nd : res.tree.nodes) std::sort(nd.children.begin(), nd.children.end());
  res.tree.compute_subtree_sizes();
  return res;
}

inline bool is_acyclic(const Query& q) { return gyo_tree(q).acyclic; }

// ---------------------------------------------------------------------------
// Query reduction (free-variable-aware GYO) with a replay log
// ---------------------------------------------------------------------------

struct ReductionStep {
  enum Kind { kRemoveVar, kAbsorbEdge } kind;
  VarId var = -1;   // kRemoveVar: variable dropped
  int edge = -1;    // kRemoveVar: the single atom holding it; kAbsorbEdge: absorbed atom
  int into = -1;    // kAbsorbEdge: absorbing atom
};

struct ReduceResult {
  Query reduced;                    // surviving atoms with pruned variable sets
  std::vector<ReductionStep> log;   // replayed by prepare_reduced_instance
  std::vector<int> atom_map;        // reduced atom index -> original atom index
};

// Chooser hooks exist so tests can randomize removal order and check
// confluence; the default is lowest variable id, then smallest (i, j) pair.
struct ReduceOrder {
  // Returns chosen index into `candidates`, which is never empty.
  std::function<std::size_t(std::size_t n)> pick = [](std::size_t) { return 0; };
};

inline ReduceResult reduce_query(const Query& q, const ReduceOrder& order = {}) {
  if (!is_acyclic(q)) throw AnalysisError("reduce_query requires an acyclic query");
  const int m = static_cast<int>(q.atoms.size());
  std::vector<VarSet> cur(m);
  for (int i = 0; i < m; ++i) cur[i] = q.atoms[i].vars;
  std::vector<bool> alive(m, true);

  ReduceResult res;
  bool changed = true;
  while (changed) {
    changed = false;
    // Isolated non-free variables.
    std::vector<std::pair<VarId, int>> iso;
    VarSet all;
    for (int i = 0; i < m; ++i)
      if (alive[i]) all |= cur[i];
    (all - q.free).for_each([&](VarId v) {
      int holder = -1, cnt = 0;
      for (int i = 0; i < m; ++i)
        if (alive[i] && cur[i].contains(v)) {
          ++cnt;
          holder = i;
        }
      if (cnt == 1) iso.push_back({v, holder});
    });
    if (!iso.empty()) {
      auto [v, e] = iso[order.pick(iso.size()) % iso.size()];
      cur[e].erase(v);
      res.log.push_back({ReductionStep::kRemoveVar, v, e, -1});
      changed = true;
      continue;
    }
    // Contained edge pairs (i absorbed into j).
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      for (int j = 0; j < m; ++j) {
        if (j == i || !alive[j]) continue;
        if (cur[i].subset_of(cur[j])) pairs.push_back({i, j});
      }
    }
    if (!pairs.empty()) {
      auto [e, f] = pairs[order.pick(pairs.size()) % pairs.size()];
      alive[e] = false;
      res.log.push_back({ReductionStep::kAbsorbEdge, -1, e, f});
      changed = true;
    }
  }

  res.reduced.var_names = q.var_names;
  res.reduced.free = q.free;
  for (int i = 0; i < m; ++i)
    if (alive[i]) {
      res.reduced.atoms.push_back({q.atoms[i].name, cur[i]});
      res.atom_map.push_back(i);
    }
  return res;
}

// ---------------------------------------------------------------------------
// Decomposition into existentially connected components
// ---------------------------------------------------------------------------

struct Decomposition {
  std::vector<Query> components;            // restricted free sets, parent id space
  std::vector<std::vector<int>> atom_map;   // component atom -> index in the reduced query
};

// Components of the graph whose vertices are atoms and whose edges link atoms
// sharing a non-free variable. Expects a reduced query.
inline Decomposition decompose_reduced(const Query& q_red) {
  const int m = static_cast<int>(q_red.atoms.size());
  std::vector<int> comp(m, -1);
  int n_comp = 0;
  for (int i = 0; i < m; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack{i};
    comp[i] = n_comp;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < m; ++b) {
        if (comp[b] >= 0) continue;
        if (!((q_red.atoms[a].vars & q_red.atoms[b].vars) - q_red.free).empty()) {
          comp[b] = n_comp;
          stack.push_back(b);
        }
      }
    }
    ++n_comp;
  }
  Decomposition d;
  d.components.resize(n_comp);
  d.atom_map.resize(n_comp);
  for (int c = 0; c < n_comp; ++c) {
    d.components[c].var_names = q_red.var_names;
  }
  for (int i = 0; i < m; ++i) {
    d.components[comp[i]].atoms.push_back(q_red.atoms[i]);
    d.atom_map[comp[i]].push_back(i);
  }
  for (int c = 0; c < n_comp; ++c) {
    VarSet vars = d.components[c].atom_vars();
    d.components[c].free = q_red.free & vars;
  }
  return d;
}

inline Decomposition decompose(const Query& q) { return decompose_reduced(reduce_query(q).reduced); }

// wout(Q): maximum atom count across components of the reduced decomposition.
inline int projection_width(const Query& q) {
  Decomposition d = decompose(q);
  int w = 1;
  for (const auto& c : d.components) w = std::max(w, static_cast<int>(c.atoms.size()));
  return w;
}

// freew(Q): per component, the minimum number of atoms covering all isolated
// free variables (1 when a component has none); maximum over components.
inline int free_width(const Query& q) {
  ReduceResult rr = reduce_query(q);
  Decomposition d = decompose_reduced(rr.reduced);
  int best_all = 1;
  for (const auto& comp : d.components) {
    VarSet isolated;
    (comp.atom_vars() & comp.free).for_each([&](VarId v) {
      int cnt = 0;
      for (const auto& a : rr.reduced.atoms)
        if (a.vars.contains(v)) ++cnt;
      if (cnt == 1) isolated.insert(v);
    });
    if (isolated.empty()) continue;
    const int k = static_cast<int>(comp.atoms.size());
    if (k > 24) throw ConfigError("free-width cover search is limited to 24 atoms per component");
    int best = k;
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      VarSet covered;
      for (int i = 0; i < k; ++i)
        if ((mask >> i) & 1u) covered |= comp.atoms[i].vars;
      if (isolated.subset_of(covered)) best = std::min(best, __builtin_popcount(mask));
    }
    best_all = std::max(best_all, best);
  }
  return best_all;
}

// Two equivalent characterizations, cross-checked: the hypergraph with F added
// as an edge stays acyclic, and the reduced query has only free variables.
inline bool is_free_connex(const Query& q) {
  if (!is_acyclic(q)) throw AnalysisError("is_free_connex requires an acyclic query");
  Query ext = q;
  ext.atoms.push_back({"__free__", q.free});
  bool via_gyo = is_acyclic(ext);
  bool via_reduce = reduce_query(q).reduced.atom_vars().subset_of(q.free);
  if (via_gyo != via_reduce)
    throw ContractError("free-connex characterizations disagree");
  return via_gyo;
}

}  // namespace yaq
