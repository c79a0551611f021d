#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "yaq/core.hpp"
#include "yaq/dsl.hpp"

namespace yaq {

// Global string interning for one ingested database. Ids are assigned by
// byte-wise sorted order over all distinct strings, so encodings do not
// depend on file or row order.
class Dictionary {
 public:
  Value encode(const std::string& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw DataError("value '" + s + "' not in dictionary");
    return it->second;
  }

  const std::string& decode(Value v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= strings_.size())
      throw DataError("dictionary id out of range");
    return strings_[v];
  }

  std::size_t size() const { return strings_.size(); }

  static Dictionary build(std::vector<std::string> distinct) {
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    Dictionary d;
    d.strings_ = std::move(distinct);
    for (std::size_t i = 0; i < d.strings_.size(); ++i) d.index_[d.strings_[i]] = static_cast<Value>(i);
    return d;
  }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, Value> index_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

template <Semiring S>
typename S::Value parse_weight(const std::string& s, const std::string& where) {
  if constexpr (std::is_same_v<S, CountingSemiring>) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw DataError(where + ": malformed count annotation '" + s + "'");
    return v;
  } else if constexpr (std::is_same_v<S, TropicalSemiring>) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
      throw DataError(where + ": malformed tropical annotation '" + s + "'");
    return v;
  } else {
    (void)s;
    (void)where;
    return S::one();
  }
}

}  // namespace detail

template <Semiring S>
struct IngestResult {
  Database<S> db;
  Dictionary dict;
};

// One `<atom>.csv` per atom; the header row names the atom's variables in any
// order, optionally followed by a `__w` annotation column (ignored with a
// warning for the Boolean semiring). Duplicate rows are ⊕-folded.
template <Semiring S>
IngestResult<S> ingest_csv(const Query& q, const std::string& dir,
                           std::ostream& warnings = std::cerr) {
  struct RawFile {
    std::vector<int> col_to_var;  // csv column -> variable id
    bool has_weight = false;
    std::vector<std::vector<std::string>> rows;  // variable-order values
    std::vector<std::string> weights;
  };
  std::map<std::string, RawFile> raw;
  std::vector<std::string> all_values;

  for (const auto& atom : q.atoms) {
    std::string path = (std::filesystem::path(dir) / (atom.name + ".csv")).string();
    std::ifstream in(path);
    if (!in) throw DataError("missing data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file (header row required)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = detail::split_csv_line(line);

    RawFile rf;
    Schema atom_schema = schema_of(atom.vars);
    std::vector<bool> seen(atom_schema.size(), false);
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == "__w") {
        if (c + 1 != header.size()) throw DataError(path + ": __w must be the last column");
        rf.has_weight = true;
        break;
      }
      int var = -1;
      for (std::size_t k = 0; k < atom_schema.size(); ++k)
        if (q.var_names[atom_schema[k]] == header[c]) var = static_cast<int>(k);
      if (var < 0)
        throw DataError(path + ":1: header column '" + header[c] + "' is not a variable of atom '" +
                        atom.name + "'");
      if (seen[var]) throw DataError(path + ":1: duplicate header column '" + header[c] + "'");
      seen[var] = true;
      rf.col_to_var.push_back(var);
    }
    if (rf.col_to_var.size() != atom_schema.size())
      throw DataError(path + ":1: header does not cover all variables of atom '" + atom.name + "'");
    if (rf.has_weight && std::is_same_v<S, BooleanSemiring>)
      warnings << "warning: " << path << ": __w column ignored under the boolean semiring\n";

    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (detail::trim(line).empty()) continue;
      std::vector<std::string> cells = detail::split_csv_line(line);
      std::size_t expect = rf.col_to_var.size() + (rf.has_weight ? 1 : 0);
      if (cells.size() != expect)
        throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(expect) +
                        " columns, found " + std::to_string(cells.size()));
      std::vector<std::string> row(rf.col_to_var.size());
      for (std::size_t c = 0; c < rf.col_to_var.size(); ++c) {
        row[rf.col_to_var[c]] = cells[c];
        all_values.push_back(cells[c]);
      }
      rf.rows.push_back(std::move(row));
      rf.weights.push_back(rf.has_weight ? cells.back() : "");
    }
    raw[atom.name] = std::move(rf);
  }

  IngestResult<S> out;
  out.dict = Dictionary::build(std::move(all_values));
  for (const auto& atom : q.atoms) {
    const RawFile& rf = raw[atom.name];
    RelationBuilder<S> b(atom.vars);
    b.reserve(rf.rows.size());
    std::vector<Value> buf(atom.vars.size());
    for (std::size_t r = 0; r < rf.rows.size(); ++r) {
      for (std::size_t c = 0; c < buf.size(); ++c) buf[c] = out.dict.encode(rf.rows[r][c]);
      typename S::Value w = S::one();
      if (rf.has_weight && !std::is_same_v<S, BooleanSemiring>)
        w = detail::parse_weight<S>(rf.weights[r], atom.name + ".csv:" + std::to_string(r + 2));
      b.add(buf.data(), w);
    }
    out.db.relations[atom.name] = make_rel(b.take());
  }
  return out;
}

// Deterministic emission: canonical variable order, rows sorted by their
// decoded string tuples, `__w` column for non-Boolean semirings.
template <Semiring S>
void emit_relation_csv(std::ostream& os, const Relation<S>& rel, const Query& q,
                       const std::function<std::string(Value)>& decode) {
  Schema sch = rel.schema();
  for (std::size_t c = 0; c < sch.size(); ++c) os << (c ? "," : "") << q.var_names[sch[c]];
  constexpr bool weighted = !std::is_same_v<S, BooleanSemiring>;
  if (weighted) os << (sch.empty() ? "" : ",") << "__w";
  os << "\n";

  std::vector<std::size_t> order(rel.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::vector<std::string>> decoded(rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    decoded[i].reserve(rel.width());
    for (std::size_t c = 0; c < rel.width(); ++c) decoded[i].push_back(decode(rel.row(i)[c]));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return decoded[a] < decoded[b]; });
  for (std::size_t i : order) {
    for (std::size_t c = 0; c < rel.width(); ++c) os << (c ? "," : "") << decoded[i][c];
    if (weighted) {
      os << (rel.width() ? "," : "");
      if constexpr (std::is_same_v<S, TropicalSemiring>)
        os << static_cast<std::int64_t>(rel.annot(i));
      else if constexpr (std::is_same_v<S, CountingSemiring>)
        os << static_cast<std::uint64_t>(rel.annot(i));
    }
    os << "\n";
  }
}

inline std::string int_decode(Value v) { return std::to_string(v); }

// Writes a generated instance (integer-valued) as a query file plus CSVs.
template <Semiring S>
void emit_instance(const Query& q, const Database<S>& db, SemiringKind kind, const std::string& name,
                   const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream qf(std::filesystem::path(dir) / (name + ".query"));
    qf << "query " << name << "(";
    Schema fs = schema_of(q.free);
    for (std::size_t i = 0; i < fs.size(); ++i) qf << (i ? ", " : "") << q.var_names[fs[i]];
    qf << ")\n";
    for (const auto& a : q.atoms) {
      qf << "atom " << a.name << "(";
      Schema as = schema_of(a.vars);
      for (std::size_t i = 0; i < as.size(); ++i) qf << (i ? ", " : "") << q.var_names[as[i]];
      qf << ")\n";
    }
    qf << "semiring " << semiring_kind_name(kind) << "\n";
  }
  for (const auto& a : q.atoms) {
    std::ofstream f(std::filesystem::path(dir) / (a.name + ".csv"));
    emit_relation_csv<S>(f, *db.at(a.name), q, int_decode);
  }
}

}  // namespace yaq
