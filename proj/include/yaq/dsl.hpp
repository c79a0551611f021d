#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "yaq/core.hpp"

namespace yaq {

enum class SemiringKind { kBoolean, kCounting, kTropical };

inline std::string semiring_kind_name(SemiringKind k) {
  switch (k) {
    case SemiringKind::kBoolean: return "boolean";
    case SemiringKind::kCounting: return "count";
    case SemiringKind::kTropical: return "tropical";
  }
  return "?";
}

struct QuerySpec {
  std::string name;
  Query query;
  SemiringKind semiring = SemiringKind::kBoolean;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// "NAME(a, b, c)" -> name + arg list (possibly empty).
inline bool parse_call(const std::string& text, std::string& name, std::vector<std::string>& args) {
  std::size_t lp = text.find('(');
  std::size_t rp = text.rfind(')');
  if (lp == std::string::npos || rp == std::string::npos || rp < lp) return false;
  name = trim(text.substr(0, lp));
  args.clear();
  std::string inner = text.substr(lp + 1, rp - lp - 1);
  std::stringstream ss(inner);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) args.push_back(part);
  }
  return !name.empty();
}

}  // namespace detail

// Text format: one `query NAME(free...)` line, one `atom NAME(vars...)` line
// per atom, optional `semiring boolean|count|tropical`. `#` starts a comment.
inline QuerySpec parse_query_spec(std::istream& in, const std::string& origin = "<query>") {
  QuerySpec spec;
  bool saw_query = false;
  std::vector<std::pair<std::string, std::vector<std::string>>> atoms;
  std::vector<std::string> free_names;

  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw DataError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t sp = line.find_first_of(" \t");
    std::string keyword = (sp == std::string::npos) ? line : line.substr(0, sp);
    std::string rest = (sp == std::string::npos) ? "" : detail::trim(line.substr(sp));
    if (keyword == "query") {
      if (saw_query) fail("duplicate query line");
      std::string name;
      if (!detail::parse_call(rest, name, free_names)) fail("malformed query line");
      spec.name = name;
      saw_query = true;
    } else if (keyword == "atom") {
      std::string name;
      std::vector<std::string> vars;
      if (!detail::parse_call(rest, name, vars)) fail("malformed atom line");
      if (vars.empty()) fail("atom '" + name + "' has no variables");
      atoms.push_back({name, vars});
    } else if (keyword == "semiring") {
      if (rest == "boolean")
        spec.semiring = SemiringKind::kBoolean;
      else if (rest == "count")
        spec.semiring = SemiringKind::kCounting;
      else if (rest == "tropical")
        spec.semiring = SemiringKind::kTropical;
      else
        fail("unknown semiring '" + rest + "' (expected boolean|count|tropical)");
    } else {
      fail("unknown directive '" + keyword + "'");
    }
  }
  if (!saw_query) throw DataError(origin + ": missing query line");
  if (atoms.empty()) throw DataError(origin + ": query has no atoms");

  auto var_id = [&](const std::string& v, bool create) -> int {
    for (std::size_t i = 0; i < spec.query.var_names.size(); ++i)
      if (spec.query.var_names[i] == v) return static_cast<int>(i);
    if (!create) return -1;
    if (spec.query.var_names.size() >= 64) throw DataError(origin + ": more than 64 variables");
    spec.query.var_names.push_back(v);
    return static_cast<int>(spec.query.var_names.size() - 1);
  };

  for (const auto& [name, vars] : atoms) {
    VarSet vs;
    for (const auto& v : vars) {
      int id = var_id(v, true);
      if (vs.contains(id)) throw DataError(origin + ": atom '" + name + "' repeats variable '" + v + "'");
      vs.insert(id);
    }
    spec.query.atoms.push_back({name, vs});
  }
  for (const auto& v : free_names) {
    int id = var_id(v, false);
    if (id < 0) throw DataError(origin + ": free variable '" + v + "' appears in no atom");
    spec.query.free.insert(id);
  }
  spec.query.validate();
  return spec;
}

inline QuerySpec load_query_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open query file '" + path + "'");
  return parse_query_spec(in, path);
}

}  // namespace yaq
