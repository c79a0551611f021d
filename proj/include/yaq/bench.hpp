#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "yaq/generators.hpp"
#include "yaq/generalized.hpp"
#include "yaq/oracle.hpp"
#include "yaq/path.hpp"

namespace yaq {

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double max_abs_residual = 0;
  int points = 0;
};

// Least-squares line through (log2 x, log2 y).
inline SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& xy) {
  SlopeFit f;
  f.points = static_cast<int>(xy.size());
  if (xy.size() < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> logs;
  for (auto [x, y] : xy) logs.push_back({std::log2(std::max(x, 1.0)), std::log2(std::max(y, 1.0))});
  for (auto [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(logs.size());
  const double denom = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  for (auto [x, y] : logs) f.max_abs_residual = std::max(f.max_abs_residual, std::abs(y - (f.intercept + f.slope * x)));
  return f;
}

struct BenchPoint {
  std::size_t exact_out = 0;
  std::size_t exact_d = 0;
  std::size_t max_intermediate = 0;
  std::uint64_t tuple_ops = 0;
  std::size_t output_size = 0;
  int doubling_rounds = 0;
  std::uint64_t delta_final = 0;
};

// Runs one algorithm over one Boolean family instance.
inline BenchPoint bench_run(const std::string& algo, const Instance<BooleanSemiring>& inst, double alpha) {
  using S = BooleanSemiring;
  EvalStats stats;
  Relation<S> out{schema_of(inst.q.free)};
  if (algo == "yannakakis") {
    out = yannakakis_eval(inst.q, inst.db, stats);
  } else if (algo == "genyan") {
    out = eval_with_doubling<S>(inst.q, inst.db, alpha, stats);
  } else if (algo == "path") {
    out = path_eval_doubling<S>(inst.q, inst.db, alpha, stats);
  } else if (algo == "oracle") {
    out = brute_force_eval(inst.q, inst.db);
  } else {
    throw ConfigError("unknown algorithm '" + algo + "'");
  }
  BenchPoint p;
  p.exact_out = inst.exact_out;
  p.exact_d = inst.exact_d;
  p.max_intermediate = stats.max_intermediate;
  p.tuple_ops = stats.tuple_ops;
  p.output_size = out.size();
  p.doubling_rounds = stats.doubling_rounds;
  p.delta_final = stats.delta_final;
  return p;
}

inline SlopeFit fit_max_intermediate(const std::vector<BenchPoint>& pts) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : pts)
    xy.push_back({static_cast<double>(p.exact_out), static_cast<double>(std::max<std::size_t>(p.max_intermediate, 1))});
  return fit_loglog(xy);
}

}  // namespace yaq
