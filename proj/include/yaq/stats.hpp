#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "yaq/common.hpp"

namespace yaq {

// Deterministic counters. tuple_ops is the machine-independent cost proxy:
// one candidate tuple produced by a join, or one probe of a semijoin filter.
// Counters are monotone within one evaluation; the optional budget turns an
// evaluation into a bounded attempt (consumed by the doubling drivers).
struct EvalStats {
  std::uint64_t tuple_ops = 0;
  std::size_t max_intermediate = 0;
  std::uint64_t total_intermediate = 0;
  int doubling_rounds = 0;
  std::map<int, std::size_t> per_node_sizes;
  std::optional<std::uint64_t> budget;

  std::uint64_t delta_final = 0;
  bool fallback_used = false;
  // Soft counter for the heavy-call intermediate bound when checked against
  // an online output guess (a too-small guess may trip it legitimately).
  std::uint64_t heavy_bound_soft_violations = 0;

  void charge(std::uint64_t n = 1) {
    tuple_ops += n;
    if (budget && tuple_ops > *budget) throw BudgetExhausted{};
  }

  void record_intermediate(std::size_t size) {
    if (size > max_intermediate) max_intermediate = size;
    total_intermediate += size;
  }

  void record_node(int node, std::size_t size) {
    record_intermediate(size);
    per_node_sizes[node] = size;
  }
};

}  // namespace yaq
