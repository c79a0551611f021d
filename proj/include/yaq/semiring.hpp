#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <string>

#include "yaq/common.hpp"

namespace yaq {

template <typename S>
concept Semiring = requires(typename S::Value a, typename S::Value b) {
  { S::zero() } -> std::same_as<typename S::Value>;
  { S::one() } -> std::same_as<typename S::Value>;
  { S::plus(a, b) } -> std::same_as<typename S::Value>;
  { S::times(a, b) } -> std::same_as<typename S::Value>;
  { S::is_zero(a) } -> std::convertible_to<bool>;
  { S::name() } -> std::convertible_to<std::string>;
};

// (∨, ∧, false, true). Stored annotations are always true; storage is 1 bit.
struct BooleanSemiring {
  using Value = bool;
  static constexpr Value zero() { return false; }
  static constexpr Value one() { return true; }
  static constexpr Value plus(Value a, Value b) { return a || b; }
  static constexpr Value times(Value a, Value b) { return a && b; }
  static constexpr bool is_zero(Value a) { return !a; }
  static std::string name() { return "boolean"; }
};

// (+, ·, 0, 1) over non-negative integers. Overflow of the native word is a
// hard error rather than wraparound so oracle comparisons stay exact.
struct CountingSemiring {
  using Value = std::uint64_t;
  static constexpr Value zero() { return 0; }
  static constexpr Value one() { return 1; }
  static Value plus(Value a, Value b) {
    Value r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("counting semiring: addition overflow");
    return r;
  }
  static Value times(Value a, Value b) {
    Value r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("counting semiring: multiplication overflow");
    return r;
  }
  static constexpr bool is_zero(Value a) { return a == 0; }
  static std::string name() { return "count"; }
};

// (min, +, ∞, 0). ∞ is a distinguished sentinel; an ∞-annotated tuple equals
// the semiring zero and is therefore never stored.
struct TropicalSemiring {
  using Value = std::int64_t;
  static constexpr Value kInfinity = std::numeric_limits<std::int64_t>::max();
  static constexpr Value zero() { return kInfinity; }
  static constexpr Value one() { return 0; }
  static constexpr Value plus(Value a, Value b) { return a < b ? a : b; }
  static Value times(Value a, Value b) {
    if (a == kInfinity || b == kInfinity) return kInfinity;
    Value r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("tropical semiring: weight overflow");
    return r;
  }
  static constexpr bool is_zero(Value a) { return a == kInfinity; }
  static std::string name() { return "tropical"; }
};

}  // namespace yaq
