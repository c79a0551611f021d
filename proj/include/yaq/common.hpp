#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace yaq {

// Dictionary-encoded constant. Ingestion interns strings; generators emit ints directly.
using Value = std::int32_t;
using VarId = int;

// ---------------------------------------------------------------------------
// Error taxonomy. Exit-code mapping lives in the CLI.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed schemas: unknown variable, width mismatch, non-canonical order.
struct SchemaError : Error {
  using Error::Error;
};

// Structural preconditions: cyclic input where acyclic is required, etc.
struct AnalysisError : Error {
  using Error::Error;
};

// API contract violations: tree/query mismatch, invalid partition preconditions.
struct ContractError : Error {
  using Error::Error;
};

// Bad run configuration: threshold < 1, delta out of range.
struct ConfigError : Error {
  using Error::Error;
};

// Counting semiring treats native-word overflow as a hard error.
struct OverflowError : Error {
  using Error::Error;
};

// Input-file problems; message names file and line.
struct DataError : Error {
  using Error::Error;
};

struct OracleTooLargeError : Error {
  using Error::Error;
};

// Control-flow signal consumed by the doubling drivers; never user-visible.
struct BudgetExhausted {};

// ---------------------------------------------------------------------------
// VarSet: bitset over variable ids. Queries are capped at 64 variables.
// ---------------------------------------------------------------------------

class VarSet {
 public:
  constexpr VarSet() = default;
  static constexpr VarSet of() { return VarSet(); }

  template <typename... Ids>
  static constexpr VarSet of(VarId v, Ids... rest) {
    VarSet s = of(rest...);
    s.insert(v);
    return s;
  }

  static constexpr VarSet full(int n) {
    VarSet s;
    s.bits_ = (n >= 64) ? ~0ull : ((1ull << n) - 1);
    return s;
  }

  constexpr void insert(VarId v) { bits_ |= (1ull << v); }
  constexpr void erase(VarId v) { bits_ &= ~(1ull << v); }
  constexpr bool contains(VarId v) const { return (bits_ >> v) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return __builtin_popcountll(bits_); }

  constexpr VarSet operator|(VarSet o) const { return from_bits(bits_ | o.bits_); }
  constexpr VarSet operator&(VarSet o) const { return from_bits(bits_ & o.bits_); }
  constexpr VarSet operator-(VarSet o) const { return from_bits(bits_ & ~o.bits_); }
  constexpr VarSet& operator|=(VarSet o) { bits_ |= o.bits_; return *this; }
  constexpr VarSet& operator&=(VarSet o) { bits_ &= o.bits_; return *this; }
  constexpr bool operator==(const VarSet&) const = default;

  constexpr bool subset_of(VarSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool intersects(VarSet o) const { return (bits_ & o.bits_) != 0; }

  // Lowest variable id in the set; -1 when empty.
  constexpr VarId lowest() const { return bits_ ? __builtin_ctzll(bits_) : -1; }

  template <typename F>
  void for_each(F&& f) const {
    std::uint64_t b = bits_;
    while (b) {
      f(static_cast<VarId>(__builtin_ctzll(b)));
      b &= b - 1;
    }
  }

  constexpr std::uint64_t bits() const { return bits_; }

 private:
  static constexpr VarSet from_bits(std::uint64_t b) {
    VarSet s;
    s.bits_ = b;
    return s;
  }
  std::uint64_t bits_ = 0;
};

inline std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_values(const Value* v, std::size_t n) {
  std::uint64_t h = 0x2545f4914f6cdd1dull;
  for (std::size_t i = 0; i < n; ++i) h = hash_mix(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v[i])));
  return h;
}

}  // namespace yaq
