#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace scottlab {

// Interned name. Equality is by identity; ordering is by the name text so
// that every container keyed on symbols iterates in a reproducible order.
class Symbol {
 public:
  Symbol();
  explicit Symbol(std::string_view name);

  const std::string& name() const { return *name_; }
  std::uint32_t id() const { return id_; }

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend bool operator<(Symbol a, Symbol b) { return a.id_ != b.id_ && *a.name_ < *b.name_; }

 private:
  const std::string* name_;  // owned by the intern table, never moves
  std::uint32_t id_;
};

// Interning order; cheaper than operator< where iteration order is irrelevant.
struct SymbolIdLess {
  bool operator()(Symbol a, Symbol b) const { return a.id() < b.id(); }
};

// The equality predicate "=".
Symbol equality_symbol();

}  // namespace scottlab

template <>
struct std::hash<scottlab::Symbol> {
  std::size_t operator()(scottlab::Symbol s) const noexcept { return s.id(); }
};
