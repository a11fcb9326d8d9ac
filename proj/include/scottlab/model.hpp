#pragma once

// Finite structures with universe {0, ..., n-1}.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scottlab/evaluate.hpp"
#include "scottlab/formula.hpp"

namespace scottlab {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;
using Valuation = Env<Element>;

struct Signature {
  std::map<Symbol, std::size_t> relations;  // symbol -> arity
  std::map<Symbol, std::size_t> functions;
  std::set<Symbol> constants;

  friend bool operator==(const Signature&, const Signature&) = default;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class FinStructure {
 public:
  FinStructure(Signature sig, std::size_t size);

  const Signature& signature() const { return sig_; }
  std::size_t size() const { return n_; }

  bool holds(Symbol rel, std::span<const Element> args) const;
  Element apply(Symbol fn, std::span<const Element> args) const;
  bool holds(Symbol rel, const Tuple& args) const { return holds(rel, std::span<const Element>(args)); }
  Element apply(Symbol fn, const Tuple& args) const { return apply(fn, std::span<const Element>(args)); }
  Element constant(Symbol c) const;

  void set_relation(Symbol rel, const Tuple& args, bool value);
  void set_function(Symbol fn, const Tuple& args, Element value);
  void set_constant(Symbol c, Element value);

  // Flat tables, row-major over argument tuples in lexicographic order.
  const std::vector<std::uint8_t>& relation_table(Symbol rel) const;
  const std::vector<Element>& function_table(Symbol fn) const;

  // The structure transported along perm: element a becomes perm[a].
  FinStructure relabel(const std::vector<Element>& perm) const;

  friend bool operator==(const FinStructure&, const FinStructure&) = default;

 private:
  std::size_t index(std::size_t arity, std::span<const Element> args) const;
  std::size_t arity_of(const std::map<Symbol, std::size_t>& table, Symbol s, const char* what) const;

  Signature sig_;
  std::size_t n_;
  std::map<Symbol, std::vector<std::uint8_t>> rel_;
  std::map<Symbol, std::vector<Element>> fn_;
  std::map<Symbol, Element> const_;
};

// Adapter for Evaluator: quantifiers range over the whole universe.
class FinModel {
 public:
  using Element = scottlab::Element;
  explicit FinModel(const FinStructure& a);

  const std::vector<Element>& domain() const { return domain_; }
  bool domain_is_complete() const { return true; }
  Element constant(Symbol c) const;
  Element apply(Symbol fn, std::span<const Element> args) const;
  bool holds(Symbol rel, std::span<const Element> args) const;

 private:
  const FinStructure& a_;
  std::vector<Element> domain_;
};

// Throws EvalError if v misses a free variable or Henkin constant of f, or an
// atom does not match the signature.
Verdict3 evaluate(const FinStructure& a, const Formula& f, const Valuation& v, std::size_t budget);
// All symbols used by f are in the signature with the right arity.
void check_signature(const Signature& sig, const Formula& f);

// Lexicographically least isomorphism A -> B, as the image vector.
std::optional<std::vector<Element>> isomorphic(const FinStructure& a, const FinStructure& b);
// All automorphisms in lexicographic order.
std::vector<std::vector<Element>> automorphisms(const FinStructure& a);

// Blocks of k-tuples under the automorphism group. Tuples inside a block and
// blocks themselves are in lexicographic order of their least member.
std::vector<std::vector<Tuple>> automorphism_orbits(const FinStructure& a, std::size_t k);

// All tuples of length k over {0..n-1} in lexicographic order.
std::vector<Tuple> all_tuples(std::size_t n, std::size_t k);

struct EnumerationRefused : std::runtime_error {
  EnumerationRefused(std::uint64_t count, std::uint64_t limit);
  std::uint64_t count;
};

inline constexpr std::uint64_t kDefaultEnumerationLimit = 1u << 20;

// Number of structures of size n (saturating at UINT64_MAX).
std::uint64_t structure_count(const Signature& sig, std::size_t n);
// Calls f on every structure of size n in a fixed order; f may return false
// to stop early. Refuses if the count exceeds limit.
void for_each_structure(const Signature& sig, std::size_t n, const std::function<bool(const FinStructure&)>& f,
                        std::uint64_t limit = kDefaultEnumerationLimit);
std::vector<FinStructure> enumerate_structures(const Signature& sig, std::size_t n,
                                               std::uint64_t limit = kDefaultEnumerationLimit);

// Text format:
//   (structure
//     (size 3)
//     (relation R 2 (0 1) (1 2))   ; arity, then the true tuples
//     (function f 1 1 2 0)         ; arity, then values in argument order
//     (constant c 0))
std::string print_structure(const FinStructure& a);
FinStructure parse_structure(std::string_view text);

}  // namespace scottlab
