#pragma once

// Finitely generated groups with decidable word problem, and bounded model
// checking of group sentences over balls.
//
// Four oracle kinds, each with an exact canonical form:
//   finite-table  element index into a multiplication table
//   abelian       Z^r + Z/d1 + ... + Z/dt in invariant factors d1 | d2 | ...
//   free          freely reduced word over the generators
//   dihedral      a^k b^e, the infinite dihedral group <a, b | b^2, (ab)^2>

#include <boost/container/small_vector.hpp>
#include <boost/container_hash/hash.hpp>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scottlab/evaluate.hpp"
#include "scottlab/formula.hpp"
#include "scottlab/words.hpp"

namespace scottlab {

struct GroupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class GroupKind : std::uint8_t { FiniteTable, Abelian, Free, Dihedral };

std::string to_string(GroupKind k);

// Inline storage: elements are compared and copied constantly during evaluation.
using GroupElement = boost::container::small_vector<std::int64_t, 6>;

struct SmithForm {
  std::vector<std::int64_t> diagonal;         // d1 | d2 | ..., nonnegative
  std::vector<std::vector<std::int64_t>> v;   // unimodular column transform, M V = U^-1 D
};

// Smith normal form of an integer matrix (rows are relations over the columns).
SmithForm smith_normal_form(std::vector<std::vector<std::int64_t>> m);

class GroupOracle {
 public:
  // table[i][j] is the product i*j on {0..n-1}; the group axioms are checked.
  static GroupOracle finite_table(std::vector<std::vector<std::size_t>> table, std::vector<std::size_t> generators);
  static GroupOracle cyclic(std::size_t n);
  // Z^generators modulo the row span of relations.
  static GroupOracle abelian(std::size_t generators, const std::vector<std::vector<std::int64_t>>& relations);
  // Z^rank + Z/d for each d in torsion, standard generators.
  static GroupOracle abelian_invariants(std::size_t rank, const std::vector<std::int64_t>& torsion);
  static GroupOracle free_group(std::size_t rank);
  static GroupOracle infinite_dihedral();

  GroupKind kind() const { return kind_; }
  std::size_t rank() const { return generators_.size(); }
  bool is_finite() const { return order_.has_value(); }
  std::optional<std::size_t> order() const { return order_; }
  // abelian: free rank and the invariant factors other than 1.
  std::size_t free_rank() const { return free_rank_; }
  const std::vector<std::int64_t>& torsion() const { return torsion_; }

  GroupElement identity() const;
  const std::vector<GroupElement>& generators() const { return generators_; }
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;
  GroupElement power(const GroupElement& a, std::int64_t n) const;

  // w over the generators, or over the given tuple (letter j is tuple[j-1]).
  GroupElement eval(const Word& w) const;
  GroupElement eval(const Word& w, const std::vector<GroupElement>& tuple) const;

  // Elements of word length <= radius in breadth-first order; ball(r) is a
  // prefix of ball(r+1).
  std::vector<GroupElement> ball(std::size_t radius) const;
  // Every element, for finite groups.
  std::vector<GroupElement> elements() const;
  // Word length of each element of the ball, parallel to ball(radius).
  std::vector<std::size_t> ball_lengths(std::size_t radius) const;

  // Associativity, identity and inverse on ball elements; the first failure.
  std::optional<std::string> spot_check(std::size_t radius, std::size_t samples = 2000) const;

  // Generators reordered: new generator i is old generator perm[i].
  GroupOracle permuted(const std::vector<std::size_t>& perm) const;

  std::string print_element(const GroupElement& g) const;
  std::string describe() const;

 private:
  friend std::string print_group(const GroupOracle& g);
  GroupOracle() = default;

  GroupKind kind_ = GroupKind::FiniteTable;
  std::vector<GroupElement> generators_;
  std::optional<std::size_t> order_;
  // finite-table
  std::vector<std::vector<std::size_t>> table_;
  std::vector<std::size_t> inverses_;
  std::size_t unit_ = 0;
  // abelian: one component per nontrivial invariant factor, modulus 0 = free
  std::vector<std::int64_t> moduli_;
  std::size_t free_rank_ = 0;
  std::vector<std::int64_t> torsion_;
  bool from_invariants_ = false;
  std::size_t input_generators_ = 0;
  std::vector<std::vector<std::int64_t>> relations_;
  // generator order relative to construction
  std::vector<std::size_t> perm_;
};

// Text format:
//   (group finite-table (table (0 1) (1 0)) (generators 1))
//   (group abelian (rank 2) (torsion 2 4))
//   (group abelian (generators 2) (relations (2 0) (0 3)))
//   (group fg-abelian (invariants 2 0))     Z/2 x Z, one factor per entry
//   (group free (rank 2))
//   (group dihedral)
// An optional trailing (permute p0 p1 ...) reorders the generators.
GroupOracle parse_group(std::string_view text);
std::string print_group(const GroupOracle& g);

// Evaluator adapter: quantifiers range over ball(radius), or over the whole
// group when it is finite. Uses mul/2, inv/1 and the constant e. Elements
// are interned as ids with products memoized; not safe to share across
// threads.
struct ElementHash {
  std::size_t operator()(const GroupElement& x) const { return boost::hash_range(x.begin(), x.end()); }
};

class BallModel {
 public:
  using Element = std::uint32_t;
  BallModel(const GroupOracle& g, std::size_t radius);

  const std::vector<Element>& domain() const { return domain_; }
  bool domain_is_complete() const { return g_.is_finite(); }
  Element constant(Symbol c) const;
  Element apply(Symbol fn, std::span<const Element> args) const;
  bool holds(Symbol rel, std::span<const Element> args) const;

  static constexpr Element kNone = ~Element{0};
  Element intern(const GroupElement& x) const;
  const GroupElement& element(Element id) const { return elements_[id]; }

 private:
  const GroupOracle& g_;
  Symbol mul_ = mul_symbol(), inv_ = inv_symbol(), e_ = identity_symbol();
  std::vector<Element> domain_;
  mutable std::vector<GroupElement> elements_;
  mutable std::unordered_map<GroupElement, Element, ElementHash> ids_;
  mutable std::vector<std::vector<Element>> products_;  // kNone where unknown
  mutable std::vector<std::optional<Element>> inverses_;
};

struct GroupVerdict {
  Verdict3 value = Verdict3::Unknown;
  std::size_t radius = 0;
  std::size_t budget = 0;

  bool is_true() const { return value == Verdict3::True; }
  bool is_false() const { return value == Verdict3::False; }
};

// "True", "False" or "UnknownAtBound(radius=R, budget=B)".
std::string to_string(const GroupVerdict& v);

using GroupAssignment = std::map<Symbol, GroupElement>;

GroupVerdict bounded_model_check(const GroupOracle& g, const Formula& f, std::size_t radius, std::size_t budget,
                                 const GroupAssignment& free = {});

// x1..xk.
std::vector<Symbol> group_vars(std::size_t k, std::string_view base = "x");

// The bounded <x> ~ <a>: a table And-schema over the reduced words w with
// 1 <= |w| <= length of w(x) = e when w(a) = e in G, else w(x) != e.
Formula relator_schema(const GroupOracle& g, const std::vector<GroupElement>& a, std::size_t length,
                       const std::vector<Symbol>& vars = {});

// (forall y) OR_w w(x) = y, the words schema, unbounded.
Formula generation_clause(const std::vector<Symbol>& vars, Symbol y = Symbol("y"));

// (exists x)[<x> ~ <g> & (forall y) OR_w w(x) = y] at the generators.
Formula sigma3_scott(const GroupOracle& g, std::size_t length);

struct HoReport {
  Formula sentence;
  GroupVerdict phi_at_generators;
  std::string hypothesis;  // the caller's generation assertion, as recorded
};

// (exists x)[phi(x) & <x> ~ <g>] & (forall x)[phi(x) -> (forall y) OR_w w(x) = y].
// phi has free variables vars (default x1..xk). Throws GroupError when phi
// is False at the generators.
HoReport ho_d_sigma2(const GroupOracle& g, const Formula& phi, std::size_t length, std::size_t radius,
                     std::size_t budget, const std::vector<Symbol>& vars = {});

struct OrbitExtraction {
  Formula formula;
  std::size_t disjunct = 0;
  std::vector<GroupElement> witness;  // b
  std::vector<Word> words;            // w(a) = b
};

// sigma2 is an Or list of (exists u) phi_i, a single such formula, or phi_i
// alone, with phi_i Pi_1 in vars. Finds the least i and b in ball(radius)
// with phi_i(a, b) True, then words w with w(a) = b, and returns
// phi_i(x, w(x)). Throws GroupError when no witness is found.
OrbitExtraction extract_pi1_orbit(const GroupOracle& g, const Formula& sigma2, const std::vector<GroupElement>& a,
                                  std::size_t radius, std::size_t budget, const std::vector<Symbol>& vars = {});

// Hand-written Pi_1 definitions of the orbit of the generating tuple, for
// Z, Z^2 and the infinite dihedral group; nullopt for other oracles.
std::optional<Formula> documented_pi1_orbit(const GroupOracle& g);

struct BatteryItem {
  Word lhs;  // over y, x1..xk (letter 1 is y)
  Word rhs;  // over x1..xk, as letters 2..k+1
  bool equal = true;
  Formula formula;  // (exists y) lhs = rhs, or !=
};

// Existential formulas with one quantifier: (exists y) u = v and
// (exists y) u != v with u mentioning y, v over x only, |u|, |v| <= length.
// Ordered by |u| + |v|, then u and v in shortlex order, = before !=.
std::vector<BatteryItem> existential_battery(std::size_t k, std::size_t length);

struct CandidateCheck {
  std::vector<GroupElement> tuple;
  bool relators = false;   // satisfies the bounded <x> ~ <a>
  bool generates = false;  // every generator is a word of length <= radius in the tuple
  std::vector<std::size_t> failed_items;  // battery items true in G, not found in H
  bool is_witness() const { return relators && !generates && failed_items.empty(); }
};

struct SelfReflectiveResult {
  bool witness_found = false;
  std::vector<GroupElement> witness;
  std::size_t radius = 0;
  std::size_t length = 0;
  std::size_t candidates = 0;
  std::vector<BatteryItem> battery;
  std::vector<CandidateCheck> rejected;  // candidates passing the first two tests
  std::vector<std::string> notes;
};

CandidateCheck check_candidate(const GroupOracle& g, const std::vector<GroupElement>& a,
                               const std::vector<GroupElement>& b, std::size_t radius, std::size_t length,
                               const std::vector<BatteryItem>& battery);

// The least witness b in ball(radius)^k, or none. Finite groups are settled
// by cardinality without a search.
SelfReflectiveResult self_reflective_search(const GroupOracle& g, const std::vector<GroupElement>& a,
                                            std::size_t radius, std::size_t length);

}  // namespace scottlab
