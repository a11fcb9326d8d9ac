#pragma once

// Orbit formulas, Scott sentences built from them, and back-and-forth
// families over finite structures.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scottlab/formula.hpp"
#include "scottlab/model.hpp"

namespace scottlab {

struct ScottError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Free variable names used for tuple positions: x1, x2, ...
Symbol orbit_var(std::size_t i);
std::vector<Symbol> orbit_vars(std::size_t k);

// Literals of the atomic diagram of A restricted to `elems`, written over
// `names` (names[i] denotes elems[i]). Covers every relation tuple, every
// function equation whose value lies in elems, and every constant equation
// likewise. Equality literals are not included.
std::vector<Formula> atomic_diagram(const FinStructure& a, const std::vector<Element>& elems,
                                    const std::vector<Term>& names);

enum class OrbitStyle {
  Covering,  // exists the rest of the universe, full diagram, every y is one of them (Sigma_2)
  Diagram,   // exists the rest of the universe with the full diagram (Sigma_1)
};

// A formula in x1..xk whose satisfying tuples in A are exactly the orbit of a.
// Both styles are exact on finite A: an injective self-embedding of a finite
// structure is an automorphism.
Formula orbit_formula(const FinStructure& a, const Tuple& tuple, OrbitStyle style = OrbitStyle::Covering);

struct OrbitFamily {
  // Every tuple of length 1..length_bound has a formula.
  std::size_t length_bound = 0;
  std::map<Tuple, Formula> formulas;
};

// Default bounds: |A| for Covering, |A| + 1 for Diagram.
OrbitFamily orbit_family(const FinStructure& a, OrbitStyle style = OrbitStyle::Covering,
                         std::optional<std::size_t> length_bound = std::nullopt);

// Conjunction of rho_a over all tuples a with |a| < length_bound (including
// the empty tuple).
// Throws ScottError if the family misses a tuple.
Formula scott_sentence_from_orbits(const FinStructure& a, const OrbitFamily& family);

// (exists x1..xn) of the covering formula for an enumeration of A: a Sigma_2
// sentence whose finite models are the copies of A.
Formula sigma2_scott_sentence(const FinStructure& a);

// The k-tuples of A satisfying f(x1..xk), in lexicographic order.
std::vector<Tuple> satisfying_tuples(const FinStructure& a, const Formula& f, std::size_t k,
                                     std::size_t budget = 64);

// Partial injections A -> B.
using PartialMap = std::map<Element, Element>;
using FiniteMapFamily = std::set<PartialMap>;

bool is_partial_isomorphism(const FinStructure& a, const FinStructure& b, const PartialMap& f);
FiniteMapFamily all_partial_isomorphisms(const FinStructure& a, const FinStructure& b);
// Maps a_i -> b_i for each family tuple a and each b in B satisfying phi_a.
FiniteMapFamily family_maps(const FinStructure& a, const FinStructure& b, const OrbitFamily& family,
                            std::size_t budget = 64);

// Every map extends, inside the family, to any given point of A (forth) and
// onto any given point of B (back).
bool check_back_and_forth(const FiniteMapFamily& family, const FinStructure& a, const FinStructure& b);
// The empty map plus every restriction of an isomorphism A -> B; a
// back-and-forth family exactly when A and B are isomorphic.
FiniteMapFamily isomorphism_restrictions(const FinStructure& a, const FinStructure& b);

// phi & true, or phi & false, keeping phi's classification.
Formula guard_formula(bool flag, const Formula& phi);

struct VerifyEntry {
  std::size_t size = 0;
  std::size_t index = 0;  // position in enumeration order at that size
  FinStructure structure;
  Verdict3 verdict = Verdict3::Unknown;
};

struct VerifyReport {
  std::size_t max_size = 0;
  std::size_t checked = 0;
  std::size_t copies_found = 0;                   // structures isomorphic to A
  std::vector<VerifyEntry> false_positives;       // holds in B, B not iso A
  std::vector<VerifyEntry> false_negatives;       // fails in B, B iso A
  std::vector<VerifyEntry> unknowns;
  std::size_t unknowns_in_class = 0;

  bool ok() const { return false_positives.empty() && false_negatives.empty() && unknowns.empty(); }
  // No copy of A got a True verdict.
  bool missing_class() const { return copies_found > 0 && false_negatives.size() + unknowns_in_class == copies_found; }
};

VerifyReport verify_scott_sentence(const Formula& phi, const FinStructure& a, std::size_t max_size,
                                   std::size_t budget = 64, std::uint64_t limit = kDefaultEnumerationLimit);

}  // namespace scottlab
