#pragma once

// Normal-form infinitary formulas.
//
// Negation is pushed onto atoms. Conjunctions and disjunctions are either
// explicit finite lists or schemas: deterministic enumerators of a countable
// family of subformulas, standing in for c.e.-indexed connectives. Empty And
// is "true", empty Or is "false".

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scottlab/ordinal.hpp"
#include "scottlab/symbol.hpp"

namespace scottlab {

struct Term {
  enum class Kind : std::uint8_t { Var, Const, Henkin, App };

  Kind kind = Kind::Var;
  Symbol symbol;             // Var, Const, App
  std::uint32_t henkin = 0;  // Henkin constant index
  std::vector<Term> args;    // App

  static Term var(Symbol name) { return {Kind::Var, name, 0, {}}; }
  static Term var(std::string_view name) { return var(Symbol(name)); }
  static Term constant(Symbol name) { return {Kind::Const, name, 0, {}}; }
  static Term henkin_constant(std::uint32_t index) { return {Kind::Henkin, Symbol(), index, {}}; }
  static Term app(Symbol fn, std::vector<Term> args) { return {Kind::App, fn, 0, std::move(args)}; }

  bool is_var() const { return kind == Kind::Var; }
  friend bool operator==(const Term&, const Term&) = default;
};

// Total order used for canonical sentence ordering.
bool term_less(const Term& a, const Term& b);

struct Atom {
  Symbol predicate;  // equality_symbol() for t1 = t2
  std::vector<Term> args;

  bool is_equality() const { return predicate == equality_symbol(); }
  friend bool operator==(const Atom&, const Atom&) = default;
};

enum class Side : std::uint8_t { Sigma, Pi, Both };

struct Classification {
  Side side = Side::Both;
  Ordinal rank;
  friend bool operator==(const Classification&, const Classification&) = default;
};

std::string to_string(Side side);
std::string to_string(const Classification& c);

class Formula;
struct Schema;

enum class Kind : std::uint8_t { AtomPos, AtomNeg, And, Or, Forall, Exists };

struct FormulaNode;

class Formula {
 public:
  // Default-constructed formula is "true" (empty And).
  Formula();

  static Formula atom(Atom a, bool positive = true);
  static Formula equals(Term lhs, Term rhs, bool positive = true);
  static Formula conj(std::vector<Formula> children);
  static Formula disj(std::vector<Formula> children);
  static Formula top() { return conj({}); }
  static Formula bottom() { return disj({}); }
  // An empty variable block yields the body unchanged.
  static Formula forall(std::vector<Symbol> vars, Formula body);
  static Formula exists(std::vector<Symbol> vars, Formula body);
  // kind must be And or Or.
  static Formula schema(Kind kind, Schema s);

  Kind kind() const;
  bool is_atom() const { return kind() == Kind::AtomPos || kind() == Kind::AtomNeg; }
  bool is_quantifier() const { return kind() == Kind::Forall || kind() == Kind::Exists; }
  bool is_connective() const { return kind() == Kind::And || kind() == Kind::Or; }
  bool is_schema() const;

  const Atom& atom() const;
  const std::vector<Formula>& children() const;  // finite-list connectives
  const Schema& schema() const;                  // schema connectives
  const std::vector<Symbol>& vars() const;       // quantifiers
  const Formula& body() const;                   // quantifiers

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const FormulaNode> node_;
};

// A schema names a registered enumerator family plus its parameters.
//
// Families:
//   table   forms[i] for i < forms.size()
//   cycle   forms[i mod forms.size()], unbounded
//   words   args (x1..xk y): the i-th reduced group word w over x1..xk in
//           shortlex order, child "w(x1..xk) = y"
//   nondiv  args (x1..xk z): enumerates n >= 2 and exponent vectors m in
//           [0,n)^k \ {0}, child "z^n = x1^m1 ... xk^mk"
//   combos  args (x1..xk): enumerates nonzero exponent vectors by max-norm,
//           child "x1^m1 ... xk^mk = e"
// The group families use the symbols mul/2, inv/1 and the constant e.
struct Schema {
  std::string family;
  std::vector<Symbol> args;
  std::vector<Formula> forms;
  std::optional<std::size_t> bound;   // enumeration stops at this index
  Classification declared;            // class of every (un-negated) child
  bool negated = false;               // children are negated
  std::map<Symbol, Term> bindings;    // substitution applied to children

  friend bool operator==(const Schema&, const Schema&) = default;
};

// The i-th child, or nullopt once the enumerator is exhausted.
std::optional<Formula> schema_child(const Schema& s, std::size_t index);
bool is_known_family(const std::string& family);

struct FormulaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Formula negate(const Formula& f);

// Least rank and side derivable from the inductive Sigma/Pi clauses.
Classification classify(const Formula& f);
// Least alpha with f in Sigma_alpha (resp. Pi_alpha).
Ordinal sigma_rank(const Formula& f);
Ordinal pi_rank(const Formula& f);
bool fits_sigma(const Formula& f, const Ordinal& alpha);
bool fits_pi(const Formula& f, const Ordinal& alpha);
// True iff f is a binary And of a Sigma_alpha and a Pi_alpha formula.
bool is_d_sigma(const Formula& f, const Ordinal& alpha);

bool is_finitary_qf(const Formula& f);

std::set<Symbol> free_vars(const Formula& f);
std::set<Symbol> free_vars(const Term& t);
bool has_henkin_constants(const Formula& f);

using Assignment = std::map<Symbol, Term>;

// base_1, base_2, ...: the first not in avoid.
Symbol fresh_variable(Symbol base, const std::set<Symbol>& avoid);

Term substitute(const Term& t, const Assignment& a);
// Capture-avoiding; bound variables are renamed when a substituted term
// would be captured.
Formula substitute(const Formula& f, const Assignment& a);
// As substitute, but throws FormulaError if a free variable remains.
Formula substitute_sentence(const Formula& f, const Assignment& a);

// Convenience: implication a -> b in normal form, i.e. neg(a) or b.
Formula implies(const Formula& a, const Formula& b);

// Count of nodes; schemas count as one node.
std::size_t formula_size(const Formula& f);

}  // namespace scottlab
