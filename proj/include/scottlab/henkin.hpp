#pragma once

// Henkin-style consistency properties over a finite structure A.
//
// The family C_A holds the finite sets S of sentences over Henkin constants
// #0, #1, ... such that some injective assignment of the constants of S into
// A makes every member of S true. Models are read off chains in C_A, and
// orbit generators and separators are extracted from sets S at which a
// further closure demand cannot be met.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "scottlab/formula.hpp"
#include "scottlab/model.hpp"
#include "scottlab/scott.hpp"

namespace scottlab {

struct HenkinError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Search budget ran out; frontier lists the next untried candidates.
struct HenkinBudgetExceeded : HenkinError {
  HenkinBudgetExceeded(const std::string& what, std::vector<std::string> frontier)
      : HenkinError(what), frontier(std::move(frontier)) {}
  std::vector<std::string> frontier;
};

std::set<std::uint32_t> henkin_constants(const Formula& f);

// Sentences kept in canonical (printed) order, each with its classification.
class SentenceSet {
 public:
  SentenceSet() = default;
  SentenceSet(std::initializer_list<Formula> fs);

  // False if already present. Throws HenkinError on free variables.
  bool insert(const Formula& f);
  bool contains(const Formula& f) const;
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  std::vector<Formula> sentences() const;
  std::vector<Classification> classifications() const;
  std::set<std::uint32_t> constants() const;
  bool includes(const SentenceSet& other) const;

  friend bool operator==(const SentenceSet& a, const SentenceSet& b) { return a.keys() == b.keys(); }

 private:
  std::vector<std::string> keys() const;
  struct Entry {
    Formula formula;
    Classification cls;
  };
  std::map<std::string, Entry> members_;
};

std::string print_sentence_set(const SentenceSet& s);

using HenkinAssignment = std::map<std::uint32_t, Element>;

// Least injective assignment (lexicographic in ascending constant order)
// satisfying every sentence of S, or nullopt. Unknown verdicts do not count.
std::optional<HenkinAssignment> cp_member(const FinStructure& a, const SentenceSet& s, std::size_t budget = 64);

enum class DemandKind {
  Instantiate,    // a conjunct of a universal sentence in S, at given constants
  Witness,        // some disjunct of an existential sentence in S
  Decide,         // an atom or its negation
  FunctionValue,  // F(c...) = d for some constant d
  Distinct,       // c != c'
  Target,         // a witness for one conjunct of the target sentence
};

std::string to_string(DemandKind k);

struct Demand {
  DemandKind kind = DemandKind::Decide;
  Formula sentence;                      // Instantiate, Witness: member of S. Decide: the atom
  std::size_t index = 0;                 // Instantiate, Target: conjunct index
  std::vector<std::uint32_t> constants;  // Instantiate, Target: the tuple. FunctionValue: arguments. Distinct: the pair
  Symbol function;                       // FunctionValue (a named constant is a 0-ary function)
};

std::string describe(const Demand& d);

struct StepOutcome {
  std::optional<SentenceSet> extended;  // S' including S, in C_A
  std::vector<Formula> added;
  std::string blocked;  // why no extension exists
};

struct SessionConfig {
  std::size_t constants = 0;       // size of the constant pool; 0 means |A|
  std::size_t schema_budget = 16;  // schema children considered per connective
  std::size_t eval_budget = 64;
};

struct TranscriptEntry {
  std::size_t step = 0;
  std::string demand;
  std::vector<std::string> added;
  HenkinAssignment witness;
};

struct ChainResult;
class ConsistencySession;
ChainResult build_model_chain(ConsistencySession& session, std::size_t steps, const SentenceSet& start);

class ConsistencySession {
 public:
  // target, if given, is a Pi_alpha sentence whose conjuncts must be
  // witnessed along the chain.
  ConsistencySession(FinStructure a, Ordinal alpha, std::optional<Formula> target = std::nullopt,
                     SessionConfig config = {});

  const FinStructure& structure() const { return a_; }
  const Ordinal& alpha() const { return alpha_; }
  const std::optional<Formula>& target() const { return target_; }
  const SessionConfig& config() const { return config_; }
  std::size_t pool() const { return pool_; }

  // Rank of the sentence, plus one, is below alpha.
  bool admissible(const Formula& sentence) const;
  std::optional<HenkinAssignment> member(const SentenceSet& s) const;

  // Throws HenkinError on a malformed demand (or S outside C_A).
  StepOutcome closure_step(const SentenceSet& s, const Demand& d) const;
  // Undischarged demands of S, grouped by kind in the order Instantiate,
  // Witness, Decide, FunctionValue, Target.
  std::vector<Demand> pending(const SentenceSet& s) const;

  const std::vector<SentenceSet>& chain() const { return chain_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  friend ChainResult build_model_chain(ConsistencySession&, std::size_t, const SentenceSet&);
  FinStructure a_;
  Ordinal alpha_;
  std::optional<Formula> target_;
  SessionConfig config_;
  std::size_t pool_ = 0;
  std::vector<SentenceSet> chain_;
  std::vector<TranscriptEntry> transcript_;
};

struct ChainResult {
  explicit ChainResult(FinStructure s) : structure(std::move(s)) {}

  std::vector<SentenceSet> chain;
  // Universe: the constant pool, #i read as element i. Undecided atoms are
  // false and undecided function values are 0; both are counted.
  FinStructure structure;
  std::size_t undecided = 0;
  std::size_t pending = 0;  // demands left after the last step
  std::optional<Demand> blocked;
  std::string blocked_reason;
  std::vector<TranscriptEntry> transcript;
};

// Round-robin over demand kinds, least pending instance of each kind first.
// Stops early once nothing is pending or a Target demand is blocked.
ChainResult build_model_chain(ConsistencySession& session, std::size_t steps, const SentenceSet& start = {});

struct ExtractOptions {
  std::uint64_t budget = 1'000'000;  // candidate sets examined
  std::size_t frontier = 12;         // candidates reported on exhaustion
  std::size_t eval_budget = 64;
  std::size_t schema_budget = 16;
};

// A Sigma_{<alpha} formula in x1..xk (k = |tuple|) whose satisfying tuples
// in A are exactly the orbit of `tuple`: (exists y...) of a finite set of
// literals plus distinctness, found as the least set S in C_A whose
// constants for the tuple can only land in that orbit. alpha is finite >= 2.
Formula extract_orbit_generator(const FinStructure& a, const Tuple& tuple, const Ordinal& alpha,
                                const ExtractOptions& opt = {});

// Generators for every tuple of length 1..bound (default |A|).
OrbitFamily orbit_generator_family(const FinStructure& a, const Ordinal& alpha,
                                   std::optional<std::size_t> bound = std::nullopt, const ExtractOptions& opt = {});

// A d-Sigma sentence true in A and false in every model of psi up to the
// sweep bound. Both inputs are Pi_alpha; A must satisfy phi and no
// structure of size <= bound may satisfy both.
Formula extract_separator(const Formula& phi, const Formula& psi, const FinStructure& a, std::size_t bound,
                          const ExtractOptions& opt = {});

// From a Sigma_{alpha+1} and a Pi_{alpha+1} Scott sentence of A, a d-Sigma_alpha
// one: (exists u) gamma(u) & (forall u)(gamma(u) -> phi_i(u)), where phi_i is
// the least disjunct true of some tuple and gamma generates that tuple's orbit.
Formula d_sigma_scott_from_pair(const FinStructure& a, const Formula& sigma_sentence, const Formula& pi_sentence,
                                const ExtractOptions& opt = {});

}  // namespace scottlab
