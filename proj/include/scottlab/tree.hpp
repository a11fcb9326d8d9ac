#pragma once

// A staged binary tree driven by a finite halting trace, and the structures
// in unary predicates U0, U1, ... whose elements represent its paths.

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scottlab/evaluate.hpp"
#include "scottlab/formula.hpp"
#include "scottlab/model.hpp"

namespace scottlab {

struct TreeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// k halts at stage `stage`.
struct TraceEntry {
  std::size_t k = 0;
  std::size_t stage = 1;
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

// A node is a string over '0' and '1'.
using Node = std::string;

struct ShortLex {
  bool operator()(const Node& a, const Node& b) const {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  }
};

using NodeSet = std::set<Node, ShortLex>;

class StagedTree {
 public:
  const std::vector<TraceEntry>& trace() const { return trace_; }
  std::size_t depth() const { return stages_.size() - 1; }
  // T_s: the nodes of length <= s, as of stage s.
  const NodeSet& stage(std::size_t s) const { return stages_.at(s); }
  const NodeSet& nodes() const { return stages_.back(); }
  std::vector<Node> level(std::size_t n) const;
  bool contains(const Node& n) const { return nodes().count(n) > 0; }

  // 0^{s0} 1^{k0} 0^{s1} 1^{k1} ... over the whole trace, k increasing.
  Node special_sequence() const;
  // special_sequence() followed by zeros, cut at length n.
  Node special_prefix(std::size_t n) const;

  // Violations of stage monotonicity, prefix closure, the sigma-0 rule and
  // the no-terminal-node property below the built depth.
  std::vector<std::string> check_invariants() const;

 private:
  friend StagedTree build_tree(std::vector<TraceEntry> trace, std::size_t depth);
  std::vector<TraceEntry> trace_;
  std::vector<NodeSet> stages_;
};

// Stage t adds sigma0 for every node of length t-1, and the length-t prefix
// of the current special sequence (entries with stage <= t) padded with zeros.
StagedTree build_tree(std::vector<TraceEntry> trace, std::size_t depth);

// (trace (k s) ...)
std::vector<TraceEntry> parse_trace(std::string_view text);
std::string print_trace(const std::vector<TraceEntry>& trace);
// (tree (depth d) (trace ...) (special S) (nodes eps 0 00 ...)), shortlex.
std::string print_tree(const StagedTree& t);

Symbol unary_symbol(std::size_t n);
std::string print_node(const Node& n);  // "eps" for the empty node

// Conjunction of U_n x for sigma(n) = 1 and not U_n x for sigma(n) = 0.
Formula sigma_formula(const Node& sigma, Symbol x = Symbol("x"));
// Disjunction of sigma_formula over the nodes of length n.
Formula level_formula(const StagedTree& t, std::size_t n, Symbol x = Symbol("x"));

// (forall x) T_n(x) for n <= depth, then (exists>= m x) sigma(x) for every
// node sigma of length <= depth and 1 <= m <= count.
std::vector<Formula> tree_axioms(const StagedTree& t, std::size_t depth, std::size_t count);

enum class PathFlavor : std::uint8_t { A, B };

struct PathOptions {
  std::size_t special_count = 1;  // special elements added in B
  // Leave the special prefix out of A. The infinite A has elements on every
  // node of T, so this makes A-approx a worse approximation; the counting
  // axioms through the special prefix then fail on it.
  bool isolate_special = false;
};

struct PathStructure {
  FinStructure structure;
  std::vector<Node> labels;     // path prefix of each element
  std::vector<bool> special;    // element sits on the special branch
  PathFlavor flavor = PathFlavor::A;
  std::size_t depth = 0;
};

// Over U0..U_{depth-1}: `copies` elements for every node of length depth
// (each node of T padded with zeros ends in one), then for B the special
// elements labeled special_prefix(depth).
PathStructure build_structure(const StagedTree& t, PathFlavor flavor, std::size_t depth, std::size_t copies,
                              const PathOptions& opt = {});

struct TransferReport {
  Verdict3 on_b = Verdict3::Unknown;
  Verdict3 on_a = Verdict3::Unknown;
  bool flagged = false;  // True on B-approx, False on A-approx
  std::string explanation;
};

// Evaluates a sentence of class at most Sigma_2 on both approximations.
TransferReport sigma2_transfer_probe(const StagedTree& t, const Formula& sentence, std::size_t depth,
                                     std::size_t copies, const PathOptions& opt = {}, std::size_t budget = 64);

}  // namespace scottlab
