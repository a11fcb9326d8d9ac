#include "scottlab/tree.hpp"

#include <algorithm>
#include <map>

#include "scottlab/formula_io.hpp"
#include "scottlab/sexpr.hpp"

namespace scottlab {

namespace {

Node sequence_of(std::vector<TraceEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const TraceEntry& a, const TraceEntry& b) { return a.k < b.k; });
  Node out;
  for (const auto& e : entries) {
    out.append(e.stage, '0');
    out.append(e.k, '1');
  }
  return out;
}

Node pad(Node s, std::size_t n) {
  s.resize(n, '0');
  return s;
}

std::size_t nat_of(const Sexp& s) {
  if (!s.is_atom() || s.atom.empty() || !std::all_of(s.atom.begin(), s.atom.end(), [](char c) {
        return c >= '0' && c <= '9';
      }))
    s.fail("expected a natural number");
  try {
    return std::stoul(s.atom);
  } catch (const std::exception&) {
    s.fail("number out of range");
  }
}

}  // namespace

std::vector<Node> StagedTree::level(std::size_t n) const {
  std::vector<Node> out;
  for (const auto& s : nodes())
    if (s.size() == n) out.push_back(s);
  return out;
}

Node StagedTree::special_sequence() const { return sequence_of(trace_); }

Node StagedTree::special_prefix(std::size_t n) const { return pad(special_sequence(), n); }

std::vector<std::string> StagedTree::check_invariants() const {
  std::vector<std::string> bad;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (const auto& n : stages_[s]) {
      if (n.size() > s) bad.push_back("stage " + std::to_string(s) + " holds longer node " + print_node(n));
      if (!n.empty() && !stages_[s].count(n.substr(0, n.size() - 1)))
        bad.push_back("stage " + std::to_string(s) + " misses the parent of " + print_node(n));
    }
    if (s + 1 < stages_.size()) {
      for (const auto& n : stages_[s])
        if (!stages_[s + 1].count(n)) bad.push_back("stage " + std::to_string(s + 1) + " drops " + print_node(n));
      for (const auto& n : stages_[s + 1])
        if (n.size() <= s && !stages_[s].count(n))
          bad.push_back("stage " + std::to_string(s + 1) + " adds short node " + print_node(n));
    }
  }
  for (const auto& n : nodes())
    if (n.size() < depth()) {
      if (!contains(n + "0")) bad.push_back("missing " + print_node(n + "0"));
      if (!contains(n + "0") && !contains(n + "1")) bad.push_back("terminal node " + print_node(n));
    }
  return bad;
}

StagedTree build_tree(std::vector<TraceEntry> trace, std::size_t depth) {
  if (depth < 1) throw TreeError("tree depth must be at least 1");
  std::set<std::size_t> ks;
  for (const auto& e : trace) {
    if (!ks.insert(e.k).second) throw TreeError("duplicate k = " + std::to_string(e.k) + " in trace");
    if (e.stage < 1) throw TreeError("halting stage of k = " + std::to_string(e.k) + " must be at least 1");
  }
  StagedTree t;
  t.trace_ = std::move(trace);
  t.stages_.push_back(NodeSet{Node{}});
  for (std::size_t s = 1; s <= depth; ++s) {
    NodeSet next = t.stages_.back();
    for (const auto& n : t.stages_.back())
      if (n.size() == s - 1) next.insert(n + "0");
    std::vector<TraceEntry> halted;
    for (const auto& e : t.trace_)
      if (e.stage <= s) halted.push_back(e);
    next.insert(pad(sequence_of(halted), s));
    t.stages_.push_back(std::move(next));
  }
  return t;
}

std::vector<TraceEntry> parse_trace(std::string_view text) {
  Sexp top = read_sexp(text);
  if (top.head() != "trace") top.fail("expected (trace (k s) ...)");
  std::vector<TraceEntry> out;
  for (std::size_t i = 1; i < top.items.size(); ++i) {
    const Sexp& e = top.items[i];
    if (!e.is_list || e.items.size() != 2) e.fail("expected (k stage)");
    out.push_back({nat_of(e.items[0]), nat_of(e.items[1])});
  }
  return out;
}

std::string print_trace(const std::vector<TraceEntry>& trace) {
  std::string out = "(trace";
  for (const auto& e : trace) out += " (" + std::to_string(e.k) + " " + std::to_string(e.stage) + ")";
  return out + ")";
}

std::string print_node(const Node& n) { return n.empty() ? "eps" : n; }

std::string print_tree(const StagedTree& t) {
  std::string out = "(tree\n  (depth " + std::to_string(t.depth()) + ")\n  " + print_trace(t.trace()) +
                    "\n  (special " + print_node(t.special_sequence()) + ")\n  (nodes";
  for (const auto& n : t.nodes()) out += " " + print_node(n);
  return out + "))";
}

Symbol unary_symbol(std::size_t n) { return Symbol("U" + std::to_string(n)); }

Formula sigma_formula(const Node& sigma, Symbol x) {
  std::vector<Formula> parts;
  for (std::size_t n = 0; n < sigma.size(); ++n) {
    if (sigma[n] != '0' && sigma[n] != '1') throw TreeError("node " + sigma + " is not a binary string");
    parts.push_back(Formula::atom(Atom{unary_symbol(n), {Term::var(x)}}, sigma[n] == '1'));
  }
  return Formula::conj(std::move(parts));
}

Formula level_formula(const StagedTree& t, std::size_t n, Symbol x) {
  std::vector<Formula> parts;
  for (const auto& s : t.level(n)) parts.push_back(sigma_formula(s, x));
  return Formula::disj(std::move(parts));
}

std::vector<Formula> tree_axioms(const StagedTree& t, std::size_t depth, std::size_t count) {
  if (depth > t.depth())
    throw TreeError("axiom depth " + std::to_string(depth) + " exceeds built depth " + std::to_string(t.depth()));
  const Symbol x("x");
  std::vector<Formula> out;
  for (std::size_t n = 0; n <= depth; ++n) out.push_back(Formula::forall({x}, level_formula(t, n, x)));
  for (const auto& s : t.nodes())
    if (s.size() <= depth)
      for (std::size_t m = 1; m <= count; ++m) out.push_back(at_least(m, x, sigma_formula(s, x)));
  return out;
}

PathStructure build_structure(const StagedTree& t, PathFlavor flavor, std::size_t depth, std::size_t copies,
                              const PathOptions& opt) {
  if (copies < 1) throw TreeError("copies must be at least 1");
  if (depth > t.depth())
    throw TreeError("structure depth " + std::to_string(depth) + " exceeds built depth " +
                    std::to_string(t.depth()));
  const Node special = t.special_prefix(depth);
  std::vector<Node> labels;
  std::vector<bool> on_special;
  for (const auto& path : t.level(depth)) {
    if (opt.isolate_special && path == special) continue;
    labels.insert(labels.end(), copies, path);
    on_special.insert(on_special.end(), copies, false);
  }
  if (flavor == PathFlavor::B) {
    labels.insert(labels.end(), opt.special_count, special);
    on_special.insert(on_special.end(), opt.special_count, true);
  }
  if (labels.empty()) throw TreeError("no elements: every path at depth " + std::to_string(depth) + " was left out");
  Signature sig;
  for (std::size_t n = 0; n < depth; ++n) sig.relations[unary_symbol(n)] = 1;
  FinStructure a(sig, labels.size());
  for (std::size_t e = 0; e < labels.size(); ++e)
    for (std::size_t n = 0; n < depth; ++n)
      if (labels[e][n] == '1') a.set_relation(unary_symbol(n), {static_cast<Element>(e)}, true);
  return PathStructure{std::move(a), std::move(labels), std::move(on_special), flavor, depth};
}

TransferReport sigma2_transfer_probe(const StagedTree& t, const Formula& sentence, std::size_t depth,
                                     std::size_t copies, const PathOptions& opt, std::size_t budget) {
  if (!fits_sigma(sentence, Ordinal::finite(2)))
    throw TreeError("probe sentence must be Sigma_2, got " + to_string(classify(sentence)));
  if (!free_vars(sentence).empty()) throw TreeError("probe sentence has free variables");
  auto a = build_structure(t, PathFlavor::A, depth, copies, opt);
  auto b = build_structure(t, PathFlavor::B, depth, copies, opt);
  TransferReport r;
  r.on_b = evaluate(b.structure, sentence, {}, budget);
  r.on_a = evaluate(a.structure, sentence, {}, budget);
  r.flagged = r.on_b == Verdict3::True && r.on_a == Verdict3::False;
  const std::string bounds = "depth " + std::to_string(depth) + ", " + std::to_string(copies) + " copies per path";
  if (!r.flagged) {
    r.explanation = "no counterexample at " + bounds;
  } else if (opt.isolate_special) {
    r.explanation = "True on B-approx, False on A-approx at " + bounds + ". A-approx omits the special prefix " +
                    print_node(t.special_prefix(depth)) +
                    ", but in the infinite A that node lies on an isolated path carrying infinitely many "
                    "elements. The finite truncation causes the disagreement.";
  } else {
    r.explanation = "True on B-approx, False on A-approx at " + bounds +
                    ". The infinite A has infinitely many elements on every isolated path, so the finite count "
                    "of copies causes the disagreement.";
  }
  return r;
}

}  // namespace scottlab
