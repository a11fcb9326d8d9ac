#include "scottlab/henkin.hpp"

#include <algorithm>
#include <functional>

#include "scottlab/formula_io.hpp"
#include "scottlab/normal_form.hpp"

namespace scottlab {

namespace {

void collect_constants(const Term& t, std::set<std::uint32_t>& out) {
  if (t.kind == Term::Kind::Henkin) out.insert(t.henkin);
  for (const auto& a : t.args) collect_constants(a, out);
}

void collect_constants(const Formula& f, std::set<std::uint32_t>& out) {
  switch (f.kind()) {
    case Kind::AtomPos:
    case Kind::AtomNeg:
      for (const auto& t : f.atom().args) collect_constants(t, out);
      return;
    case Kind::And:
    case Kind::Or:
      if (f.is_schema()) {
        for (const auto& [k, t] : f.schema().bindings) collect_constants(t, out);
        for (const auto& c : f.schema().forms) collect_constants(c, out);
        return;
      }
      for (const auto& c : f.children()) collect_constants(c, out);
      return;
    case Kind::Forall:
    case Kind::Exists:
      collect_constants(f.body(), out);
      return;
  }
}

Term hc(std::uint32_t i) { return Term::henkin_constant(i); }

// Children of f as a k-connective (schema children up to budget); any other
// formula is its own single child.
std::vector<Formula> parts(const Formula& f, Kind k, std::size_t budget) {
  if (f.kind() != k) return {f};
  if (!f.is_schema()) return f.children();
  std::vector<Formula> out;
  for (std::size_t i = 0; i < budget; ++i) {
    auto c = schema_child(f.schema(), i);
    if (!c) break;
    out.push_back(*c);
  }
  return out;
}

std::pair<std::vector<Symbol>, Formula> block(const Formula& f, Kind q) {
  if (f.kind() == q) return {f.vars(), f.body()};
  return {{}, f};
}

Formula instance(const std::vector<Symbol>& vars, const Formula& body, const std::vector<std::uint32_t>& cs) {
  Assignment m;
  for (std::size_t i = 0; i < vars.size(); ++i) m[vars[i]] = hc(cs[i]);
  return substitute_sentence(body, m);
}

// All tuples of length k over {0..n-1}, as constant indices.
std::vector<std::vector<std::uint32_t>> constant_tuples(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::uint32_t>> out;
  for (const auto& t : all_tuples(n, k)) out.emplace_back(t.begin(), t.end());
  return out;
}

std::string join(const std::vector<std::uint32_t>& cs) {
  std::string s;
  for (auto c : cs) s += (s.empty() ? "#" : " #") + std::to_string(c);
  return s;
}

}  // namespace

std::set<std::uint32_t> henkin_constants(const Formula& f) {
  std::set<std::uint32_t> out;
  collect_constants(f, out);
  return out;
}

SentenceSet::SentenceSet(std::initializer_list<Formula> fs) {
  for (const auto& f : fs) insert(f);
}

bool SentenceSet::insert(const Formula& f) {
  if (!free_vars(f).empty()) throw HenkinError("not a sentence: " + print_formula(f));
  return members_.emplace(print_formula(f), Entry{f, classify(f)}).second;
}

bool SentenceSet::contains(const Formula& f) const { return members_.contains(print_formula(f)); }

std::vector<Formula> SentenceSet::sentences() const {
  std::vector<Formula> out;
  for (const auto& [k, e] : members_) out.push_back(e.formula);
  return out;
}

std::vector<Classification> SentenceSet::classifications() const {
  std::vector<Classification> out;
  for (const auto& [k, e] : members_) out.push_back(e.cls);
  return out;
}

std::set<std::uint32_t> SentenceSet::constants() const {
  std::set<std::uint32_t> out;
  for (const auto& [k, e] : members_) collect_constants(e.formula, out);
  return out;
}

bool SentenceSet::includes(const SentenceSet& other) const {
  for (const auto& [k, e] : other.members_)
    if (!members_.contains(k)) return false;
  return true;
}

std::vector<std::string> SentenceSet::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : members_) out.push_back(k);
  return out;
}

std::string print_sentence_set(const SentenceSet& s) {
  std::string out = "(set";
  for (const auto& f : s.sentences()) out += "\n  " + print_formula(f);
  return out + ")";
}

std::optional<HenkinAssignment> cp_member(const FinStructure& a, const SentenceSet& s, std::size_t budget) {
  auto consts = s.constants();
  std::vector<std::uint32_t> cs(consts.begin(), consts.end());
  if (cs.size() > a.size()) return std::nullopt;
  // Each sentence is checked as soon as its last constant is assigned.
  std::vector<std::vector<Formula>> due(cs.size() + 1);
  for (const auto& f : s.sentences()) {
    auto fc = henkin_constants(f);
    std::size_t at = 0;
    if (!fc.empty()) at = 1 + static_cast<std::size_t>(std::lower_bound(cs.begin(), cs.end(), *fc.rbegin()) - cs.begin());
    due[at].push_back(f);
  }
  Valuation v;
  std::vector<bool> used(a.size(), false);
  auto ok_at = [&](std::size_t at) {
    for (const auto& f : due[at])
      if (evaluate(a, f, v, budget) != Verdict3::True) return false;
    return true;
  };
  std::function<bool(std::size_t)> place = [&](std::size_t i) -> bool {
    if (i == cs.size()) return true;
    for (Element e = 0; e < a.size(); ++e) {
      if (used[e]) continue;
      used[e] = true;
      v.henkin[cs[i]] = e;
      if (ok_at(i + 1) && place(i + 1)) return true;
      used[e] = false;
    }
    v.henkin.erase(cs[i]);
    return false;
  };
  if (!ok_at(0) || !place(0)) return std::nullopt;
  return v.henkin;
}

std::string to_string(DemandKind k) {
  switch (k) {
    case DemandKind::Instantiate: return "instantiate";
    case DemandKind::Witness: return "witness";
    case DemandKind::Decide: return "decide";
    case DemandKind::FunctionValue: return "function-value";
    case DemandKind::Distinct: return "distinct";
    case DemandKind::Target: return "target";
  }
  return "?";
}

std::string describe(const Demand& d) {
  std::string s = "(" + to_string(d.kind);
  switch (d.kind) {
    case DemandKind::Instantiate:
      s += " " + print_formula(d.sentence) + " " + std::to_string(d.index) + " (" + join(d.constants) + ")";
      break;
    case DemandKind::Witness:
    case DemandKind::Decide:
      s += " " + print_formula(d.sentence);
      break;
    case DemandKind::FunctionValue:
      s += " " + d.function.name() + " (" + join(d.constants) + ")";
      break;
    case DemandKind::Distinct:
      s += " " + join(d.constants);
      break;
    case DemandKind::Target:
      s += " " + std::to_string(d.index) + " (" + join(d.constants) + ")";
      break;
  }
  return s + ")";
}

ConsistencySession::ConsistencySession(FinStructure a, Ordinal alpha, std::optional<Formula> target,
                                       SessionConfig config)
    : a_(std::move(a)), alpha_(alpha), target_(std::move(target)), config_(config) {
  if (!alpha_.is_finite() || alpha_ < Ordinal::finite(2)) throw HenkinError("alpha must be a natural number >= 2");
  pool_ = config_.constants == 0 ? a_.size() : config_.constants;
  if (pool_ > a_.size()) throw HenkinError("constant pool larger than the structure");
  if (target_) {
    if (!free_vars(*target_).empty()) throw HenkinError("target is not a sentence");
    check_signature(a_.signature(), *target_);
    if (!fits_pi(*target_, alpha_)) throw HenkinError("target is not Pi_" + alpha_.to_string());
  }
}

bool ConsistencySession::admissible(const Formula& sentence) const {
  return classify(sentence).rank.successor() < alpha_;
}

std::optional<HenkinAssignment> ConsistencySession::member(const SentenceSet& s) const {
  return cp_member(a_, s, config_.eval_budget);
}

StepOutcome ConsistencySession::closure_step(const SentenceSet& s, const Demand& d) const {
  if (!member(s)) throw HenkinError("set is not in the consistency property");
  auto malformed = [&](const std::string& why) { return HenkinError("malformed demand " + describe(d) + ": " + why); };
  for (auto c : d.constants)
    if (c >= pool_) throw malformed("constant outside the pool");
  StepOutcome out;
  // First candidate (in order) whose addition stays in C_A.
  auto try_add = [&](const Formula& f) {
    if (s.contains(f)) {
      out.extended = s;
      return true;
    }
    if (!admissible(f)) return false;
    SentenceSet t = s;
    t.insert(f);
    if (!member(t)) return false;
    out.extended = std::move(t);
    out.added.push_back(f);
    return true;
  };
  const std::size_t budget = config_.schema_budget;
  switch (d.kind) {
    case DemandKind::Instantiate: {
      if (!s.contains(d.sentence)) throw malformed("sentence not in the set");
      if (d.sentence.kind() != Kind::And && d.sentence.kind() != Kind::Forall) throw malformed("not universal");
      auto cs = parts(d.sentence, Kind::And, budget);
      if (d.index >= cs.size()) throw malformed("no such conjunct");
      auto [vars, body] = block(cs[d.index], Kind::Forall);
      if (vars.size() != d.constants.size()) throw malformed("wrong number of constants");
      if (!try_add(instance(vars, body, d.constants))) out.blocked = "instance fails under every injective assignment";
      return out;
    }
    case DemandKind::Witness: {
      if (!s.contains(d.sentence)) throw malformed("sentence not in the set");
      if (d.sentence.kind() != Kind::Or && d.sentence.kind() != Kind::Exists) throw malformed("not existential");
      for (const auto& c : parts(d.sentence, Kind::Or, budget)) {
        auto [vars, body] = block(c, Kind::Exists);
        for (const auto& t : constant_tuples(pool_, vars.size()))
          if (try_add(instance(vars, body, t))) return out;
      }
      out.blocked = "no disjunct has a consistent witness";
      return out;
    }
    case DemandKind::Decide: {
      if (!d.sentence.is_atom() || !free_vars(d.sentence).empty()) throw malformed("not an atomic sentence");
      check_signature(a_.signature(), d.sentence);
      auto pos = Formula::atom(d.sentence.atom(), true);
      if (!try_add(pos) && !try_add(negate(pos))) out.blocked = "neither sign is consistent";
      return out;
    }
    case DemandKind::FunctionValue: {
      const auto& sig = a_.signature();
      auto it = sig.functions.find(d.function);
      bool named = sig.constants.contains(d.function);
      if (it == sig.functions.end() && !named) throw malformed("unknown function");
      std::size_t arity = named ? 0 : it->second;
      if (d.constants.size() != arity) throw malformed("wrong number of arguments");
      Term lhs = Term::constant(d.function);
      if (!named) {
        std::vector<Term> args;
        for (auto c : d.constants) args.push_back(hc(c));
        lhs = Term::app(d.function, std::move(args));
      }
      for (std::uint32_t v = 0; v < pool_; ++v)
        if (try_add(Formula::equals(lhs, hc(v)))) return out;
      out.blocked = "no value inside the constant pool";
      return out;
    }
    case DemandKind::Distinct: {
      if (d.constants.size() != 2 || d.constants[0] == d.constants[1]) throw malformed("needs two distinct constants");
      // c = c' never enters a set; the inequality always does.
      if (!try_add(Formula::equals(hc(d.constants[0]), hc(d.constants[1]), false))) out.blocked = "inconsistent";
      return out;
    }
    case DemandKind::Target: {
      if (!target_) throw malformed("session has no target");
      auto cs = parts(*target_, Kind::And, budget);
      if (d.index >= cs.size()) throw malformed("no such conjunct");
      auto [uvars, matrix] = block(cs[d.index], Kind::Forall);
      if (uvars.size() != d.constants.size()) throw malformed("wrong number of constants");
      auto phi_i = instance(uvars, matrix, d.constants);
      for (const auto& disjunct : parts(phi_i, Kind::Or, budget)) {
        auto [vvars, xi] = block(disjunct, Kind::Exists);
        for (const auto& t : constant_tuples(pool_, vvars.size()))
          if (try_add(instance(vvars, xi, t))) return out;
      }
      out.blocked = "no disjunct of conjunct " + std::to_string(d.index) + " can be witnessed at (" +
                    join(d.constants) + ")";
      return out;
    }
  }
  throw malformed("unknown kind");
}

std::vector<Demand> ConsistencySession::pending(const SentenceSet& s) const {
  const std::size_t budget = config_.schema_budget;
  std::vector<Demand> inst, wit, dec, fun, tgt;
  // Some instance of some disjunct of f is already in s.
  auto witnessed = [&](const Formula& f) {
    for (const auto& c : parts(f, Kind::Or, budget)) {
      auto [vars, body] = block(c, Kind::Exists);
      for (const auto& t : constant_tuples(pool_, vars.size()))
        if (s.contains(instance(vars, body, t))) return true;
    }
    return false;
  };
  for (const auto& f : s.sentences()) {
    if (f.kind() == Kind::And || f.kind() == Kind::Forall) {
      auto cs = parts(f, Kind::And, budget);
      for (std::size_t i = 0; i < cs.size(); ++i) {
        auto [vars, body] = block(cs[i], Kind::Forall);
        for (const auto& t : constant_tuples(pool_, vars.size()))
          if (!s.contains(instance(vars, body, t))) inst.push_back({DemandKind::Instantiate, f, i, t, {}});
      }
    } else if (f.kind() == Kind::Or || f.kind() == Kind::Exists) {
      if (!witnessed(f)) wit.push_back({DemandKind::Witness, f, 0, {}, {}});
    }
  }
  const auto& sig = a_.signature();
  for (const auto& [r, k] : sig.relations)
    for (const auto& t : constant_tuples(pool_, k)) {
      Atom at{r, {}};
      for (auto c : t) at.args.push_back(hc(c));
      auto pos = Formula::atom(at, true);
      if (!s.contains(pos) && !s.contains(negate(pos))) dec.push_back({DemandKind::Decide, pos, 0, {}, {}});
    }
  auto valued = [&](const Term& lhs) {
    for (std::uint32_t v = 0; v < pool_; ++v)
      if (s.contains(Formula::equals(lhs, hc(v)))) return true;
    return false;
  };
  for (const auto& [fn, k] : sig.functions)
    for (const auto& t : constant_tuples(pool_, k)) {
      std::vector<Term> args;
      for (auto c : t) args.push_back(hc(c));
      if (!valued(Term::app(fn, std::move(args)))) fun.push_back({DemandKind::FunctionValue, {}, 0, t, fn});
    }
  for (const auto& c : sig.constants)
    if (!valued(Term::constant(c))) fun.push_back({DemandKind::FunctionValue, {}, 0, {}, c});
  if (target_) {
    auto cs = parts(*target_, Kind::And, budget);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      auto [uvars, matrix] = block(cs[i], Kind::Forall);
      for (const auto& t : constant_tuples(pool_, uvars.size()))
        if (!witnessed(instance(uvars, matrix, t))) tgt.push_back({DemandKind::Target, {}, i, t, {}});
    }
  }
  std::vector<Demand> out;
  for (auto* v : {&inst, &wit, &dec, &fun, &tgt}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

ChainResult build_model_chain(ConsistencySession& session, std::size_t steps, const SentenceSet& start) {
  for (const auto& f : start.sentences()) {
    check_signature(session.structure().signature(), f);
    if (!session.admissible(f)) throw HenkinError("sentence above the session rank: " + print_formula(f));
  }
  for (auto c : start.constants())
    if (c >= session.pool()) throw HenkinError("constant outside the pool: #" + std::to_string(c));
  if (!session.member(start)) throw HenkinError("start set is not in the consistency property");

  const auto& sig = session.structure().signature();
  ChainResult res(FinStructure(sig, session.pool()));
  res.chain.push_back(start);
  SentenceSet s = start;
  const std::vector<DemandKind> order{DemandKind::Instantiate, DemandKind::Witness, DemandKind::Decide,
                                      DemandKind::FunctionValue, DemandKind::Target};
  std::size_t cursor = 0;
  for (std::size_t step = 1; step <= steps; ++step) {
    auto pend = session.pending(s);
    if (pend.empty()) break;
    const Demand* pick = nullptr;
    for (std::size_t j = 0; j < order.size() && !pick; ++j) {
      auto kind = order[(cursor + j) % order.size()];
      for (const auto& d : pend)
        if (d.kind == kind) {
          pick = &d;
          cursor = (cursor + j + 1) % order.size();
          break;
        }
    }
    auto outcome = session.closure_step(s, *pick);
    if (!outcome.extended) {
      res.blocked = *pick;
      res.blocked_reason = outcome.blocked;
      break;
    }
    s = *outcome.extended;
    res.chain.push_back(s);
    TranscriptEntry e{step, describe(*pick), {}, *session.member(s)};
    for (const auto& f : outcome.added) e.added.push_back(print_formula(f));
    res.transcript.push_back(std::move(e));
  }
  res.pending = session.pending(s).size();

  // Read the structure off the atomic sentences.
  auto& b = res.structure;
  for (const auto& [r, k] : sig.relations)
    for (const auto& t : all_tuples(session.pool(), k)) {
      Atom at{r, {}};
      for (auto c : t) at.args.push_back(hc(c));
      auto pos = Formula::atom(at, true);
      if (s.contains(pos)) b.set_relation(r, t, true);
      else if (!s.contains(negate(pos))) ++res.undecided;
    }
  auto value_of = [&](const Term& lhs) -> std::optional<Element> {
    for (std::uint32_t v = 0; v < session.pool(); ++v)
      if (s.contains(Formula::equals(lhs, hc(v)))) return v;
    return std::nullopt;
  };
  for (const auto& [fn, k] : sig.functions)
    for (const auto& t : all_tuples(session.pool(), k)) {
      std::vector<Term> args;
      for (auto c : t) args.push_back(hc(c));
      auto v = value_of(Term::app(fn, std::move(args)));
      if (!v) ++res.undecided;
      b.set_function(fn, t, v.value_or(0));
    }
  for (const auto& c : sig.constants) {
    auto v = value_of(Term::constant(c));
    if (!v) ++res.undecided;
    b.set_constant(c, v.value_or(0));
  }
  session.chain_ = res.chain;
  session.transcript_ = res.transcript;
  return res;
}


namespace {

using Bits = std::vector<std::uint64_t>;

bool bit(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1u; }

// Injective m-tuples over A extending `prefix`, in lexicographic order.
std::vector<Tuple> placements(std::size_t n, const Tuple& prefix, std::size_t m) {
  std::vector<Tuple> out;
  Tuple cur = prefix;
  std::vector<bool> used(n, false);
  for (auto e : prefix) used[e] = true;
  std::function<void()> go = [&] {
    if (cur.size() == m) {
      out.push_back(cur);
      return;
    }
    for (Element e = 0; e < n; ++e) {
      if (used[e]) continue;
      used[e] = true;
      cur.push_back(e);
      go();
      cur.pop_back();
      used[e] = false;
    }
  };
  if (prefix.size() <= m) go();
  return out;
}

// Candidate sets over #0..#m-1: literals of the atomic diagram of one
// placement of the constants in A, the first |fixed| of them pinned to
// `fixed`. Satisfaction of each literal is tabulated over every injective
// assignment of the m constants.
struct Level {
  std::size_t m = 0;
  std::vector<Formula> lits;  // canonical order
  std::vector<std::string> keys;
  std::vector<std::vector<std::size_t>> diags;
  std::vector<std::set<std::uint32_t>> mentions;
  std::vector<Tuple> assignments;
  std::vector<Bits> sat;  // per literal, over assignments

  Level(const FinStructure& a, const Tuple& fixed, std::size_t m_, std::size_t eval_budget) : m(m_) {
    std::vector<Term> names;
    for (std::uint32_t i = 0; i < m; ++i) names.push_back(hc(i));
    std::vector<std::vector<Formula>> raw;
    std::map<std::string, Formula> all;
    for (const auto& p : placements(a.size(), fixed, m)) {
      raw.push_back(atomic_diagram(a, p, names));
      for (const auto& l : raw.back()) all.emplace(print_formula(l), l);
    }
    std::map<std::string, std::size_t> index;
    for (const auto& [k, l] : all) {
      index[k] = lits.size();
      keys.push_back(k);
      lits.push_back(l);
      mentions.push_back(henkin_constants(l));
    }
    for (const auto& d : raw) {
      std::vector<std::size_t> ix;
      for (const auto& l : d) ix.push_back(index.at(print_formula(l)));
      std::sort(ix.begin(), ix.end());
      ix.erase(std::unique(ix.begin(), ix.end()), ix.end());
      diags.push_back(std::move(ix));
    }
    assignments = placements(a.size(), {}, m);
    for (const auto& l : lits) {
      Bits b((assignments.size() + 63) / 64, 0);
      for (std::size_t g = 0; g < assignments.size(); ++g) {
        Valuation v;
        for (std::uint32_t i = 0; i < m; ++i) v.henkin[i] = assignments[g][i];
        if (evaluate(a, l, v, eval_budget) == Verdict3::True) b[g / 64] |= std::uint64_t{1} << (g % 64);
      }
      sat.push_back(std::move(b));
    }
  }

  std::size_t max_size() const {
    std::size_t s = 0;
    for (const auto& d : diags) s = std::max(s, d.size());
    return s;
  }

  // Size-s subsets of some diagram mentioning every constant from `from` on,
  // in canonical order.
  std::vector<std::vector<std::size_t>> candidates(std::size_t s, std::size_t from) const {
    std::set<std::vector<std::size_t>> out;
    for (const auto& d : diags) {
      if (d.size() < s) continue;
      std::vector<std::size_t> pick(s);
      for (std::size_t i = 0; i < s; ++i) pick[i] = i;
      while (true) {
        std::vector<std::size_t> c;
        std::set<std::uint32_t> seen;
        for (auto i : pick) {
          c.push_back(d[i]);
          seen.insert(mentions[d[i]].begin(), mentions[d[i]].end());
        }
        bool covers = true;
        for (std::uint32_t k = static_cast<std::uint32_t>(from); k < m && covers; ++k) covers = seen.contains(k);
        if (covers) out.insert(c);
        std::size_t i = s;
        while (i > 0 && pick[i - 1] == d.size() - s + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < s; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
    return {out.begin(), out.end()};
  }

  Bits satisfying(const std::vector<std::size_t>& c) const {
    Bits b((assignments.size() + 63) / 64, ~std::uint64_t{0});
    for (auto i : c)
      for (std::size_t w = 0; w < b.size(); ++w) b[w] &= sat[i][w];
    return b;
  }

  std::string print(const std::vector<std::size_t>& c) const {
    std::string s = "{";
    for (auto i : c) s += (s.size() > 1 ? " " : "") + keys[i];
    return s + "}";
  }
};

std::size_t finite_alpha(const Ordinal& alpha) {
  if (!alpha.is_finite() || alpha < Ordinal::finite(2)) throw HenkinError("alpha must be a natural number >= 2");
  return static_cast<std::size_t>(alpha.as_finite());
}

// Replaces Henkin constants in an atom.
Formula rename_constants(const Formula& lit, const std::map<std::uint32_t, Term>& to) {
  std::function<Term(const Term&)> go = [&](const Term& t) {
    if (t.kind == Term::Kind::Henkin) return to.at(t.henkin);
    Term u = t;
    for (auto& x : u.args) x = go(x);
    return u;
  };
  Atom at = lit.atom();
  for (auto& t : at.args) t = go(t);
  return Formula::atom(std::move(at), lit.kind() == Kind::AtomPos);
}

[[noreturn]] void out_of_budget(const std::string& what, const Level& lv,
                                const std::vector<std::vector<std::size_t>>& cands, std::size_t from,
                                std::size_t limit) {
  std::vector<std::string> frontier;
  for (std::size_t i = from; i < cands.size() && frontier.size() < limit; ++i) frontier.push_back(lv.print(cands[i]));
  throw HenkinBudgetExceeded(what, std::move(frontier));
}

}  // namespace

Formula extract_orbit_generator(const FinStructure& a, const Tuple& tuple, const Ordinal& alpha,
                                const ExtractOptions& opt) {
  finite_alpha(alpha);
  for (auto e : tuple)
    if (e >= a.size()) throw HenkinError("tuple element " + std::to_string(e) + " outside universe");
  Tuple distinct;
  std::vector<std::size_t> first;  // position of each distinct entry's first occurrence
  for (std::size_t p = 0; p < tuple.size(); ++p)
    if (std::find(distinct.begin(), distinct.end(), tuple[p]) == distinct.end()) {
      distinct.push_back(tuple[p]);
      first.push_back(p);
    }
  const std::size_t k = distinct.size();
  std::set<Tuple> orbit;
  for (const auto& blk : automorphism_orbits(a, k))
    if (std::find(blk.begin(), blk.end(), distinct) != blk.end()) orbit.insert(blk.begin(), blk.end());

  // S fails the extra closure demand for the tuple's constants when every
  // injective assignment satisfying S sends them into the orbit. On a finite
  // structure this is the same as: no Pi_1 formula true of the tuple has a
  // negated instance consistent with S, since the negated diagram formulas
  // of the other orbits form a complete family of such formulas.
  std::uint64_t examined = 0;
  std::vector<Level> levels;
  for (std::size_t m = k; m <= a.size(); ++m) levels.emplace_back(a, distinct, m, opt.eval_budget);
  std::size_t max_s = 0;
  for (const auto& lv : levels) max_s = std::max(max_s, lv.max_size());
  for (std::size_t s = 0; s <= max_s; ++s)
    for (const auto& lv : levels) {
      Bits bad((lv.assignments.size() + 63) / 64, 0);
      for (std::size_t g = 0; g < lv.assignments.size(); ++g) {
        Tuple head(lv.assignments[g].begin(), lv.assignments[g].begin() + static_cast<std::ptrdiff_t>(k));
        if (!orbit.contains(head)) bad[g / 64] |= std::uint64_t{1} << (g % 64);
      }
      auto cands = lv.candidates(s, k);
      for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        if (examined++ >= opt.budget)
          out_of_budget("orbit generator search exhausted its budget at size " + std::to_string(s) + " with " +
                            std::to_string(lv.m) + " constants",
                        lv, cands, ci, opt.frontier);
        auto sat = lv.satisfying(cands[ci]);
        bool ok = true;
        for (std::size_t w = 0; w < sat.size() && ok; ++w) ok = (sat[w] & bad[w]) == 0;
        if (!ok) continue;

        std::map<std::uint32_t, Term> to;
        std::vector<Term> names;
        std::vector<Symbol> ys;
        for (std::uint32_t i = 0; i < lv.m; ++i) {
          if (i < k) {
            to[i] = Term::var(orbit_var(first[i]));
          } else {
            ys.emplace_back("y" + std::to_string(i - k + 1));
            to[i] = Term::var(ys.back());
          }
          names.push_back(to[i]);
        }
        std::vector<Formula> body;
        for (auto li : cands[ci]) body.push_back(rename_constants(lv.lits[li], to));
        for (std::size_t i = 0; i < names.size(); ++i)
          for (std::size_t j = i + 1; j < names.size(); ++j) body.push_back(Formula::equals(names[i], names[j], false));
        for (std::size_t p = 0; p < tuple.size(); ++p) {
          auto d = static_cast<std::size_t>(std::find(distinct.begin(), distinct.end(), tuple[p]) - distinct.begin());
          if (first[d] != p) body.push_back(Formula::equals(Term::var(orbit_var(p)), Term::var(orbit_var(first[d]))));
        }
        return Formula::exists(std::move(ys), Formula::conj(std::move(body)));
      }
    }
  throw HenkinError("no orbit generator found");
}

OrbitFamily orbit_generator_family(const FinStructure& a, const Ordinal& alpha, std::optional<std::size_t> bound,
                                   const ExtractOptions& opt) {
  OrbitFamily fam;
  fam.length_bound = bound.value_or(a.size());
  for (std::size_t k = 1; k <= fam.length_bound; ++k)
    for (const auto& t : all_tuples(a.size(), k)) fam.formulas.emplace(t, extract_orbit_generator(a, t, alpha, opt));
  return fam;
}

Formula extract_separator(const Formula& phi, const Formula& psi, const FinStructure& a, std::size_t bound,
                          const ExtractOptions& opt) {
  const auto& sig = a.signature();
  for (const auto* f : {&phi, &psi}) {
    if (!free_vars(*f).empty()) throw HenkinError("input is not a sentence: " + print_formula(*f));
    check_signature(sig, *f);
  }
  Ordinal alpha = max(Ordinal::finite(2), max(pi_rank(phi), pi_rank(psi)));
  finite_alpha(alpha);
  if (evaluate(a, phi, {}, opt.eval_budget) != Verdict3::True) throw HenkinError("the structure does not satisfy phi");
  for (std::size_t n = 1; n <= bound; ++n)
    for_each_structure(sig, n, [&](const FinStructure& b) {
      if (evaluate(b, phi, {}, opt.eval_budget) == Verdict3::True &&
          evaluate(b, psi, {}, opt.eval_budget) == Verdict3::True)
        throw HenkinError("phi and psi share a model of size " + std::to_string(n) + ":\n" + print_structure(b));
      return true;
    });

  struct Conjunct {
    std::vector<Symbol> u;
    Formula matrix;
    std::map<Tuple, bool> negation_holds;
  };
  std::vector<Conjunct> conj;
  for (const auto& c : parts(psi, Kind::And, opt.schema_budget)) {
    auto [u, m] = block(c, Kind::Forall);
    conj.push_back({u, m, {}});
  }
  auto refutes = [&](Conjunct& c, const Tuple& t) {
    auto it = c.negation_holds.find(t);
    if (it != c.negation_holds.end()) return it->second;
    Valuation v;
    for (std::size_t i = 0; i < t.size(); ++i) v.vars[c.u[i]] = t[i];
    bool r = evaluate(a, negate(c.matrix), v, opt.eval_budget) == Verdict3::True;
    c.negation_holds.emplace(t, r);
    return r;
  };

  std::uint64_t examined = 0;
  std::vector<Level> levels;
  for (std::size_t m = 0; m <= a.size(); ++m) levels.emplace_back(a, Tuple{}, m, opt.eval_budget);
  std::size_t max_s = 0;
  for (const auto& lv : levels) max_s = std::max(max_s, lv.max_size());
  for (std::size_t s = 0; s <= max_s; ++s)
    for (const auto& lv : levels) {
      auto cands = lv.candidates(s, 0);
      for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        if (examined++ >= opt.budget)
          out_of_budget("separator search exhausted its budget at size " + std::to_string(s) + " with " +
                            std::to_string(lv.m) + " constants",
                        lv, cands, ci, opt.frontier);
        auto sat = lv.satisfying(cands[ci]);
        for (std::size_t i = 0; i < conj.size(); ++i) {
          const std::size_t k = conj[i].u.size();
          for (const auto& cbar : all_tuples(lv.m + k, k)) {
            // Every injective assignment satisfying S, extended to the new
            // constants of cbar, must refute the conjunct there; and there is
            // at least one.
            std::vector<std::uint32_t> fresh;
            for (auto c : cbar)
              if (c >= lv.m && std::find(fresh.begin(), fresh.end(), c) == fresh.end()) fresh.push_back(c);
            bool any = false, all = true;
            for (std::size_t g = 0; g < lv.assignments.size() && all; ++g) {
              if (!bit(sat, g)) continue;
              for (const auto& ext : placements(a.size(), lv.assignments[g], lv.m + fresh.size())) {
                Tuple t;
                for (auto c : cbar) {
                  if (c < lv.m) {
                    t.push_back(ext[c]);
                  } else {
                    auto pos = std::find(fresh.begin(), fresh.end(), c) - fresh.begin();
                    t.push_back(ext[lv.m + static_cast<std::size_t>(pos)]);
                  }
                }
                any = true;
                if (!refutes(conj[i], t)) {
                  all = false;
                  break;
                }
              }
            }
            if (!any || !all) continue;

            // rho(u, x): S with cbar's constants named by the least variable
            // of u they were assigned to, and the other constants by x.
            const auto& u = conj[i].u;
            std::set<Symbol> avoid(u.begin(), u.end());
            for (const auto& v : free_vars(conj[i].matrix)) avoid.insert(v);
            std::map<std::uint32_t, Term> to;
            std::vector<Term> unames;
            for (std::size_t p = 0; p < k; ++p)
              if (!to.contains(cbar[p])) {
                to[cbar[p]] = Term::var(u[p]);
                unames.push_back(to[cbar[p]]);
              }
            std::vector<Symbol> xs;
            std::vector<Term> xnames;
            for (std::uint32_t c = 0; c < lv.m; ++c)
              if (!to.contains(c)) {
                xs.push_back(fresh_variable(Symbol("x"), avoid));
                avoid.insert(xs.back());
                to[c] = Term::var(xs.back());
                xnames.push_back(to[c]);
              }
            std::vector<Formula> rho;
            for (auto li : cands[ci]) rho.push_back(rename_constants(lv.lits[li], to));
            for (std::size_t p = 0; p < k; ++p)
              for (std::size_t q = p + 1; q < k; ++q)
                rho.push_back(Formula::equals(Term::var(u[p]), Term::var(u[q]), cbar[p] == cbar[q]));
            for (std::size_t p = 0; p < xnames.size(); ++p) {
              for (std::size_t q = p + 1; q < xnames.size(); ++q)
                rho.push_back(Formula::equals(xnames[p], xnames[q], false));
              for (const auto& un : unames) rho.push_back(Formula::equals(xnames[p], un, false));
            }
            auto ex_rho = Formula::exists(xs, Formula::conj(rho));
            std::vector<Symbol> all_vars = u;
            all_vars.insert(all_vars.end(), xs.begin(), xs.end());
            auto out = Formula::conj({Formula::exists(std::move(all_vars), Formula::conj(rho)),
                                      forall_implies(u, ex_rho, negate(conj[i].matrix))});
            if (evaluate(a, out, {}, opt.eval_budget) != Verdict3::True)
              throw HenkinError("internal: separator is not true in the structure");
            return out;
          }
        }
      }
    }
  throw HenkinError("no separator found; psi may hold in the structure");
}

Formula d_sigma_scott_from_pair(const FinStructure& a, const Formula& sigma_sentence, const Formula& pi_sentence,
                                const ExtractOptions& opt) {
  for (const auto* f : {&sigma_sentence, &pi_sentence}) {
    if (!free_vars(*f).empty()) throw HenkinError("input is not a sentence: " + print_formula(*f));
    check_signature(a.signature(), *f);
    if (evaluate(a, *f, {}, opt.eval_budget) != Verdict3::True)
      throw HenkinError("input is not true in the structure: " + print_formula(*f));
  }
  Ordinal next = max(Ordinal::finite(2), max(sigma_rank(sigma_sentence), pi_rank(pi_sentence)));
  finite_alpha(next);
  for (const auto& d : parts(sigma_sentence, Kind::Or, opt.schema_budget)) {
    auto [u, phi_i] = block(d, Kind::Exists);
    for (const auto& t : all_tuples(a.size(), u.size())) {
      Valuation v;
      for (std::size_t i = 0; i < u.size(); ++i) v.vars[u[i]] = t[i];
      if (evaluate(a, phi_i, v, opt.eval_budget) != Verdict3::True) continue;
      auto gamma = extract_orbit_generator(a, t, next, opt);
      Assignment ren;
      for (std::size_t i = 0; i < u.size(); ++i) ren[orbit_var(i)] = Term::var(u[i]);
      gamma = substitute(gamma, ren);
      auto out = Formula::conj({Formula::exists(u, gamma), forall_implies(u, gamma, phi_i)});
      if (evaluate(a, out, {}, opt.eval_budget) != Verdict3::True)
        throw HenkinError("internal: output is not true in the structure");
      return out;
    }
  }
  throw HenkinError("no disjunct of the Sigma sentence holds in the structure");
}

}  // namespace scottlab
