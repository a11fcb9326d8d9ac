#include "scottlab/model.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>

#include "scottlab/sexpr.hpp"
#include "scottlab/words.hpp"

namespace scottlab {

std::string to_string(Verdict3 v) {
  switch (v) {
    case Verdict3::True: return "True";
    case Verdict3::False: return "False";
    case Verdict3::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

}  // namespace

FinStructure::FinStructure(Signature sig, std::size_t size) : sig_(std::move(sig)), n_(size) {
  if (n_ == 0) throw ModelError("universe must be nonempty");
  for (const auto& [r, k] : sig_.relations) rel_[r].assign(ipow(n_, k), 0);
  for (const auto& [f, k] : sig_.functions) fn_[f].assign(ipow(n_, k), 0);
  for (const auto& c : sig_.constants) const_[c] = 0;
}

std::size_t FinStructure::arity_of(const std::map<Symbol, std::size_t>& table, Symbol s, const char* what) const {
  auto it = table.find(s);
  if (it == table.end()) throw ModelError(std::string("unknown ") + what + " " + s.name());
  return it->second;
}

std::size_t FinStructure::index(std::size_t arity, std::span<const Element> args) const {
  if (args.size() != arity)
    throw ModelError("arity mismatch: expected " + std::to_string(arity) + ", got " + std::to_string(args.size()));
  std::size_t idx = 0;
  for (auto a : args) {
    if (a >= n_) throw ModelError("element " + std::to_string(a) + " outside universe");
    idx = idx * n_ + a;
  }
  return idx;
}

bool FinStructure::holds(Symbol rel, std::span<const Element> args) const {
  return rel_.at(rel)[index(arity_of(sig_.relations, rel, "relation"), args)] != 0;
}

Element FinStructure::apply(Symbol fn, std::span<const Element> args) const {
  return fn_.at(fn)[index(arity_of(sig_.functions, fn, "function"), args)];
}

Element FinStructure::constant(Symbol c) const {
  auto it = const_.find(c);
  if (it == const_.end()) throw ModelError("unknown constant " + c.name());
  return it->second;
}

void FinStructure::set_relation(Symbol rel, const Tuple& args, bool value) {
  auto i = index(arity_of(sig_.relations, rel, "relation"), args);
  rel_.at(rel)[i] = value ? 1 : 0;
}

void FinStructure::set_function(Symbol fn, const Tuple& args, Element value) {
  auto i = index(arity_of(sig_.functions, fn, "function"), args);
  if (value >= n_) throw ModelError("function value outside universe");
  fn_.at(fn)[i] = value;
}

void FinStructure::set_constant(Symbol c, Element value) {
  if (!sig_.constants.count(c)) throw ModelError("unknown constant " + c.name());
  if (value >= n_) throw ModelError("constant value outside universe");
  const_[c] = value;
}

const std::vector<std::uint8_t>& FinStructure::relation_table(Symbol rel) const {
  arity_of(sig_.relations, rel, "relation");
  return rel_.at(rel);
}

const std::vector<Element>& FinStructure::function_table(Symbol fn) const {
  arity_of(sig_.functions, fn, "function");
  return fn_.at(fn);
}

std::vector<Tuple> all_tuples(std::size_t n, std::size_t k) {
  std::vector<Tuple> out;
  if (n == 0 && k > 0) return out;
  Tuple t(k, 0);
  while (true) {
    out.push_back(t);
    std::size_t i = k;
    while (i > 0 && t[i - 1] + 1 == n) t[--i] = 0;
    if (i == 0) break;
    ++t[i - 1];
  }
  return out;
}

FinStructure FinStructure::relabel(const std::vector<Element>& perm) const {
  if (perm.size() != n_) throw ModelError("permutation size mismatch");
  FinStructure b(sig_, n_);
  auto image = [&](const Tuple& t) {
    Tuple u;
    for (auto a : t) u.push_back(perm[a]);
    return u;
  };
  for (const auto& [r, k] : sig_.relations)
    for (const auto& t : all_tuples(n_, k)) b.set_relation(r, image(t), holds(r, t));
  for (const auto& [f, k] : sig_.functions)
    for (const auto& t : all_tuples(n_, k)) b.set_function(f, image(t), perm[apply(f, t)]);
  for (const auto& c : sig_.constants) b.set_constant(c, perm[constant(c)]);
  return b;
}

FinModel::FinModel(const FinStructure& a) : a_(a), domain_(a.size()) {
  std::iota(domain_.begin(), domain_.end(), Element{0});
}

Element FinModel::constant(Symbol c) const {
  try {
    return a_.constant(c);
  } catch (const ModelError& e) {
    throw EvalError(e.what());
  }
}

Element FinModel::apply(Symbol fn, std::span<const Element> args) const {
  try {
    return a_.apply(fn, args);
  } catch (const ModelError& e) {
    throw EvalError(e.what());
  }
}

bool FinModel::holds(Symbol rel, std::span<const Element> args) const {
  try {
    return a_.holds(rel, args);
  } catch (const ModelError& e) {
    throw EvalError(e.what());
  }
}

namespace {

void check_term(const Signature& sig, const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var:
    case Term::Kind::Henkin:
      return;
    case Term::Kind::Const:
      if (!sig.constants.count(t.symbol)) throw EvalError("constant @" + t.symbol.name() + " not in signature");
      return;
    case Term::Kind::App: {
      auto it = sig.functions.find(t.symbol);
      if (it == sig.functions.end()) throw EvalError("function " + t.symbol.name() + " not in signature");
      if (it->second != t.args.size()) throw EvalError("arity mismatch for " + t.symbol.name());
      for (const auto& a : t.args) check_term(sig, a);
      return;
    }
  }
}

}  // namespace

void check_signature(const Signature& sig, const Formula& f) {
  switch (f.kind()) {
    case Kind::AtomPos:
    case Kind::AtomNeg: {
      const auto& a = f.atom();
      if (a.is_equality()) {
        if (a.args.size() != 2) throw EvalError("equality takes two arguments");
      } else {
        auto it = sig.relations.find(a.predicate);
        if (it == sig.relations.end()) throw EvalError("relation " + a.predicate.name() + " not in signature");
        if (it->second != a.args.size()) throw EvalError("arity mismatch for " + a.predicate.name());
      }
      for (const auto& t : a.args) check_term(sig, t);
      return;
    }
    case Kind::And:
    case Kind::Or:
      if (f.is_schema()) {
        const auto& s = f.schema();
        for (const auto& c : s.forms) check_signature(sig, c);
        for (const auto& [v, t] : s.bindings) check_term(sig, t);
        if (s.family == "words" || s.family == "nondiv" || s.family == "combos") {
          auto probe = Formula::equals(mul_term(identity_term(), inv_term(identity_term())), identity_term());
          check_signature(sig, probe);
        }
        return;
      }
      for (const auto& c : f.children()) check_signature(sig, c);
      return;
    case Kind::Forall:
    case Kind::Exists:
      check_signature(sig, f.body());
      return;
  }
}

Verdict3 evaluate(const FinStructure& a, const Formula& f, const Valuation& v, std::size_t budget) {
  check_signature(a.signature(), f);
  for (const auto& x : free_vars(f))
    if (!v.vars.count(x)) throw EvalError("valuation misses free variable " + x.name());
  for (const auto& [x, e] : v.vars)
    if (e >= a.size()) throw EvalError("valuation of " + x.name() + " outside universe");
  for (const auto& [c, e] : v.henkin)
    if (e >= a.size()) throw EvalError("valuation of #" + std::to_string(c) + " outside universe");
  FinModel m(a);
  Evaluator<FinModel> ev(m, budget);
  Valuation env = v;
  return ev.eval(f, env);
}

// ---- isomorphism ----

namespace {

// Every table entry whose arguments (and value) lie in {0..upto} agrees.
bool consistent(const FinStructure& a, const FinStructure& b, const std::vector<Element>& f, std::size_t upto) {
  const auto& sig = a.signature();
  for (const auto& c : sig.constants) {
    auto ac = a.constant(c);
    if (ac <= upto && f[ac] != b.constant(c)) return false;
  }
  for (const auto& [r, k] : sig.relations)
    for (const auto& t : all_tuples(upto + 1, k)) {
      if (k > 0 && std::find(t.begin(), t.end(), upto) == t.end()) continue;
      if (k == 0 && upto != 0) continue;
      Tuple u;
      for (auto x : t) u.push_back(f[x]);
      if (a.holds(r, t) != b.holds(r, u)) return false;
    }
  for (const auto& [g, k] : sig.functions)
    for (const auto& t : all_tuples(upto + 1, k)) {
      auto val = a.apply(g, t);
      bool fresh = (k > 0 && std::find(t.begin(), t.end(), upto) != t.end()) || val == upto || (k == 0 && upto == 0);
      if (!fresh || val > upto) continue;
      Tuple u;
      for (auto x : t) u.push_back(f[x]);
      if (f[val] != b.apply(g, u)) return false;
    }
  return true;
}

// Enumerates isomorphisms in lexicographic order until visit returns false.
void search_isos(const FinStructure& a, const FinStructure& b, const std::function<bool(const std::vector<Element>&)>& visit) {
  if (!(a.signature() == b.signature())) throw ModelError("signature mismatch");
  if (a.size() != b.size()) return;
  const std::size_t n = a.size();
  std::vector<Element> f(n);
  std::vector<bool> used(n, false);
  bool stop = false;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (stop) return;
    if (i == n) {
      stop = !visit(f);
      return;
    }
    for (Element y = 0; y < n && !stop; ++y) {
      if (used[y]) continue;
      f[i] = y;
      if (!consistent(a, b, f, i)) continue;
      used[y] = true;
      go(i + 1);
      used[y] = false;
    }
  };
  go(0);
}

}  // namespace

std::optional<std::vector<Element>> isomorphic(const FinStructure& a, const FinStructure& b) {
  std::optional<std::vector<Element>> out;
  search_isos(a, b, [&](const std::vector<Element>& f) {
    out = f;
    return false;
  });
  return out;
}

std::vector<std::vector<Element>> automorphisms(const FinStructure& a) {
  std::vector<std::vector<Element>> out;
  search_isos(a, a, [&](const std::vector<Element>& f) {
    out.push_back(f);
    return true;
  });
  return out;
}

std::vector<std::vector<Tuple>> automorphism_orbits(const FinStructure& a, std::size_t k) {
  if (k == 0) throw ModelError("orbit tuple length must be positive");
  const std::size_t n = a.size();
  auto tuples = all_tuples(n, k);
  auto code = [&](const Tuple& t) {
    std::size_t c = 0;
    for (auto x : t) c = c * n + x;
    return c;
  };
  std::vector<std::size_t> parent(tuples.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& g : automorphisms(a))
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      Tuple u;
      for (auto x : tuples[i]) u.push_back(g[x]);
      auto r1 = find(i), r2 = find(code(u));
      if (r1 != r2) parent[std::max(r1, r2)] = std::min(r1, r2);
    }
  std::map<std::size_t, std::vector<Tuple>> blocks;
  for (std::size_t i = 0; i < tuples.size(); ++i) blocks[find(i)].push_back(tuples[i]);
  std::vector<std::vector<Tuple>> out;
  for (auto& [root, b] : blocks) out.push_back(std::move(b));
  return out;
}

// ---- enumeration ----

EnumerationRefused::EnumerationRefused(std::uint64_t count, std::uint64_t limit)
    : std::runtime_error("refusing to enumerate " +
                         (count == std::numeric_limits<std::uint64_t>::max() ? std::string("more than 2^64")
                                                                             : std::to_string(count)) +
                         " structures (limit " + std::to_string(limit) + ")"),
      count(count) {}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  while (exp--) r = sat_mul(r, base);
  return r;
}

}  // namespace

std::uint64_t structure_count(const Signature& sig, std::size_t n) {
  std::uint64_t c = 1;
  for (const auto& [r, k] : sig.relations) c = sat_mul(c, sat_pow(2, ipow(n, k)));
  for (const auto& [f, k] : sig.functions) c = sat_mul(c, sat_pow(n, ipow(n, k)));
  for (std::size_t i = 0; i < sig.constants.size(); ++i) c = sat_mul(c, n);
  return c;
}

void for_each_structure(const Signature& sig, std::size_t n, const std::function<bool(const FinStructure&)>& f,
                        std::uint64_t limit) {
  if (n == 0) throw ModelError("universe must be nonempty");
  auto count = structure_count(sig, n);
  if (count > limit) throw EnumerationRefused(count, limit);

  // One digit per table cell; the first digit is most significant.
  struct Cell {
    int kind;  // 0 relation, 1 function, 2 constant
    Symbol sym;
    Tuple args;
    std::size_t radix;
  };
  std::vector<Cell> cells;
  for (const auto& [r, k] : sig.relations)
    for (auto& t : all_tuples(n, k)) cells.push_back({0, r, t, 2});
  for (const auto& [g, k] : sig.functions)
    for (auto& t : all_tuples(n, k)) cells.push_back({1, g, t, n});
  for (const auto& c : sig.constants) cells.push_back({2, c, {}, n});

  std::vector<std::size_t> digits(cells.size(), 0);
  while (true) {
    FinStructure a(sig, n);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      if (c.kind == 0)
        a.set_relation(c.sym, c.args, digits[i] != 0);
      else if (c.kind == 1)
        a.set_function(c.sym, c.args, static_cast<Element>(digits[i]));
      else
        a.set_constant(c.sym, static_cast<Element>(digits[i]));
    }
    if (!f(a)) return;
    std::size_t i = cells.size();
    while (i > 0 && digits[i - 1] + 1 == cells[i - 1].radix) digits[--i] = 0;
    if (i == 0) return;
    ++digits[i - 1];
  }
}

std::vector<FinStructure> enumerate_structures(const Signature& sig, std::size_t n, std::uint64_t limit) {
  std::vector<FinStructure> out;
  for_each_structure(
      sig, n,
      [&](const FinStructure& a) {
        out.push_back(a);
        return true;
      },
      limit);
  return out;
}

// ---- text format ----

std::string print_structure(const FinStructure& a) {
  const auto& sig = a.signature();
  std::string out = "(structure\n  (size " + std::to_string(a.size()) + ")";
  auto tuple_text = [](const Tuple& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + std::to_string(t[i]);
    return s + ")";
  };
  for (const auto& [r, k] : sig.relations) {
    out += "\n  (relation " + r.name() + " " + std::to_string(k);
    for (const auto& t : all_tuples(a.size(), k))
      if (a.holds(r, t)) out += " " + tuple_text(t);
    out += ")";
  }
  for (const auto& [g, k] : sig.functions) {
    out += "\n  (function " + g.name() + " " + std::to_string(k);
    for (auto v : a.function_table(g)) out += " " + std::to_string(v);
    out += ")";
  }
  for (const auto& c : sig.constants) out += "\n  (constant " + c.name() + " " + std::to_string(a.constant(c)) + ")";
  return out + ")\n";
}

namespace {

std::size_t number(const Sexp& s) {
  if (!s.is_atom() || s.atom.empty() || s.atom.size() > 9 ||
      !std::all_of(s.atom.begin(), s.atom.end(), [](char c) { return c >= '0' && c <= '9'; }))
    s.fail("expected a natural number");
  return std::stoul(s.atom);
}

Symbol name(const Sexp& s) {
  if (!s.is_atom() || s.atom.empty() || !(std::isalpha(static_cast<unsigned char>(s.atom[0])) || s.atom[0] == '_'))
    s.fail("expected a symbol name");
  return Symbol(s.atom);
}

}  // namespace

FinStructure parse_structure(std::string_view text) {
  Sexp top = read_sexp(text);
  if (top.head() != "structure") top.fail("expected (structure ...)");
  std::optional<std::size_t> size;
  Signature sig;
  std::set<Symbol> seen;
  for (std::size_t i = 1; i < top.items.size(); ++i) {
    const auto& e = top.items[i];
    auto h = e.head();
    if (h == "size") {
      if (e.items.size() != 2) e.fail("size takes one number");
      if (size) e.fail("duplicate size");
      size = number(e.items[1]);
      if (*size == 0) e.fail("universe must be nonempty");
      continue;
    }
    if (h != "relation" && h != "function" && h != "constant") e.fail("unknown structure entry");
    if (e.items.size() < 2) e.fail("missing symbol name");
    Symbol s = name(e.items[1]);
    if (!seen.insert(s).second) e.items[1].fail("duplicate symbol " + s.name());
    if (h == "constant") {
      sig.constants.insert(s);
    } else {
      if (e.items.size() < 3) e.fail("missing arity");
      (h == "relation" ? sig.relations : sig.functions)[s] = number(e.items[2]);
    }
  }
  if (!size) top.fail("missing size");
  FinStructure a(sig, *size);
  const auto n = *size;
  for (std::size_t i = 1; i < top.items.size(); ++i) {
    const auto& e = top.items[i];
    auto h = e.head();
    if (h == "size") continue;
    Symbol s(e.items[1].atom);
    auto element = [&](const Sexp& x) {
      auto v = number(x);
      if (v >= n) x.fail("element outside universe");
      return static_cast<Element>(v);
    };
    if (h == "relation") {
      auto k = sig.relations.at(s);
      for (std::size_t j = 3; j < e.items.size(); ++j) {
        const auto& t = e.items[j];
        if (!t.is_list || t.items.size() != k) t.fail("tuple arity mismatch");
        Tuple u;
        for (const auto& x : t.items) u.push_back(element(x));
        a.set_relation(s, u, true);
      }
    } else if (h == "function") {
      auto k = sig.functions.at(s);
      auto cells = ipow(n, k);
      if (e.items.size() != 3 + cells) e.fail("function table needs " + std::to_string(cells) + " values");
      auto tuples = all_tuples(n, k);
      for (std::size_t j = 0; j < cells; ++j) a.set_function(s, tuples[j], element(e.items[3 + j]));
    } else {
      if (e.items.size() != 3) e.fail("constant takes one element");
      a.set_constant(s, element(e.items[2]));
    }
  }
  return a;
}

}  // namespace scottlab
