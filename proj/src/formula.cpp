#include "scottlab/formula.hpp"

#include <algorithm>

#include "scottlab/words.hpp"

namespace scottlab {

struct FormulaNode {
  Kind kind = Kind::And;
  Atom atom;
  std::vector<Formula> children;
  std::shared_ptr<const Schema> schema;
  std::vector<Symbol> vars;
  std::optional<Formula> body;
};

namespace {

const std::shared_ptr<const FormulaNode>& empty_and() {
  static const auto node = std::make_shared<const FormulaNode>();
  return node;
}

}  // namespace

bool term_less(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  switch (a.kind) {
    case Term::Kind::Henkin:
      return a.henkin < b.henkin;
    case Term::Kind::Var:
    case Term::Kind::Const:
      return a.symbol < b.symbol;
    case Term::Kind::App:
      if (a.symbol != b.symbol) return a.symbol < b.symbol;
      return std::lexicographical_compare(a.args.begin(), a.args.end(), b.args.begin(), b.args.end(),
                                          term_less);
  }
  return false;
}

std::string to_string(Side side) {
  switch (side) {
    case Side::Sigma: return "Sigma";
    case Side::Pi: return "Pi";
    case Side::Both: return "Both";
  }
  return "?";
}

std::string to_string(const Classification& c) {
  return "(" + to_string(c.side) + ", " + c.rank.to_string() + ")";
}

Formula::Formula() : node_(empty_and()) {}

Formula Formula::atom(Atom a, bool positive) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = positive ? Kind::AtomPos : Kind::AtomNeg;
  n->atom = std::move(a);
  return Formula(std::move(n));
}

Formula Formula::equals(Term lhs, Term rhs, bool positive) {
  return atom(Atom{equality_symbol(), {std::move(lhs), std::move(rhs)}}, positive);
}

Formula Formula::conj(std::vector<Formula> children) {
  if (children.empty()) return Formula();
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::And;
  n->children = std::move(children);
  return Formula(std::move(n));
}

Formula Formula::disj(std::vector<Formula> children) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Or;
  n->children = std::move(children);
  return Formula(std::move(n));
}

Formula Formula::forall(std::vector<Symbol> vars, Formula body) {
  if (vars.empty()) return body;
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Forall;
  n->vars = std::move(vars);
  n->body = std::move(body);
  return Formula(std::move(n));
}

Formula Formula::exists(std::vector<Symbol> vars, Formula body) {
  if (vars.empty()) return body;
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Exists;
  n->vars = std::move(vars);
  n->body = std::move(body);
  return Formula(std::move(n));
}

Formula Formula::schema(Kind kind, Schema s) {
  if (kind != Kind::And && kind != Kind::Or) throw FormulaError("schema connective must be and/or");
  if (!is_known_family(s.family)) throw FormulaError("unknown schema family '" + s.family + "'");
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->schema = std::make_shared<const Schema>(std::move(s));
  return Formula(std::move(n));
}

Kind Formula::kind() const { return node_->kind; }
bool Formula::is_schema() const { return node_->schema != nullptr; }

const Atom& Formula::atom() const {
  if (!is_atom()) throw FormulaError("not an atom");
  return node_->atom;
}
const std::vector<Formula>& Formula::children() const {
  if (!is_connective() || is_schema()) throw FormulaError("not a finite connective");
  return node_->children;
}
const Schema& Formula::schema() const {
  if (!is_schema()) throw FormulaError("not a schema connective");
  return *node_->schema;
}
const std::vector<Symbol>& Formula::vars() const {
  if (!is_quantifier()) throw FormulaError("not a quantifier");
  return node_->vars;
}
const Formula& Formula::body() const {
  if (!is_quantifier()) throw FormulaError("not a quantifier");
  return *node_->body;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Kind::AtomPos:
    case Kind::AtomNeg:
      return x.atom == y.atom;
    case Kind::And:
    case Kind::Or:
      if ((x.schema == nullptr) != (y.schema == nullptr)) return false;
      if (x.schema) return *x.schema == *y.schema;
      return x.children == y.children;
    case Kind::Forall:
    case Kind::Exists:
      return x.vars == y.vars && *x.body == *y.body;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Schema families

namespace {

Term power_term(const Term& base, std::size_t n) {
  Term t = base;
  for (std::size_t i = 1; i < n; ++i) t = mul_term(std::move(t), base);
  return t;
}

// x1^m1 ... xk^mk with negative exponents through inv; nullopt for all-zero.
std::optional<Term> monomial_term(const std::vector<Symbol>& xs, const std::vector<long>& m) {
  std::optional<Term> acc;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (m[j] == 0) continue;
    Term base = m[j] > 0 ? Term::var(xs[j]) : inv_term(Term::var(xs[j]));
    Term p = power_term(base, static_cast<std::size_t>(m[j] > 0 ? m[j] : -m[j]));
    acc = acc ? mul_term(std::move(*acc), std::move(p)) : std::move(p);
  }
  return acc;
}

std::optional<Formula> raw_words(const Schema& s, std::size_t i) {
  if (s.args.empty()) throw FormulaError("words schema needs target variable");
  std::vector<Symbol> xs(s.args.begin(), s.args.end() - 1);
  if (xs.empty() && i > 0) return std::nullopt;
  Word w = reduced_word_at(xs.size(), i);
  return Formula::equals(word_term(w, xs), Term::var(s.args.back()));
}

std::optional<Formula> raw_nondiv(const Schema& s, std::size_t i) {
  if (s.args.size() < 2) throw FormulaError("nondiv schema needs at least (x z)");
  std::vector<Symbol> xs(s.args.begin(), s.args.end() - 1);
  const auto k = xs.size();
  for (std::size_t n = 2;; ++n) {
    std::size_t block = 1;
    for (std::size_t j = 0; j < k; ++j) block *= n;
    --block;  // exclude the zero vector
    if (i >= block) {
      i -= block;
      continue;
    }
    // i+1 in base n, most significant digit first
    std::vector<long> m(k, 0);
    std::size_t code = i + 1;
    for (std::size_t j = k; j-- > 0;) {
      m[j] = static_cast<long>(code % n);
      code /= n;
    }
    Term lhs = power_term(Term::var(s.args.back()), n);
    return Formula::equals(std::move(lhs), *monomial_term(xs, m));
  }
}

std::optional<Formula> raw_combos(const Schema& s, std::size_t i) {
  const auto& xs = s.args;
  const auto k = xs.size();
  if (k == 0) return std::nullopt;
  for (long r = 1;; ++r) {
    // enumerate [-r,r]^k lexicographically, keep the max-norm-r shell
    std::vector<long> m(k, -r);
    while (true) {
      long norm = 0;
      for (long v : m) norm = std::max(norm, v < 0 ? -v : v);
      if (norm == r) {
        if (i == 0) return Formula::equals(*monomial_term(xs, m), identity_term());
        --i;
      }
      std::size_t j = k;
      while (j > 0 && m[j - 1] == r) m[--j] = -r;
      if (j == 0) break;
      ++m[j - 1];
    }
  }
}

std::optional<Formula> raw_child(const Schema& s, std::size_t i) {
  if (s.family == "table") {
    if (i >= s.forms.size()) return std::nullopt;
    return s.forms[i];
  }
  if (s.family == "cycle") {
    if (s.forms.empty()) return std::nullopt;
    return s.forms[i % s.forms.size()];
  }
  if (s.family == "words") return raw_words(s, i);
  if (s.family == "nondiv") return raw_nondiv(s, i);
  if (s.family == "combos") return raw_combos(s, i);
  throw FormulaError("unknown schema family '" + s.family + "'");
}

}  // namespace

bool is_known_family(const std::string& family) {
  return family == "table" || family == "cycle" || family == "words" || family == "nondiv" ||
         family == "combos";
}

std::optional<Formula> schema_child(const Schema& s, std::size_t index) {
  if (s.bound && index >= *s.bound) return std::nullopt;
  auto child = raw_child(s, index);
  if (!child) return std::nullopt;
  Formula f = s.bindings.empty() ? *child : substitute(*child, s.bindings);
  return s.negated ? negate(f) : f;
}

// ---------------------------------------------------------------------------
// Negation and classification

Formula negate(const Formula& f) {
  switch (f.kind()) {
    case Kind::AtomPos: return Formula::atom(f.atom(), false);
    case Kind::AtomNeg: return Formula::atom(f.atom(), true);
    case Kind::And:
    case Kind::Or: {
      const Kind dual = f.kind() == Kind::And ? Kind::Or : Kind::And;
      if (f.is_schema()) {
        Schema s = f.schema();
        s.negated = !s.negated;
        return Formula::schema(dual, std::move(s));
      }
      std::vector<Formula> out;
      out.reserve(f.children().size());
      for (const auto& c : f.children()) out.push_back(negate(c));
      return dual == Kind::And ? Formula::conj(std::move(out)) : Formula::disj(std::move(out));
    }
    case Kind::Forall: return Formula::exists(f.vars(), negate(f.body()));
    case Kind::Exists: return Formula::forall(f.vars(), negate(f.body()));
  }
  return f;
}

bool is_finitary_qf(const Formula& f) {
  if (f.is_atom()) return true;
  if (f.is_quantifier() || f.is_schema()) return false;
  return std::all_of(f.children().begin(), f.children().end(), is_finitary_qf);
}

namespace {

struct Ranks {
  Ordinal sigma;
  Ordinal pi;
};

const Ordinal& one() {
  static const Ordinal o = Ordinal::finite(1);
  return o;
}

// Rank contributed by a child placed under a Sigma-shaped parent
// (disjunction or existential block): a Sigma child merges, a Pi child
// needs one more level.
Ordinal as_sigma_part(const Ranks& r) { return max(one(), min(r.sigma, r.pi.successor())); }
Ordinal as_pi_part(const Ranks& r) { return max(one(), min(r.pi, r.sigma.successor())); }

Ranks declared_ranks(const Schema& s) {
  Classification c = s.declared;
  if (s.negated && c.side != Side::Both) c.side = c.side == Side::Sigma ? Side::Pi : Side::Sigma;
  Ranks r;
  r.sigma = c.side == Side::Pi ? c.rank.successor() : c.rank;
  r.pi = c.side == Side::Sigma ? c.rank.successor() : c.rank;
  return r;
}

Ranks ranks(const Formula& f) {
  if (is_finitary_qf(f)) return {};
  Ranks out;
  switch (f.kind()) {
    case Kind::Or:
    case Kind::Exists: {
      Ordinal s = one();
      if (f.kind() == Kind::Exists) {
        s = as_sigma_part(ranks(f.body()));
      } else if (f.is_schema()) {
        s = as_sigma_part(declared_ranks(f.schema()));
      } else {
        for (const auto& c : f.children()) s = max(s, as_sigma_part(ranks(c)));
      }
      out.sigma = s;
      out.pi = s.successor();
      break;
    }
    case Kind::And:
    case Kind::Forall: {
      Ordinal p = one();
      if (f.kind() == Kind::Forall) {
        p = as_pi_part(ranks(f.body()));
      } else if (f.is_schema()) {
        p = as_pi_part(declared_ranks(f.schema()));
      } else {
        for (const auto& c : f.children()) p = max(p, as_pi_part(ranks(c)));
      }
      out.pi = p;
      out.sigma = p.successor();
      break;
    }
    default:
      break;
  }
  return out;
}

}  // namespace

Ordinal sigma_rank(const Formula& f) { return ranks(f).sigma; }
Ordinal pi_rank(const Formula& f) { return ranks(f).pi; }

Classification classify(const Formula& f) {
  const auto r = ranks(f);
  if (r.sigma == r.pi) return {Side::Both, r.sigma};
  if (r.sigma < r.pi) return {Side::Sigma, r.sigma};
  return {Side::Pi, r.pi};
}

bool fits_sigma(const Formula& f, const Ordinal& alpha) { return sigma_rank(f) <= alpha; }
bool fits_pi(const Formula& f, const Ordinal& alpha) { return pi_rank(f) <= alpha; }

bool is_d_sigma(const Formula& f, const Ordinal& alpha) {
  if (f.kind() != Kind::And || f.is_schema() || f.children().size() != 2) return false;
  const auto& a = f.children()[0];
  const auto& b = f.children()[1];
  return (fits_sigma(a, alpha) && fits_pi(b, alpha)) || (fits_sigma(b, alpha) && fits_pi(a, alpha));
}

// ---------------------------------------------------------------------------
// Free variables and substitution

namespace {

void collect(const Term& t, std::set<Symbol>& out) {
  if (t.kind == Term::Kind::Var) out.insert(t.symbol);
  for (const auto& a : t.args) collect(a, out);
}

std::set<Symbol> schema_free_vars(const Schema& s) {
  std::set<Symbol> raw;
  if (s.family == "table" || s.family == "cycle") {
    for (const auto& f : s.forms) {
      auto fv = free_vars(f);
      raw.insert(fv.begin(), fv.end());
    }
  } else {
    raw.insert(s.args.begin(), s.args.end());
  }
  std::set<Symbol> out;
  for (auto v : raw) {
    auto it = s.bindings.find(v);
    if (it == s.bindings.end())
      out.insert(v);
    else
      collect(it->second, out);
  }
  return out;
}

void collect(const Formula& f, std::set<Symbol>& out) {
  switch (f.kind()) {
    case Kind::AtomPos:
    case Kind::AtomNeg:
      for (const auto& t : f.atom().args) collect(t, out);
      return;
    case Kind::And:
    case Kind::Or:
      if (f.is_schema()) {
        auto fv = schema_free_vars(f.schema());
        out.insert(fv.begin(), fv.end());
      } else {
        for (const auto& c : f.children()) collect(c, out);
      }
      return;
    case Kind::Forall:
    case Kind::Exists: {
      std::set<Symbol> inner;
      collect(f.body(), inner);
      for (auto v : f.vars()) inner.erase(v);
      out.insert(inner.begin(), inner.end());
      return;
    }
  }
}

bool term_has_henkin(const Term& t) {
  if (t.kind == Term::Kind::Henkin) return true;
  return std::any_of(t.args.begin(), t.args.end(), term_has_henkin);
}

}  // namespace

Symbol fresh_variable(Symbol base, const std::set<Symbol>& avoid) {
  for (std::size_t i = 1;; ++i) {
    Symbol s(base.name() + "_" + std::to_string(i));
    if (!avoid.contains(s)) return s;
  }
}

std::set<Symbol> free_vars(const Formula& f) {
  std::set<Symbol> out;
  collect(f, out);
  return out;
}

std::set<Symbol> free_vars(const Term& t) {
  std::set<Symbol> out;
  collect(t, out);
  return out;
}

bool has_henkin_constants(const Formula& f) {
  switch (f.kind()) {
    case Kind::AtomPos:
    case Kind::AtomNeg:
      return std::any_of(f.atom().args.begin(), f.atom().args.end(), term_has_henkin);
    case Kind::And:
    case Kind::Or:
      if (f.is_schema()) {
        for (const auto& [k, t] : f.schema().bindings)
          if (term_has_henkin(t)) return true;
        for (const auto& c : f.schema().forms)
          if (has_henkin_constants(c)) return true;
        return false;
      }
      return std::any_of(f.children().begin(), f.children().end(), has_henkin_constants);
    case Kind::Forall:
    case Kind::Exists:
      return has_henkin_constants(f.body());
  }
  return false;
}

Term substitute(const Term& t, const Assignment& a) {
  if (t.kind == Term::Kind::Var) {
    auto it = a.find(t.symbol);
    return it == a.end() ? t : it->second;
  }
  if (t.kind != Term::Kind::App) return t;
  Term out = t;
  for (auto& arg : out.args) arg = substitute(arg, a);
  return out;
}

Formula substitute(const Formula& f, const Assignment& a) {
  if (a.empty()) return f;
  switch (f.kind()) {
    case Kind::AtomPos:
    case Kind::AtomNeg: {
      Atom at = f.atom();
      for (auto& t : at.args) t = substitute(t, a);
      return Formula::atom(std::move(at), f.kind() == Kind::AtomPos);
    }
    case Kind::And:
    case Kind::Or: {
      if (f.is_schema()) {
        const auto fv = free_vars(f);
        Schema s = f.schema();
        for (auto& [k, t] : s.bindings) t = substitute(t, a);
        // Raw family variables not yet bound pick up the new assignment.
        std::set<Symbol> raw;
        if (s.family == "table" || s.family == "cycle") {
          for (const auto& c : s.forms) {
            auto v = free_vars(c);
            raw.insert(v.begin(), v.end());
          }
        } else {
          raw.insert(s.args.begin(), s.args.end());
        }
        bool changed = false;
        for (auto v : raw) {
          if (s.bindings.contains(v)) continue;
          if (auto it = a.find(v); it != a.end() && fv.contains(v)) {
            s.bindings.emplace(v, it->second);
            changed = true;
          }
        }
        if (!changed && s.bindings == f.schema().bindings) return f;
        return Formula::schema(f.kind(), std::move(s));
      }
      std::vector<Formula> out;
      out.reserve(f.children().size());
      for (const auto& c : f.children()) out.push_back(substitute(c, a));
      return f.kind() == Kind::And ? Formula::conj(std::move(out)) : Formula::disj(std::move(out));
    }
    case Kind::Forall:
    case Kind::Exists: {
      Assignment inner = a;
      for (auto v : f.vars()) inner.erase(v);
      const auto body_fv = free_vars(f.body());
      // Drop entries irrelevant to the body, then detect capture.
      for (auto it = inner.begin(); it != inner.end();) {
        if (!body_fv.contains(it->first))
          it = inner.erase(it);
        else
          ++it;
      }
      if (inner.empty()) return f;
      std::set<Symbol> incoming;
      for (const auto& [k, t] : inner) collect(t, incoming);
      std::vector<Symbol> vars = f.vars();
      std::set<Symbol> avoid = incoming;
      avoid.insert(body_fv.begin(), body_fv.end());
      avoid.insert(vars.begin(), vars.end());
      for (auto& v : vars) {
        if (!incoming.contains(v)) continue;
        Symbol fresh = fresh_variable(v, avoid);
        avoid.insert(fresh);
        inner[v] = Term::var(fresh);
        v = fresh;
      }
      Formula body = substitute(f.body(), inner);
      return f.kind() == Kind::Forall ? Formula::forall(std::move(vars), std::move(body))
                                      : Formula::exists(std::move(vars), std::move(body));
    }
  }
  return f;
}

Formula substitute_sentence(const Formula& f, const Assignment& a) {
  Formula out = substitute(f, a);
  auto fv = free_vars(out);
  if (!fv.empty()) throw FormulaError("unbound variable '" + fv.begin()->name() + "' remains after substitution");
  return out;
}

Formula implies(const Formula& a, const Formula& b) { return Formula::disj({negate(a), b}); }

std::size_t formula_size(const Formula& f) {
  if (f.is_atom() || f.is_schema()) return 1;
  if (f.is_quantifier()) return 1 + formula_size(f.body());
  std::size_t n = 1;
  for (const auto& c : f.children()) n += formula_size(c);
  return n;
}

}  // namespace scottlab
