#include "scottlab/formula_io.hpp"

#include <cctype>
#include <charconv>

namespace scottlab {

std::string print_term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: return t.symbol.name();
    case Term::Kind::Const: return "@" + t.symbol.name();
    case Term::Kind::Henkin: return "#" + std::to_string(t.henkin);
    case Term::Kind::App: {
      std::string out = "(" + t.symbol.name();
      for (const auto& a : t.args) out += " " + print_term(a);
      return out + ")";
    }
  }
  return "?";
}

namespace {

void print(const Formula& f, std::string& out);

void print_atom(const Atom& a, std::string& out) {
  out += '(';
  out += a.predicate.name();
  for (const auto& t : a.args) {
    out += ' ';
    out += print_term(t);
  }
  out += ')';
}

void print_vars(const std::vector<Symbol>& vars, std::string& out) {
  out += '(';
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ' ';
    out += vars[i].name();
  }
  out += ')';
}

void print_schema(Kind kind, const Schema& s, std::string& out) {
  out += "(schema ";
  out += kind == Kind::And ? "and " : "or ";
  out += s.family;
  if (!s.args.empty()) {
    out += " :args ";
    print_vars(s.args, out);
  }
  if (!s.forms.empty()) {
    out += " :forms (";
    for (std::size_t i = 0; i < s.forms.size(); ++i) {
      if (i) out += ' ';
      print(s.forms[i], out);
    }
    out += ')';
  }
  if (s.bound) out += " :bound " + std::to_string(*s.bound);
  out += " :class (" + to_string(s.declared.side) + " " + s.declared.rank.to_string() + ")";
  if (s.negated) out += " :neg";
  if (!s.bindings.empty()) {
    out += " :bind (";
    bool first = true;
    for (const auto& [v, t] : s.bindings) {
      if (!first) out += ' ';
      first = false;
      out += "(" + v.name() + " " + print_term(t) + ")";
    }
    out += ')';
  }
  out += ')';
}

void print(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Kind::AtomPos:
      print_atom(f.atom(), out);
      return;
    case Kind::AtomNeg:
      out += "(not ";
      print_atom(f.atom(), out);
      out += ')';
      return;
    case Kind::And:
    case Kind::Or:
      if (f.is_schema()) {
        print_schema(f.kind(), f.schema(), out);
        return;
      }
      out += f.kind() == Kind::And ? "(and" : "(or";
      for (const auto& c : f.children()) {
        out += ' ';
        print(c, out);
      }
      out += ')';
      return;
    case Kind::Forall:
    case Kind::Exists:
      out += f.kind() == Kind::Forall ? "(forall " : "(exists ";
      print_vars(f.vars(), out);
      out += ' ';
      print(f.body(), out);
      out += ')';
      return;
  }
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
  return true;
}

std::size_t parse_count(const Sexp& s, const char* what) {
  if (!s.is_atom()) s.fail(std::string("expected ") + what);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.atom.data(), s.atom.data() + s.atom.size(), v);
  if (ec != std::errc() || ptr != s.atom.data() + s.atom.size()) s.fail(std::string("expected ") + what);
  return v;
}

Symbol parse_var(const Sexp& s) {
  if (!s.is_atom() || !is_identifier(s.atom)) s.fail("expected variable name");
  return Symbol(s.atom);
}

std::vector<Symbol> parse_vars(const Sexp& s) {
  if (!s.is_list) s.fail("expected variable list");
  std::vector<Symbol> out;
  for (const auto& v : s.items) out.push_back(parse_var(v));
  return out;
}

Side parse_side(const Sexp& s) {
  if (s.is_atom("Sigma")) return Side::Sigma;
  if (s.is_atom("Pi")) return Side::Pi;
  if (s.is_atom("Both")) return Side::Both;
  s.fail("expected Sigma, Pi or Both");
}

Formula parse_schema(const Sexp& s) {
  if (s.items.size() < 3) s.fail("schema needs connective and family");
  Kind kind;
  if (s.items[1].is_atom("and"))
    kind = Kind::And;
  else if (s.items[1].is_atom("or"))
    kind = Kind::Or;
  else
    s.items[1].fail("schema connective must be 'and' or 'or'");
  Schema sc;
  if (!s.items[2].is_atom() || !is_known_family(s.items[2].atom)) s.items[2].fail("unknown schema family");
  sc.family = s.items[2].atom;
  bool have_class = false;
  for (std::size_t i = 3; i < s.items.size(); ++i) {
    const auto& key = s.items[i];
    auto value = [&]() -> const Sexp& {
      if (i + 1 >= s.items.size()) key.fail("missing value for " + key.atom);
      return s.items[++i];
    };
    if (key.is_atom(":args")) {
      sc.args = parse_vars(value());
    } else if (key.is_atom(":forms")) {
      const auto& v = value();
      if (!v.is_list) v.fail("expected formula list");
      for (const auto& f : v.items) sc.forms.push_back(parse_formula(f));
    } else if (key.is_atom(":bound")) {
      sc.bound = parse_count(value(), "bound");
    } else if (key.is_atom(":class")) {
      const auto& v = value();
      if (!v.is_list || v.items.size() != 2 || !v.items[1].is_atom()) v.fail("expected (Side ordinal)");
      sc.declared.side = parse_side(v.items[0]);
      try {
        sc.declared.rank = Ordinal::parse(v.items[1].atom);
      } catch (const std::exception& e) {
        v.items[1].fail(e.what());
      }
      have_class = true;
    } else if (key.is_atom(":neg")) {
      sc.negated = true;
    } else if (key.is_atom(":bind")) {
      const auto& v = value();
      if (!v.is_list) v.fail("expected binding list");
      for (const auto& b : v.items) {
        if (!b.is_list || b.items.size() != 2) b.fail("expected (var term)");
        sc.bindings[parse_var(b.items[0])] = parse_term(b.items[1]);
      }
    } else {
      key.fail("unknown schema keyword");
    }
  }
  if (!have_class) s.fail("schema requires :class");
  return Formula::schema(kind, std::move(sc));
}

}  // namespace

std::string print_formula(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

Term parse_term(const Sexp& s) {
  if (s.is_list) {
    if (s.items.empty() || !s.items[0].is_atom() || !is_identifier(s.items[0].atom))
      s.fail("expected function application");
    std::vector<Term> args;
    for (std::size_t i = 1; i < s.items.size(); ++i) args.push_back(parse_term(s.items[i]));
    return Term::app(Symbol(s.items[0].atom), std::move(args));
  }
  const auto& a = s.atom;
  if (!a.empty() && a[0] == '#') {
    Sexp digits = s;
    digits.atom = a.substr(1);
    return Term::henkin_constant(static_cast<std::uint32_t>(parse_count(digits, "Henkin constant index")));
  }
  if (!a.empty() && a[0] == '@') {
    if (!is_identifier(a.substr(1))) s.fail("malformed constant symbol");
    return Term::constant(Symbol(a.substr(1)));
  }
  return Term::var(parse_var(s));
}

Formula at_least(std::size_t n, Symbol var, const Formula& body) {
  if (n == 0) return Formula::top();
  std::vector<Symbol> vars;
  for (std::size_t i = 1; i <= n; ++i) vars.emplace_back(var.name() + "_" + std::to_string(i));
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      parts.push_back(Formula::equals(Term::var(vars[i]), Term::var(vars[j]), false));
  for (auto v : vars) parts.push_back(substitute(body, {{var, Term::var(v)}}));
  return Formula::exists(std::move(vars), Formula::conj(std::move(parts)));
}

Formula parse_formula(const Sexp& s) {
  if (s.is_atom("true")) return Formula::top();
  if (s.is_atom("false")) return Formula::bottom();
  if (!s.is_list || s.items.empty() || !s.items[0].is_atom()) s.fail("expected formula");
  const auto& head = s.items[0].atom;
  const auto argc = s.items.size() - 1;
  auto sub = [&](std::size_t i) { return parse_formula(s.items[i]); };
  if (head == "and" || head == "or") {
    std::vector<Formula> cs;
    for (std::size_t i = 1; i < s.items.size(); ++i) cs.push_back(sub(i));
    return head == "and" ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
  }
  if (head == "not") {
    if (argc != 1) s.fail("not takes one argument");
    return negate(sub(1));
  }
  if (head == "implies") {
    if (argc != 2) s.fail("implies takes two arguments");
    return implies(sub(1), sub(2));
  }
  if (head == "forall" || head == "exists") {
    if (argc != 2) s.fail(head + " takes a variable list and a body");
    auto vars = parse_vars(s.items[1]);
    return head == "forall" ? Formula::forall(std::move(vars), sub(2)) : Formula::exists(std::move(vars), sub(2));
  }
  if (head == "exists>=") {
    if (argc != 3) s.fail("exists>= takes a count, one variable and a body");
    auto n = parse_count(s.items[1], "count");
    auto vars = parse_vars(s.items[2]);
    if (vars.size() != 1) s.items[2].fail("exists>= binds exactly one variable");
    return at_least(n, vars[0], sub(3));
  }
  if (head == "schema") return parse_schema(s);
  if (head != "=" && !is_identifier(head)) s.items[0].fail("malformed predicate symbol");
  if (head == "=" && argc != 2) s.fail("= takes two terms");
  Atom a{Symbol(head), {}};
  for (std::size_t i = 1; i < s.items.size(); ++i) a.args.push_back(parse_term(s.items[i]));
  return Formula::atom(std::move(a));
}

Formula parse_formula(std::string_view text) { return parse_formula(read_sexp(text)); }

}  // namespace scottlab
