#include "scottlab/scott.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "scottlab/normal_form.hpp"

namespace scottlab {

Symbol orbit_var(std::size_t i) { return Symbol("x" + std::to_string(i + 1)); }

std::vector<Symbol> orbit_vars(std::size_t k) {
  std::vector<Symbol> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(orbit_var(i));
  return out;
}

std::vector<Formula> atomic_diagram(const FinStructure& a, const std::vector<Element>& elems,
                                    const std::vector<Term>& names) {
  const auto& sig = a.signature();
  const std::size_t m = elems.size();
  auto name_of = [&](Element e) -> std::optional<Term> {
    for (std::size_t i = 0; i < m; ++i)
      if (elems[i] == e) return names[i];
    return std::nullopt;
  };
  std::vector<Formula> out;
  for (const auto& [r, k] : sig.relations)
    for (const auto& idx : all_tuples(m, k)) {
      Tuple t;
      Atom at{r, {}};
      for (auto i : idx) {
        t.push_back(elems[i]);
        at.args.push_back(names[i]);
      }
      out.push_back(Formula::atom(std::move(at), a.holds(r, t)));
    }
  for (const auto& [f, k] : sig.functions)
    for (const auto& idx : all_tuples(m, k)) {
      Tuple t;
      std::vector<Term> args;
      for (auto i : idx) {
        t.push_back(elems[i]);
        args.push_back(names[i]);
      }
      if (auto v = name_of(a.apply(f, t))) out.push_back(Formula::equals(Term::app(f, std::move(args)), *v));
    }
  for (const auto& c : sig.constants)
    if (auto v = name_of(a.constant(c))) out.push_back(Formula::equals(Term::constant(c), *v));
  return out;
}

Formula orbit_formula(const FinStructure& a, const Tuple& tuple, OrbitStyle style) {
  for (auto e : tuple)
    if (e >= a.size()) throw ScottError("tuple element " + std::to_string(e) + " outside universe");
  std::vector<Element> elems;
  std::vector<Term> names;
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    auto it = std::find(elems.begin(), elems.end(), tuple[i]);
    if (it == elems.end()) {
      elems.push_back(tuple[i]);
      names.push_back(Term::var(orbit_var(i)));
    } else {
      parts.push_back(Formula::equals(Term::var(orbit_var(i)), names[it - elems.begin()]));
    }
  }
  std::vector<Symbol> rest;
  for (Element e = 0; e < a.size(); ++e)
    if (std::find(elems.begin(), elems.end(), e) == elems.end()) {
      rest.emplace_back("y" + std::to_string(rest.size() + 1));
      elems.push_back(e);
      names.push_back(Term::var(rest.back()));
    }
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j) parts.push_back(Formula::equals(names[i], names[j], false));
  for (auto& lit : atomic_diagram(a, elems, names)) parts.push_back(std::move(lit));
  if (style == OrbitStyle::Covering) {
    Symbol w("w");
    std::vector<Formula> cover;
    for (const auto& n : names) cover.push_back(Formula::equals(Term::var(w), n));
    parts.push_back(Formula::forall({w}, Formula::disj(std::move(cover))));
  }
  return Formula::exists(std::move(rest), Formula::conj(std::move(parts)));
}

OrbitFamily orbit_family(const FinStructure& a, OrbitStyle style, std::optional<std::size_t> length_bound) {
  OrbitFamily fam;
  fam.length_bound = length_bound.value_or(style == OrbitStyle::Covering ? a.size() : a.size() + 1);
  for (std::size_t k = 1; k <= fam.length_bound; ++k)
    for (const auto& t : all_tuples(a.size(), k)) fam.formulas.emplace(t, orbit_formula(a, t, style));
  return fam;
}

namespace {

const Formula& member(const OrbitFamily& fam, const Tuple& t) {
  auto it = fam.formulas.find(t);
  if (it == fam.formulas.end()) {
    std::string s;
    for (auto e : t) s += (s.empty() ? "" : " ") + std::to_string(e);
    throw ScottError("orbit family is missing tuple (" + s + ")");
  }
  return it->second;
}

}  // namespace

Formula scott_sentence_from_orbits(const FinStructure& a, const OrbitFamily& family) {
  if (family.length_bound == 0) throw ScottError("orbit family must cover tuples of length 1");
  const std::size_t n = a.size();
  Symbol v("v");
  std::vector<Formula> rhos;
  for (std::size_t k = 0; k < family.length_bound; ++k)
    for (const auto& t : all_tuples(n, k)) {
      std::vector<Symbol> us;
      Assignment to_u;
      for (std::size_t i = 0; i < k; ++i) {
        us.emplace_back("u" + std::to_string(i + 1));
        to_u[orbit_var(i)] = Term::var(us.back());
      }
      Assignment ext = to_u;
      ext[orbit_var(k)] = Term::var(v);
      std::vector<Formula> body;
      std::vector<Formula> some;
      for (Element b = 0; b < n; ++b) {
        Tuple tb = t;
        tb.push_back(b);
        auto phi = substitute(member(family, tb), ext);
        body.push_back(Formula::exists({v}, phi));
        some.push_back(phi);
      }
      body.push_back(Formula::forall({v}, Formula::disj(std::move(some))));
      auto conclusion = Formula::conj(std::move(body));
      if (k == 0) {
        rhos.push_back(conclusion);
      } else {
        auto hyp = substitute(member(family, t), to_u);
        rhos.push_back(forall_implies(us, hyp, conclusion));
      }
    }
  return Formula::conj(std::move(rhos));
}

Formula sigma2_scott_sentence(const FinStructure& a) {
  Tuple all(a.size());
  std::iota(all.begin(), all.end(), Element{0});
  return Formula::exists(orbit_vars(a.size()), orbit_formula(a, all, OrbitStyle::Covering));
}

std::vector<Tuple> satisfying_tuples(const FinStructure& a, const Formula& f, std::size_t k, std::size_t budget) {
  check_signature(a.signature(), f);
  FinModel m(a);
  Evaluator<FinModel> ev(m, budget);
  std::vector<Tuple> out;
  auto vars = orbit_vars(k);
  for (const auto& t : all_tuples(a.size(), k)) {
    Valuation env;
    for (std::size_t i = 0; i < k; ++i) env.vars[vars[i]] = t[i];
    if (ev.eval(f, env) == Verdict3::True) out.push_back(t);
  }
  return out;
}

bool is_partial_isomorphism(const FinStructure& a, const FinStructure& b, const PartialMap& f) {
  if (!(a.signature() == b.signature())) throw ModelError("signature mismatch");
  std::vector<Element> dom;
  std::set<Element> ran;
  for (auto [x, y] : f) {
    if (x >= a.size() || y >= b.size()) return false;
    if (!ran.insert(y).second) return false;
    dom.push_back(x);
  }
  auto image = [&](const Tuple& t) {
    Tuple u;
    for (auto x : t) u.push_back(f.at(x));
    return u;
  };
  const auto& sig = a.signature();
  for (const auto& [r, k] : sig.relations)
    for (const auto& idx : all_tuples(dom.size(), k)) {
      Tuple t;
      for (auto i : idx) t.push_back(dom[i]);
      if (a.holds(r, t) != b.holds(r, image(t))) return false;
    }
  for (const auto& [g, k] : sig.functions)
    for (const auto& idx : all_tuples(dom.size(), k)) {
      Tuple t;
      for (auto i : idx) t.push_back(dom[i]);
      auto va = a.apply(g, t);
      auto vb = b.apply(g, image(t));
      for (auto d : dom)
        if ((va == d) != (vb == f.at(d))) return false;
    }
  for (const auto& c : sig.constants)
    for (auto d : dom)
      if ((a.constant(c) == d) != (b.constant(c) == f.at(d))) return false;
  return true;
}

FiniteMapFamily all_partial_isomorphisms(const FinStructure& a, const FinStructure& b) {
  FiniteMapFamily out;
  PartialMap f;
  std::vector<bool> used(b.size(), false);
  std::function<void(Element)> go = [&](Element x) {
    if (!is_partial_isomorphism(a, b, f)) return;
    if (x == a.size()) {
      out.insert(f);
      return;
    }
    go(x + 1);
    for (Element y = 0; y < b.size(); ++y) {
      if (used[y]) continue;
      used[y] = true;
      f[x] = y;
      go(x + 1);
      f.erase(x);
      used[y] = false;
    }
  };
  go(0);
  return out;
}

FiniteMapFamily family_maps(const FinStructure& a, const FinStructure& b, const OrbitFamily& family,
                            std::size_t budget) {
  if (!(a.signature() == b.signature())) throw ModelError("signature mismatch");
  FiniteMapFamily out{PartialMap{}};
  for (const auto& [t, phi] : family.formulas)
    for (const auto& u : satisfying_tuples(b, phi, t.size(), budget)) {
      PartialMap f;
      bool ok = true;
      for (std::size_t i = 0; i < t.size() && ok; ++i) {
        auto [it, fresh] = f.emplace(t[i], u[i]);
        if (!fresh && it->second != u[i]) ok = false;
      }
      std::set<Element> ran;
      for (auto [x, y] : f) ok = ok && ran.insert(y).second;
      if (ok) out.insert(std::move(f));
    }
  return out;
}

namespace {

bool extends(const PartialMap& g, const PartialMap& f) {
  for (auto [x, y] : f) {
    auto it = g.find(x);
    if (it == g.end() || it->second != y) return false;
  }
  return true;
}

}  // namespace

bool check_back_and_forth(const FiniteMapFamily& family, const FinStructure& a, const FinStructure& b) {
  for (const auto& f : family) {
    std::vector<const PartialMap*> ext;
    for (const auto& g : family)
      if (extends(g, f)) ext.push_back(&g);
    for (Element x = 0; x < a.size(); ++x)
      if (std::none_of(ext.begin(), ext.end(), [&](const PartialMap* g) { return g->count(x) > 0; })) return false;
    for (Element y = 0; y < b.size(); ++y)
      if (std::none_of(ext.begin(), ext.end(), [&](const PartialMap* g) {
            return std::any_of(g->begin(), g->end(), [&](const auto& p) { return p.second == y; });
          }))
        return false;
  }
  return true;
}

FiniteMapFamily isomorphism_restrictions(const FinStructure& a, const FinStructure& b) {
  FiniteMapFamily out{PartialMap{}};
  auto h = isomorphic(a, b);
  if (!h) return out;
  const std::size_t n = a.size();
  for (const auto& g : automorphisms(a))
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      PartialMap f;
      for (Element x = 0; x < n; ++x)
        if (mask >> x & 1) f[x] = (*h)[g[x]];
      out.insert(std::move(f));
    }
  return out;
}

// The guard is conjoined where it does not change the normal-form class: next
// to the matrix on the Sigma side, at the top on the Pi side.
Formula guard_formula(bool flag, const Formula& phi) {
  const Formula g = flag ? Formula::top() : Formula::bottom();
  switch (phi.kind()) {
    case Kind::Or:
      if (!phi.is_schema()) {
        std::vector<Formula> cs;
        for (const auto& c : phi.children()) cs.push_back(guard_formula(flag, c));
        return Formula::disj(std::move(cs));
      }
      if (!phi.schema().negated && (phi.schema().family == "table" || phi.schema().family == "cycle")) {
        Schema s = phi.schema();
        for (auto& f : s.forms) f = guard_formula(flag, f);
        return Formula::schema(Kind::Or, std::move(s));
      }
      break;
    case Kind::Exists:
      return Formula::exists(phi.vars(), guard_formula(flag, phi.body()));
    case Kind::And:
      if (!phi.is_schema()) {
        auto cs = phi.children();
        cs.push_back(g);
        return Formula::conj(std::move(cs));
      }
      break;
    default:
      break;
  }
  return Formula::conj({phi, g});
}

VerifyReport verify_scott_sentence(const Formula& phi, const FinStructure& a, std::size_t max_size,
                                   std::size_t budget, std::uint64_t limit) {
  const auto& sig = a.signature();
  check_signature(sig, phi);
  std::uint64_t total = 0;
  for (std::size_t n = 1; n <= max_size; ++n) {
    total += structure_count(sig, n);
    if (total > limit) throw EnumerationRefused(total, limit);
  }
  VerifyReport rep;
  rep.max_size = max_size;
  for (std::size_t n = 1; n <= max_size; ++n) {
    std::size_t index = 0;
    for_each_structure(
        sig, n,
        [&](const FinStructure& b) {
          ++rep.checked;
          bool iso = n == a.size() && isomorphic(b, a).has_value();
          FinModel m(b);
          Evaluator<FinModel> ev(m, budget);
          Valuation env;
          auto v = ev.eval(phi, env);
          rep.copies_found += iso;
          VerifyEntry e{n, index++, b, v};
          if (v == Verdict3::Unknown) {
            rep.unknowns_in_class += iso;
            rep.unknowns.push_back(std::move(e));
          } else if (v == Verdict3::True && !iso) {
            rep.false_positives.push_back(std::move(e));
          } else if (v == Verdict3::False && iso) {
            rep.false_negatives.push_back(std::move(e));
          }
          return true;
        },
        limit);
  }
  return rep;
}

}  // namespace scottlab
