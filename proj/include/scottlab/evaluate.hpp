#pragma once

// Three-valued model checking shared by finite structures and group balls.
//
// A model supplies
//   using Element
//   const std::vector<Element>& domain() const   quantifier range
//   bool domain_is_complete() const              false for proper balls
//   Element constant(Symbol) const
//   Element apply(Symbol fn, std::span<const Element>) const
//   bool holds(Symbol rel, std::span<const Element>) const
// Equality is Element ==.
//
// Schemas are expanded up to `budget` children. An And is False as soon as
// one expanded child is False and True only when the enumerator ran out;
// anything else is Unknown (dually for Or). Over an incomplete domain a
// universal that came out True, or an existential that came out False, is
// downgraded to Unknown.
//
// With memoize set, the verdict of each quantifier node is cached against
// the values of its free variables. Nodes mentioning Henkin constants are
// not cached.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scottlab/formula.hpp"

namespace scottlab {

enum class Verdict3 : std::uint8_t { False, True, Unknown };

inline Verdict3 from_bool(bool b) { return b ? Verdict3::True : Verdict3::False; }
inline Verdict3 flip(Verdict3 v) {
  return v == Verdict3::True ? Verdict3::False : v == Verdict3::False ? Verdict3::True : v;
}
inline bool determinate(Verdict3 v) { return v != Verdict3::Unknown; }
std::string to_string(Verdict3 v);

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class E>
struct Env {
  std::map<Symbol, E, SymbolIdLess> vars;
  std::map<std::uint32_t, E> henkin;

  friend bool operator==(const Env&, const Env&) = default;
};

template <class Model>
class Evaluator {
 public:
  using Element = typename Model::Element;

  Evaluator(const Model& model, std::size_t budget, bool memoize = false)
      : model_(model), budget_(budget), memoize_(memoize) {}

  Verdict3 eval(const Formula& f, Env<Element>& env) {
    switch (f.kind()) {
      case Kind::AtomPos:
        return from_bool(atom(f.atom(), env));
      case Kind::AtomNeg:
        return from_bool(!atom(f.atom(), env));
      case Kind::And:
      case Kind::Or:
        return f.is_schema() ? schema(f, env) : list(f.kind(), f.children(), env);
      case Kind::Forall:
      case Kind::Exists: {
        if (!memoize_) return quantifier(f, env);
        auto [it, fresh] = memo_.try_emplace(&f.vars());
        Memo& m = it->second;
        if (fresh) {
          m.owner = f;
          m.usable = !has_henkin_constants(f);
          auto fv = free_vars(f);
          m.free.assign(fv.begin(), fv.end());
        }
        if (!m.usable) return quantifier(f, env);
        std::vector<Element> key;
        key.reserve(m.free.size());
        for (const auto& v : m.free) {
          auto at = env.vars.find(v);
          if (at == env.vars.end()) return quantifier(f, env);
          key.push_back(at->second);
        }
        if (auto hit = m.values.find(key); hit != m.values.end()) return hit->second;
        Verdict3 v = quantifier(f, env);
        m.values.emplace(std::move(key), v);
        return v;
      }
    }
    return Verdict3::Unknown;
  }

  Element term(const Term& t, const Env<Element>& env) const {
    switch (t.kind) {
      case Term::Kind::Var: {
        auto it = env.vars.find(t.symbol);
        if (it == env.vars.end()) throw EvalError("unbound variable " + t.symbol.name());
        return it->second;
      }
      case Term::Kind::Henkin: {
        auto it = env.henkin.find(t.henkin);
        if (it == env.henkin.end()) throw EvalError("unassigned constant #" + std::to_string(t.henkin));
        return it->second;
      }
      case Term::Kind::Const:
        return model_.constant(t.symbol);
      case Term::Kind::App: {
        const auto n = t.args.size();
        if (n <= kInline) {
          std::array<Element, kInline> buf;
          for (std::size_t i = 0; i < n; ++i) buf[i] = term(t.args[i], env);
          return model_.apply(t.symbol, std::span<const Element>(buf.data(), n));
        }
        std::vector<Element> args;
        args.reserve(n);
        for (const auto& a : t.args) args.push_back(term(a, env));
        return model_.apply(t.symbol, std::span<const Element>(args));
      }
    }
    throw EvalError("bad term");
  }

 private:
  static constexpr std::size_t kInline = 4;

  Verdict3 quantifier(const Formula& f, Env<Element>& env) {
    const bool universal = f.kind() == Kind::Forall;
    Verdict3 v = block(f.vars(), 0, f.body(), universal, env);
    if (!model_.domain_is_complete() && v == from_bool(universal)) return Verdict3::Unknown;
    return v;
  }

  bool atom(const Atom& a, const Env<Element>& env) const {
    if (a.is_equality()) {
      if (a.args.size() != 2) throw EvalError("equality takes two arguments");
      return term(a.args[0], env) == term(a.args[1], env);
    }
    const auto n = a.args.size();
    if (n <= kInline) {
      std::array<Element, kInline> buf;
      for (std::size_t i = 0; i < n; ++i) buf[i] = term(a.args[i], env);
      return model_.holds(a.predicate, std::span<const Element>(buf.data(), n));
    }
    std::vector<Element> args;
    args.reserve(n);
    for (const auto& t : a.args) args.push_back(term(t, env));
    return model_.holds(a.predicate, std::span<const Element>(args));
  }

  // Kleene conjunction / disjunction with short-circuit on the absorbing value.
  Verdict3 list(Kind k, const std::vector<Formula>& cs, Env<Element>& env) {
    const Verdict3 absorb = k == Kind::And ? Verdict3::False : Verdict3::True;
    bool unknown = false;
    for (const auto& c : cs) {
      Verdict3 v = eval(c, env);
      if (v == absorb) return absorb;
      unknown |= v == Verdict3::Unknown;
    }
    return unknown ? Verdict3::Unknown : flip(absorb);
  }

  Verdict3 schema(const Formula& f, Env<Element>& env) {
    const Schema& s = f.schema();
    pin(f);
    const Verdict3 absorb = f.kind() == Kind::And ? Verdict3::False : Verdict3::True;
    bool unknown = false;
    std::size_t i = 0;
    for (; i < budget_; ++i) {
      auto c = child(s, i);
      if (!c) break;
      Verdict3 v = eval(*c, env);
      if (v == absorb) return absorb;
      unknown |= v == Verdict3::Unknown;
    }
    const bool exhausted = i < budget_ || !child(s, budget_);
    if (!exhausted) return Verdict3::Unknown;
    return unknown ? Verdict3::Unknown : flip(absorb);
  }

  Verdict3 block(const std::vector<Symbol>& vars, std::size_t at, const Formula& body, bool universal,
                 Env<Element>& env) {
    if (at == vars.size()) return eval(body, env);
    const Verdict3 absorb = universal ? Verdict3::False : Verdict3::True;
    auto saved = env.vars.find(vars[at]) == env.vars.end()
                     ? std::optional<Element>()
                     : std::optional<Element>(env.vars.at(vars[at]));
    bool unknown = false;
    Verdict3 result = Verdict3::Unknown;
    bool done = false;
    for (const auto& e : model_.domain()) {
      env.vars.insert_or_assign(vars[at], e);
      Verdict3 v = block(vars, at + 1, body, universal, env);
      if (v == absorb) {
        result = absorb;
        done = true;
        break;
      }
      unknown |= v == Verdict3::Unknown;
    }
    if (!done) result = unknown ? Verdict3::Unknown : flip(absorb);
    if (saved)
      env.vars.insert_or_assign(vars[at], *saved);
    else
      env.vars.erase(vars[at]);
    return result;
  }

  // Children are cached per schema node; each entry keeps its node alive so
  // an address is never reused while cached.
  struct Cached {
    Formula owner;
    std::vector<std::optional<Formula>> children;
  };

  void pin(const Formula& f) {
    auto [it, fresh] = cache_.try_emplace(&f.schema());
    if (fresh) it->second.owner = f;
  }

  const std::optional<Formula>& child(const Schema& s, std::size_t i) {
    auto& slot = cache_.at(&s).children;
    while (slot.size() <= i) slot.push_back(schema_child(s, slot.size()));
    return slot[i];
  }

  struct Memo {
    Formula owner;
    bool usable = false;
    std::vector<Symbol> free;
    std::map<std::vector<Element>, Verdict3> values;
  };

  const Model& model_;
  std::size_t budget_;
  bool memoize_;
  std::map<const Schema*, Cached> cache_;
  std::map<const void*, Memo> memo_;
};

}  // namespace scottlab
