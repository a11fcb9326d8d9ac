#include "scottlab/normal_form.hpp"

namespace scottlab {

namespace {

// Combines a and b under `join` (Or for pi_or, And for sigma_and), pulling
// the dual connective `pull` and quantifier `q` of either side outward.
Formula combine(const Formula& a, const Formula& b, Kind join, Kind pull, Kind q) {
  auto recur = [&](const Formula& x, const Formula& y) { return combine(x, y, join, pull, q); };
  auto make_list = [&](Kind k, std::vector<Formula> cs) {
    return k == Kind::And ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
  };
  auto make_q = [&](std::vector<Symbol> vs, Formula body) {
    return q == Kind::Forall ? Formula::forall(std::move(vs), std::move(body))
                             : Formula::exists(std::move(vs), std::move(body));
  };
  // Pulls the outer structure of `x` across `other`; x_first keeps operand order.
  auto lift = [&](const Formula& x, const Formula& other, bool x_first) -> std::optional<Formula> {
    if (x.kind() == pull && !x.is_schema()) {
      // Quantifier-free children stay together as one unit; only the rest
      // need distributing.
      std::vector<Formula> qf, rest;
      std::size_t group_at = 0;
      for (const auto& c : x.children()) {
        if (!is_finitary_qf(c)) {
          rest.push_back(c);
          continue;
        }
        if (qf.empty()) group_at = rest.size();
        qf.push_back(c);
      }
      if (rest.empty() && !qf.empty()) return std::nullopt;
      std::vector<Formula> units = rest;
      if (!qf.empty())
        units.insert(units.begin() + static_cast<std::ptrdiff_t>(group_at),
                     qf.size() == 1 ? qf.front() : make_list(pull, qf));
      std::vector<Formula> cs;
      for (const auto& c : units) cs.push_back(x_first ? recur(c, other) : recur(other, c));
      return make_list(pull, std::move(cs));
    }
    if (x.kind() == q) {
      auto clash = free_vars(other);
      auto avoid = clash;
      for (const auto& v : free_vars(x)) avoid.insert(v);
      for (const auto& v : x.vars()) avoid.insert(v);
      std::vector<Symbol> vs;
      Assignment ren;
      for (const auto& v : x.vars()) {
        if (clash.contains(v)) {
          Symbol w = fresh_variable(v, avoid);
          avoid.insert(w);
          ren[v] = Term::var(w);
          vs.push_back(w);
        } else {
          vs.push_back(v);
        }
      }
      auto body = ren.empty() ? x.body() : substitute(x.body(), ren);
      return make_q(std::move(vs), x_first ? recur(body, other) : recur(other, body));
    }
    return std::nullopt;
  };
  if (auto r = lift(a, b, true)) return *r;
  if (auto r = lift(b, a, false)) return *r;
  std::vector<Formula> cs;
  for (const auto& x : {a, b}) {
    if (x.kind() == join && !x.is_schema())
      cs.insert(cs.end(), x.children().begin(), x.children().end());
    else
      cs.push_back(x);
  }
  if (cs.size() == 1) return cs.front();
  return make_list(join, std::move(cs));
}

}  // namespace

Formula pi_or(const Formula& a, const Formula& b) { return combine(a, b, Kind::Or, Kind::And, Kind::Forall); }

Formula sigma_and(const Formula& a, const Formula& b) { return combine(a, b, Kind::And, Kind::Or, Kind::Exists); }

Formula forall_implies(const std::vector<Symbol>& u, const Formula& antecedent, const Formula& consequent) {
  return Formula::forall(u, pi_or(negate(antecedent), consequent));
}

}  // namespace scottlab
