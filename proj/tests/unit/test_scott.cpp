#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "scottlab/formula_io.hpp"
#include "scottlab/scott.hpp"

using namespace scottlab;

namespace {

Signature binary_sig() {
  Signature s;
  s.relations[Symbol("R")] = 2;
  return s;
}

FinStructure digraph(std::size_t n, std::vector<std::pair<Element, Element>> edges) {
  FinStructure a(binary_sig(), n);
  for (auto [x, y] : edges) a.set_relation(Symbol("R"), {x, y}, true);
  return a;
}

// Brute-force orbit of t: images under every permutation that preserves R.
std::set<Tuple> orbit_oracle(const FinStructure& a, const Tuple& t) {
  std::vector<Element> p(a.size());
  std::iota(p.begin(), p.end(), Element{0});
  std::set<Tuple> out;
  do {
    bool aut = true;
    for (Element x = 0; x < a.size() && aut; ++x)
      for (Element y = 0; y < a.size() && aut; ++y)
        aut = a.holds(Symbol("R"), {x, y}) == a.holds(Symbol("R"), {p[x], p[y]});
    if (!aut) continue;
    Tuple u;
    for (auto x : t) u.push_back(p[x]);
    out.insert(u);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Independent back-and-forth oracle: Duplicator's winning region in the
// game whose positions are the maps of F. Spoiler names a point on either
// side; Duplicator must move to an extension in F covering it. Losing
// positions are removed until nothing changes.
bool game_oracle(const FiniteMapFamily& fam, const FinStructure& a, const FinStructure& b) {
  std::vector<PartialMap> pos(fam.begin(), fam.end());
  std::vector<bool> alive(pos.size(), true);
  auto sub = [](const PartialMap& f, const PartialMap& g) {
    return std::includes(g.begin(), g.end(), f.begin(), f.end());
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (!alive[i]) continue;
      auto answer = [&](auto covers) {
        for (std::size_t j = 0; j < pos.size(); ++j)
          if (alive[j] && sub(pos[i], pos[j]) && covers(pos[j])) return true;
        return false;
      };
      bool ok = true;
      for (Element x = 0; x < a.size() && ok; ++x) ok = answer([&](const PartialMap& g) { return g.count(x) > 0; });
      for (Element y = 0; y < b.size() && ok; ++y)
        ok = answer([&](const PartialMap& g) {
          for (auto [s, t] : g)
            if (t == y) return true;
          return false;
        });
      if (!ok) {
        alive[i] = false;
        changed = true;
      }
    }
  }
  return std::all_of(alive.begin(), alive.end(), [](bool x) { return x; });
}

}  // namespace

TEST_CASE("orbit formula examples") {
  auto order = digraph(2, {{0, 1}});
  auto f = orbit_formula(order, {0});
  CHECK(satisfying_tuples(order, f, 1) == std::vector<Tuple>{{0}});
  auto c3 = digraph(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(satisfying_tuples(c3, orbit_formula(c3, {0}), 1).size() == 3);
  CHECK(classify(orbit_formula(c3, {0})) == Classification{Side::Sigma, Ordinal::finite(2)});
  CHECK(classify(orbit_formula(c3, {0}, OrbitStyle::Diagram)) == Classification{Side::Sigma, Ordinal::finite(1)});

  // Full universe tuple: exactly the automorphic images of the enumeration.
  auto full = satisfying_tuples(c3, orbit_formula(c3, {0, 1, 2}), 3);
  CHECK(full == std::vector<Tuple>{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}});
  CHECK_THROWS_AS(orbit_formula(c3, {3}), ScottError);
}

TEST_CASE("orbit formulas define brute-force orbits on all small digraphs") {
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& a : enumerate_structures(binary_sig(), n))
      for (std::size_t k = 1; k <= 2; ++k)
        for (const auto& t : all_tuples(n, k))
          for (auto style : {OrbitStyle::Covering, OrbitStyle::Diagram}) {
            auto f = orbit_formula(a, t, style);
            auto xs = orbit_vars(k);
            CHECK(free_vars(f) == std::set<Symbol>(xs.begin(), xs.end()));
            auto got = satisfying_tuples(a, f, k);
            auto want = orbit_oracle(a, t);
            CHECK(std::set<Tuple>(got.begin(), got.end()) == want);
          }
}

TEST_CASE("scott sentence classification and small verification") {
  auto order = digraph(2, {{0, 1}});
  auto s1 = scott_sentence_from_orbits(order, orbit_family(order, OrbitStyle::Diagram));
  CHECK(classify(s1) == Classification{Side::Pi, Ordinal::finite(2)});
  auto s2 = scott_sentence_from_orbits(order, orbit_family(order));
  CHECK(classify(s2) == Classification{Side::Pi, Ordinal::finite(3)});

  for (const auto& phi : {s1, s2}) {
    auto rep = verify_scott_sentence(phi, order, 3);
    CHECK(rep.ok());
    CHECK(rep.checked == 2 + 16 + 512);
    CHECK(rep.copies_found == 2);
  }

  Signature unary;
  unary.relations[Symbol("U")] = 1;
  FinStructure one(unary, 1);
  one.set_relation(Symbol("U"), {0}, true);
  auto s = scott_sentence_from_orbits(one, orbit_family(one));
  CHECK(evaluate(one, s, {}, 8) == Verdict3::True);

  OrbitFamily partial = orbit_family(order);
  partial.formulas.erase(Tuple{1, 0});
  CHECK_THROWS_AS(scott_sentence_from_orbits(order, partial), ScottError);
}

TEST_CASE("diagram-style Scott sentences need tuples one longer than the universe") {
  // With only |A|-tuples the sentence cannot rule out larger structures.
  auto a = digraph(1, {});
  auto short_fam = orbit_family(a, OrbitStyle::Diagram, 1);
  auto rep = verify_scott_sentence(scott_sentence_from_orbits(a, short_fam), a, 2);
  CHECK_FALSE(rep.false_positives.empty());
  auto rep2 = verify_scott_sentence(scott_sentence_from_orbits(a, orbit_family(a, OrbitStyle::Diagram)), a, 2);
  CHECK(rep2.ok());
}

TEST_CASE("verify reports for trivial sentences") {
  auto a = digraph(2, {{0, 1}});
  auto bot = verify_scott_sentence(Formula::bottom(), a, 2);
  CHECK(bot.missing_class());
  CHECK(bot.false_negatives.size() == 2);
  CHECK(bot.false_positives.empty());
  auto top = verify_scott_sentence(Formula::top(), a, 2);
  CHECK(top.false_positives.size() == top.checked - top.copies_found);
  CHECK_FALSE(top.missing_class());
  CHECK_THROWS_AS(verify_scott_sentence(Formula::top(), a, 5), EnumerationRefused);
}

TEST_CASE("back-and-forth examples") {
  auto rigid = digraph(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(automorphisms(rigid).size() == 1);
  CHECK(check_back_and_forth(isomorphism_restrictions(rigid, rigid), rigid, rigid));
  // Not every partial isomorphism extends: 0->1, 1->2 has nowhere to send 2.
  CHECK(is_partial_isomorphism(rigid, rigid, {{0, 1}, {1, 2}}));
  CHECK_FALSE(check_back_and_forth(all_partial_isomorphisms(rigid, rigid), rigid, rigid));

  Signature unary;
  unary.relations[Symbol("U")] = 1;
  FinStructure a(unary, 2), b(unary, 3);
  a.set_relation(Symbol("U"), {0}, true);
  b.set_relation(Symbol("U"), {0}, true);
  b.set_relation(Symbol("U"), {1}, true);
  CHECK_FALSE(check_back_and_forth({PartialMap{}}, a, b));

  auto c3 = digraph(3, {{0, 1}, {1, 2}, {2, 0}});
  auto fam = orbit_family(c3);
  auto maps = family_maps(c3, c3, fam);
  for (const auto& f : maps) CHECK(is_partial_isomorphism(c3, c3, f));
  CHECK(check_back_and_forth(maps, c3, c3));
  auto moved = c3.relabel({2, 0, 1});
  CHECK(check_back_and_forth(family_maps(c3, moved, fam), c3, moved));
}

TEST_CASE("back-and-forth agrees with the game oracle") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t na = 1 + rng() % 3, nb = 1 + rng() % 3;
    FinStructure a(binary_sig(), na), b(binary_sig(), nb);
    for (const auto& t : all_tuples(na, 2)) a.set_relation(Symbol("R"), t, rng() % 3 == 0);
    for (const auto& t : all_tuples(nb, 2)) b.set_relation(Symbol("R"), t, rng() % 3 == 0);
    if (trial % 4 == 0) b = a.relabel([&] {
      std::vector<Element> p(na);
      std::iota(p.begin(), p.end(), Element{0});
      std::shuffle(p.begin(), p.end(), rng);
      return p;
    }());
    auto all = all_partial_isomorphisms(a, b);
    CHECK(check_back_and_forth(all, a, b) == game_oracle(all, a, b));
    const bool iso = a.size() == b.size() && isomorphic(a, b).has_value();
    if (check_back_and_forth(all, a, b)) CHECK(iso);
    auto restr = isomorphism_restrictions(a, b);
    CHECK(check_back_and_forth(restr, a, b) == iso);
    CHECK(game_oracle(restr, a, b) == iso);
    FiniteMapFamily some;
    for (const auto& f : all)
      if (rng() % 4 != 0) some.insert(f);
    CHECK(check_back_and_forth(some, a, b) == game_oracle(some, a, b));
  }
}

TEST_CASE("size-4 structures: back-and-forth of all partial isomorphisms matches isomorphism") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    FinStructure a(binary_sig(), 4);
    for (const auto& t : all_tuples(4, 2)) a.set_relation(Symbol("R"), t, rng() % 3 == 0);
    auto b = a;
    auto t = all_tuples(4, 2)[rng() % 16];
    b.set_relation(Symbol("R"), t, !b.holds(Symbol("R"), t));
    for (const auto& c : {a, b}) {
      auto all = all_partial_isomorphisms(a, c);
      CHECK(check_back_and_forth(all, a, c) == game_oracle(all, a, c));
      if (check_back_and_forth(all, a, c)) CHECK(isomorphic(a, c).has_value());
      auto restr = isomorphism_restrictions(a, c);
      CHECK(check_back_and_forth(restr, a, c) == isomorphic(a, c).has_value());
    }
  }
}

TEST_CASE("guard formula") {
  auto r = parse_formula("(R x x)");
  auto g = guard_formula(true, r);
  auto h = guard_formula(false, r);
  CHECK(classify(g) == classify(r));
  CHECK(classify(h) == classify(r));
  auto ex = parse_formula("(exists (y) (R x y))");
  CHECK(classify(guard_formula(true, ex)) == classify(ex));
  auto loop = digraph(1, {{0, 0}});
  Valuation v;
  v.vars[Symbol("x")] = 0;
  CHECK(evaluate(loop, g, v, 1) == Verdict3::True);
  CHECK(evaluate(loop, h, v, 1) == Verdict3::False);
}
