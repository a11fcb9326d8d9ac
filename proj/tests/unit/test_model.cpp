#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "scottlab/formula_io.hpp"
#include "scottlab/model.hpp"
#include "scottlab/words.hpp"
#include "support/corpus.hpp"

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

// Independent oracle: an isomorphism is any permutation preserving every
// table entry, checked cell by cell over all permutations.
bool is_iso(const FinStructure& a, const FinStructure& b, const std::vector<Element>& p) {
  const auto& sig = a.signature();
  for (const auto& [r, k] : sig.relations)
    for (const auto& t : all_tuples(a.size(), k)) {
      Tuple u;
      for (auto x : t) u.push_back(p[x]);
      if (a.holds(r, t) != b.holds(r, u)) return false;
    }
  for (const auto& [f, k] : sig.functions)
    for (const auto& t : all_tuples(a.size(), k)) {
      Tuple u;
      for (auto x : t) u.push_back(p[x]);
      if (p[a.apply(f, t)] != b.apply(f, u)) return false;
    }
  for (const auto& c : sig.constants)
    if (p[a.constant(c)] != b.constant(c)) return false;
  return true;
}

std::vector<std::vector<Element>> all_perms(std::size_t n) {
  std::vector<Element> p(n);
  std::iota(p.begin(), p.end(), Element{0});
  std::vector<std::vector<Element>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Canonical code of a digraph: least adjacency bit string over relabelings.
std::vector<std::uint8_t> canonical_code(const FinStructure& a) {
  std::vector<std::uint8_t> best;
  for (const auto& p : all_perms(a.size())) {
    auto b = a.relabel(p);
    const auto& t = b.relation_table(Symbol("R"));
    if (best.empty() || t < best) best = t;
  }
  return best;
}

Signature corpus_sig() {
  Signature s;
  s.relations[Symbol("R")] = 2;
  s.relations[Symbol("U")] = 1;
  s.functions[mul_symbol()] = 2;
  s.functions[inv_symbol()] = 1;
  s.constants.insert(Symbol("c"));
  s.constants.insert(identity_symbol());
  return s;
}

FinStructure random_structure(std::mt19937& rng, std::size_t n) {
  auto sig = corpus_sig();
  FinStructure a(sig, n);
  std::uniform_int_distribution<Element> el(0, static_cast<Element>(n - 1));
  for (const auto& [r, k] : sig.relations)
    for (const auto& t : all_tuples(n, k)) a.set_relation(r, t, rng() % 3 == 0);
  for (const auto& [f, k] : sig.functions)
    for (const auto& t : all_tuples(n, k)) a.set_function(f, t, el(rng));
  for (const auto& c : sig.constants) a.set_constant(c, el(rng));
  return a;
}

Valuation random_valuation(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<Element> el(0, static_cast<Element>(n - 1));
  Valuation v;
  for (auto name : {"x", "y", "z"}) v.vars[Symbol(name)] = el(rng);
  for (std::uint32_t i = 0; i < 3; ++i) v.henkin[i] = el(rng);
  return v;
}

}  // namespace

TEST_CASE("evaluate: basic examples") {
  auto a = digraph(2, {{0, 1}});
  CHECK(evaluate(a, parse_formula("(exists (x y) (R x y))"), {}, 8) == Verdict3::True);
  CHECK(evaluate(a, parse_formula("(forall (x) (exists (y) (R x y)))"), {}, 8) == Verdict3::False);

  // And-schema over an unbounded family whose first three children hold.
  auto s = parse_formula("(schema and cycle :forms ((exists (u) (R u u)) (R x y)) :class (Sigma 1))");
  auto loop = digraph(2, {{0, 1}, {1, 1}});
  Valuation v;
  v.vars[Symbol("x")] = 0;
  v.vars[Symbol("y")] = 1;
  CHECK(evaluate(loop, s, v, 3) == Verdict3::Unknown);
  CHECK(evaluate(loop, s, v, 0) == Verdict3::Unknown);
  CHECK(evaluate(loop, negate(s), v, 3) == Verdict3::Unknown);
  v.vars[Symbol("x")] = 1;
  v.vars[Symbol("y")] = 0;
  CHECK(evaluate(loop, s, v, 3) == Verdict3::False);

  auto table = parse_formula("(schema and table :forms ((R x y) (R y y)) :class (Both 0))");
  v.vars[Symbol("x")] = 0;
  v.vars[Symbol("y")] = 1;
  CHECK(evaluate(loop, table, v, 2) == Verdict3::True);
  CHECK(evaluate(loop, table, v, 1) == Verdict3::Unknown);
  CHECK(evaluate(loop, negate(table), v, 2) == Verdict3::False);
}

TEST_CASE("evaluate: errors") {
  auto a = digraph(2, {});
  CHECK_THROWS_AS(evaluate(a, parse_formula("(R x)"), {}, 1), EvalError);
  CHECK_THROWS_AS(evaluate(a, parse_formula("(R x y)"), {}, 1), EvalError);
  CHECK_THROWS_AS(evaluate(a, parse_formula("(S x)"), {}, 1), EvalError);
  Valuation v;
  v.vars[Symbol("x")] = 0;
  CHECK_THROWS_AS(evaluate(a, parse_formula("(= x #0)"), v, 1), EvalError);
}

TEST_CASE("isomorphic") {
  auto cyc = digraph(2, {{0, 1}, {1, 0}});
  auto anti = digraph(2, {});
  auto id = isomorphic(cyc, cyc);
  REQUIRE(id);
  CHECK(*id == std::vector<Element>{0, 1});
  CHECK_FALSE(isomorphic(cyc, anti));
  auto path = digraph(3, {{0, 1}, {1, 2}});
  auto path2 = digraph(3, {{2, 0}, {0, 1}});
  auto w = isomorphic(path, path2);
  REQUIRE(w);
  CHECK(*w == std::vector<Element>{2, 0, 1});
  Signature other;
  other.relations[Symbol("U")] = 1;
  CHECK_THROWS_AS(isomorphic(cyc, FinStructure(other, 2)), ModelError);
}

TEST_CASE("isomorphism classes of small digraphs agree with a canonical-form oracle") {
  const std::size_t expected[] = {0, 2, 10, 104};
  for (std::size_t n = 1; n <= 3; ++n) {
    std::set<std::vector<std::uint8_t>> oracle;
    std::vector<FinStructure> reps;
    for (const auto& a : enumerate_structures(binary_sig(), n)) {
      oracle.insert(canonical_code(a));
      bool found = false;
      for (const auto& r : reps)
        if (isomorphic(a, r)) {
          found = true;
          break;
        }
      if (!found) reps.push_back(a);
    }
    CHECK(oracle.size() == expected[n]);
    CHECK(reps.size() == oracle.size());
  }
}

TEST_CASE("isomorphism witness is the least permutation that works") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    auto a = random_structure(rng, 3);
    auto perms = all_perms(3);
    auto b = a.relabel(perms[rng() % perms.size()]);
    auto w = isomorphic(a, b);
    REQUIRE(w);
    std::optional<std::vector<Element>> least;
    for (const auto& p : perms)
      if (is_iso(a, b, p)) {
        least = p;
        break;
      }
    CHECK(w == least);
  }
}

TEST_CASE("automorphism orbits") {
  auto c3 = digraph(3, {{0, 1}, {1, 2}, {2, 0}});
  auto o = automorphism_orbits(c3, 1);
  REQUIRE(o.size() == 1);
  CHECK(o[0].size() == 3);

  auto order = digraph(2, {{0, 1}});
  auto lo = automorphism_orbits(order, 1);
  REQUIRE(lo.size() == 2);
  CHECK(lo[0] == std::vector<Tuple>{{0}});
  CHECK(lo[1] == std::vector<Tuple>{{1}});

  CHECK(automorphism_orbits(c3, 2).size() == 3);
  CHECK_THROWS_AS(automorphism_orbits(c3, 0), ModelError);
}

TEST_CASE("orbits agree with a brute-force permutation oracle and relabel along permutations") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    Signature sig = binary_sig();
    sig.relations[Symbol("U")] = 1;
    FinStructure a(sig, 4);
    for (const auto& t : all_tuples(4, 2)) a.set_relation(Symbol("R"), t, rng() % 4 == 0);
    for (const auto& t : all_tuples(4, 1)) a.set_relation(Symbol("U"), t, rng() % 2 == 0);

    std::vector<std::vector<Element>> autos;
    for (const auto& p : all_perms(4))
      if (is_iso(a, a, p)) autos.push_back(p);
    CHECK(automorphisms(a) == autos);

    for (std::size_t k = 1; k <= 2; ++k) {
      auto blocks = automorphism_orbits(a, k);
      std::map<Tuple, std::size_t> block_of;
      for (std::size_t i = 0; i < blocks.size(); ++i)
        for (const auto& t : blocks[i]) block_of[t] = i;
      CHECK(block_of.size() == all_tuples(4, k).size());
      for (const auto& t : all_tuples(4, k))
        for (const auto& u : all_tuples(4, k)) {
          bool related = false;
          for (const auto& g : autos) {
            Tuple img;
            for (auto x : t) img.push_back(g[x]);
            if (img == u) related = true;
          }
          CHECK(related == (block_of[t] == block_of[u]));
        }

      auto perm = all_perms(4)[rng() % 24];
      auto moved = automorphism_orbits(a.relabel(perm), k);
      std::set<std::set<Tuple>> expect, got;
      for (const auto& b : blocks) {
        std::set<Tuple> s;
        for (const auto& t : b) {
          Tuple u;
          for (auto x : t) u.push_back(perm[x]);
          s.insert(u);
        }
        expect.insert(s);
      }
      for (const auto& b : moved) got.insert(std::set<Tuple>(b.begin(), b.end()));
      CHECK(expect == got);
    }
  }
}

TEST_CASE("enumerate_structures counts and refusal") {
  Signature unary;
  unary.relations[Symbol("U")] = 1;
  CHECK(enumerate_structures(unary, 1).size() == 2);
  CHECK(enumerate_structures(binary_sig(), 2).size() == 16);
  CHECK(enumerate_structures(binary_sig(), 3).size() == 512);
  auto all = enumerate_structures(binary_sig(), 2);
  std::set<std::vector<std::uint8_t>> distinct;
  for (const auto& a : all) distinct.insert(a.relation_table(Symbol("R")));
  CHECK(distinct.size() == 16);
  CHECK(enumerate_structures(binary_sig(), 2) == all);

  Signature fn;
  fn.functions[Symbol("f")] = 1;
  fn.constants.insert(Symbol("c"));
  CHECK(structure_count(fn, 3) == 81);
  CHECK(enumerate_structures(fn, 3).size() == 81);

  try {
    enumerate_structures(binary_sig(), 5);
    FAIL("expected refusal");
  } catch (const EnumerationRefused& e) {
    CHECK(e.count == (std::uint64_t{1} << 25));
  }
}

TEST_CASE("structure text format round trips") {
  auto text =
      "(structure\n  (size 3)\n  (relation R 2 (0 1) (2 2))\n  (relation U 1 (1))\n"
      "  (function f 1 1 2 0)\n  (constant c 2))\n";
  auto a = parse_structure(text);
  CHECK(print_structure(a) == text);
  CHECK(parse_structure(print_structure(a)) == a);
  CHECK(a.apply(Symbol("f"), {2}) == 0);
  CHECK(a.holds(Symbol("R"), {2, 2}));

  CHECK_THROWS_AS(parse_structure("(structure (size 0))"), ParseError);
  CHECK_THROWS_AS(parse_structure("(structure (size 2) (relation R 2 (0 2)))"), ParseError);
  CHECK_THROWS_AS(parse_structure("(structure (size 2) (function f 1 0))"), ParseError);
  CHECK_THROWS_AS(parse_structure("(structure (size 2) (relation R 2 (0)))"), ParseError);
  CHECK_THROWS_AS(parse_structure("(structure (relation R 1))"), ParseError);
}

TEST_CASE("evaluation properties over the formula corpus") {
  testing::FormulaGen gen(99);
  std::mt19937 rng(2026);
  for (int i = 0; i < 150; ++i) {
    auto f = gen.formula(3);
    auto a = random_structure(rng, 1 + rng() % 3);
    auto v = random_valuation(rng, a.size());

    std::optional<Verdict3> prev;
    for (std::size_t b : {0, 1, 3, 6, 10}) {
      auto r = evaluate(a, f, v, b);
      CHECK(evaluate(a, negate(f), v, b) == flip(r));
      if (prev && determinate(*prev)) CHECK(r == *prev);
      if (!prev || determinate(r)) prev = r;
    }

    auto perms = all_perms(a.size());
    const auto& p = perms[rng() % perms.size()];
    auto b = a.relabel(p);
    Valuation w = v;
    for (auto& [x, e] : w.vars) e = p[e];
    for (auto& [c, e] : w.henkin) e = p[e];
    CHECK(evaluate(a, f, v, 6) == evaluate(b, f, w, 6));
  }
}
