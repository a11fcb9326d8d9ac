#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "scottlab/formula_io.hpp"
#include "scottlab/henkin.hpp"

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

// Orbit by brute force over all permutations preserving every symbol.
std::set<Tuple> orbit_oracle(const FinStructure& a, const Tuple& t) {
  std::vector<Element> p(a.size());
  std::iota(p.begin(), p.end(), Element{0});
  std::set<Tuple> out;
  do {
    if (!(a.relabel(p) == a)) continue;
    Tuple u;
    for (auto x : t) u.push_back(p[x]);
    out.insert(u);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::set<Tuple> sat_set(const FinStructure& a, const Formula& f, std::size_t k) {
  auto v = satisfying_tuples(a, f, k);
  return {v.begin(), v.end()};
}

Valuation named(std::size_t pool) {
  Valuation v;
  for (std::uint32_t i = 0; i < pool; ++i) v.henkin[i] = i;
  return v;
}

const Ordinal two = Ordinal::finite(2);

}  // namespace

TEST_CASE("cp_member") {
  auto a = digraph(2, {});
  auto ne = Formula::equals(Term::henkin_constant(0), Term::henkin_constant(1), false);
  auto w = cp_member(a, {ne});
  REQUIRE(w);
  CHECK(*w == HenkinAssignment{{0, 0}, {1, 1}});

  Signature unary;
  unary.relations[Symbol("U")] = 1;
  FinStructure empty_u(unary, 3);
  CHECK_FALSE(cp_member(empty_u, {parse_formula("(U #0)")}));
  auto e = cp_member(empty_u, {});
  REQUIRE(e);
  CHECK(e->empty());

  // Least witness: #0 must be the loop-free element.
  auto b = digraph(2, {{0, 0}});
  CHECK(*cp_member(b, {parse_formula("(not (R #0 #0))"), parse_formula("(R #1 #1)")}) ==
        HenkinAssignment{{0, 1}, {1, 0}});
  // More constants than elements.
  CHECK_FALSE(cp_member(a, {parse_formula("(and (not (= #0 #1)) (not (= #1 #2)))")}));
}

TEST_CASE("closure steps") {
  Signature sig;
  sig.relations[Symbol("U")] = 1;
  sig.relations[Symbol("R")] = 2;
  FinStructure a(sig, 2);
  a.set_relation(Symbol("U"), {1}, true);
  a.set_relation(Symbol("R"), {0, 1}, true);
  ConsistencySession session(a, Ordinal::finite(4));

  SentenceSet s;
  auto st = session.closure_step(s, {DemandKind::Decide, parse_formula("(U #0)"), 0, {}, {}});
  REQUIRE(st.extended);
  CHECK(st.extended->contains(parse_formula("(U #0)")));
  auto st2 = session.closure_step(*st.extended, {DemandKind::Decide, parse_formula("(U #1)"), 0, {}, {}});
  REQUIRE(st2.extended);
  CHECK(st2.extended->contains(parse_formula("(not (U #1))")));
  CHECK(session.member(*st2.extended));

  // c = c' never enters; the decision comes out negative.
  auto eq = session.closure_step(s, {DemandKind::Decide, parse_formula("(= #0 #1)"), 0, {}, {}});
  REQUIRE(eq.extended);
  CHECK_FALSE(eq.extended->contains(parse_formula("(= #0 #1)")));
  CHECK(eq.extended->contains(parse_formula("(not (= #0 #1))")));
  CHECK_THROWS_AS(session.closure_step(s, {DemandKind::Distinct, {}, 0, {1, 1}, {}}), HenkinError);

  // Instantiation of a universal sentence.
  auto all = parse_formula("(forall (x) (or (U x) (R x x) (exists (y) (R x y))))");
  SentenceSet t{all};
  REQUIRE(session.member(t));
  auto inst = session.closure_step(t, {DemandKind::Instantiate, all, 0, {1}, {}});
  REQUIRE(inst.extended);
  auto want = parse_formula("(or (U #1) (R #1 #1) (exists (y) (R #1 y)))");
  CHECK(inst.extended->contains(want));
  auto wit = session.closure_step(*inst.extended, {DemandKind::Witness, want, 0, {}, {}});
  REQUIRE(wit.extended);
  CHECK(wit.added.size() == 1);
  CHECK(session.member(*wit.extended));

  CHECK_THROWS_AS(session.closure_step(s, {DemandKind::Instantiate, all, 0, {0}, {}}), HenkinError);
  CHECK_THROWS_AS(session.closure_step(t, {DemandKind::Instantiate, all, 0, {0, 1}, {}}), HenkinError);
  CHECK_THROWS_AS(session.closure_step(t, {DemandKind::Target, {}, 0, {0}, {}}), HenkinError);
  // alpha bounds the sentences a set may hold.
  CHECK(session.admissible(all));
  CHECK_FALSE(ConsistencySession(a, two).admissible(all));
}

TEST_CASE("function values") {
  Signature sig;
  sig.functions[Symbol("f")] = 1;
  sig.constants.insert(Symbol("c"));
  FinStructure a(sig, 3);
  a.set_function(Symbol("f"), {0}, 1);
  a.set_function(Symbol("f"), {1}, 2);
  a.set_function(Symbol("f"), {2}, 0);
  a.set_constant(Symbol("c"), 2);
  ConsistencySession session(a, two);
  auto res = build_model_chain(session, 50);
  CHECK_FALSE(res.blocked);
  CHECK(res.pending == 0);
  CHECK(res.undecided == 0);
  CHECK(isomorphic(res.structure, a));
  auto st = session.closure_step({}, {DemandKind::FunctionValue, {}, 0, {0}, Symbol("f")});
  REQUIRE(st.extended);
  CHECK(st.added.size() == 1);
  CHECK_THROWS_AS(session.closure_step({}, {DemandKind::FunctionValue, {}, 0, {}, Symbol("f")}), HenkinError);
}

TEST_CASE("model chain with a target sentence") {
  Signature sig;
  sig.relations[Symbol("U")] = 1;
  sig.relations[Symbol("R")] = 2;
  FinStructure a(sig, 2);
  a.set_relation(Symbol("U"), {0}, true);
  a.set_relation(Symbol("R"), {0, 1}, true);
  // Every x realizes the atomic type of some element.
  std::vector<Formula> types;
  for (Element b = 0; b < 2; ++b)
    types.push_back(Formula::conj({Formula::atom({Symbol("U"), {Term::var("x")}}, a.holds(Symbol("U"), {b})),
                                   Formula::atom({Symbol("R"), {Term::var("x"), Term::var("x")}},
                                                 a.holds(Symbol("R"), {b, b}))}));
  auto target = Formula::forall({Symbol("x")}, Formula::disj(types));
  ConsistencySession session(a, two, target);
  auto res = build_model_chain(session, 20);
  CHECK_FALSE(res.blocked);
  CHECK(res.pending == 0);
  CHECK(res.undecided == 0);
  CHECK(isomorphic(res.structure, a));
  CHECK(evaluate(res.structure, target, {}, 8) == Verdict3::True);
  for (std::size_t i = 1; i < res.chain.size(); ++i) CHECK(res.chain[i].includes(res.chain[i - 1]));
  for (const auto& f : res.chain.back().sentences())
    CHECK(evaluate(res.structure, f, named(2), 8) == Verdict3::True);
  CHECK(session.chain().size() == res.chain.size());
  CHECK(res.transcript.size() + 1 == res.chain.size());

  // Deterministic rerun.
  ConsistencySession again(a, two, target);
  auto res2 = build_model_chain(again, 20);
  CHECK(res2.chain.back() == res.chain.back());
}

TEST_CASE("model chain without a target, and a blocked target") {
  auto a = digraph(3, {{0, 1}, {1, 2}, {2, 2}});
  ConsistencySession session(a, two);
  auto res = build_model_chain(session, 100);
  CHECK(res.pending == 0);
  CHECK(isomorphic(res.structure, a));
  for (const auto& f : res.chain.back().sentences())
    CHECK(evaluate(res.structure, f, named(3), 8) == Verdict3::True);

  // Only one element is a loop, so the second constant cannot be witnessed.
  ConsistencySession bad(a, two, parse_formula("(forall (x) (R x x))"));
  auto r = build_model_chain(bad, 100);
  REQUIRE(r.blocked);
  CHECK(r.blocked->kind == DemandKind::Target);
  CHECK_FALSE(r.blocked_reason.empty());

  // Short runs leave demands pending.
  ConsistencySession short_run(a, two);
  CHECK(build_model_chain(short_run, 3).pending > 0);
}

TEST_CASE("orbit generator examples") {
  auto order = digraph(2, {{0, 1}});
  auto g = extract_orbit_generator(order, {0}, two);
  CHECK(fits_sigma(g, Ordinal::finite(1)));
  CHECK(sat_set(order, g, 1) == std::set<Tuple>{{0}});

  auto c3 = digraph(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(sat_set(c3, extract_orbit_generator(c3, {0}, two), 1).size() == 3);

  auto chain = digraph(3, {{0, 1}, {1, 2}});
  std::set<std::set<Tuple>> seen;
  for (Element e = 0; e < 3; ++e) {
    auto s = sat_set(chain, extract_orbit_generator(chain, {e}, two), 1);
    CHECK(s == std::set<Tuple>{{e}});
    seen.insert(s);
  }
  CHECK(seen.size() == 3);

  // Repeated entries come back as equalities.
  auto rep = extract_orbit_generator(c3, {1, 1}, two);
  CHECK(sat_set(c3, rep, 2) == std::set<Tuple>{{0, 0}, {1, 1}, {2, 2}});

  CHECK(print_formula(extract_orbit_generator(chain, {2, 0}, Ordinal::finite(3))) ==
        print_formula(extract_orbit_generator(chain, {2, 0}, Ordinal::finite(3))));
  CHECK_THROWS_AS(extract_orbit_generator(chain, {0}, Ordinal::finite(1)), HenkinError);
  CHECK_THROWS_AS(extract_orbit_generator(chain, {5}, two), HenkinError);
}

TEST_CASE("orbit generators match the orbit oracle on small digraphs") {
  for (std::size_t n = 1; n <= 2; ++n)
    for (const auto& a : enumerate_structures(binary_sig(), n)) {
      for (std::size_t k = 1; k <= 2; ++k)
        for (const auto& t : all_tuples(n, k)) {
          auto g = extract_orbit_generator(a, t, two);
          CHECK(fits_sigma(g, Ordinal::finite(1)));
          CHECK(sat_set(a, g, k) == orbit_oracle(a, t));
        }
      auto maps = family_maps(a, a, orbit_generator_family(a, two));
      CHECK(check_back_and_forth(maps, a, a));
    }
  std::mt19937 rng(3);
  auto all3 = enumerate_structures(binary_sig(), 3);
  for (int i = 0; i < 40; ++i) {
    const auto& a = all3[rng() % all3.size()];
    for (const auto& t : all_tuples(3, 2)) CHECK(sat_set(a, extract_orbit_generator(a, t, two), 2) == orbit_oracle(a, t));
    auto fam = orbit_generator_family(a, two);
    auto maps = family_maps(a, a, fam);
    for (const auto& f : maps) CHECK(is_partial_isomorphism(a, a, f));
    CHECK(check_back_and_forth(maps, a, a));
  }
}

TEST_CASE("orbit generators with functions and constants") {
  Signature sig;
  sig.functions[Symbol("f")] = 1;
  sig.relations[Symbol("U")] = 1;
  sig.constants.insert(Symbol("c"));
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    FinStructure a(sig, 3);
    for (Element e = 0; e < 3; ++e) {
      a.set_function(Symbol("f"), {e}, static_cast<Element>(rng() % 3));
      a.set_relation(Symbol("U"), {e}, rng() % 2 == 0);
    }
    a.set_constant(Symbol("c"), static_cast<Element>(rng() % 3));
    for (const auto& t : all_tuples(3, 1)) CHECK(sat_set(a, extract_orbit_generator(a, t, two), 1) == orbit_oracle(a, t));
  }
}

TEST_CASE("orbit generator budget") {
  auto chain = digraph(3, {{0, 1}, {1, 2}});
  ExtractOptions opt;
  opt.budget = 2;
  try {
    extract_orbit_generator(chain, {1}, two, opt);
    FAIL("expected the budget to run out");
  } catch (const HenkinBudgetExceeded& e) {
    CHECK_FALSE(e.frontier.empty());
  }
}

TEST_CASE("separator for reflexive and irreflexive") {
  auto phi = parse_formula("(forall (x) (R x x))");
  auto psi = parse_formula("(forall (x) (not (R x x)))");
  auto a = digraph(2, {{0, 0}, {1, 1}, {0, 1}});
  auto sep = extract_separator(phi, psi, a, 3);
  CHECK(is_d_sigma(sep, Ordinal::finite(1)));
  REQUIRE(sep.kind() == Kind::And);
  REQUIRE(sep.children().size() == 2);
  CHECK(fits_sigma(sep.children()[0], Ordinal::finite(1)));
  CHECK(fits_pi(sep.children()[1], Ordinal::finite(1)));
  CHECK(evaluate(a, sep, {}, 8) == Verdict3::True);
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& b : enumerate_structures(binary_sig(), n))
      if (evaluate(b, psi, {}, 8) == Verdict3::True) CHECK(evaluate(b, sep, {}, 8) == Verdict3::False);

  CHECK_THROWS_AS(extract_separator(phi, phi, a, 2), HenkinError);
  CHECK_THROWS_AS(extract_separator(psi, phi, a, 2), HenkinError);
}

TEST_CASE("separators for further pairs") {
  struct Case {
    const char* phi;
    const char* psi;
    FinStructure a;
  };
  std::vector<Case> cases{
      {"(and (forall (x y) (or (not (R x y)) (R y x))) (exists (x y) (R x y)))",
       "(forall (x y) (or (not (R x y)) (not (R y x))))", digraph(2, {{0, 1}, {1, 0}})},
      {"(forall (x) (exists (y) (R x y)))", "(forall (x y) (not (R x y)))", digraph(1, {{0, 0}})},
      {"(forall (x) (exists (y) (R x y)))", "(forall (x y) (not (R x y)))", digraph(3, {{0, 1}, {1, 2}, {2, 0}})},
  };
  for (const auto& c : cases) {
    auto phi = parse_formula(c.phi), psi = parse_formula(c.psi);
    auto sep = extract_separator(phi, psi, c.a, 3);
    CHECK(is_d_sigma(sep, Ordinal::finite(1)));
    CHECK(evaluate(c.a, sep, {}, 8) == Verdict3::True);
    for (std::size_t n = 1; n <= 3; ++n)
      for (const auto& b : enumerate_structures(binary_sig(), n))
        if (evaluate(b, psi, {}, 8) == Verdict3::True) CHECK(evaluate(b, sep, {}, 8) == Verdict3::False);
    CHECK(print_formula(sep) == print_formula(extract_separator(phi, psi, c.a, 3)));
  }
}

TEST_CASE("d-Sigma Scott sentence from a Sigma_2 / Pi_2 pair") {
  for (const auto& a : {digraph(2, {{0, 1}}), digraph(3, {{0, 1}, {1, 2}, {2, 0}}), digraph(2, {{0, 0}})}) {
    auto sigma = sigma2_scott_sentence(a);
    auto pi = scott_sentence_from_orbits(a, orbit_family(a, OrbitStyle::Diagram));
    CHECK(classify(sigma) == Classification{Side::Sigma, Ordinal::finite(2)});
    CHECK(fits_pi(pi, Ordinal::finite(2)));
    auto out = d_sigma_scott_from_pair(a, sigma, pi);
    CHECK(is_d_sigma(out, Ordinal::finite(1)));
    CHECK(evaluate(a, out, {}, 8) == Verdict3::True);
    auto rep = verify_scott_sentence(out, a, 3);
    CHECK(rep.ok());
  }
  auto order = digraph(2, {{0, 1}});
  auto other = digraph(2, {{1, 1}});
  CHECK_THROWS_AS(d_sigma_scott_from_pair(order, sigma2_scott_sentence(other),
                                          scott_sentence_from_orbits(order, orbit_family(order, OrbitStyle::Diagram))),
                  HenkinError);
}
