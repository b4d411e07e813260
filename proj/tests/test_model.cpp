#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "cqe/model.hpp"

using namespace cqe;

namespace {
Term C(const char* n) { return Term::cst(n); }
Term V(const char* n) { return Term::var(n); }
Term N(const char* n) { return Term::nul(n); }
CQ bcq(std::vector<Atom> atoms) { return CQ::make({}, std::move(atoms)); }
}  // namespace

TEST_CASE("term canonical order: constants < nulls < variables") {
  CHECK(C("z") < N("a"));
  CHECK(N("z") < V("a"));
  CHECK(C("a") < C("b"));
}

TEST_CASE("CQ atoms are set-semantic and sorted") {
  CQ q = bcq({Atom::unary("C", C("a")), Atom::unary("C", C("a"))});
  CHECK(q.len() == 1);  // duplicate atom collapses
}

TEST_CASE("CQ invariants") {
  CHECK_THROWS(CQ::make({V("x")}, {Atom::unary("C", C("a"))}));  // answer var unused
  CHECK_THROWS(CQ::make({}, {}));
  CHECK_THROWS(CQ::make({}, {Atom::bottom(), Atom::unary("C", C("a"))}));
  CHECK(CQ::bottom().is_bottom());
  CHECK(CQ::bottom().len() == 1);
}

TEST_CASE("core_of removes a redundant existential branch") {
  // exists x,y (R(a,x) & R(a,y))  ->  exists x R(a,x)   [brute-force: y -> x]
  CQ q = bcq({Atom::role("R", C("a"), V("x")), Atom::role("R", C("a"), V("y"))});
  CQ c = core_of(q);
  CHECK(c.len() == 1);
  CHECK(is_isomorphic(c, bcq({Atom::role("R", C("a"), V("x"))})));
}

TEST_CASE("core_of keeps a non-redundant query unchanged") {
  // exists x (R(a,x) & C(x)) has no proper retract
  CQ q = bcq({Atom::role("R", C("a"), V("x")), Atom::unary("C", V("x"))});
  CHECK(core_of(q).len() == 2);
}

TEST_CASE("core_of respects answer variables") {
  // [x,y] R(a,x) & R(a,y): x,y frozen, nothing folds
  CQ q = CQ::make({V("x"), V("y")},
                  {Atom::role("R", C("a"), V("x")), Atom::role("R", C("a"), V("y"))});
  CHECK(core_of(q).len() == 2);
}

TEST_CASE("is_isomorphic basics") {
  CHECK(is_isomorphic(bcq({Atom::unary("C", V("x"))}), bcq({Atom::unary("C", V("y"))})));
  CHECK_FALSE(is_isomorphic(bcq({Atom::unary("C", C("a"))}), bcq({Atom::unary("C", C("b"))})));
  // exists x R(a,x) vs exists x R(x,a): no bijection works
  CHECK_FALSE(is_isomorphic(bcq({Atom::role("R", C("a"), V("x"))}),
                            bcq({Atom::role("R", V("x"), C("a"))})));
}

TEST_CASE("is_isomorphic preserves answer variable order") {
  CQ q1 = CQ::make({V("x"), V("y")}, {Atom::role("R", V("x"), V("y"))});
  CQ q2 = CQ::make({V("u"), V("v")}, {Atom::role("R", V("u"), V("v"))});
  CQ q3 = CQ::make({V("u"), V("v")}, {Atom::role("R", V("v"), V("u"))});
  CHECK(is_isomorphic(q1, q2));
  CHECK_FALSE(is_isomorphic(q1, q3));
}

TEST_CASE("subqueries") {
  CQ single = bcq({Atom::unary("C", C("a"))});
  CHECK(subqueries(single).size() == 1);

  CQ q = bcq({Atom::unary("C", C("a")), Atom::role("R", C("a"), V("x"))});
  auto subs = subqueries(q);
  CHECK(subs.size() == 3);
  CHECK(contains_isomorphic(subs, bcq({Atom::unary("C", C("a"))})));
  CHECK(contains_isomorphic(subs, bcq({Atom::role("R", C("a"), V("x"))})));
  CHECK(contains_isomorphic(subs, q));

  // 3 distinct atoms -> 7 nonempty subsets before dedup; closure property
  CQ q3 = bcq({Atom::unary("A", C("a")), Atom::unary("B", C("a")), Atom::unary("D", C("b"))});
  auto subs3 = subqueries(q3);
  CHECK(subs3.size() == 7);
  for (const CQ& s : subs3)
    for (const CQ& ss : subqueries(s)) CHECK(contains_isomorphic(subs3, ss));

  CHECK_THROWS(subqueries(CQ::bottom()));
}

TEST_CASE("and_all") {
  CQ a = bcq({Atom::unary("C", C("a"))});
  CHECK(and_all({a}) == a);
  CQ e1 = bcq({Atom::unary("C", V("x"))});
  CQ e2 = bcq({Atom::unary("D", V("y"))});
  CQ both = and_all({e1, e2});
  CHECK(both.len() == 2);
  CHECK(and_all({a, CQ::bottom()}).is_bottom());
  CHECK_THROWS(and_all({}));
}

TEST_CASE("rename_apart gives disjoint existential vars") {
  CQ e = bcq({Atom::unary("C", V("x"))});
  auto rs = rename_apart({e, e});
  auto v0 = rs[0].all_vars();
  auto v1 = rs[1].all_vars();
  for (const Term& v : v0) CHECK_FALSE(v1.count(v));
}

TEST_CASE("freeze") {
  CQ ground = bcq({Atom::unary("C", C("a"))});
  ABox f1 = freeze({ground});
  CHECK(f1.atoms == std::vector<Atom>{Atom::unary("C", C("a"))});

  CQ ex = bcq({Atom::role("R", C("a"), V("x"))});
  ABox f2 = freeze({ex});
  REQUIRE(f2.atoms.size() == 1);
  CHECK(f2.atoms[0].pred == "R");
  CHECK(f2.atoms[0].args[0] == C("a"));
  CHECK(f2.atoms[0].args[1].is_null());

  // distinct members get distinct fresh nulls even when isomorphic
  CQ e1 = bcq({Atom::unary("C", V("x"))});
  ABox f3 = freeze({e1, e1});
  CHECK(f3.atoms.size() == 2);
  CHECK(f3.atoms[0].args[0] != f3.atoms[1].args[0]);

  CHECK_THROWS(freeze({CQ::bottom()}));
}

TEST_CASE("freeze then evaluate: each member holds in the frozen ABox") {
  std::vector<CQ> qs = {
      bcq({Atom::role("R", C("a"), V("x")), Atom::unary("C", V("x"))}),
      bcq({Atom::unary("D", V("y"))}),
      bcq({Atom::role("R", V("u"), V("v"))}),
  };
  ABox f = freeze(qs);
  for (const CQ& q : qs) CHECK(has_hom(q.atoms, f.atoms));
}

TEST_CASE("ED well-formedness") {
  CQ body = CQ::make({V("x")}, {Atom::unary("B", V("x"))});
  CHECK_NOTHROW(ED::make(body, CQ::make({V("x")}, {Atom::unary("A", V("x"))}), {V("x")}));
  CHECK_NOTHROW(ED::make(body, CQ::bottom(), {V("x")}));
  // frontier variable absent from body
  CHECK_THROWS_AS(ED::make(body, CQ::bottom(), {V("z")}), MalformedEDError);
  // head free var outside frontier
  CQ bigger = CQ::make({V("x"), V("y")},
                       {Atom::role("R", V("x"), V("y"))});
  CHECK_THROWS_AS(ED::make(bigger, CQ::make({V("y")}, {Atom::unary("A", V("y"))}), {V("x")}),
                  MalformedEDError);
}

// ---------------------------------------------------------------------------
// randomized structural properties

namespace {

CQ random_cq(std::mt19937& rng) {
  std::uniform_int_distribution<int> natoms(1, 4), coin(0, 1), tsel(0, 4), psel(0, 1);
  const Term pool[5] = {C("a"), C("b"), V("x"), V("y"), V("z")};
  std::vector<Atom> atoms;
  int n = natoms(rng);
  for (int i = 0; i < n; ++i) {
    if (coin(rng))
      atoms.push_back(Atom::unary(psel(rng) ? "C" : "D", pool[tsel(rng)]));
    else
      atoms.push_back(Atom::role(psel(rng) ? "R" : "S", pool[tsel(rng)], pool[tsel(rng)]));
  }
  return CQ::make({}, std::move(atoms));
}

// brute-force equivalence of two BCQs over atom sets: mutual homomorphism
bool equivalent(const CQ& q1, const CQ& q2) {
  ABox f1 = freeze({q1});
  ABox f2 = freeze({q2});
  return has_hom(q1.atoms, f2.atoms) && has_hom(q2.atoms, f1.atoms);
}

}  // namespace

TEST_CASE("core_of is idempotent and equivalence-preserving (randomized)") {
  std::mt19937 rng(12345);
  for (int i = 0; i < 300; ++i) {
    CQ q = random_cq(rng);
    CQ c = core_of(q);
    CHECK(is_isomorphic(core_of(c), c));
    CHECK(equivalent(q, c));
    CHECK(c.len() <= q.len());
  }
}

TEST_CASE("isomorphic queries stay isomorphic after coring (randomized)") {
  std::mt19937 rng(777);
  for (int i = 0; i < 200; ++i) {
    CQ q = random_cq(rng);
    // rename all vars
    Binding b;
    int j = 0;
    for (const Term& v : q.all_vars()) b.emplace(v.name, V(("w" + std::to_string(j++)).c_str()));
    CQ q2 = apply_binding(q, b);
    CHECK(is_isomorphic(q, q2));
    CHECK(is_isomorphic(core_of(q), core_of(q2)));
  }
}

TEST_CASE("dedup_isomorphic removes exactly the isomorphic duplicates") {
  std::mt19937 rng(42);
  std::vector<CQ> qs;
  for (int i = 0; i < 60; ++i) qs.push_back(core_of(random_cq(rng)));
  auto dd = dedup_isomorphic(qs);
  for (std::size_t i = 0; i < dd.size(); ++i)
    for (std::size_t j = i + 1; j < dd.size(); ++j) CHECK_FALSE(is_isomorphic(dd[i], dd[j]));
  for (const CQ& q : qs) CHECK(contains_isomorphic(dd, q));
}
