#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cqe/entail.hpp"
#include "cqe/rewrite.hpp"
#include "cqe/textio.hpp"
#include "test_util.hpp"

using namespace cqe;

namespace {
Term C(const char* n) { return Term::cst(n); }
Term V(const char* n) { return Term::var(n); }
CQ bcq(std::vector<Atom> atoms) { return CQ::make({}, std::move(atoms)); }

struct Loaded {
  CQEInstance e;
  ProblemFile pf;
};

Loaded load(const char* name) {
  std::ifstream in(std::filesystem::path(CQE_CORPUS_DIR) / name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  ProblemFile pf = parse_problem(ss.str());
  CQEInstance e = validate_instance(pf.tbox, pf.abox, pf.policy);
  return {std::move(e), std::move(pf)};
}

const UCQ& q(const Loaded& l, const char* name) {
  const UCQ* p = l.pf.find_query(name);
  REQUIRE(p != nullptr);
  return *p;
}
}  // namespace

TEST_CASE("predicate dependency graph and acyclicity") {
  Loaded pos = load("positions.cqe");
  CHECK(is_acyclic_policy(pos.e.tbox, pos.e.policy));
  DependencyGraph g = dependency_graph(pos.e.tbox, pos.e.policy);
  CHECK(g.p_edges.count({"hasPosition", "worksIn"}));
  CHECK(g.p_edges.count({"collaborate", "hasPosition"}));
  CHECK(g.t_edges.empty());

  Loaded cyc = load("positions_cyclic.cqe");
  // worksIn sub collaborate closes the loop through the rules
  CHECK_FALSE(is_acyclic_policy(cyc.e.tbox, cyc.e.policy));
  DependencyGraph gc = dependency_graph(cyc.e.tbox, cyc.e.policy);
  CHECK(gc.t_edges.count({"worksIn", "collaborate"}));

  Loaded ch = load("chain.cqe");
  CHECK(is_acyclic_policy(ch.e.tbox, ch.e.policy));
  Loaded con = load("consent.cqe");
  CHECK(is_acyclic_policy(con.e.tbox, con.e.policy));
}

TEST_CASE("policy rules become guarded existential rules") {
  Loaded pos = load("positions.cqe");
  const ED* d6 = nullptr;
  const ED* bot = nullptr;
  for (const ED& ed : pos.e.policy.eds)
    if (!ed.body.atoms.empty() && ed.body.atoms[0].pred == "hasPosition") d6 = &ed;
  TGD g = tgd_of_ed(*d6);
  // body carries one Ind guard per universal variable
  int guards = 0;
  for (const Atom& a : g.body) guards += a.pred == kIndPred;
  CHECK(guards == 2);
  CHECK(g.head == d6->head.atoms);
  CHECK(g.existential_vars().size() == 1);

  Loaded ch = load("chain.cqe");
  for (const ED& ed : ch.e.policy.eds)
    if (ed.head.is_bottom()) bot = &ed;
  REQUIRE(bot != nullptr);
  CHECK_THROWS_AS(tgd_of_ed(*bot), std::invalid_argument);
  // one rule per CQ-headed policy rule plus the ontology rules
  CHECK(policy_tgds(ch.e.policy, ch.e.tbox).size() == 2);
}

TEST_CASE("backward rewriting chains rules and ontology") {
  Loaded ch = load("chain.cqe");
  std::vector<TGD> tgds = policy_tgds(ch.e.policy, ch.e.tbox);
  CQ body = CQ::make({V("x")}, {Atom::unary("D", V("x")), Atom::unary("C", V("x"))});
  std::vector<CQ> rw = ucq_rewrite(body, tgds);
  REQUIRE(rw.size() == 3);
  CHECK(contains_isomorphic(rw, body));
  CHECK(contains_isomorphic(
      rw, CQ::make({V("x")}, {Atom::unary("A", V("x")), Atom::unary("C", V("x"))})));
  CHECK(contains_isomorphic(
      rw, CQ::make({V("x")}, {Atom::unary("B", V("x")), Atom::unary("C", V("x")),
                              Atom::unary(kIndPred, V("x"))})));

  // a rule head existential never captures a free query variable
  Loaded pos = load("positions.cqe");
  std::vector<TGD> ptgds = policy_tgds(pos.e.policy, pos.e.tbox);
  CQ hp = CQ::make({V("x"), V("y")}, {Atom::role("hasPosition", V("x"), V("y"))});
  CHECK(ucq_rewrite(hp, ptgds).size() == 1);
}

TEST_CASE("closure of the policy under its own rules") {
  Loaded ch = load("chain.cqe");
  std::vector<ED> cl = ed_closure(ch.e.policy, ch.e.tbox);
  REQUIRE(cl.size() == 4);
  std::vector<CQ> bodies;
  for (const ED& ed : cl) {
    bodies.push_back(ed.body);
    for (const Atom& a : ed.body.atoms) CHECK(a.pred != kIndPred);
  }
  CHECK(contains_isomorphic(bodies, CQ::make({V("x")}, {Atom::unary("B", V("x")),
                                                        Atom::unary("C", V("x"))})));
  CHECK(contains_isomorphic(bodies, CQ::make({V("x")}, {Atom::unary("B", V("x"))})));
  // rewritten bodies respect the length bound k^h
  int k = ch.e.policy.max_len_cq();
  int h = static_cast<int>(ch.e.policy.eds.size());
  long long bound = 1;
  for (int i = 0; i < h; ++i) bound *= k;
  for (const ED& ed : cl) CHECK(ed.body.len() <= bound);

  Loaded cyc = load("positions_cyclic.cqe");
  CHECK_THROWS_AS(ed_closure(cyc.e.policy, cyc.e.tbox), NotAcyclicError);
}

TEST_CASE("policy closure of a query with frozen free variables") {
  Loaded ch = load("chain.cqe");
  // ground query: telling B(o) forces telling A(o) too
  std::optional<CQ> pc = phi_pc(ch.e.tbox, ch.e.policy, bcq({Atom::unary("B", C("o"))}));
  REQUIRE(pc.has_value());
  CHECK(pc->atoms == std::vector<Atom>{Atom::unary("A", C("o")), Atom::unary("B", C("o"))});
  // open query whose closure trips the denial
  CHECK_FALSE(phi_pc(ch.e.tbox, ch.e.policy,
                     CQ::make({V("x")}, {Atom::unary("D", V("x")), Atom::unary("C", V("x"))}))
                  .has_value());
  // open query: free variables come back free
  std::optional<CQ> pb =
      phi_pc(ch.e.tbox, ch.e.policy, CQ::make({V("x")}, {Atom::unary("B", V("x"))}));
  REQUIRE(pb.has_value());
  CHECK(is_isomorphic(*pb, CQ::make({V("x")}, {Atom::unary("A", V("x")),
                                               Atom::unary("B", V("x"))})));
}

TEST_CASE("counter-witness candidates come from the closure, not the data") {
  Loaded ch = load("chain.cqe");
  UCQ qb = UCQ::single(bcq({Atom::unary("B", C("o"))}));
  std::vector<CQ> cands = candidate_clash_queries(ch.e.tbox, ch.e.policy, qb);
  // subquery shapes of the four closure bodies (DC, D, C, AC, A, BC, B), each
  // with its one variable either free or fixed to the query constant o
  CHECK(cands.size() == 14);
  CHECK(contains_isomorphic(cands, CQ::make({}, {Atom::unary("B", C("o"))})));
  CHECK(contains_isomorphic(cands, CQ::make({V("x")}, {Atom::unary("B", V("x"))})));
  for (const CQ& c : cands) {
    CHECK(c.all_vars().size() == c.answer_vars.size());  // every variable free
    CHECK(c.len() <= 2);
  }
  // two disjuncts admit pairs of shapes
  UCQ q2 = UCQ::make({bcq({Atom::unary("B", C("o"))}), bcq({Atom::unary("C", C("o"))})});
  std::vector<CQ> cands2 = candidate_clash_queries(ch.e.tbox, ch.e.policy, q2);
  CHECK(cands2.size() > cands.size());
  for (const CQ& c : cands2) CHECK(c.len() <= 4);
}

TEST_CASE("rewriting agrees with the censor search on the corpus") {
  for (const char* file : {"chain.cqe", "consent.cqe", "positions.cqe", "disjunction.cqe"}) {
    CAPTURE(file);
    Loaded l = load(file);
    for (const auto& [name, query] : l.pf.queries) {
      CAPTURE(name);
      RewriteInfo info;
      FOFormula sc = sc_rewriting(l.e.tbox, l.e.policy, query, 20000, &info);
      CHECK(eval_fo(sc, l.e.abox) == sc_entails(l.e, query));
      CHECK(eval_fo(ic_rewriting(l.e.tbox, l.e.policy, query), l.e.abox) ==
            ic_entails(l.e, query));
      CHECK(static_cast<long long>(info.q_candidates) >= 0);
      CHECK(info.ell >= 1);
    }
  }
}

TEST_CASE("one formula answers the query over every dataset") {
  Loaded con = load("consent.cqe");
  const UCQ& q1 = q(con, "q1");
  std::string once = serialize_formula(sc_rewriting(con.e.tbox, con.e.policy, q1));
  std::string twice = serialize_formula(sc_rewriting(con.e.tbox, con.e.policy, q1));
  CHECK(once == twice);

  FOFormula f = sc_rewriting(con.e.tbox, con.e.policy, q1);
  std::vector<ABox> variants;
  variants.push_back(con.e.abox);
  variants.push_back(ABox::make({}));
  {  // drop the consent fact
    std::vector<Atom> atoms;
    for (const Atom& a : con.e.abox.atoms)
      if (a.pred != "Consent") atoms.push_back(a);
    variants.push_back(ABox::make(std::move(atoms)));
  }
  {  // drop the residency evidence
    std::vector<Atom> atoms;
    for (const Atom& a : con.e.abox.atoms)
      if (a.pred != "SR") atoms.push_back(a);
    variants.push_back(ABox::make(std::move(atoms)));
  }
  {  // extra unrelated person
    std::vector<Atom> atoms = con.e.abox.atoms;
    atoms.push_back(Atom::role("profiledActivity", C("p3"), C("act3")));
    variants.push_back(ABox::make(std::move(atoms)));
  }
  {  // only the profiling fact
    variants.push_back(ABox::make({Atom::role("profiledActivity", C("p1"), C("act1"))}));
  }
  REQUIRE(variants.size() >= 5);
  for (const ABox& a : variants) {
    CQEInstance e = validate_instance(con.e.tbox, a, con.e.policy);
    CHECK(eval_fo(f, a) == sc_entails(e, q1));
  }
}

TEST_CASE("formula evaluation over the data structure") {
  Loaded con = load("consent.cqe");
  const ABox& a = con.e.abox;
  FOFormula citizen = FOFormula::pred(Atom::role("citOf", C("p1"), V("x")));
  // the citizenship target is a labeled null: it exists but is not Ind
  CHECK(eval_fo(FOFormula::exists({V("x")}, citizen), a));
  CHECK_FALSE(eval_fo(
      FOFormula::exists({V("x")}, FOFormula::conj({citizen, FOFormula::ind(V("x"))})), a));
  CHECK(eval_fo(FOFormula::pred(Atom::role("name", C("p1"), C("ann"))), a));
  CHECK_FALSE(eval_fo(FOFormula::pred(Atom::role("name", C("p2"), C("ann"))), a));
  CHECK(eval_fo(FOFormula::ind(C("p1")), a));
  CHECK(eval_fo(FOFormula::tru(), a));
  CHECK_FALSE(eval_fo(FOFormula::fls(), a));
  CHECK(eval_fo(FOFormula::neg(FOFormula::fls()), a));
}

TEST_CASE("rewriting agrees with the search on random acyclic instances") {
  std::mt19937 rng(424242);
  auto acyclic = [](const CQEInstance& e) { return is_acyclic_policy(e.tbox, e.policy); };
  int done = 0, skipped = 0;
  while (done < 40 && skipped < 200) {
    CQEInstance e = testutil::rand_instance(rng, {}, acyclic);
    UCQ qq = testutil::rand_bucq(rng);
    try {
      RewriteInfo info;
      FOFormula sc = sc_rewriting(e.tbox, e.policy, qq, 20000, &info);
      FOFormula ic = ic_rewriting(e.tbox, e.policy, qq);
      CAPTURE(to_string(qq));
      CHECK(eval_fo(sc, e.abox) == sc_entails(e, qq));
      CHECK(eval_fo(ic, e.abox) == ic_entails(e, qq));
      // every rewritten rule body and candidate respects the length bounds
      long long kh = 1;
      for (std::size_t i = 0; i < e.policy.eds.size(); ++i) kh *= e.policy.max_len_cq();
      for (const ED& ed : ed_closure(e.policy, e.tbox)) CHECK(ed.body.len() <= kh);
      for (const CQ& c : candidate_clash_queries(e.tbox, e.policy, qq))
        CHECK(c.len() <= info.ell);
      ++done;
    } catch (const ResourceLimitError&) {
      ++skipped;
    }
  }
  CHECK(done >= 40);
}
