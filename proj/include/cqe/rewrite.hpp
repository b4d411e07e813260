#ifndef CQE_REWRITE_HPP
#define CQE_REWRITE_HPP

#include <optional>

#include "cqe/censor.hpp"
#include "cqe/fo.hpp"
#include "cqe/model.hpp"
#include "cqe/reasoner.hpp"

namespace cqe {

// Predicate-level dependency graph: policy edges run from rule-body predicates
// to rule-head predicates, ontology edges follow inclusion axioms.  The policy
// is acyclic when no cycle goes through a policy edge.
struct DependencyGraph {
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> p_edges;
  std::set<std::pair<std::string, std::string>> t_edges;
};

DependencyGraph dependency_graph(const TBox& t, const Policy& p);
bool is_acyclic_policy(const TBox& t, const Policy& p);

// Existential rule for a policy rule: body plus an Ind guard per universally
// quantified variable, implying the head.  Bottom-headed rules have no rule.
TGD tgd_of_ed(const ED& ed);
std::vector<TGD> policy_tgds(const Policy& p, const TBox& t);  // with the TBox rules

// Piece-based backward UCQ rewriting of q against the rules: repeatedly unify
// a subset of query atoms with a rule head (head existential variables only
// against piece-internal query variables) and replace it by the rule body.
// Free variables of q are rigid.  Ind atoms are never rewritten.
std::vector<CQ> ucq_rewrite(const CQ& q, const std::vector<TGD>& tgds, std::size_t cap = 20000);

CQ no_ind(const CQ& q);  // drop Ind atoms

// The policy with every rule body replaced by each of its rewritings: firing
// against this closure needs no ontology or policy chaining.
std::vector<ED> ed_closure(const Policy& p, const TBox& t, std::size_t cap = 20000);

// Conjunction of the policy closure of {q}, free variables held as fresh
// constants; nullopt when the closure is poisoned.
std::optional<CQ> phi_pc(const TBox& t, const Policy& p, const CQ& q);

// Candidate counter-witness already in some censor, conflicting with every
// member of qp; free variables of `cand` remain free.
FOFormula clash_formula(const TBox& t, const Policy& p, const std::vector<CQ>& qp, const CQ& cand);

// Data-independent candidate counter-witness shapes: unions of up to
// |q.disjuncts| rule-body subqueries from the closure, all variables free.
std::vector<CQ> candidate_clash_queries(const TBox& t, const Policy& p, const UCQ& q,
                                        std::size_t q_cap = 20000);

struct RewriteInfo {
  int k = 0, h = 0, m = 0;
  long long ell = 0;
  std::size_t q_candidates = 0;
};

// First-order rewritings of skeptical / intersection entailment; evaluating
// the sentence over any ABox answers the query.  Policy must be acyclic.
FOFormula sc_rewriting(const TBox& t, const Policy& p, const UCQ& q, std::size_t q_cap = 20000,
                       RewriteInfo* info = nullptr);
FOFormula ic_rewriting(const TBox& t, const Policy& p, const UCQ& q, std::size_t q_cap = 20000,
                       RewriteInfo* info = nullptr);

// Evaluation over the ABox structure: predicates by membership, Ind(t) true
// exactly on constants, quantifiers over the active domain.
bool eval_fo(const FOFormula& f, const ABox& a);

}  // namespace cqe

#endif
