#ifndef CQE_CENSOR_HPP
#define CQE_CENSOR_HPP

#include <functional>

#include "cqe/model.hpp"
#include "cqe/reasoner.hpp"

namespace cqe {

// Least set of BCQs containing the seed and closed under the policy rules:
// whenever a rule body is entailed at a ground frontier, its instantiated head
// joins the set.  A bottom head entering the closure poisons it.
struct PolicyClosure {
  std::vector<CQ> queries;  // canonical: cores, pairwise non-isomorphic
  bool poisoned = false;
};

PolicyClosure policy_cons(const TBox& t, const Policy& p, const std::vector<CQ>& seed);

// True iff every ground rule-body consequence of the censor has its head
// entailed too (a bottom head demands the body never fires).
bool satisfies_policy(const TBox& t, const std::vector<CQ>& censor, const Policy& p);

// True iff some optimal censor of E contains C: the policy closure of C stays
// inside the consequences of the ontology and is not poisoned.
bool censor_extends(const CQEInstance& e, const std::vector<CQ>& c);

// All maximal subsets S of `members` with censor_extends(e, S); members no
// rule body can see (by predicate) belong to every such subset and are folded
// in without search.  `members` must all be entailed by the ontology.
// Deterministic order; throws ResourceLimitError past `node_cap` search nodes.
std::vector<std::vector<CQ>> maximal_censor_sets(const CQEInstance& e,
                                                 const std::vector<CQ>& members,
                                                 long long node_cap = 200000);

// The k-cuts of all optimal censors: maximal policy-satisfying subsets of the
// entailed-BCQ universe at length bound k.
std::vector<std::vector<CQ>> optimal_censors(const CQEInstance& e, int k,
                                             std::size_t universe_cap = 100000,
                                             long long node_cap = 200000);

}  // namespace cqe

#endif
