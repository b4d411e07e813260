#ifndef CQE_ENTAIL_HPP
#define CQE_ENTAIL_HPP

#include <optional>

#include "cqe/censor.hpp"
#include "cqe/model.hpp"
#include "cqe/reasoner.hpp"

namespace cqe {

struct EntailBudget {
  std::size_t universe_cap = 100000;  // bcq_cons_k candidates (oracles)
  long long node_cap = 200000;        // censor-search nodes
};

// The BCQs that can matter to the policy: ground-glued connected pieces of the
// rewritten rule bodies, instantiated over the ontology's consequences.  A
// censor fires a rule iff it entails every piece of some grounded body, so
// maximal censors are in bijection with maximal extendable subsets of these.
std::vector<CQ> relevant_policy_pieces(const CQEInstance& e, int k);

// Ways a censor can entail the query: per rewritten disjunct, the piece
// multisets obtained by optionally grounding existential variables along a
// homomorphism into the chase.  The censor entails the disjunct iff it
// contains every piece of some decomposition.
std::vector<std::vector<CQ>> query_decompositions(const CQEInstance& e, const CQ& disjunct, int k);

struct ScResult {
  bool entailed = true;
  // when not entailed: a censor trace witnessing the refusal
  std::optional<std::vector<CQ>> witness;
};

// Skeptical entailment: true iff every optimal censor entails q.
ScResult sc_entails_explain(const CQEInstance& e, const UCQ& q, const EntailBudget& b = {});
bool sc_entails(const CQEInstance& e, const UCQ& q, const EntailBudget& b = {});
bool sc_entails(const CQEInstance& e, const CQ& q, const EntailBudget& b = {});

// Intersection entailment: true iff some disjunct is skeptically entailed.
bool ic_entails(const CQEInstance& e, const UCQ& q, const EntailBudget& b = {});

// Literal oracles over the full length-bounded universe of entailed BCQs.
bool sc_entails_oracle(const CQEInstance& e, const UCQ& q, std::optional<int> k_override = {},
                       const EntailBudget& b = {});
bool ic_entails_oracle(const CQEInstance& e, const UCQ& q, std::optional<int> k_override = {},
                       const EntailBudget& b = {});

}  // namespace cqe

#endif
