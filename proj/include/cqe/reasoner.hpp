#ifndef CQE_REASONER_HPP
#define CQE_REASONER_HPP

#include "cqe/model.hpp"

namespace cqe {

// Reserved predicate: Ind(t) holds exactly when t is a constant.  It may occur
// in TGD bodies and FO formulas, never in stored data.
inline const std::string kIndPred = "Ind";

// Existential rule body -> head; head variables not shared with the body are
// existentially quantified (fresh nulls during the chase).
struct TGD {
  std::vector<Atom> body;  // may contain Ind guards
  std::vector<Atom> head;  // no Ind atoms

  std::set<std::string> frontier_vars() const;
  std::set<std::string> existential_vars() const;
  auto operator<=>(const TGD&) const = default;
};

std::string to_string(const TGD& t);

// true iff a homomorphism maps q into `atoms` (constants fixed, variables to
// any term); bottom evaluates false.
bool evaluate_bcq(const std::vector<Atom>& atoms, const CQ& q);

// DL-Lite UCQ rewriting: T,A |= q(c) iff A |= perfect_ref(q,T)(c) for every A.
// Preserves MaxLenCQ; disjuncts deduplicated up to isomorphism.
UCQ perfect_ref(const UCQ& q, const TBox& t);
UCQ perfect_ref(const CQ& q, const TBox& t);

// Certain entailment of a closed UCQ from an ABox / from a set of BCQs
// (frozen first) under a TBox.
bool entails(const TBox& t, const ABox& premise, const UCQ& q);
bool entails(const TBox& t, const ABox& premise, const CQ& q);
bool entails(const TBox& t, const std::vector<CQ>& premise, const UCQ& q);
bool entails(const TBox& t, const std::vector<CQ>& premise, const CQ& q);

bool is_consistent(const TBox& t, const ABox& a);

// TGDs equivalent to the positive inclusions of a DL-Lite TBox.
std::vector<TGD> tgds_of_tbox(const TBox& t);

// Breadth-first restricted chase for `depth` rounds; fresh nulls _c<i>.
std::vector<Atom> chase(const std::vector<Atom>& atoms, const std::vector<TGD>& tgds,
                        int depth, int* null_counter = nullptr);

struct Signature {
  std::map<std::string, int> preds;  // name -> arity (1 or 2)
  std::set<std::string> consts;
};

Signature signature_of(const TBox& t, const ABox& a, const Policy& p, const UCQ* q = nullptr);

// Canonical finite representation of the BCQs of length <= k entailed by T,A:
// cores, pairwise non-isomorphic, over the given signature.
struct CensorUniverse {
  int k = 0;
  std::vector<CQ> members;
  Signature sig;
};

CensorUniverse bcq_cons_k(const TBox& t, const ABox& a, int k, const Signature& sig,
                          std::size_t candidate_cap = 100000);

}  // namespace cqe

#endif
