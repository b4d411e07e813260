#ifndef CQE_FO_HPP
#define CQE_FO_HPP

#include <memory>
#include <string>
#include <vector>

#include "cqe/model.hpp"

namespace cqe {

// First-order formulas over the evaluation structure: predicate atoms, the
// Ind marker ("is a genuine constant"), Boolean connectives, and existential
// quantification.  Value type; compared structurally.
struct FOFormula {
  enum class Kind : std::uint8_t { Pred, Ind, And, Or, Not, Exists, True, False };

  Kind kind = Kind::True;
  Atom atom;                    // Pred
  Term ind_term;                // Ind
  std::vector<Term> vars;       // Exists (nonempty, all Variable)
  std::vector<FOFormula> subs;  // And/Or (any number), Not/Exists (exactly one)

  static FOFormula pred(Atom a);
  static FOFormula ind(Term t);
  static FOFormula conj(std::vector<FOFormula> fs);
  static FOFormula disj(std::vector<FOFormula> fs);
  static FOFormula neg(FOFormula f);
  static FOFormula exists(std::vector<Term> vars, FOFormula f);
  static FOFormula tru() { return FOFormula{Kind::True, {}, {}, {}, {}}; }
  static FOFormula fls() { return FOFormula{Kind::False, {}, {}, {}, {}}; }

  auto operator<=>(const FOFormula&) const = default;
};

// The existential closure of a CQ's atoms (its free variables stay free).
FOFormula fo_of_cq(const CQ& q);
FOFormula fo_of_ucq(const UCQ& q);

}  // namespace cqe

#endif
