#ifndef CQE_HARNESS_HPP
#define CQE_HARNESS_HPP

#include <array>
#include <iosfwd>

#include "cqe/model.hpp"

namespace cqe {

// 3-CNF propositional formula; variables are 1-based indices.
struct Lit {
  int var = 1;
  bool neg = false;
};

struct CNF {
  int num_vars = 0;
  std::vector<std::array<Lit, 3>> clauses;
};

// Satisfiability encoded as protected query answering: the produced instance
// refuses the goal exactly when the formula is satisfiable.
struct ReductionInstance {
  CQEInstance instance;
  CQ goal;  // S(i1)
};

ReductionInstance gen_3cnf_instance(const CNF& phi);

bool sat_brute(const CNF& phi);  // truth table; num_vars <= 20
bool sat_dpll(const CNF& phi);   // independent check: unit propagation + split

// DIMACS CNF with exactly 3 literals per clause; throws std::invalid_argument.
CNF parse_dimacs(std::istream& in);

}  // namespace cqe

#endif
