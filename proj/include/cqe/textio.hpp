#ifndef CQE_TEXTIO_HPP
#define CQE_TEXTIO_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqe/fo.hpp"
#include "cqe/model.hpp"

namespace cqe {

struct SyntaxError : std::runtime_error {
  int line = 0, col = 0;
  SyntaxError(int line, int col, const std::string& expected)
      : std::runtime_error("syntax error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": expected " + expected),
        line(line),
        col(col) {}
};

struct ArityMismatchError : std::runtime_error {
  explicit ArityMismatchError(const std::string& pred)
      : std::runtime_error("predicate used with inconsistent arity: " + pred) {}
};

struct DuplicateQueryNameError : std::runtime_error {
  explicit DuplicateQueryNameError(const std::string& name)
      : std::runtime_error("duplicate query name: " + name) {}
};

// A parsed problem file: sections TBOX / ABOX / POLICY plus named queries.
struct ProblemFile {
  TBox tbox;
  ABox abox;
  Policy policy;
  std::vector<std::pair<std::string, UCQ>> queries;  // declaration order

  const UCQ* find_query(const std::string& name) const;
};

ProblemFile parse_problem(const std::string& text);
std::string serialize_problem(const ProblemFile& pf);

// Fully parenthesized prefix notation; parse_formula inverts serialize_formula.
std::string serialize_formula(const FOFormula& f);
FOFormula parse_formula(const std::string& text);

}  // namespace cqe

#endif
