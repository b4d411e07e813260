#ifndef CQE_MODEL_HPP
#define CQE_MODEL_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cqe {

// ---------------------------------------------------------------------------
// Errors

struct ResourceLimitError : std::runtime_error {
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};
struct InconsistentOntologyError : std::runtime_error {
  explicit InconsistentOntologyError(const std::string& what) : std::runtime_error(what) {}
};
struct MalformedEDError : std::runtime_error {
  explicit MalformedEDError(const std::string& what) : std::runtime_error(what) {}
};
struct NotAcyclicError : std::runtime_error {
  explicit NotAcyclicError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Terms

enum class TermKind : std::uint8_t { Constant = 0, Null = 1, Variable = 2 };

struct Term {
  TermKind kind = TermKind::Constant;
  std::string name;

  static Term cst(std::string n) { return {TermKind::Constant, std::move(n)}; }
  static Term nul(std::string n) { return {TermKind::Null, std::move(n)}; }
  static Term var(std::string n) { return {TermKind::Variable, std::move(n)}; }

  bool is_const() const { return kind == TermKind::Constant; }
  bool is_null() const { return kind == TermKind::Null; }
  bool is_var() const { return kind == TermKind::Variable; }

  // Canonical order: constants < nulls < variables, each lexicographic.
  auto operator<=>(const Term&) const = default;
};

std::string to_string(const Term& t);

// ---------------------------------------------------------------------------
// Atoms

// pred empty <=> the special atom "bottom" (the unsatisfiable CQ).
struct Atom {
  std::string pred;
  std::vector<Term> args;

  static Atom bottom() { return Atom{}; }
  static Atom unary(std::string p, Term t) { return {std::move(p), {std::move(t)}}; }
  static Atom role(std::string p, Term a, Term b) { return {std::move(p), {std::move(a), std::move(b)}}; }

  bool is_bottom() const { return pred.empty(); }
  std::size_t arity() const { return args.size(); }

  auto operator<=>(const Atom&) const = default;
};

std::string to_string(const Atom& a);

// ---------------------------------------------------------------------------
// Conjunctive queries

// Atoms are kept sorted and duplicate-free (set semantics).  Variables not in
// answer_vars are existentially quantified.  A CQ holding the single bottom
// atom is the unsatisfiable query.
struct ConjunctiveQuery {
  std::vector<Term> answer_vars;  // ordered; all Variable
  std::vector<Atom> atoms;        // sorted, unique

  static ConjunctiveQuery make(std::vector<Term> answer_vars, std::vector<Atom> atoms);
  static ConjunctiveQuery bottom();

  bool is_bottom() const { return atoms.size() == 1 && atoms[0].is_bottom(); }
  int len() const { return static_cast<int>(atoms.size()); }
  bool is_boolean() const { return answer_vars.empty(); }

  std::vector<Term> free_vars() const { return answer_vars; }
  std::set<Term> all_vars() const;
  std::set<Term> existential_vars() const;
  std::set<std::string> constants() const;

  auto operator<=>(const ConjunctiveQuery&) const = default;
};

using CQ = ConjunctiveQuery;

std::string to_string(const CQ& q);

struct UnionQuery {
  std::vector<CQ> disjuncts;  // nonempty, same answer arity

  static UnionQuery make(std::vector<CQ> disjuncts);
  static UnionQuery single(CQ q) { return make({std::move(q)}); }

  int max_len_cq() const;
  auto operator<=>(const UnionQuery&) const = default;
};

using UCQ = UnionQuery;

std::string to_string(const UCQ& q);

// ---------------------------------------------------------------------------
// TBox

// A basic concept (atomic A, exists R, exists R-) or basic role (R, R-).
struct BasicRef {
  std::string pred;
  bool role_sort = false;  // true: this is a role-sorted reference
  bool inverse = false;    // R- (role sort) or exists R- (concept sort)
  bool exists = false;     // concept sort only: the "exists R" form

  static BasicRef atomic_concept(std::string a) { return {std::move(a), false, false, false}; }
  static BasicRef exists_role(std::string r, bool inv) { return {std::move(r), false, inv, true}; }
  static BasicRef basic_role(std::string r, bool inv) { return {std::move(r), true, inv, false}; }

  auto operator<=>(const BasicRef&) const = default;
};

std::string to_string(const BasicRef& b);

enum class AxiomKind : std::uint8_t { Inclusion, Disjointness };

struct TBoxAxiom {
  BasicRef lhs, rhs;
  AxiomKind kind = AxiomKind::Inclusion;

  auto operator<=>(const TBoxAxiom&) const = default;
};

using TBox = std::vector<TBoxAxiom>;

std::string to_string(const TBoxAxiom& ax);

// ---------------------------------------------------------------------------
// ABox

struct ABox {
  std::vector<Atom> atoms;  // sorted, unique; no Variable, no bottom

  static ABox make(std::vector<Atom> atoms);
  auto operator<=>(const ABox&) const = default;
};

// ---------------------------------------------------------------------------
// Policy

// forall x1,x2 ( K body(x1,x2) -> K head(x2) ); head may be the bottom CQ.
struct EpistemicDependency {
  CQ body;                     // free vars = body.answer_vars = x1 ++ x2
  CQ head;                     // free vars = frontier (or bottom)
  std::vector<Term> frontier;  // x2, ordered

  static EpistemicDependency make(CQ body, CQ head, std::vector<Term> frontier);
  auto operator<=>(const EpistemicDependency&) const = default;
};

using ED = EpistemicDependency;

struct Policy {
  std::vector<ED> eds;

  int max_len_cq() const;
  auto operator<=>(const Policy&) const = default;
};

struct CQEInstance {
  TBox tbox;
  ABox abox;
  Policy policy;
  bool eql_policy_check_passed = false;  // recorded at validation
};

// Throws InconsistentOntologyError / MalformedEDError.  The "TBox alone
// satisfies the policy" requirement holds vacuously in this logic (a TBox with
// no data entails no ground query); it is recorded as passed.
CQEInstance validate_instance(TBox t, ABox a, Policy p);

// ---------------------------------------------------------------------------
// Structural utilities

// All homomorphisms from `pattern` into `data`.  Constants and nulls in the
// pattern map to themselves; variables map to arbitrary terms of `data`
// (extended by `fixed` pre-bindings).  If `const_only` is nonnull, the named
// variables may only map to constants.  Callback returns true to stop early;
// the function returns true iff stopped early.
using Binding = std::map<std::string, Term>;
bool for_each_hom(const std::vector<Atom>& pattern, const std::vector<Atom>& data,
                  const Binding& fixed,
                  const std::function<bool(const Binding&)>& cb,
                  const std::set<std::string>* const_only = nullptr);

bool has_hom(const std::vector<Atom>& pattern, const std::vector<Atom>& data,
             const Binding& fixed = {});

Atom apply_binding(const Atom& a, const Binding& b);
std::vector<Atom> apply_binding(const std::vector<Atom>& atoms, const Binding& b);
CQ apply_binding(const CQ& q, const Binding& b);

// Retract q onto a minimal subset of its atoms (endomorphisms fix answer vars,
// constants and nulls); output canonicalized.
CQ core_of(const CQ& q);

// Bijective variable renaming matching atom sets, preserving answer-var order.
bool is_isomorphic(const CQ& q1, const CQ& q2);

// Cheap invariant key: equal for isomorphic queries (not conversely).
std::string iso_signature(const CQ& q);

// All BCQs over nonempty atom subsets of q (deduplicated up to isomorphism).
std::vector<CQ> subqueries(const CQ& q);

// Conjunction of a set of CQs; callers rename apart first.
CQ and_all(const std::vector<CQ>& qs);

// Rename existential variables of each member apart (deterministic fresh names).
std::vector<CQ> rename_apart(const std::vector<CQ>& qs);

// Replace each member's distinct existential variables by globally fresh
// labeled nulls; union of the results.
ABox freeze(const std::vector<CQ>& qs);
ABox freeze(const std::vector<CQ>& qs, int& null_counter);

// Deduplicate up to isomorphism, preserving first occurrence; output in
// canonical order (length, then serialized form).
std::vector<CQ> dedup_isomorphic(std::vector<CQ> qs);

bool contains_isomorphic(const std::vector<CQ>& qs, const CQ& q);

std::set<std::string> constants_of(const ABox& a);
std::set<std::string> constants_of(const Policy& p);
std::set<std::string> constants_of(const UCQ& q);

// predicate name -> arity, collected over all components
std::map<std::string, int> predicates_of(const TBox& t, const ABox& a, const Policy& p,
                                         const UCQ* q = nullptr);

}  // namespace cqe

#endif
