#include "cqe/reasoner.hpp"

#include <algorithm>
#include <deque>

namespace cqe {

std::set<std::string> TGD::frontier_vars() const {
  std::set<std::string> bv, out;
  for (const Atom& a : body)
    for (const Term& t : a.args)
      if (t.is_var()) bv.insert(t.name);
  for (const Atom& a : head)
    for (const Term& t : a.args)
      if (t.is_var() && bv.count(t.name)) out.insert(t.name);
  return out;
}

std::set<std::string> TGD::existential_vars() const {
  std::set<std::string> bv, out;
  for (const Atom& a : body)
    for (const Term& t : a.args)
      if (t.is_var()) bv.insert(t.name);
  for (const Atom& a : head)
    for (const Term& t : a.args)
      if (t.is_var() && !bv.count(t.name)) out.insert(t.name);
  return out;
}

std::string to_string(const TGD& t) {
  std::string s;
  for (std::size_t i = 0; i < t.body.size(); ++i) {
    if (i) s += ", ";
    s += to_string(t.body[i]);
  }
  s += " -> ";
  for (std::size_t i = 0; i < t.head.size(); ++i) {
    if (i) s += ", ";
    s += to_string(t.head[i]);
  }
  return s;
}

bool evaluate_bcq(const std::vector<Atom>& atoms, const CQ& q) {
  if (q.is_bottom()) return false;
  return has_hom(q.atoms, atoms);
}

// ---------------------------------------------------------------------------
// PerfectRef

namespace {

// occurrence count of each variable across a CQ's atoms
std::map<std::string, int> var_occurrences(const CQ& q) {
  std::map<std::string, int> out;
  for (const Atom& a : q.atoms)
    for (const Term& t : a.args)
      if (t.is_var()) ++out[t.name];
  return out;
}

bool is_answer_var(const CQ& q, const std::string& v) {
  for (const Term& t : q.answer_vars)
    if (t.name == v) return true;
  return false;
}

// unbound: single occurrence in the query, not an answer variable
bool unbound(const CQ& q, const std::map<std::string, int>& occ, const Term& t) {
  if (!t.is_var()) return false;
  return occ.at(t.name) == 1 && !is_answer_var(q, t.name);
}

// the atom asserting membership in a basic concept at term x (fresh existential
// variable for the role's other position)
Atom concept_atom(const BasicRef& b, const Term& x, int& fresh) {
  if (!b.exists) return Atom::unary(b.pred, x);
  Term y = Term::var("pr" + std::to_string(fresh++));
  return b.inverse ? Atom::role(b.pred, y, x) : Atom::role(b.pred, x, y);
}

// rewrite one atom by one applicable positive inclusion; nullopt if inapplicable
std::optional<Atom> atom_rewrite(const CQ& q, const std::map<std::string, int>& occ,
                                 const Atom& g, const TBoxAxiom& ax, int& fresh) {
  if (ax.kind != AxiomKind::Inclusion) return std::nullopt;
  if (g.arity() == 1) {
    // g = A(x); applicable if rhs is the atomic concept A
    if (ax.lhs.role_sort || ax.rhs.role_sort || ax.rhs.exists || ax.rhs.pred != g.pred)
      return std::nullopt;
    return concept_atom(ax.lhs, g.args[0], fresh);
  }
  // g = s(x,y)
  if (ax.rhs.role_sort) {
    // role inclusion r [-] sub s [-]
    if (ax.rhs.pred != g.pred) return std::nullopt;
    bool flip = ax.lhs.inverse != ax.rhs.inverse;
    return flip ? Atom::role(ax.lhs.pred, g.args[1], g.args[0])
                : Atom::role(ax.lhs.pred, g.args[0], g.args[1]);
  }
  if (!ax.rhs.exists || ax.rhs.pred != g.pred) return std::nullopt;
  // B sub exists s [-]: the existentially implied position must be unbound
  const Term& subj = ax.rhs.inverse ? g.args[1] : g.args[0];
  const Term& obj = ax.rhs.inverse ? g.args[0] : g.args[1];
  if (!unbound(q, occ, obj)) return std::nullopt;
  return concept_atom(ax.lhs, subj, fresh);
}

// most general unifier of two atoms (same pred/arity); answer variables and
// constants are rigid, two distinct rigid terms never merge
std::optional<Binding> unify_atoms(const CQ& q, const Atom& a, const Atom& b) {
  if (a.pred != b.pred || a.args.size() != b.args.size()) return std::nullopt;
  auto rigid = [&](const Term& t) { return !t.is_var() || is_answer_var(q, t.name); };
  // union-find over term names
  std::map<std::string, std::string> parent;
  std::function<std::string(std::string)> find = [&](std::string x) {
    while (parent.count(x) && parent[x] != x) x = parent[x];
    return x;
  };
  std::map<std::string, Term> rep;  // class -> rigid representative
  auto key = [](const Term& t) { return std::to_string(int(t.kind)) + ":" + t.name; };
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    std::string ka = find(key(a.args[i])), kb = find(key(b.args[i]));
    if (ka == kb) continue;
    Term ra = rep.count(ka) ? rep[ka] : a.args[i];
    Term rb = rep.count(kb) ? rep[kb] : b.args[i];
    if (rigid(ra) && rigid(rb) && !(ra == rb)) return std::nullopt;
    parent[ka] = kb;
    if (rigid(ra)) rep[kb] = ra;
    else if (rigid(rb)) rep[kb] = rb;
    else rep[kb] = rb;
  }
  Binding out;
  auto emit = [&](const Term& t) {
    if (!t.is_var()) return;
    std::string r = find(key(t));
    Term target = rep.count(r) ? rep[r] : t;
    if (!(target == t)) out[t.name] = target;
  };
  for (const Term& t : a.args) emit(t);
  for (const Term& t : b.args) emit(t);
  return out;
}

}  // namespace

UCQ perfect_ref(const UCQ& q, const TBox& t) {
  std::vector<CQ> result;      // deduped up to isomorphism
  std::deque<CQ> work(q.disjuncts.begin(), q.disjuncts.end());
  int fresh = 0;
  auto push = [&](CQ nq) {
    if (!contains_isomorphic(result, nq)) {
      result.push_back(nq);
      work.push_back(std::move(nq));
    }
  };
  for (const CQ& d : q.disjuncts)
    if (!contains_isomorphic(result, d)) result.push_back(d);
  while (!work.empty()) {
    CQ cur = work.front();
    work.pop_front();
    if (cur.is_bottom()) continue;
    auto occ = var_occurrences(cur);
    // (a) rewrite one atom by one applicable inclusion
    for (std::size_t i = 0; i < cur.atoms.size(); ++i) {
      for (const TBoxAxiom& ax : t) {
        if (auto g2 = atom_rewrite(cur, occ, cur.atoms[i], ax, fresh)) {
          std::vector<Atom> atoms = cur.atoms;
          atoms[i] = *g2;
          push(CQ::make(cur.answer_vars, std::move(atoms)));
        }
      }
    }
    // (b) reduce: unify two atoms
    for (std::size_t i = 0; i < cur.atoms.size(); ++i) {
      for (std::size_t j = i + 1; j < cur.atoms.size(); ++j) {
        if (auto mgu = unify_atoms(cur, cur.atoms[i], cur.atoms[j]))
          push(apply_binding(cur, *mgu));
      }
    }
  }
  return UCQ::make(dedup_isomorphic(std::move(result)));
}

UCQ perfect_ref(const CQ& q, const TBox& t) { return perfect_ref(UCQ::single(q), t); }

// ---------------------------------------------------------------------------
// Entailment

bool entails(const TBox& t, const ABox& premise, const UCQ& q) {
  UCQ qr = perfect_ref(q, t);
  for (const CQ& d : qr.disjuncts)
    if (evaluate_bcq(premise.atoms, d)) return true;
  return false;
}

bool entails(const TBox& t, const ABox& premise, const CQ& q) {
  return entails(t, premise, UCQ::single(q));
}

bool entails(const TBox& t, const std::vector<CQ>& premise, const UCQ& q) {
  return entails(t, freeze(premise), q);
}

bool entails(const TBox& t, const std::vector<CQ>& premise, const CQ& q) {
  return entails(t, premise, UCQ::single(q));
}

bool is_consistent(const TBox& t, const ABox& a) {
  int fresh = 0;
  for (const TBoxAxiom& ax : t) {
    if (ax.kind != AxiomKind::Disjointness) continue;
    std::vector<Atom> atoms;
    if (ax.lhs.role_sort) {
      Term x = Term::var("dx"), y = Term::var("dy");
      auto role_atom = [&](const BasicRef& b) {
        return b.inverse ? Atom::role(b.pred, y, x) : Atom::role(b.pred, x, y);
      };
      atoms = {role_atom(ax.lhs), role_atom(ax.rhs)};
    } else {
      Term x = Term::var("dx");
      atoms = {concept_atom(ax.lhs, x, fresh), concept_atom(ax.rhs, x, fresh)};
    }
    if (entails(t, a, CQ::make({}, std::move(atoms)))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Instance validation (declared in model.hpp)

CQEInstance validate_instance(TBox t, ABox a, Policy p) {
  for (const ED& d : p.eds)
    ED::make(d.body, d.head, d.frontier);  // re-checks well-formedness
  if (!is_consistent(t, a))
    throw InconsistentOntologyError("TBox and ABox have no common model");
  CQEInstance e;
  e.tbox = std::move(t);
  e.abox = std::move(a);
  e.policy = std::move(p);
  // A TBox without data entails no ground query, so every epistemic dependency
  // is satisfied by the TBox alone; recorded rather than recomputed.
  e.eql_policy_check_passed = true;
  return e;
}

// ---------------------------------------------------------------------------
// Chase

std::vector<TGD> tgds_of_tbox(const TBox& t) {
  std::vector<TGD> out;
  Term x = Term::var("x"), y = Term::var("y"), z = Term::var("z");
  auto lhs_atoms = [&](const BasicRef& b) -> std::vector<Atom> {
    if (b.role_sort) return {b.inverse ? Atom::role(b.pred, y, x) : Atom::role(b.pred, x, y)};
    if (b.exists) return {b.inverse ? Atom::role(b.pred, y, x) : Atom::role(b.pred, x, y)};
    return {Atom::unary(b.pred, x)};
  };
  auto rhs_atoms = [&](const BasicRef& b, bool lhs_role) -> std::vector<Atom> {
    if (b.role_sort) return {b.inverse ? Atom::role(b.pred, y, x) : Atom::role(b.pred, x, y)};
    if (b.exists) return {b.inverse ? Atom::role(b.pred, z, x) : Atom::role(b.pred, x, z)};
    (void)lhs_role;
    return {Atom::unary(b.pred, x)};
  };
  for (const TBoxAxiom& ax : t) {
    if (ax.kind != AxiomKind::Inclusion) continue;
    out.push_back(TGD{lhs_atoms(ax.lhs), rhs_atoms(ax.rhs, ax.lhs.role_sort)});
  }
  return out;
}

std::vector<Atom> chase(const std::vector<Atom>& atoms, const std::vector<TGD>& tgds,
                        int depth, int* null_counter) {
  int local = 0;
  int& ctr = null_counter ? *null_counter : local;
  std::vector<Atom> cur = atoms;
  std::sort(cur.begin(), cur.end());
  cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
  for (int round = 0; round < depth; ++round) {
    std::vector<Atom> added;
    for (const TGD& t : tgds) {
      std::vector<Atom> pattern;
      std::set<std::string> const_only;
      bool impossible = false;
      for (const Atom& a : t.body) {
        if (a.pred == kIndPred) {
          const Term& arg = a.args[0];
          if (arg.is_var()) const_only.insert(arg.name);
          else if (!arg.is_const()) impossible = true;
        } else {
          pattern.push_back(a);
        }
      }
      if (impossible) continue;
      auto ex = t.existential_vars();
      for_each_hom(pattern, cur, {}, [&](const Binding& b) {
        // restricted chase: skip triggers whose head is already satisfied
        Binding frontier_only;
        for (const auto& [v, val] : b)
          if (!ex.count(v)) frontier_only.emplace(v, val);
        std::vector<Atom> all = cur;
        all.insert(all.end(), added.begin(), added.end());
        std::sort(all.begin(), all.end());
        if (has_hom(t.head, all, frontier_only)) return false;
        Binding hb = frontier_only;
        for (const std::string& v : ex)
          hb.emplace(v, Term::nul("c" + std::to_string(ctr++)));
        for (const Atom& h : t.head) added.push_back(apply_binding(h, hb));
        return false;
      }, const_only.empty() ? nullptr : &const_only);
    }
    if (added.empty()) break;
    cur.insert(cur.end(), added.begin(), added.end());
    std::sort(cur.begin(), cur.end());
    cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Bounded consequence universe

Signature signature_of(const TBox& t, const ABox& a, const Policy& p, const UCQ* q) {
  Signature s;
  s.preds = predicates_of(t, a, p, q);
  s.consts = constants_of(a);
  auto pc = constants_of(p);
  s.consts.insert(pc.begin(), pc.end());
  if (q) {
    auto qc = constants_of(*q);
    s.consts.insert(qc.begin(), qc.end());
  }
  return s;
}

CensorUniverse bcq_cons_k(const TBox& t, const ABox& a, int k, const Signature& sig,
                          std::size_t candidate_cap) {
  CensorUniverse u;
  u.k = k;
  u.sig = sig;
  std::vector<Atom> ch = chase(a.atoms, tgds_of_tbox(t), k + 1);
  // term pool: signature constants plus 2k variable names
  std::vector<Term> terms;
  for (const std::string& c : sig.consts) terms.push_back(Term::cst(c));
  for (int i = 0; i < 2 * k; ++i) terms.push_back(Term::var("u" + std::to_string(i)));
  std::vector<Atom> pool;
  for (const auto& [pred, arity] : sig.preds) {
    if (arity == 1) {
      for (const Term& x : terms) pool.push_back(Atom::unary(pred, x));
    } else {
      for (const Term& x : terms)
        for (const Term& y : terms) pool.push_back(Atom::role(pred, x, y));
    }
  }
  std::sort(pool.begin(), pool.end());
  // entailed single atoms only are worth extending: prune the pool up front
  std::vector<Atom> live;
  for (const Atom& a1 : pool)
    if (has_hom({a1}, ch)) live.push_back(a1);
  std::vector<CQ> found;
  std::size_t count = 0;
  std::vector<Atom> stack;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!stack.empty()) {
      if (++count > candidate_cap)
        throw ResourceLimitError("bcq_cons_k candidate cap exceeded (" +
                                 std::to_string(candidate_cap) + ")");
      if (has_hom(stack, ch)) found.push_back(core_of(CQ::make({}, stack)));
      else return;  // supersets of a non-entailed set are non-entailed
    }
    if (static_cast<int>(stack.size()) == k) return;
    for (std::size_t i = start; i < live.size(); ++i) {
      stack.push_back(live[i]);
      rec(i + 1);
      stack.pop_back();
    }
  };
  rec(0);
  u.members = dedup_isomorphic(std::move(found));
  return u;
}

}  // namespace cqe
