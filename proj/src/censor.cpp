#include "cqe/censor.hpp"

#include <algorithm>
#include <map>

namespace cqe {

namespace {

// Rewritten rule body with bookkeeping for grounding its universal variables.
struct CompiledED {
  const ED* ed = nullptr;
  std::vector<CQ> body_disjuncts;       // perfect_ref of the body
  std::set<std::string> universal_vars;  // all body free variables
};

std::vector<CompiledED> compile_policy(const TBox& t, const Policy& p) {
  // rewriting the rule bodies is pure in (T, P): memoize across the many
  // closure computations a single censor search performs
  struct Key {
    TBox t;
    Policy p;
    auto operator<=>(const Key&) const = default;
  };
  static std::map<Key, std::vector<std::vector<CQ>>> memo;
  auto [it, fresh] = memo.try_emplace(Key{t, p});
  if (fresh) {
    for (const ED& ed : p.eds) it->second.push_back(perfect_ref(ed.body, t).disjuncts);
    if (memo.size() > 64) {  // keep the cache small; drop an unrelated entry
      auto victim = memo.begin();
      if (victim == it) ++victim;
      memo.erase(victim);
      it = memo.find(Key{t, p});
    }
  }
  std::vector<CompiledED> out;
  for (std::size_t i = 0; i < p.eds.size(); ++i) {
    CompiledED c;
    c.ed = &p.eds[i];
    c.body_disjuncts = it->second[i];
    for (const Term& v : p.eds[i].body.answer_vars) c.universal_vars.insert(v.name);
    out.push_back(std::move(c));
  }
  return out;
}

// Frontier bindings (tuples of constants, in frontier order) at which the
// rule body is entailed by the frozen censor.  Universal variables range over
// constants only.
std::vector<std::vector<Term>> fired_frontiers(const CompiledED& ced,
                                               const std::vector<Atom>& frozen) {
  std::set<std::vector<Term>> seen;
  for (const CQ& d : ced.body_disjuncts) {
    for_each_hom(
        d.atoms, frozen, {},
        [&](const Binding& b) {
          std::vector<Term> key;
          for (const Term& v : ced.ed->frontier) key.push_back(b.at(v.name));
          seen.insert(std::move(key));
          return false;
        },
        &ced.universal_vars);
  }
  return {seen.begin(), seen.end()};
}

CQ instantiate_head(const ED& ed, const std::vector<Term>& frontier_vals) {
  Binding b;
  for (std::size_t i = 0; i < ed.frontier.size(); ++i)
    b.emplace(ed.frontier[i].name, frontier_vals[i]);
  return apply_binding(ed.head, b);
}

}  // namespace

PolicyClosure policy_cons(const TBox& t, const Policy& p, const std::vector<CQ>& seed) {
  PolicyClosure out;
  for (const CQ& q : seed) {
    if (q.is_bottom()) {
      out.poisoned = true;
      return out;
    }
    CQ c = core_of(q);
    if (!contains_isomorphic(out.queries, c)) out.queries.push_back(std::move(c));
  }
  auto compiled = compile_policy(t, p);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Atom> frozen = freeze(out.queries).atoms;
    for (const CompiledED& ced : compiled) {
      for (const std::vector<Term>& vals : fired_frontiers(ced, frozen)) {
        if (ced.ed->head.is_bottom()) {
          out.poisoned = true;
          return out;
        }
        CQ head = core_of(instantiate_head(*ced.ed, vals));
        if (!contains_isomorphic(out.queries, head)) {
          out.queries.push_back(std::move(head));
          changed = true;
        }
      }
    }
  }
  std::sort(out.queries.begin(), out.queries.end());
  return out;
}

bool satisfies_policy(const TBox& t, const std::vector<CQ>& censor, const Policy& p) {
  if (censor.empty()) return true;
  std::vector<Atom> frozen = freeze(censor).atoms;
  for (const CompiledED& ced : compile_policy(t, p)) {
    for (const std::vector<Term>& vals : fired_frontiers(ced, frozen)) {
      if (ced.ed->head.is_bottom()) return false;
      if (!entails(t, censor, instantiate_head(*ced.ed, vals))) return false;
    }
  }
  return true;
}

bool censor_extends(const CQEInstance& e, const std::vector<CQ>& c) {
  PolicyClosure cl = policy_cons(e.tbox, e.policy, c);
  if (cl.poisoned) return false;
  for (const CQ& q : cl.queries)
    if (!entails(e.tbox, e.abox, q)) return false;
  return true;
}

namespace {

// Predicates a rule body could map into, after TBox rewriting.
std::set<std::string> body_predicates(const TBox& t, const Policy& p) {
  std::set<std::string> preds;
  for (const CompiledED& ced : compile_policy(t, p))
    for (const CQ& d : ced.body_disjuncts)
      for (const Atom& a : d.atoms) preds.insert(a.pred);
  return preds;
}

// Enumerates the maximal extendable subsets of the participants.  The family
// of extendable sets is downward closed (a subset fires at most what its
// superset fires), so the maximal members can be enumerated seed-by-seed:
// pick a subset not yet covered by a found maximal set and not containing a
// known unextendable core, then grow it to a maximal set or shrink it to a
// fresh minimal core.  Each iteration discovers one or the other, so the
// oracle-call count is (#maximal sets + #cores) * #participants instead of
// the exponential in/banned tree.
struct MaximalSearch {
  const CQEInstance* e = nullptr;
  std::vector<CQ> participants;
  std::vector<CQ> safe;  // in every maximal set
  long long nodes = 0, node_cap = 0;
  std::map<std::vector<int>, bool> ext_memo;
  std::map<CQ, bool> entail_memo;
  std::set<std::vector<int>> results;
  // covering constraints on candidate seeds, as index lists over participants
  std::vector<std::vector<int>> need_one_outside;  // complements of found maximal sets
  std::vector<std::vector<int>> cores;             // minimal unextendable sets

  void charge() {
    if (++nodes > node_cap)
      throw ResourceLimitError("censor search exceeded node budget (" +
                               std::to_string(node_cap) + ")");
  }

  bool data_entails(const CQ& q) {
    auto it = entail_memo.find(q);
    if (it != entail_memo.end()) return it->second;
    bool ok = entails(e->tbox, e->abox, q);
    entail_memo.emplace(q, ok);
    return ok;
  }

  // safe members share no predicate with any rule body, so they can neither
  // fire a rule nor be fired into: they never affect extendability
  bool ext(std::vector<int> idx) {
    std::sort(idx.begin(), idx.end());
    auto it = ext_memo.find(idx);
    if (it != ext_memo.end()) return it->second;
    charge();
    std::vector<CQ> c;
    for (int i : idx) c.push_back(participants[i]);
    PolicyClosure cl = policy_cons(e->tbox, e->policy, c);
    bool ok = !cl.poisoned;
    if (ok)
      for (const CQ& q : cl.queries)
        if (!data_entails(q)) { ok = false; break; }
    ext_memo.emplace(std::move(idx), ok);
    return ok;
  }

  // model of the covering constraints: for each found maximal set, at least
  // one participant outside it; for each core, at least one member missing
  bool solve_map(std::vector<char>& val) {
    charge();
    int n = static_cast<int>(participants.size());
    for (;;) {  // unit propagation
      bool again = false;
      for (const auto& cl : need_one_outside) {
        int open = -1, nopen = 0;
        bool sat = false;
        for (int i : cl) {
          if (val[i] == 1) { sat = true; break; }
          if (val[i] == 0) { ++nopen; open = i; }
        }
        if (sat) continue;
        if (nopen == 0) return false;
        if (nopen == 1) { val[open] = 1; again = true; }
      }
      for (const auto& cl : cores) {
        int open = -1, nopen = 0;
        bool sat = false;
        for (int i : cl) {
          if (val[i] == -1) { sat = true; break; }
          if (val[i] == 0) { ++nopen; open = i; }
        }
        if (sat) continue;
        if (nopen == 0) return false;
        if (nopen == 1) { val[open] = -1; again = true; }
      }
      if (!again) break;
    }
    // after propagation every unsatisfied clause has >=2 open members;
    // branch on one of them, satisfying value first
    for (const auto& cl : need_one_outside) {
      bool sat = false;
      int open = -1;
      for (int i : cl) {
        if (val[i] == 1) { sat = true; break; }
        if (val[i] == 0 && open < 0) open = i;
      }
      if (sat || open < 0) continue;
      for (int v : {1, -1}) {
        std::vector<char> copy = val;
        copy[open] = static_cast<char>(v);
        if (solve_map(copy)) { val = std::move(copy); return true; }
      }
      return false;
    }
    for (const auto& cl : cores) {
      bool sat = false;
      int open = -1;
      for (int i : cl) {
        if (val[i] == -1) { sat = true; break; }
        if (val[i] == 0 && open < 0) open = i;
      }
      if (sat || open < 0) continue;
      for (int v : {-1, 1}) {
        std::vector<char> copy = val;
        copy[open] = static_cast<char>(v);
        if (solve_map(copy)) { val = std::move(copy); return true; }
      }
      return false;
    }
    // all clauses satisfied; leave the free members out, the caller's greedy
    // pass re-adds whatever the cores allow
    for (int i = 0; i < n; ++i)
      if (val[i] == 0) val[i] = -1;
    return true;
  }

  void run() {
    int n = static_cast<int>(participants.size());
    for (;;) {
      std::vector<char> val(n, 0);
      if (!solve_map(val)) break;
      // maximize the seed: extra members can only satisfy more complements
      std::vector<char> in(n, 0);
      for (int i = 0; i < n; ++i) in[i] = val[i] == 1;
      for (int i = 0; i < n; ++i) {
        if (in[i]) continue;
        bool blocked = false;
        for (const auto& cl : cores) {
          bool full = true;
          for (int j : cl) full = full && (in[j] || j == i);
          if (full && !cl.empty()) { blocked = true; break; }
        }
        if (!blocked) in[i] = 1;
      }
      std::vector<int> seed;
      for (int i = 0; i < n; ++i)
        if (in[i]) seed.push_back(i);
      if (ext(seed)) {
        for (int i = 0; i < n; ++i) {  // grow to a maximal set
          if (std::count(seed.begin(), seed.end(), i)) continue;
          std::vector<int> with = seed;
          with.push_back(i);
          if (ext(with)) seed = std::move(with);
        }
        std::sort(seed.begin(), seed.end());
        std::vector<int> outside;
        for (int i = 0; i < n; ++i)
          if (!std::count(seed.begin(), seed.end(), i)) outside.push_back(i);
        need_one_outside.push_back(std::move(outside));
        results.insert(std::move(seed));
      } else {
        for (std::size_t i = 0; i < seed.size();) {  // shrink to a minimal core
          std::vector<int> without = seed;
          without.erase(without.begin() + i);
          if (!ext(without))
            seed = std::move(without);
          else
            ++i;
        }
        cores.push_back(std::move(seed));
      }
    }
  }
};

}  // namespace

std::vector<std::vector<CQ>> maximal_censor_sets(const CQEInstance& e,
                                                 const std::vector<CQ>& members,
                                                 long long node_cap) {
  MaximalSearch s;
  s.e = &e;
  s.node_cap = node_cap;
  std::set<std::string> preds = body_predicates(e.tbox, e.policy);
  for (const CQ& m : members) {
    bool participant = std::any_of(m.atoms.begin(), m.atoms.end(),
                                   [&](const Atom& a) { return preds.count(a.pred); });
    (participant ? s.participants : s.safe).push_back(m);
  }
  if (!censor_extends(e, s.safe))
    throw std::logic_error("members outside the ontology's consequences");
  s.run();
  std::vector<std::vector<CQ>> out;
  for (const std::vector<int>& idx : s.results) {
    std::vector<CQ> c = s.safe;
    for (int i : idx) c.push_back(s.participants[i]);
    std::sort(c.begin(), c.end());
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<CQ>> optimal_censors(const CQEInstance& e, int k,
                                             std::size_t universe_cap, long long node_cap) {
  Signature sig = signature_of(e.tbox, e.abox, e.policy);
  CensorUniverse u = bcq_cons_k(e.tbox, e.abox, k, sig, universe_cap);
  return maximal_censor_sets(e, u.members, node_cap);
}

}  // namespace cqe
