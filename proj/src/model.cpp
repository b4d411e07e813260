#include "cqe/model.hpp"

#include <algorithm>
#include <sstream>

namespace cqe {

std::string to_string(const Term& t) {
  switch (t.kind) {
    case TermKind::Constant: return t.name;
    case TermKind::Null: return "_" + t.name;
    case TermKind::Variable: return "?" + t.name;
  }
  return t.name;
}

std::string to_string(const Atom& a) {
  if (a.is_bottom()) return "bot";
  std::string s = a.pred + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ",";
    s += to_string(a.args[i]);
  }
  return s + ")";
}

std::string to_string(const CQ& q) {
  std::string s;
  if (!q.answer_vars.empty()) {
    s += "[";
    for (std::size_t i = 0; i < q.answer_vars.size(); ++i) {
      if (i) s += ",";
      s += to_string(q.answer_vars[i]);
    }
    s += "] ";
  }
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    if (i) s += ", ";
    s += to_string(q.atoms[i]);
  }
  return s;
}

std::string to_string(const UCQ& q) {
  std::string s;
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) s += " | ";
    s += to_string(q.disjuncts[i]);
  }
  return s;
}

std::string to_string(const BasicRef& b) {
  std::string s;
  if (b.exists) s += "exists ";
  s += b.pred;
  if (b.inverse) s += "-";
  return s;
}

std::string to_string(const TBoxAxiom& ax) {
  return to_string(ax.lhs) + (ax.kind == AxiomKind::Inclusion ? " sub " : " disj ") +
         to_string(ax.rhs);
}

// ---------------------------------------------------------------------------

static void sort_unique(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
}

CQ ConjunctiveQuery::make(std::vector<Term> answer_vars, std::vector<Atom> atoms) {
  CQ q;
  q.answer_vars = std::move(answer_vars);
  q.atoms = std::move(atoms);
  sort_unique(q.atoms);
  if (q.atoms.empty()) throw std::invalid_argument("CQ needs at least one atom");
  bool has_bot = std::any_of(q.atoms.begin(), q.atoms.end(),
                             [](const Atom& a) { return a.is_bottom(); });
  if (has_bot) {
    if (q.atoms.size() != 1 || !q.answer_vars.empty())
      throw std::invalid_argument("bottom must be the only atom of a closed CQ");
    return q;
  }
  auto av = q.all_vars();
  for (const Term& v : q.answer_vars) {
    if (!v.is_var()) throw std::invalid_argument("answer vars must be variables");
    if (!av.count(v)) throw std::invalid_argument("answer var " + to_string(v) + " not in atoms");
  }
  return q;
}

CQ ConjunctiveQuery::bottom() {
  CQ q;
  q.atoms = {Atom::bottom()};
  return q;
}

std::set<Term> ConjunctiveQuery::all_vars() const {
  std::set<Term> out;
  for (const Atom& a : atoms)
    for (const Term& t : a.args)
      if (t.is_var()) out.insert(t);
  return out;
}

std::set<Term> ConjunctiveQuery::existential_vars() const {
  std::set<Term> out = all_vars();
  for (const Term& v : answer_vars) out.erase(v);
  return out;
}

std::set<std::string> ConjunctiveQuery::constants() const {
  std::set<std::string> out;
  for (const Atom& a : atoms)
    for (const Term& t : a.args)
      if (t.is_const()) out.insert(t.name);
  return out;
}

UCQ UnionQuery::make(std::vector<CQ> disjuncts) {
  if (disjuncts.empty()) throw std::invalid_argument("UCQ needs at least one disjunct");
  std::size_t arity = disjuncts[0].answer_vars.size();
  for (const CQ& d : disjuncts)
    if (d.answer_vars.size() != arity)
      throw std::invalid_argument("UCQ disjuncts disagree on answer arity");
  UCQ u;
  u.disjuncts = std::move(disjuncts);
  return u;
}

int UnionQuery::max_len_cq() const {
  int m = 0;
  for (const CQ& d : disjuncts) m = std::max(m, d.len());
  return m;
}

ABox ABox::make(std::vector<Atom> atoms) {
  for (const Atom& a : atoms) {
    if (a.is_bottom()) throw std::invalid_argument("ABox cannot contain bottom");
    for (const Term& t : a.args)
      if (t.is_var()) throw std::invalid_argument("ABox cannot contain variables");
  }
  ABox b;
  b.atoms = std::move(atoms);
  sort_unique(b.atoms);
  return b;
}

ED EpistemicDependency::make(CQ body, CQ head, std::vector<Term> frontier) {
  if (body.is_bottom()) throw MalformedEDError("ED body cannot be bottom");
  auto body_vars = body.all_vars();
  for (const Term& v : frontier)
    if (!body_vars.count(v))
      throw MalformedEDError("frontier variable " + to_string(v) + " absent from body");
  if (!head.is_bottom()) {
    std::set<Term> fr(frontier.begin(), frontier.end());
    for (const Term& v : head.answer_vars)
      if (!fr.count(v))
        throw MalformedEDError("head free variable " + to_string(v) + " not in frontier");
  }
  ED d;
  d.body = std::move(body);
  d.head = std::move(head);
  d.frontier = std::move(frontier);
  // normalize: body answer vars = all body vars (universally quantified)
  auto bv = d.body.all_vars();
  d.body.answer_vars.assign(bv.begin(), bv.end());
  return d;
}

int Policy::max_len_cq() const {
  int m = 0;
  for (const ED& d : eds) m = std::max({m, d.body.len(), d.head.len()});
  return m;
}

// ---------------------------------------------------------------------------
// Homomorphisms

namespace {

struct HomSearch {
  const std::vector<Atom>& data;
  const std::function<bool(const Binding&)>& cb;
  const std::set<std::string>* const_only;
  std::vector<const Atom*> pattern;  // remaining atoms, reordered greedily
  Binding bind;

  bool match_term(const Term& pt, const Term& dt, std::vector<std::string>& bound_here) {
    if (pt.is_var()) {
      auto it = bind.find(pt.name);
      if (it != bind.end()) return it->second == dt;
      if (const_only && const_only->count(pt.name) && !dt.is_const()) return false;
      bind.emplace(pt.name, dt);
      bound_here.push_back(pt.name);
      return true;
    }
    return pt == dt;
  }

  // pick the unmatched atom with the most bound variables (cheap join order)
  std::size_t pick(const std::vector<bool>& used) {
    std::size_t best = pattern.size();
    int best_score = -1;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (used[i]) continue;
      int score = 0;
      for (const Term& t : pattern[i]->args)
        if (!t.is_var() || bind.count(t.name)) ++score;
      if (score > best_score) { best_score = score; best = i; }
    }
    return best;
  }

  bool run(std::vector<bool>& used, std::size_t done) {
    if (done == pattern.size()) return cb(bind);
    std::size_t pi = pick(used);
    const Atom& pa = *pattern[pi];
    used[pi] = true;
    for (const Atom& da : data) {
      if (da.pred != pa.pred || da.args.size() != pa.args.size()) continue;
      std::vector<std::string> bound_here;
      bool ok = true;
      for (std::size_t j = 0; j < pa.args.size() && ok; ++j)
        ok = match_term(pa.args[j], da.args[j], bound_here);
      if (ok && run(used, done + 1)) return true;
      for (const std::string& v : bound_here) bind.erase(v);
    }
    used[pi] = false;
    return false;
  }
};

}  // namespace

bool for_each_hom(const std::vector<Atom>& pattern, const std::vector<Atom>& data,
                  const Binding& fixed,
                  const std::function<bool(const Binding&)>& cb,
                  const std::set<std::string>* const_only) {
  for (const Atom& a : pattern)
    if (a.is_bottom()) return false;  // bottom never holds
  HomSearch hs{data, cb, const_only, {}, fixed};
  for (const Atom& a : pattern) hs.pattern.push_back(&a);
  std::vector<bool> used(hs.pattern.size(), false);
  return hs.run(used, 0);
}

bool has_hom(const std::vector<Atom>& pattern, const std::vector<Atom>& data,
             const Binding& fixed) {
  return for_each_hom(pattern, data, fixed, [](const Binding&) { return true; });
}

Atom apply_binding(const Atom& a, const Binding& b) {
  Atom out = a;
  for (Term& t : out.args) {
    if (t.is_var()) {
      auto it = b.find(t.name);
      if (it != b.end()) t = it->second;
    }
  }
  return out;
}

std::vector<Atom> apply_binding(const std::vector<Atom>& atoms, const Binding& b) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) out.push_back(apply_binding(a, b));
  return out;
}

CQ apply_binding(const CQ& q, const Binding& b) {
  std::vector<Term> av;
  for (const Term& v : q.answer_vars) {
    auto it = b.find(v.name);
    Term t = (it != b.end()) ? it->second : v;
    if (t.is_var()) av.push_back(t);  // vars substituted by constants drop out
  }
  // dedup while preserving order
  std::vector<Term> av2;
  for (const Term& v : av)
    if (std::find(av2.begin(), av2.end(), v) == av2.end()) av2.push_back(v);
  return CQ::make(std::move(av2), apply_binding(q.atoms, b));
}

// ---------------------------------------------------------------------------
// core / isomorphism

CQ core_of(const CQ& q) {
  if (q.is_bottom()) return q;
  std::vector<Atom> atoms = q.atoms;
  Binding fixed;
  for (const Term& v : q.answer_vars) fixed.emplace(v.name, v);
  bool shrunk = true;
  while (shrunk && atoms.size() > 1) {
    shrunk = false;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      std::vector<Atom> rest;
      rest.reserve(atoms.size() - 1);
      for (std::size_t j = 0; j < atoms.size(); ++j)
        if (j != i) rest.push_back(atoms[j]);
      if (has_hom(atoms, rest, fixed)) {
        atoms = std::move(rest);
        shrunk = true;
        break;
      }
    }
  }
  return CQ::make(q.answer_vars, std::move(atoms));
}

namespace {

// backtracking search for a bijective variable renaming q1 -> q2
struct IsoSearch {
  const std::vector<Atom>& a1;
  const std::vector<Atom>& a2;
  std::map<std::string, Term> fwd;
  std::set<Term> used;

  bool match(const Term& t1, const Term& t2, std::vector<std::string>& bound) {
    if (t1.is_var()) {
      if (!t2.is_var()) return false;
      auto it = fwd.find(t1.name);
      if (it != fwd.end()) return it->second == t2;
      if (used.count(t2)) return false;
      fwd.emplace(t1.name, t2);
      used.insert(t2);
      bound.push_back(t1.name);
      return true;
    }
    return t1 == t2;
  }

  bool run(std::size_t i, std::vector<bool>& taken) {
    if (i == a1.size()) return true;
    for (std::size_t j = 0; j < a2.size(); ++j) {
      if (taken[j] || a2[j].pred != a1[i].pred || a2[j].args.size() != a1[i].args.size())
        continue;
      std::vector<std::string> bound;
      bool ok = true;
      for (std::size_t p = 0; p < a1[i].args.size() && ok; ++p)
        ok = match(a1[i].args[p], a2[j].args[p], bound);
      if (ok) {
        taken[j] = true;
        if (run(i + 1, taken)) return true;
        taken[j] = false;
      }
      for (const std::string& v : bound) {
        used.erase(fwd[v]);
        fwd.erase(v);
      }
    }
    return false;
  }
};

}  // namespace

bool is_isomorphic(const CQ& q1, const CQ& q2) {
  if (q1.atoms.size() != q2.atoms.size()) return false;
  if (q1.answer_vars.size() != q2.answer_vars.size()) return false;
  if (q1.is_bottom() || q2.is_bottom()) return q1.is_bottom() == q2.is_bottom();
  IsoSearch is{q1.atoms, q2.atoms, {}, {}};
  for (std::size_t i = 0; i < q1.answer_vars.size(); ++i) {
    if (!q2.answer_vars[i].is_var()) return false;
    is.fwd.emplace(q1.answer_vars[i].name, q2.answer_vars[i]);
    is.used.insert(q2.answer_vars[i]);
  }
  std::vector<bool> taken(q2.atoms.size(), false);
  return is.run(0, taken);
}

std::string iso_signature(const CQ& q) {
  // variable-name-blind atom patterns + per-variable occurrence profile
  std::map<std::string, int> var_count;
  for (const Atom& a : q.atoms)
    for (const Term& t : a.args)
      if (t.is_var()) ++var_count[t.name];
  std::map<std::string, int> answer_pos;
  for (std::size_t i = 0; i < q.answer_vars.size(); ++i)
    answer_pos[q.answer_vars[i].name] = static_cast<int>(i) + 1;
  std::vector<std::string> pats;
  for (const Atom& a : q.atoms) {
    std::string s = a.pred + "(";
    for (const Term& t : a.args) {
      if (t.is_var()) {
        auto ap = answer_pos.find(t.name);
        s += "V" + std::to_string(var_count[t.name]) +
             (ap != answer_pos.end() ? "a" + std::to_string(ap->second) : "");
      } else {
        s += to_string(t);
      }
      s += ";";
    }
    pats.push_back(s + ")");
  }
  std::sort(pats.begin(), pats.end());
  std::string out;
  for (const std::string& p : pats) out += p + "|";
  return out;
}

std::vector<CQ> dedup_isomorphic(std::vector<CQ> qs) {
  std::stable_sort(qs.begin(), qs.end(), [](const CQ& a, const CQ& b) {
    if (a.atoms.size() != b.atoms.size()) return a.atoms.size() < b.atoms.size();
    return a < b;
  });
  std::unordered_map<std::string, std::vector<std::size_t>> buckets;
  std::vector<CQ> out;
  for (CQ& q : qs) {
    std::string sig = iso_signature(q);
    auto& bucket = buckets[sig];
    bool dup = false;
    for (std::size_t idx : bucket)
      if (is_isomorphic(out[idx], q)) { dup = true; break; }
    if (!dup) {
      bucket.push_back(out.size());
      out.push_back(std::move(q));
    }
  }
  return out;
}

bool contains_isomorphic(const std::vector<CQ>& qs, const CQ& q) {
  for (const CQ& c : qs)
    if (is_isomorphic(c, q)) return true;
  return false;
}

// ---------------------------------------------------------------------------

std::vector<CQ> subqueries(const CQ& q) {
  if (q.is_bottom()) throw std::invalid_argument("subqueries of bottom rejected");
  if (!q.is_boolean()) throw std::invalid_argument("subqueries expects a BCQ");
  std::vector<CQ> out;
  std::size_t n = q.atoms.size();
  for (std::uint64_t mask = 1; mask < (1ull << n); ++mask) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ull << i)) atoms.push_back(q.atoms[i]);
    out.push_back(CQ::make({}, std::move(atoms)));
  }
  return dedup_isomorphic(std::move(out));
}

CQ and_all(const std::vector<CQ>& qs) {
  if (qs.empty()) throw std::invalid_argument("and_all of empty set rejected");
  for (const CQ& q : qs)
    if (q.is_bottom()) return CQ::bottom();
  std::vector<Atom> atoms;
  std::vector<Term> av;
  for (const CQ& q : qs) {
    atoms.insert(atoms.end(), q.atoms.begin(), q.atoms.end());
    for (const Term& v : q.answer_vars)
      if (std::find(av.begin(), av.end(), v) == av.end()) av.push_back(v);
  }
  return CQ::make(std::move(av), std::move(atoms));
}

std::vector<CQ> rename_apart(const std::vector<CQ>& qs) {
  std::vector<CQ> out;
  int counter = 0;
  for (const CQ& q : qs) {
    Binding b;
    for (const Term& v : q.existential_vars())
      b.emplace(v.name, Term::var("r" + std::to_string(counter++)));
    out.push_back(apply_binding(q, b));
  }
  return out;
}

ABox freeze(const std::vector<CQ>& qs, int& null_counter) {
  std::vector<Atom> atoms;
  for (const CQ& q : qs) {
    if (q.is_bottom()) throw std::invalid_argument("freeze of bottom rejected");
    Binding b;
    for (const Term& v : q.all_vars())
      b.emplace(v.name, Term::nul("f" + std::to_string(null_counter++)));
    for (const Atom& a : q.atoms) atoms.push_back(apply_binding(a, b));
  }
  return ABox::make(std::move(atoms));
}

ABox freeze(const std::vector<CQ>& qs) {
  int c = 0;
  return freeze(qs, c);
}

std::set<std::string> constants_of(const ABox& a) {
  std::set<std::string> out;
  for (const Atom& at : a.atoms)
    for (const Term& t : at.args)
      if (t.is_const()) out.insert(t.name);
  return out;
}

std::set<std::string> constants_of(const Policy& p) {
  std::set<std::string> out;
  for (const ED& d : p.eds) {
    auto b = d.body.constants();
    out.insert(b.begin(), b.end());
    if (!d.head.is_bottom()) {
      auto h = d.head.constants();
      out.insert(h.begin(), h.end());
    }
  }
  return out;
}

std::set<std::string> constants_of(const UCQ& q) {
  std::set<std::string> out;
  for (const CQ& d : q.disjuncts) {
    auto c = d.constants();
    out.insert(c.begin(), c.end());
  }
  return out;
}

static void collect_preds(const std::vector<Atom>& atoms, std::map<std::string, int>& out) {
  for (const Atom& a : atoms)
    if (!a.is_bottom()) out[a.pred] = static_cast<int>(a.args.size());
}

std::map<std::string, int> predicates_of(const TBox& t, const ABox& a, const Policy& p,
                                         const UCQ* q) {
  std::map<std::string, int> out;
  for (const TBoxAxiom& ax : t)
    for (const BasicRef* b : {&ax.lhs, &ax.rhs})
      out[b->pred] = (b->role_sort || b->exists) ? 2 : 1;
  collect_preds(a.atoms, out);
  for (const ED& d : p.eds) {
    collect_preds(d.body.atoms, out);
    if (!d.head.is_bottom()) collect_preds(d.head.atoms, out);
  }
  if (q)
    for (const CQ& d : q->disjuncts) collect_preds(d.atoms, out);
  return out;
}

}  // namespace cqe
