#include "cqe/rewrite.hpp"

#include <algorithm>
#include <map>

namespace cqe {

// ---------------------------------------------------------------------------
// dependency graph

DependencyGraph dependency_graph(const TBox& t, const Policy& p) {
  DependencyGraph g;
  for (const TBoxAxiom& ax : t) {
    g.nodes.insert(ax.lhs.pred);
    g.nodes.insert(ax.rhs.pred);
    if (ax.kind == AxiomKind::Inclusion) g.t_edges.emplace(ax.lhs.pred, ax.rhs.pred);
  }
  for (const ED& ed : p.eds) {
    for (const Atom& b : ed.body.atoms) g.nodes.insert(b.pred);
    if (ed.head.is_bottom()) continue;
    for (const Atom& h : ed.head.atoms) g.nodes.insert(h.pred);
    for (const Atom& b : ed.body.atoms)
      for (const Atom& h : ed.head.atoms) g.p_edges.emplace(b.pred, h.pred);
  }
  return g;
}

namespace {

// Tarjan SCCs over the merged edge set.
struct Scc {
  std::map<std::string, std::vector<std::string>> adj;
  std::map<std::string, int> index, low, comp;
  std::vector<std::string> stack;
  std::map<std::string, bool> on_stack;
  int counter = 0, comps = 0;

  void dfs(const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (const std::string& w : adj[v]) {
      if (!index.count(w)) {
        dfs(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      for (;;) {
        std::string w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = comps;
        if (w == v) break;
      }
      ++comps;
    }
  }
};

}  // namespace

bool is_acyclic_policy(const TBox& t, const Policy& p) {
  DependencyGraph g = dependency_graph(t, p);
  Scc scc;
  for (const auto& [u, v] : g.p_edges) scc.adj[u].push_back(v);
  for (const auto& [u, v] : g.t_edges) scc.adj[u].push_back(v);
  for (const std::string& n : g.nodes)
    if (!scc.index.count(n)) scc.dfs(n);
  for (const auto& [u, v] : g.p_edges)
    if (u == v || scc.comp[u] == scc.comp[v]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// TGD translation

TGD tgd_of_ed(const ED& ed) {
  if (ed.head.is_bottom()) throw std::invalid_argument("bottom-headed rule has no TGD");
  TGD g;
  g.body = ed.body.atoms;
  for (const Term& v : ed.body.answer_vars) g.body.push_back(Atom::unary(kIndPred, v));
  g.head = ed.head.atoms;
  return g;
}

std::vector<TGD> policy_tgds(const Policy& p, const TBox& t) {
  std::vector<TGD> out;
  for (const ED& ed : p.eds)
    if (!ed.head.is_bottom()) out.push_back(tgd_of_ed(ed));
  for (TGD& g : tgds_of_tbox(t)) out.push_back(std::move(g));
  return out;
}

// ---------------------------------------------------------------------------
// piece-based backward rewriting

namespace {

struct UnionFind {
  std::map<Term, Term> parent;
  Term find(const Term& t) {
    auto it = parent.find(t);
    if (it == parent.end() || it->second == t) return t;
    Term root = find(it->second);
    parent[t] = root;
    return root;
  }
  void unite(const Term& a, const Term& b) {
    Term ra = find(a), rb = find(b);
    if (!(ra == rb)) parent[ra] = rb;
  }
};

CQ canon_rewrite(const CQ& q) { return core_of(q); }

// One piece-rewriting step: all results of unifying a subset of q's atoms
// with the head of `tgd` (variables renamed apart beforehand).
void piece_steps(const CQ& q, const TGD& tgd, const std::function<void(CQ)>& emit) {
  std::set<Term> rigid;  // free vars of the query
  for (const Term& v : q.answer_vars) rigid.insert(v);
  std::set<Term> head_ex;
  for (const std::string& v : tgd.existential_vars()) head_ex.insert(Term::var(v));

  // atoms eligible for unification (never Ind, pred must occur in the head)
  std::vector<int> eligible;
  for (int i = 0; i < q.len(); ++i) {
    if (q.atoms[i].pred == kIndPred) continue;
    for (const Atom& h : tgd.head)
      if (h.pred == q.atoms[i].pred && h.args.size() == q.atoms[i].args.size()) {
        eligible.push_back(i);
        break;
      }
  }
  int ne = static_cast<int>(eligible.size());
  for (int mask = 1; mask < (1 << ne); ++mask) {
    std::vector<int> piece;
    for (int i = 0; i < ne; ++i)
      if (mask & (1 << i)) piece.push_back(eligible[i]);
    // all assignments piece atom -> head atom
    std::vector<int> assign(piece.size(), 0);
    int nh = static_cast<int>(tgd.head.size());
    for (;;) {
      bool ok = true;
      UnionFind uf;
      for (std::size_t j = 0; j < piece.size() && ok; ++j) {
        const Atom& qa = q.atoms[piece[j]];
        const Atom& ha = tgd.head[assign[j]];
        if (qa.pred != ha.pred || qa.args.size() != ha.args.size()) { ok = false; break; }
        for (std::size_t a = 0; a < qa.args.size(); ++a) uf.unite(qa.args[a], ha.args[a]);
      }
      if (ok) {
        // collect classes
        std::map<Term, std::vector<Term>> classes;
        std::set<Term> all_terms;
        for (int j : piece)
          for (const Term& t : q.atoms[j].args) all_terms.insert(t);
        for (std::size_t j = 0; j < piece.size(); ++j)
          for (const Term& t : tgd.head[assign[j]].args) all_terms.insert(t);
        for (const Term& t : all_terms) classes[uf.find(t)].push_back(t);
        // vars of q outside the piece are external: they must keep their identity
        std::set<Term> external;
        std::set<int> in_piece(piece.begin(), piece.end());
        for (int i = 0; i < q.len(); ++i)
          if (!in_piece.count(i))
            for (const Term& t : q.atoms[i].args)
              if (t.is_var()) external.insert(t);
        Binding subst;
        for (auto& [root, members] : classes) {
          const Term* cst = nullptr;
          const Term* rigid_var = nullptr;
          bool has_ex = false;
          int n_rigid = 0;
          for (const Term& t : members) {
            if (t.is_const() || t.is_null()) {
              if (cst && !(*cst == t)) { ok = false; break; }
              cst = &t;
            } else if (rigid.count(t) || external.count(t)) {
              if (rigid_var && !(*rigid_var == t)) n_rigid = 2;
              rigid_var = &t;
              ++n_rigid;
            } else if (head_ex.count(t)) {
              has_ex = true;
            }
          }
          if (!ok) break;
          if (cst && rigid_var) { ok = false; break; }        // frozen var vs constant
          if (n_rigid > 1) { ok = false; break; }             // two frozen vars merged
          if (has_ex && (cst || rigid_var)) { ok = false; break; }  // existential leaks out
          Term rep = cst ? *cst : (rigid_var ? *rigid_var : members.front());
          for (const Term& t : members)
            if (t.is_var() && !(t == rep)) subst.emplace(t.name, rep);
        }
        if (ok) {
          std::vector<Atom> atoms;
          for (int i = 0; i < q.len(); ++i)
            if (!in_piece.count(i)) atoms.push_back(q.atoms[i]);
          for (const Atom& b : tgd.body) atoms.push_back(b);
          atoms = apply_binding(atoms, subst);
          // Ind on a constant is vacuous
          std::erase_if(atoms, [](const Atom& a) {
            return a.pred == kIndPred && !a.args[0].is_var();
          });
          if (!atoms.empty()) {
            try {
              emit(CQ::make(q.answer_vars, std::move(atoms)));
            } catch (const std::invalid_argument&) {
              // a free variable vanished: not a valid rewriting step
            }
          }
        }
      }
      // next assignment
      std::size_t j = 0;
      while (j < assign.size() && ++assign[j] == nh) assign[j++] = 0;
      if (j == assign.size()) break;
      if (assign.empty()) break;
    }
    if (tgd.head.empty()) break;
  }
}

TGD rename_tgd_apart(const TGD& g, const std::set<Term>& avoid, int& ctr) {
  Binding b;
  std::set<std::string> vars;
  for (const Atom& a : g.body)
    for (const Term& t : a.args)
      if (t.is_var()) vars.insert(t.name);
  for (const Atom& a : g.head)
    for (const Term& t : a.args)
      if (t.is_var()) vars.insert(t.name);
  for (const std::string& v : vars) b.emplace(v, Term::var("g" + std::to_string(ctr++)));
  (void)avoid;
  return TGD{apply_binding(g.body, b), apply_binding(g.head, b)};
}

}  // namespace

std::vector<CQ> ucq_rewrite(const CQ& q, const std::vector<TGD>& tgds, std::size_t cap) {
  std::vector<CQ> result = {canon_rewrite(q)};
  std::vector<CQ> work = result;
  int ctr = 0;
  while (!work.empty()) {
    CQ cur = std::move(work.back());
    work.pop_back();
    std::set<Term> avoid = cur.all_vars();
    for (const TGD& g0 : tgds) {
      TGD g = rename_tgd_apart(g0, avoid, ctr);
      piece_steps(cur, g, [&](CQ next) {
        CQ c = canon_rewrite(next);
        if (!contains_isomorphic(result, c)) {
          if (result.size() >= cap)
            throw ResourceLimitError("UCQ rewriting exceeded " + std::to_string(cap) + " members");
          result.push_back(c);
          work.push_back(std::move(c));
        }
      });
    }
  }
  return dedup_isomorphic(std::move(result));
}

CQ no_ind(const CQ& q) {
  std::vector<Atom> atoms;
  for (const Atom& a : q.atoms)
    if (a.pred != kIndPred) atoms.push_back(a);
  std::vector<Term> answer;
  std::set<Term> vars;
  for (const Atom& a : atoms)
    for (const Term& t : a.args)
      if (t.is_var()) vars.insert(t);
  for (const Term& v : q.answer_vars)
    if (vars.count(v)) answer.push_back(v);
  return CQ::make(std::move(answer), std::move(atoms));
}

std::vector<ED> ed_closure(const Policy& p, const TBox& t, std::size_t cap) {
  if (!is_acyclic_policy(t, p)) throw NotAcyclicError("policy is not acyclic for this TBox");
  std::vector<TGD> tgds = policy_tgds(p, t);
  std::vector<ED> out;
  for (const ED& ed : p.eds) {
    for (const CQ& q : ucq_rewrite(ed.body, tgds, cap)) {
      CQ body = no_ind(q);
      std::vector<Term> frontier;
      std::set<Term> bv = body.all_vars();
      for (const Term& v : ed.frontier)
        if (bv.count(v)) frontier.push_back(v);
      if (frontier.size() != ed.frontier.size()) continue;  // head constants unreachable
      out.push_back(ED::make(std::move(body), ed.head, std::move(frontier)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// phi_pc and Clash

namespace {
const std::string kPseudo = "@";

bool is_pseudo(const Term& t) { return t.is_const() && !t.name.empty() && t.name[0] == '@'; }
}  // namespace

std::optional<CQ> phi_pc(const TBox& t, const Policy& p, const CQ& q) {
  Binding to_pc;
  for (const Term& v : q.answer_vars) to_pc.emplace(v.name, Term::cst(kPseudo + v.name));
  CQ seed = apply_binding(q, to_pc);
  PolicyClosure cl = policy_cons(t, p, {seed});
  if (cl.poisoned) return std::nullopt;
  CQ joined = and_all(rename_apart(cl.queries));
  // restore pseudo-constants to free variables, dodging name collisions
  std::set<std::string> taken;
  for (const Term& v : joined.all_vars()) taken.insert(v.name);
  Binding clash_fix;
  int ctr = 0;
  for (const Term& v : q.answer_vars)
    if (taken.count(v.name)) clash_fix.emplace(v.name, Term::var("fv" + std::to_string(ctr++)));
  std::vector<Atom> atoms = apply_binding(joined.atoms, clash_fix);
  for (Atom& a : atoms)
    for (Term& arg : a.args)
      if (is_pseudo(arg)) arg = Term::var(arg.name.substr(1));
  return CQ::make(q.answer_vars, std::move(atoms));
}

namespace {

FOFormula fo_of_ref(const UCQ& ref) { return fo_of_ucq(ref); }

// conjunction of cand and qi, keeping cand's free variables
CQ conjoin_keep_free(const CQ& cand, const CQ& qi) {
  std::set<Term> avoid = cand.all_vars();
  Binding b;
  int ctr = 0;
  for (const Term& v : qi.all_vars())
    if (avoid.count(v)) b.emplace(v.name, Term::var("c" + std::to_string(ctr++) + "_"));
  std::vector<Atom> atoms = cand.atoms;
  for (const Atom& a : apply_binding(qi.atoms, b)) atoms.push_back(a);
  return CQ::make(cand.answer_vars, std::move(atoms));
}

}  // namespace

FOFormula clash_formula(const TBox& t, const Policy& p, const std::vector<CQ>& qp,
                        const CQ& cand) {
  std::optional<CQ> pc = phi_pc(t, p, cand);
  if (!pc) return FOFormula::fls();
  std::vector<FOFormula> parts = {fo_of_ref(perfect_ref(*pc, t))};
  for (const CQ& qi : qp) {
    std::optional<CQ> pc2 = phi_pc(t, p, conjoin_keep_free(cand, qi));
    if (!pc2) continue;  // negation of an unsatisfiable member is vacuous
    parts.push_back(FOFormula::neg(fo_of_ref(perfect_ref(*pc2, t))));
  }
  return FOFormula::conj(std::move(parts));
}

// ---------------------------------------------------------------------------
// candidate generation

std::vector<CQ> candidate_clash_queries(const TBox& t, const Policy& p, const UCQ& q,
                                        std::size_t q_cap) {
  std::vector<ED> closure = ed_closure(p, t, q_cap);
  // base shapes: subqueries of closure bodies with every variable free
  std::vector<CQ> bases;
  for (const ED& ed : closure) {
    for (const CQ& s : subqueries(CQ::make({}, ed.body.atoms))) {
      std::set<Term> vars = s.all_vars();
      CQ shape = CQ::make({vars.begin(), vars.end()}, s.atoms);
      if (!contains_isomorphic(bases, shape)) bases.push_back(std::move(shape));
    }
  }
  std::sort(bases.begin(), bases.end());
  // constants a specialization may mention: those of the query and the policy
  std::set<std::string> kset = constants_of(q);
  for (const std::string& c : constants_of(p)) kset.insert(c);
  for (const ED& ed : closure)
    for (const std::string& c : ed.body.constants()) kset.insert(c);
  std::vector<Term> consts;
  for (const std::string& c : kset) consts.push_back(Term::cst(c));

  int m = static_cast<int>(q.disjuncts.size());
  std::vector<CQ> out;
  auto add = [&](CQ cand) {
    if (!contains_isomorphic(out, cand)) {
      if (out.size() >= q_cap)
        throw ResourceLimitError("clash candidate set exceeded " + std::to_string(q_cap));
      out.push_back(std::move(cand));
    }
  };
  // union of up to m shapes, variables renamed apart; then every way of
  // merging variables with each other or fixing them to a known constant
  // (distinct free variables stay generic in the closure computation, so the
  // collapsed variants are genuinely different candidates)
  std::vector<int> combo;
  std::function<void(int, int)> walk = [&](int start, int left) {
    if (!combo.empty()) {
      std::vector<Atom> atoms;
      std::vector<Term> vars;
      int ctr = 0;
      for (int i : combo) {
        Binding b;
        for (const Term& v : bases[i].all_vars()) {
          Term fresh = Term::var("q" + std::to_string(ctr++));
          b.emplace(v.name, fresh);
          vars.push_back(fresh);
        }
        for (const Atom& a : apply_binding(bases[i].atoms, b)) atoms.push_back(a);
      }
      // restricted-growth specialization: each variable keeps itself, joins an
      // earlier kept variable, or becomes a constant
      Binding spec;
      std::vector<Term> kept;
      std::function<void(std::size_t)> assign = [&](std::size_t i) {
        if (i == vars.size()) {
          std::vector<Atom> inst = apply_binding(atoms, spec);
          std::set<Term> used;
          for (const Atom& a : inst)
            for (const Term& tm : a.args)
              if (tm.is_var()) used.insert(tm);
          add(CQ::make({used.begin(), used.end()}, std::move(inst)));
          return;
        }
        kept.push_back(vars[i]);
        assign(i + 1);  // stays its own free variable
        kept.pop_back();
        for (const Term& k : kept) {
          spec[vars[i].name] = k;
          assign(i + 1);
        }
        for (const Term& c : consts) {
          spec[vars[i].name] = c;
          assign(i + 1);
        }
        spec.erase(vars[i].name);
      };
      assign(0);
    }
    if (left == 0) return;
    for (int i = start; i < static_cast<int>(bases.size()); ++i) {
      combo.push_back(i);
      walk(i, left - 1);
      combo.pop_back();
    }
  };
  walk(0, m);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// the rewritings

FOFormula sc_rewriting(const TBox& t, const Policy& p, const UCQ& q, std::size_t q_cap,
                       RewriteInfo* info) {
  if (!is_acyclic_policy(t, p)) throw NotAcyclicError("policy is not acyclic for this TBox");
  int m = static_cast<int>(q.disjuncts.size());
  int h = static_cast<int>(p.eds.size());
  int k = p.max_len_cq();
  long long ell = m;
  for (int i = 0; i < h; ++i) ell *= std::max(k, 1);
  std::vector<CQ> cands = candidate_clash_queries(t, p, q, q_cap);
  if (info) *info = RewriteInfo{k, h, m, ell, cands.size()};

  // per-candidate pieces of the Clash formula, shared across subsets
  std::vector<std::optional<CQ>> pc_pos(cands.size());
  std::vector<std::vector<std::optional<CQ>>> pc_neg(cands.size(),
                                                     std::vector<std::optional<CQ>>(m));
  for (std::size_t c = 0; c < cands.size(); ++c) {
    pc_pos[c] = phi_pc(t, p, cands[c]);
    if (!pc_pos[c]) continue;
    for (int i = 0; i < m; ++i)
      pc_neg[c][i] = phi_pc(t, p, conjoin_keep_free(cands[c], q.disjuncts[i]));
  }
  // the empty candidate: its Clash degenerates to "no included disjunct's own
  // policy closure is entailed by the data" (a disjunct whose closure fails
  // cannot belong to any censor)
  std::vector<std::optional<CQ>> pc_solo(m);
  for (int i = 0; i < m; ++i) pc_solo[i] = phi_pc(t, p, q.disjuncts[i]);

  std::vector<FOFormula> top;
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<FOFormula> parts;
    for (int i = 0; i < m; ++i) {
      FOFormula ref = fo_of_ucq(perfect_ref(q.disjuncts[i], t));
      parts.push_back((mask & (1 << i)) ? ref : FOFormula::neg(ref));
    }
    std::vector<FOFormula> viable;
    for (int i = 0; i < m; ++i)
      if ((mask & (1 << i)) && pc_solo[i])
        viable.push_back(fo_of_ref(perfect_ref(*pc_solo[i], t)));
    parts.push_back(viable.empty() ? FOFormula::fls() : FOFormula::disj(std::move(viable)));
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (!pc_pos[c]) continue;  // Clash is identically false
      std::vector<FOFormula> clash = {fo_of_ref(perfect_ref(*pc_pos[c], t))};
      for (int i = 0; i < m; ++i) {
        if (!(mask & (1 << i))) continue;
        if (!pc_neg[c][i]) continue;
        clash.push_back(FOFormula::neg(fo_of_ref(perfect_ref(*pc_neg[c][i], t))));
      }
      std::vector<FOFormula> guarded = {FOFormula::conj(std::move(clash))};
      for (const Term& v : cands[c].answer_vars) guarded.push_back(FOFormula::ind(v));
      parts.push_back(FOFormula::neg(
          FOFormula::exists(cands[c].answer_vars, FOFormula::conj(std::move(guarded)))));
    }
    top.push_back(FOFormula::conj(std::move(parts)));
  }
  return FOFormula::disj(std::move(top));
}

FOFormula ic_rewriting(const TBox& t, const Policy& p, const UCQ& q, std::size_t q_cap,
                       RewriteInfo* info) {
  std::vector<FOFormula> parts;
  RewriteInfo acc{};
  for (const CQ& d : q.disjuncts) {
    RewriteInfo one{};
    parts.push_back(sc_rewriting(t, p, UCQ::single(d), q_cap, &one));
    acc = one;
    acc.m = static_cast<int>(q.disjuncts.size());
  }
  if (info) *info = acc;
  return FOFormula::disj(std::move(parts));
}

// ---------------------------------------------------------------------------
// evaluation over the ABox structure

namespace {

bool eval_rec(const FOFormula& f, const std::vector<Atom>& data, const std::vector<Term>& domain,
              Binding& env) {
  switch (f.kind) {
    case FOFormula::Kind::True: return true;
    case FOFormula::Kind::False: return false;
    case FOFormula::Kind::Pred: {
      Atom a = apply_binding(f.atom, env);
      return std::find(data.begin(), data.end(), a) != data.end();
    }
    case FOFormula::Kind::Ind: {
      Term t = f.ind_term;
      if (t.is_var()) {
        auto it = env.find(t.name);
        if (it == env.end()) return false;
        t = it->second;
      }
      return t.is_const();
    }
    case FOFormula::Kind::Not: return !eval_rec(f.subs[0], data, domain, env);
    case FOFormula::Kind::And:
      for (const FOFormula& s : f.subs)
        if (!eval_rec(s, data, domain, env)) return false;
      return true;
    case FOFormula::Kind::Or:
      for (const FOFormula& s : f.subs)
        if (eval_rec(s, data, domain, env)) return true;
      return false;
    case FOFormula::Kind::Exists: {
      std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
        if (i == f.vars.size()) return eval_rec(f.subs[0], data, domain, env);
        const std::string& v = f.vars[i].name;
        auto prev = env.find(v);
        std::optional<Term> saved;
        if (prev != env.end()) saved = prev->second;
        bool hit = false;
        for (const Term& d : domain) {
          env[v] = d;
          if (go(i + 1)) { hit = true; break; }
        }
        if (saved) env[v] = *saved; else env.erase(v);
        return hit;
      };
      return go(0);
    }
  }
  return false;
}

void collect_consts(const FOFormula& f, std::set<Term>& out) {
  if (f.kind == FOFormula::Kind::Pred)
    for (const Term& t : f.atom.args)
      if (t.is_const()) out.insert(t);
  if (f.kind == FOFormula::Kind::Ind && f.ind_term.is_const()) out.insert(f.ind_term);
  for (const FOFormula& s : f.subs) collect_consts(s, out);
}

}  // namespace

bool eval_fo(const FOFormula& f, const ABox& a) {
  std::set<Term> dom;
  for (const Atom& at : a.atoms)
    for (const Term& t : at.args) dom.insert(t);
  collect_consts(f, dom);
  std::vector<Term> domain(dom.begin(), dom.end());
  Binding env;
  return eval_rec(f, a.atoms, domain, env);
}

}  // namespace cqe
