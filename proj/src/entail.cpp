#include "cqe/entail.hpp"

#include <algorithm>
#include <map>

namespace cqe {

namespace {

// Connected components of a BCQ's atoms, gluing on shared variables; ground
// atoms are their own components.  A censor entails the query iff it entails
// every component (components share only constants).
std::vector<CQ> pieces_of(const CQ& q) {
  int n = q.len();
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  std::map<std::string, int> var_home;
  for (int i = 0; i < n; ++i)
    for (const Term& t : q.atoms[i].args)
      if (t.is_var()) {
        auto [it, fresh] = var_home.emplace(t.name, i);
        if (!fresh) parent[find(i)] = find(it->second);
      }
  std::map<int, std::vector<Atom>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(q.atoms[i]);
  std::vector<CQ> out;
  for (auto& [root, atoms] : groups) out.push_back(CQ::make({}, std::move(atoms)));
  return out;
}

void add_unique(std::vector<CQ>& set, const CQ& q) {
  if (!contains_isomorphic(set, q)) set.push_back(q);
}

// For one homomorphism image of `base` (a BCQ), walk the subsets of variables
// that landed on constants, grounding each subset, and report the cored
// pieces of every result.
void for_each_grounding(const CQ& base, const Binding& hom,
                        const std::function<void(const std::vector<CQ>&)>& cb) {
  std::vector<std::pair<std::string, Term>> opts;
  for (const Term& v : base.all_vars()) {
    auto it = hom.find(v.name);
    if (it != hom.end() && it->second.is_const()) opts.emplace_back(v.name, it->second);
  }
  int m = static_cast<int>(opts.size());
  for (int mask = 0; mask < (1 << m); ++mask) {
    Binding g;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) g.emplace(opts[i].first, opts[i].second);
    CQ grounded = apply_binding(base, g);
    std::vector<CQ> pieces;
    for (const CQ& p : pieces_of(grounded)) pieces.push_back(core_of(p));
    cb(pieces);
  }
}

}  // namespace

std::vector<CQ> relevant_policy_pieces(const CQEInstance& e, int k) {
  std::vector<Atom> ch = chase(e.abox.atoms, tgds_of_tbox(e.tbox), k + 1);
  std::vector<CQ> out;
  for (const ED& ed : e.policy.eds) {
    std::set<std::string> universals;
    for (const Term& v : ed.body.answer_vars) universals.insert(v.name);
    for (const CQ& dd : perfect_ref(ed.body, e.tbox).disjuncts) {
      for_each_hom(
          dd.atoms, ch, {},
          [&](const Binding& b) {
            Binding ub;
            for (const std::string& v : universals) ub.emplace(v, b.at(v));
            CQ base = apply_binding(dd, ub);  // universal vars become constants
            for_each_grounding(base, b, [&](const std::vector<CQ>& pieces) {
              for (const CQ& p : pieces)
                if (entails(e.tbox, e.abox, p)) add_unique(out, p);
            });
            return false;
          },
          &universals);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<CQ>> query_decompositions(const CQEInstance& e, const CQ& disjunct, int k) {
  std::vector<Atom> ch = chase(e.abox.atoms, tgds_of_tbox(e.tbox), k + 1);
  std::vector<std::vector<CQ>> out;
  auto add_decomp = [&](std::vector<CQ> pieces) {
    std::sort(pieces.begin(), pieces.end());
    if (std::find(out.begin(), out.end(), pieces) == out.end()) out.push_back(std::move(pieces));
  };
  if (disjunct.is_bottom()) return out;
  for (const CQ& dd : perfect_ref(disjunct, e.tbox).disjuncts) {
    for_each_hom(dd.atoms, ch, {}, [&](const Binding& b) {
      for_each_grounding(dd, b, [&](const std::vector<CQ>& pieces) {
        for (const CQ& p : pieces)
          if (!entails(e.tbox, e.abox, p)) return;  // truncation guard
        add_decomp(pieces);
      });
      return false;
    });
  }
  return out;
}

ScResult sc_entails_explain(const CQEInstance& e, const UCQ& q, const EntailBudget& b) {
  int k = std::max(q.max_len_cq(), e.policy.max_len_cq());
  std::vector<CQ> relevant = relevant_policy_pieces(e, k);
  std::vector<std::vector<CQ>> traces = maximal_censor_sets(e, relevant, b.node_cap);
  std::vector<std::vector<CQ>> decomps;
  for (const CQ& d : q.disjuncts)
    for (auto& dc : query_decompositions(e, d, k)) decomps.push_back(std::move(dc));
  for (const std::vector<CQ>& trace : traces) {
    // piece membership in the censor this trace generates
    std::map<CQ, bool> member_memo;
    auto in_censor = [&](const CQ& p) {
      auto it = member_memo.find(p);
      if (it != member_memo.end()) return it->second;
      std::vector<CQ> grown = trace;
      grown.push_back(p);
      bool ok = censor_extends(e, grown);
      member_memo.emplace(p, ok);
      return ok;
    };
    bool entailed = false;
    for (const std::vector<CQ>& decomp : decomps) {
      bool all = true;
      for (const CQ& p : decomp)
        if (!in_censor(p)) { all = false; break; }
      if (all) { entailed = true; break; }
    }
    if (!entailed) return {false, trace};
  }
  return {true, std::nullopt};
}

bool sc_entails(const CQEInstance& e, const UCQ& q, const EntailBudget& b) {
  return sc_entails_explain(e, q, b).entailed;
}

bool sc_entails(const CQEInstance& e, const CQ& q, const EntailBudget& b) {
  return sc_entails(e, UCQ::single(q), b);
}

bool ic_entails(const CQEInstance& e, const UCQ& q, const EntailBudget& b) {
  for (const CQ& d : q.disjuncts)
    if (sc_entails(e, d, b)) return true;
  return false;
}

bool sc_entails_oracle(const CQEInstance& e, const UCQ& q, std::optional<int> k_override,
                       const EntailBudget& b) {
  int k = k_override.value_or(std::max(q.max_len_cq(), e.policy.max_len_cq()));
  for (const auto& c : optimal_censors(e, k, b.universe_cap, b.node_cap))
    if (!entails(e.tbox, c, q)) return false;
  return true;
}

bool ic_entails_oracle(const CQEInstance& e, const UCQ& q, std::optional<int> k_override,
                       const EntailBudget& b) {
  int k = k_override.value_or(std::max(q.max_len_cq(), e.policy.max_len_cq()));
  auto censors = optimal_censors(e, k, b.universe_cap, b.node_cap);
  std::vector<CQ> intersection;
  for (const CQ& m : censors.front()) {
    bool everywhere = true;
    for (std::size_t i = 1; i < censors.size(); ++i)
      if (!contains_isomorphic(censors[i], m)) { everywhere = false; break; }
    if (everywhere) intersection.push_back(m);
  }
  return entails(e.tbox, intersection, q);
}

}  // namespace cqe
