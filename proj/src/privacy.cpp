#include "cqe/privacy.hpp"

namespace cqe {

namespace {

// Hom-equivalent minimization of a dataset with labeled nulls.  The dataset
// is a union of null-connected components (each a frozen core query), so it
// suffices to drop every component that maps homomorphically into the rest;
// a whole-structure core would revisit the same folds at exponential cost.
ABox abox_core(const ABox& a) {
  // group atoms by shared nulls
  std::map<std::string, int> null_home;
  std::vector<int> parent(a.atoms.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t i = 0; i < a.atoms.size(); ++i)
    for (const Term& t : a.atoms[i].args)
      if (t.is_null()) {
        auto [it, fresh] = null_home.emplace(t.name, static_cast<int>(i));
        if (!fresh) parent[find(static_cast<int>(i))] = find(it->second);
      }
  std::map<int, std::vector<Atom>> comps;
  for (std::size_t i = 0; i < a.atoms.size(); ++i)
    comps[find(static_cast<int>(i))].push_back(a.atoms[i]);
  std::vector<std::vector<Atom>> kept;
  for (auto& [root, atoms] : comps) kept.push_back(std::move(atoms));
  std::sort(kept.begin(), kept.end(),
            [](const auto& x, const auto& y) { return x.size() < y.size(); });
  // drop components absorbed by the others, smallest first
  for (std::size_t i = 0; i < kept.size();) {
    std::vector<Atom> pattern = kept[i];
    for (Atom& at : pattern)
      for (Term& t : at.args)
        if (t.is_null()) t = Term::var(t.name);
    std::vector<Atom> rest;
    for (std::size_t j = 0; j < kept.size(); ++j)
      if (j != i)
        for (const Atom& at : kept[j]) rest.push_back(at);
    if (for_each_hom(pattern, rest, {}, [](const Binding&) { return true; }))
      kept.erase(kept.begin() + i);
    else
      ++i;
  }
  std::vector<Atom> out;
  for (const auto& comp : kept)
    for (const Atom& at : comp) out.push_back(at);
  return ABox::make(std::move(out));
}

}  // namespace

ABox indistinguishable_abox(const CQEInstance& e, int k, IndistMode mode,
                            const EntailBudget& b) {
  int h = std::max(k, e.policy.max_len_cq());
  Signature sig = signature_of(e.tbox, e.abox, e.policy);
  CensorUniverse u = bcq_cons_k(e.tbox, e.abox, h, sig, b.universe_cap);
  std::vector<CQ> answered;
  for (const CQ& q : u.members) {
    bool in = mode == IndistMode::SC ? sc_entails(e, q, b)
                                     : ic_entails(e, UCQ::single(q), b);
    if (in) answered.push_back(q);
  }
  return abox_core(freeze(answered));
}

}  // namespace cqe
