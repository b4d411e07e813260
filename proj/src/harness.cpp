#include "cqe/harness.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace cqe {

namespace {

void check_cnf(const CNF& phi) {
  for (const auto& cl : phi.clauses)
    for (const Lit& l : cl)
      if (l.var < 1 || l.var > phi.num_vars)
        throw std::invalid_argument("clause literal out of range");
}

Term idx(int i) { return Term::cst("i" + std::to_string(i)); }
Term pv(int v) { return Term::cst("x" + std::to_string(v)); }

}  // namespace

ReductionInstance gen_3cnf_instance(const CNF& phi) {
  check_cnf(phi);
  const Term f = Term::cst("f"), t = Term::cst("t");
  std::vector<Atom> facts;
  int m = static_cast<int>(phi.clauses.size());
  for (int i = 1; i <= m; ++i) {
    const auto& cl = phi.clauses[i - 1];
    for (int j = 0; j < 3; ++j) {
      std::string cj = "C" + std::to_string(j + 1);
      std::string vj = "V" + std::to_string(j + 1);
      facts.push_back(Atom::role(cj, idx(i), pv(cl[j].var)));
      facts.push_back(Atom::role(vj, idx(i), cl[j].neg ? f : t));
    }
    facts.push_back(Atom::unary("S", idx(i)));
    facts.push_back(Atom::role("N", idx(i), idx(i + 1)));
  }
  for (int v = 1; v <= phi.num_vars; ++v) {
    facts.push_back(Atom::role("V", pv(v), f));
    facts.push_back(Atom::role("V", pv(v), t));
  }

  const Term x = Term::var("x"), y = Term::var("y"), vv = Term::var("v"), z = Term::var("z");
  Policy p;
  for (int j = 1; j <= 3; ++j) {
    CQ body = CQ::make({}, {Atom::role("C" + std::to_string(j), x, y),
                            Atom::role("V" + std::to_string(j), x, vv),
                            Atom::role("V", y, vv), Atom::role("N", x, z),
                            Atom::unary("S", x)});
    p.eds.push_back(ED::make(std::move(body), CQ::make({z}, {Atom::unary("S", z)}), {z}));
  }
  p.eds.push_back(
      ED::make(CQ::make({}, {Atom::role("V", x, f), Atom::role("V", x, t)}), CQ::bottom(), {}));

  ReductionInstance r;
  r.instance = validate_instance({}, ABox::make(std::move(facts)), std::move(p));
  r.goal = CQ::make({}, {Atom::unary("S", idx(1))});
  return r;
}

bool sat_brute(const CNF& phi) {
  check_cnf(phi);
  if (phi.num_vars > 20) throw std::invalid_argument("sat_brute: too many variables");
  for (std::uint32_t m = 0; m < (1u << phi.num_vars); ++m) {
    bool ok = true;
    for (const auto& cl : phi.clauses) {
      bool any = false;
      for (const Lit& l : cl) any |= (((m >> (l.var - 1)) & 1u) != 0) != l.neg;
      if (!any) { ok = false; break; }
    }
    if (ok) return true;
  }
  return phi.num_vars == 0 && phi.clauses.empty();
}

namespace {

// 0 = unassigned, 1 = true, -1 = false
bool dpll(const CNF& phi, std::vector<int>& val) {
  for (;;) {
    int unit_var = 0, unit_sign = 0;
    for (const auto& cl : phi.clauses) {
      int unassigned = 0, last = -1;
      bool sat = false;
      for (int j = 0; j < 3; ++j) {
        int v = val[cl[j].var];
        int want = cl[j].neg ? -1 : 1;
        if (v == 0) { ++unassigned; last = j; }
        else if (v == want) sat = true;
      }
      if (sat) continue;
      if (unassigned == 0) return false;  // conflict
      if (unassigned == 1 && unit_var == 0) {
        unit_var = cl[last].var;
        unit_sign = cl[last].neg ? -1 : 1;
      }
    }
    if (unit_var == 0) break;
    val[unit_var] = unit_sign;
  }
  int branch = 0;
  for (int v = 1; v <= phi.num_vars && branch == 0; ++v)
    if (val[v] == 0) branch = v;
  if (branch == 0) return true;  // all clauses satisfied above
  for (int sign : {1, -1}) {
    std::vector<int> copy = val;
    copy[branch] = sign;
    if (dpll(phi, copy)) return true;
  }
  return false;
}

}  // namespace

bool sat_dpll(const CNF& phi) {
  check_cnf(phi);
  std::vector<int> val(phi.num_vars + 1, 0);
  return dpll(phi, val);
}

CNF parse_dimacs(std::istream& in) {
  CNF phi;
  int expect_clauses = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      if (!(ls >> p >> fmt >> phi.num_vars >> expect_clauses) || fmt != "cnf")
        throw std::invalid_argument("malformed DIMACS header");
      continue;
    }
    std::array<Lit, 3> cl;
    int lit, got = 0;
    while (ls >> lit && lit != 0) {
      if (got >= 3) throw std::invalid_argument("clause with more than 3 literals");
      cl[got++] = {std::abs(lit), lit < 0};
    }
    if (got == 0) continue;
    if (got != 3) throw std::invalid_argument("clause with fewer than 3 literals");
    phi.clauses.push_back(cl);
  }
  if (expect_clauses >= 0 && expect_clauses != static_cast<int>(phi.clauses.size()))
    throw std::invalid_argument("DIMACS clause count mismatch");
  check_cnf(phi);
  return phi;
}

}  // namespace cqe
