#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "cqe/entail.hpp"
#include "cqe/harness.hpp"
#include "cqe/privacy.hpp"
#include "cqe/rewrite.hpp"
#include "cqe/textio.hpp"

using namespace cqe;
using nlohmann::json;

namespace {

struct Options {
  std::string file;
  std::string query;
  std::string mode = "sc";
  std::string method = "auto";
  std::string dimacs;
  int k = 1;
  bool explain = false;
  bool as_json = false;
  std::size_t universe_cap = 100000;
  std::size_t q_cap = 20000;
  long long subset_cap = 200000;
};

struct LoadedProblem {
  ProblemFile pf;
  CQEInstance e;
};

LoadedProblem load(const Options& o) {
  std::ifstream in(o.file);
  if (!in.good()) throw SyntaxError(0, 0, "readable problem file: " + o.file);
  std::ostringstream ss;
  ss << in.rdbuf();
  LoadedProblem lp;
  lp.pf = parse_problem(ss.str());
  lp.e = validate_instance(lp.pf.tbox, lp.pf.abox, lp.pf.policy);
  return lp;
}

const UCQ& named_query(const LoadedProblem& lp, const std::string& name) {
  const UCQ* q = lp.pf.find_query(name);
  if (!q) throw SyntaxError(0, 0, "a query named " + name);
  return *q;
}

int run_check(const Options& o) {
  std::ifstream in(o.file);
  if (!in.good()) throw SyntaxError(0, 0, "readable problem file: " + o.file);
  std::ostringstream ss;
  ss << in.rdbuf();
  ProblemFile pf = parse_problem(ss.str());
  bool consistent = is_consistent(pf.tbox, pf.abox);
  bool acyclic = is_acyclic_policy(pf.tbox, pf.policy);
  if (o.as_json) {
    std::cout << json{{"consistent", consistent}, {"acyclic", acyclic}}.dump() << "\n";
  } else {
    std::cout << "consistent: " << (consistent ? "true" : "false") << "\n"
              << "acyclic: " << (acyclic ? "true" : "false") << "\n";
  }
  return 0;
}

int run_ask(const Options& o) {
  LoadedProblem lp = load(o);
  const UCQ& q = named_query(lp, o.query);
  EntailBudget budget{o.universe_cap, o.subset_cap};
  bool want_sc = o.mode == "sc";

  std::string method = o.method;
  bool answer = false;
  std::optional<std::vector<CQ>> witness;
  auto by_search = [&] {
    if (want_sc && o.explain) {
      ScResult r = sc_entails_explain(lp.e, q, budget);
      answer = r.entailed;
      witness = r.witness;
    } else {
      answer = want_sc ? sc_entails(lp.e, q, budget) : ic_entails(lp.e, q, budget);
    }
    method = "search";
  };
  auto by_rewrite = [&] {
    FOFormula f = want_sc ? sc_rewriting(lp.e.tbox, lp.e.policy, q, o.q_cap)
                          : ic_rewriting(lp.e.tbox, lp.e.policy, q, o.q_cap);
    answer = eval_fo(f, lp.e.abox);
    method = "rewrite";
  };

  if (o.method == "search" || o.explain) {
    by_search();
  } else if (o.method == "rewrite") {
    by_rewrite();
  } else {  // auto: rewriting when it applies within budget
    if (is_acyclic_policy(lp.e.tbox, lp.e.policy)) {
      try {
        by_rewrite();
      } catch (const ResourceLimitError&) {
        by_search();
      }
    } else {
      by_search();
    }
  }

  if (o.as_json) {
    json out{{"query", o.query}, {"mode", o.mode}, {"answer", answer}, {"method", method}};
    if (witness) {
      json w = json::array();
      for (const CQ& c : *witness) w.push_back(to_string(c));
      out["witness"] = w;
    }
    std::cout << out.dump() << "\n";
  } else {
    std::cout << (answer ? "true" : "false") << "\n";
    if (witness) {
      std::cout << "witness censor:\n";
      for (const CQ& c : *witness) std::cout << "  " << to_string(c) << "\n";
    }
  }
  return 0;
}

int run_rewrite(const Options& o) {
  LoadedProblem lp = load(o);
  const UCQ& q = named_query(lp, o.query);
  RewriteInfo info;
  FOFormula f = o.mode == "sc" ? sc_rewriting(lp.e.tbox, lp.e.policy, q, o.q_cap, &info)
                               : ic_rewriting(lp.e.tbox, lp.e.policy, q, o.q_cap, &info);
  std::cout << serialize_formula(f) << "\n";
  std::cout << json{{"k", info.k},
                    {"h", info.h},
                    {"m", info.m},
                    {"ell", info.ell},
                    {"candidates", info.q_candidates},
                    {"budget", o.q_cap}}
                   .dump()
            << "\n";
  return 0;
}

int run_censors(const Options& o) {
  LoadedProblem lp = load(o);
  auto censors = optimal_censors(lp.e, o.k, o.universe_cap, o.subset_cap);
  if (o.as_json) {
    json out = json::array();
    for (const auto& c : censors) {
      json one = json::array();
      for (const CQ& q : c) one.push_back(to_string(q));
      out.push_back(one);
    }
    std::cout << out.dump() << "\n";
  } else {
    int i = 0;
    for (const auto& c : censors) {
      std::cout << "censor " << ++i << ":\n";
      for (const CQ& q : c) std::cout << "  " << to_string(q) << "\n";
    }
  }
  return 0;
}

int run_indist(const Options& o) {
  LoadedProblem lp = load(o);
  IndistMode mode = o.mode == "ic" ? IndistMode::IC : IndistMode::SC;
  ABox pub = indistinguishable_abox(lp.e, o.k, mode, {o.universe_cap, o.subset_cap});
  std::cout << "ABOX\n";
  for (const Atom& a : pub.atoms) std::cout << "  " << to_string(a) << ".\n";
  return 0;
}

int run_gen3cnf(const Options& o) {
  std::ifstream in(o.dimacs);
  if (!in.good()) throw SyntaxError(0, 0, "readable DIMACS file: " + o.dimacs);
  CNF phi = parse_dimacs(in);
  ReductionInstance r = gen_3cnf_instance(phi);
  ProblemFile pf;
  pf.tbox = r.instance.tbox;
  pf.abox = r.instance.abox;
  pf.policy = r.instance.policy;
  pf.queries.emplace_back("goal", UCQ::single(r.goal));
  std::cout << serialize_problem(pf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"entailment under epistemic-dependency protection"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* c, bool with_file) {
    if (with_file) c->add_option("file", o.file, "problem file")->required();
    c->add_flag("--json", o.as_json, "machine-readable output");
    c->add_option("--universe-cap", o.universe_cap, "entailed-query universe budget");
    c->add_option("--q-cap", o.q_cap, "rewriting candidate budget");
    c->add_option("--subset-cap", o.subset_cap, "censor search node budget");
  };

  CLI::App* check = app.add_subcommand("check", "consistency and acyclicity report");
  add_common(check, true);

  CLI::App* ask = app.add_subcommand("ask", "decide a named query");
  add_common(ask, true);
  ask->add_option("--query", o.query, "query name")->required();
  ask->add_option("--mode", o.mode, "sc|ic")->check(CLI::IsMember({"sc", "ic"}));
  ask->add_option("--method", o.method, "auto|search|rewrite")
      ->check(CLI::IsMember({"auto", "search", "rewrite"}));
  ask->add_flag("--explain", o.explain, "print a witnessing censor on refusal");

  CLI::App* rw = app.add_subcommand("rewrite", "emit the first-order rewriting");
  add_common(rw, true);
  rw->add_option("--query", o.query, "query name")->required();
  rw->add_option("--mode", o.mode, "sc|ic")->check(CLI::IsMember({"sc", "ic"}));

  CLI::App* cens = app.add_subcommand("censors", "enumerate optimal censors at length bound k");
  add_common(cens, true);
  cens->add_option("--k", o.k, "length bound")->required();

  CLI::App* ind = app.add_subcommand("indist", "emit an indistinguishable dataset");
  add_common(ind, true);
  ind->add_option("--k", o.k, "length bound")->required();
  ind->add_option("--mode", o.mode, "sc|ic")->check(CLI::IsMember({"sc", "ic"}));

  CLI::App* gen = app.add_subcommand("gen3cnf", "encode a 3-CNF formula as a problem file");
  gen->add_option("--dimacs", o.dimacs, "DIMACS CNF input")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) return run_check(o);
    if (ask->parsed()) return run_ask(o);
    if (rw->parsed()) return run_rewrite(o);
    if (cens->parsed()) return run_censors(o);
    if (ind->parsed()) return run_indist(o);
    if (gen->parsed()) return run_gen3cnf(o);
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 2;
  } catch (const InconsistentOntologyError& e) {
    std::cerr << "inconsistent ontology: " << e.what() << "\n";
    return 3;
  } catch (const NotAcyclicError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
