#include "cqe/textio.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cqe {

// ---------------------------------------------------------------------------
// FOFormula factories

FOFormula FOFormula::pred(Atom a) {
  FOFormula f;
  f.kind = Kind::Pred;
  f.atom = std::move(a);
  return f;
}

FOFormula FOFormula::ind(Term t) {
  FOFormula f;
  f.kind = Kind::Ind;
  f.ind_term = std::move(t);
  return f;
}

FOFormula FOFormula::conj(std::vector<FOFormula> fs) {
  if (fs.size() == 1) return std::move(fs[0]);
  FOFormula f;
  f.kind = Kind::And;
  f.subs = std::move(fs);
  return f;
}

FOFormula FOFormula::disj(std::vector<FOFormula> fs) {
  if (fs.size() == 1) return std::move(fs[0]);
  FOFormula f;
  f.kind = Kind::Or;
  f.subs = std::move(fs);
  return f;
}

FOFormula FOFormula::neg(FOFormula sub) {
  FOFormula f;
  f.kind = Kind::Not;
  f.subs.push_back(std::move(sub));
  return f;
}

FOFormula FOFormula::exists(std::vector<Term> vars, FOFormula sub) {
  if (vars.empty()) return sub;
  FOFormula f;
  f.kind = Kind::Exists;
  f.vars = std::move(vars);
  f.subs.push_back(std::move(sub));
  return f;
}

FOFormula fo_of_cq(const CQ& q) {
  if (q.is_bottom()) return FOFormula::fls();
  std::vector<FOFormula> parts;
  for (const Atom& a : q.atoms) parts.push_back(FOFormula::pred(a));
  std::set<Term> exv = q.existential_vars();
  std::vector<Term> ex(exv.begin(), exv.end());
  return FOFormula::exists(std::move(ex), FOFormula::conj(std::move(parts)));
}

FOFormula fo_of_ucq(const UCQ& q) {
  std::vector<FOFormula> parts;
  for (const CQ& d : q.disjuncts) parts.push_back(fo_of_cq(d));
  return FOFormula::disj(std::move(parts));
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok : std::uint8_t {
  Ident, Var, Null, LParen, RParen, Comma, Dot, Colon, Arrow, Pipe, Minus, End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1, col = 1;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto bump = [&](char c) {
    if (c == '\n') { ++line; col = 1; } else { ++col; }
    ++i;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) { bump(c); continue; }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') bump(text[i]);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (c == '(') { t.kind = Tok::LParen; bump(c); }
    else if (c == ')') { t.kind = Tok::RParen; bump(c); }
    else if (c == ',') { t.kind = Tok::Comma; bump(c); }
    else if (c == '.') { t.kind = Tok::Dot; bump(c); }
    else if (c == ':') { t.kind = Tok::Colon; bump(c); }
    else if (c == '|') { t.kind = Tok::Pipe; bump(c); }
    else if (c == '-') {
      bump(c);
      if (i < text.size() && text[i] == '>') { t.kind = Tok::Arrow; bump('>'); }
      else t.kind = Tok::Minus;
    } else if (c == '?' || c == '_') {
      t.kind = (c == '?') ? Tok::Var : Tok::Null;
      bump(c);
      while (i < text.size() && ident_char(text[i])) { t.text += text[i]; bump(text[i]); }
      if (t.text.empty()) throw SyntaxError(t.line, t.col, "name after sigil");
    } else if (ident_char(c)) {
      t.kind = Tok::Ident;
      while (i < text.size() && ident_char(text[i])) { t.text += text[i]; bump(text[i]); }
    } else {
      throw SyntaxError(line, col, "token");
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Tok::End, "", line, col});
  return out;
}

// Raw side of a TBox axiom before concept/role sorts are resolved.
struct RawBasic {
  std::string name;
  bool exists = false;
  bool inverse = false;
};

struct RawAxiom {
  RawBasic lhs, rhs;
  AxiomKind kind = AxiomKind::Inclusion;
};

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;
  std::map<std::string, int> arity;

  const Token& peek() const { return toks[pos]; }
  Token take() { return toks[pos++]; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().line, peek().col, expected);
  }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail(what);
    return take();
  }
  bool at_ident(const char* kw) const { return peek().kind == Tok::Ident && peek().text == kw; }
  bool at_section() const {
    return at_ident("TBOX") || at_ident("ABOX") || at_ident("POLICY") || at_ident("query") ||
           at_ident("ed") || peek().kind == Tok::End;
  }

  void record_arity(const std::string& pred, int n) {
    auto [it, fresh] = arity.emplace(pred, n);
    if (!fresh && it->second != n) throw ArityMismatchError(pred);
  }

  Term term() {
    Token t = take();
    switch (t.kind) {
      case Tok::Ident: return Term::cst(t.text);
      case Tok::Null: return Term::nul(t.text);
      case Tok::Var: return Term::var(t.text);
      default: throw SyntaxError(t.line, t.col, "term");
    }
  }

  Atom atom() {
    Token p = expect(Tok::Ident, "predicate");
    expect(Tok::LParen, "'('");
    std::vector<Term> args{term()};
    if (peek().kind == Tok::Comma) {
      take();
      args.push_back(term());
    }
    expect(Tok::RParen, "')'");
    record_arity(p.text, static_cast<int>(args.size()));
    return Atom{p.text, std::move(args)};
  }

  std::vector<Atom> atom_list() {
    std::vector<Atom> out{atom()};
    while (peek().kind == Tok::Comma) {
      take();
      out.push_back(atom());
    }
    return out;
  }

  RawBasic raw_basic() {
    RawBasic b;
    if (at_ident("exists")) {
      take();
      b.exists = true;
    }
    b.name = expect(Tok::Ident, "concept or role name").text;
    if (peek().kind == Tok::Minus) {
      take();
      b.inverse = true;
    }
    return b;
  }

  std::vector<RawAxiom> tbox_section() {
    take();  // TBOX
    std::vector<RawAxiom> out;
    while (!at_section()) {
      RawAxiom ax;
      ax.lhs = raw_basic();
      if (at_ident("sub")) ax.kind = AxiomKind::Inclusion;
      else if (at_ident("disj")) ax.kind = AxiomKind::Disjointness;
      else fail("'sub' or 'disj'");
      take();
      ax.rhs = raw_basic();
      out.push_back(std::move(ax));
    }
    return out;
  }

  std::vector<Atom> abox_section() {
    take();  // ABOX
    std::vector<Atom> out;
    while (!at_section()) {
      Token at = peek();
      Atom a = atom();
      for (const Term& t : a.args)
        if (t.is_var()) throw SyntaxError(at.line, at.col, "constant or null in ABox fact");
      expect(Tok::Dot, "'.'");
      out.push_back(std::move(a));
    }
    return out;
  }

  ED ed_decl() {
    take();  // ed
    if (!at_ident("frontier")) fail("'frontier'");
    take();
    expect(Tok::LParen, "'('");
    std::vector<Term> frontier;
    if (peek().kind != Tok::RParen) {
      frontier.push_back(term());
      while (peek().kind == Tok::Comma) {
        take();
        frontier.push_back(term());
      }
    }
    Token ft = toks[pos];
    expect(Tok::RParen, "')'");
    for (const Term& t : frontier)
      if (!t.is_var()) throw SyntaxError(ft.line, ft.col, "variables in frontier");
    expect(Tok::Colon, "':'");
    std::vector<Atom> body_atoms = atom_list();
    expect(Tok::Arrow, "'->'");
    CQ head = CQ::bottom();
    if (at_ident("bot")) {
      take();
    } else {
      std::vector<Atom> head_atoms = atom_list();
      std::set<Term> head_vars;
      for (const Atom& a : head_atoms)
        for (const Term& t : a.args)
          if (t.is_var()) head_vars.insert(t);
      std::vector<Term> head_answer;
      for (const Term& v : frontier)
        if (head_vars.count(v)) head_answer.push_back(v);
      head = CQ::make(std::move(head_answer), std::move(head_atoms));
    }
    CQ body = CQ::make({}, std::move(body_atoms));
    return ED::make(std::move(body), std::move(head), std::move(frontier));
  }

  std::vector<ED> policy_section() {
    take();  // POLICY
    std::vector<ED> out;
    while (at_ident("ed")) out.push_back(ed_decl());
    return out;
  }

  std::pair<std::string, UCQ> query_decl() {
    take();  // query
    std::string name = expect(Tok::Ident, "query name").text;
    expect(Tok::Colon, "':'");
    std::vector<CQ> disjuncts{CQ::make({}, atom_list())};
    while (peek().kind == Tok::Pipe) {
      take();
      disjuncts.push_back(CQ::make({}, atom_list()));
    }
    return {std::move(name), UCQ::make(std::move(disjuncts))};
  }
};

BasicRef resolve_basic(const RawBasic& b, Parser& p) {
  bool is_role = b.exists || b.inverse;
  if (!is_role) {
    auto it = p.arity.find(b.name);
    is_role = (it != p.arity.end() && it->second == 2);
  }
  if (b.exists) {
    p.record_arity(b.name, 2);
    return BasicRef::exists_role(b.name, b.inverse);
  }
  if (is_role) {
    p.record_arity(b.name, 2);
    return BasicRef::basic_role(b.name, b.inverse);
  }
  p.record_arity(b.name, 1);
  return BasicRef::atomic_concept(b.name);
}

}  // namespace

const UCQ* ProblemFile::find_query(const std::string& name) const {
  for (const auto& [n, q] : queries)
    if (n == name) return &q;
  return nullptr;
}

ProblemFile parse_problem(const std::string& text) {
  Parser p{lex(text)};
  std::vector<RawAxiom> raw_axioms;
  std::vector<Atom> facts;
  std::vector<ED> eds;
  std::vector<std::pair<std::string, UCQ>> queries;
  while (p.peek().kind != Tok::End) {
    if (p.at_ident("TBOX")) {
      auto axs = p.tbox_section();
      raw_axioms.insert(raw_axioms.end(), axs.begin(), axs.end());
    } else if (p.at_ident("ABOX")) {
      auto fs = p.abox_section();
      facts.insert(facts.end(), fs.begin(), fs.end());
    } else if (p.at_ident("POLICY")) {
      auto es = p.policy_section();
      eds.insert(eds.end(), es.begin(), es.end());
    } else if (p.at_ident("query")) {
      auto [name, q] = p.query_decl();
      for (const auto& [n, _] : queries)
        if (n == name) throw DuplicateQueryNameError(name);
      queries.emplace_back(std::move(name), std::move(q));
    } else {
      p.fail("section (TBOX, ABOX, POLICY, query)");
    }
  }
  ProblemFile pf;
  // Sorts of bare TBox names resolve against arities seen anywhere in the file;
  // two passes so a later forced-role use settles an earlier bare occurrence.
  for (const RawAxiom& ax : raw_axioms) {
    if (ax.lhs.exists || ax.lhs.inverse) p.record_arity(ax.lhs.name, 2);
    if (ax.rhs.exists || ax.rhs.inverse) p.record_arity(ax.rhs.name, 2);
  }
  for (const RawAxiom& ax : raw_axioms) {
    BasicRef lhs = resolve_basic(ax.lhs, p);
    BasicRef rhs = resolve_basic(ax.rhs, p);
    // a bare name paired with a role-sorted side is itself a role
    if (lhs.role_sort != rhs.role_sort) {
      const RawBasic& bare = lhs.role_sort ? ax.rhs : ax.lhs;
      if (!bare.exists && !bare.inverse && p.arity[bare.name] == 1) {
        p.arity[bare.name] = 2;
        (lhs.role_sort ? rhs : lhs) = BasicRef::basic_role(bare.name, false);
      }
    }
    if (lhs.role_sort != rhs.role_sort) throw ArityMismatchError(lhs.pred + "/" + rhs.pred);
    pf.tbox.push_back(TBoxAxiom{std::move(lhs), std::move(rhs), ax.kind});
  }
  pf.abox = ABox::make(std::move(facts));
  pf.policy = Policy{std::move(eds)};
  pf.queries = std::move(queries);
  // arities of ABox facts vs query/policy atoms already unified in record_arity
  return pf;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string basic_text(const BasicRef& b) {
  std::string s;
  if (b.exists) s += "exists ";
  s += b.pred;
  if (b.inverse) s += "-";
  return s;
}

std::string atoms_text(const std::vector<Atom>& atoms) {
  std::string s;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) s += ", ";
    s += to_string(atoms[i]);
  }
  return s;
}

}  // namespace

std::string serialize_problem(const ProblemFile& pf) {
  std::ostringstream out;
  if (!pf.tbox.empty()) {
    out << "TBOX\n";
    for (const TBoxAxiom& ax : pf.tbox)
      out << "  " << basic_text(ax.lhs)
          << (ax.kind == AxiomKind::Inclusion ? " sub " : " disj ") << basic_text(ax.rhs)
          << "\n";
  }
  out << "ABOX\n";
  for (const Atom& a : pf.abox.atoms) out << "  " << to_string(a) << ".\n";
  if (!pf.policy.eds.empty()) {
    out << "POLICY\n";
    for (const ED& ed : pf.policy.eds) {
      out << "  ed frontier(";
      for (std::size_t i = 0; i < ed.frontier.size(); ++i)
        out << (i ? ", " : "") << to_string(ed.frontier[i]);
      out << "): " << atoms_text(ed.body.atoms) << " -> ";
      out << (ed.head.is_bottom() ? "bot" : atoms_text(ed.head.atoms)) << "\n";
    }
  }
  for (const auto& [name, q] : pf.queries) {
    out << "query " << name << ":";
    for (std::size_t i = 0; i < q.disjuncts.size(); ++i)
      out << (i ? " | " : " ") << atoms_text(q.disjuncts[i].atoms);
    out << "\n";
  }
  return out.str();
}

std::string serialize_formula(const FOFormula& f) {
  switch (f.kind) {
    case FOFormula::Kind::Pred: return to_string(f.atom);
    case FOFormula::Kind::Ind: return "(Ind " + to_string(f.ind_term) + ")";
    case FOFormula::Kind::True: return "true";
    case FOFormula::Kind::False: return "false";
    case FOFormula::Kind::Not: return "(not " + serialize_formula(f.subs[0]) + ")";
    case FOFormula::Kind::And:
    case FOFormula::Kind::Or: {
      std::string s = (f.kind == FOFormula::Kind::And) ? "(and" : "(or";
      for (const FOFormula& sub : f.subs) s += " " + serialize_formula(sub);
      return s + ")";
    }
    case FOFormula::Kind::Exists: {
      std::string s = "(exists (";
      for (std::size_t i = 0; i < f.vars.size(); ++i)
        s += (i ? " " : "") + to_string(f.vars[i]);
      return s + ") " + serialize_formula(f.subs[0]) + ")";
    }
  }
  return "";
}

namespace {

struct FoParser {
  std::vector<Token> toks;
  std::size_t pos = 0;

  const Token& peek() const { return toks[pos]; }
  Token take() { return toks[pos++]; }
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().line, peek().col, expected);
  }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail(what);
    return take();
  }

  Term term() {
    Token t = take();
    switch (t.kind) {
      case Tok::Ident: return Term::cst(t.text);
      case Tok::Null: return Term::nul(t.text);
      case Tok::Var: return Term::var(t.text);
      default: throw SyntaxError(t.line, t.col, "term");
    }
  }

  FOFormula formula() {
    if (peek().kind == Tok::Ident) {
      Token head = take();
      if (head.text == "true") return FOFormula::tru();
      if (head.text == "false") return FOFormula::fls();
      // bare predicate atom
      expect(Tok::LParen, "'('");
      std::vector<Term> args{term()};
      while (peek().kind == Tok::Comma) {
        take();
        args.push_back(term());
      }
      expect(Tok::RParen, "')'");
      return FOFormula::pred(Atom{head.text, std::move(args)});
    }
    expect(Tok::LParen, "formula");
    Token op = expect(Tok::Ident, "operator");
    if (op.text == "Ind") {
      Term t = term();
      expect(Tok::RParen, "')'");
      return FOFormula::ind(std::move(t));
    }
    if (op.text == "not") {
      FOFormula sub = formula();
      expect(Tok::RParen, "')'");
      return FOFormula::neg(std::move(sub));
    }
    if (op.text == "and" || op.text == "or") {
      std::vector<FOFormula> subs;
      while (peek().kind != Tok::RParen) subs.push_back(formula());
      take();
      if (subs.size() == 1) return std::move(subs[0]);
      FOFormula f;
      f.kind = (op.text == "and") ? FOFormula::Kind::And : FOFormula::Kind::Or;
      f.subs = std::move(subs);
      return f;
    }
    if (op.text == "exists") {
      expect(Tok::LParen, "'('");
      std::vector<Term> vars;
      while (peek().kind == Tok::Var) vars.push_back(Term::var(take().text));
      expect(Tok::RParen, "')'");
      FOFormula sub = formula();
      expect(Tok::RParen, "')'");
      return FOFormula::exists(std::move(vars), std::move(sub));
    }
    throw SyntaxError(op.line, op.col, "operator (and, or, not, exists, Ind)");
  }
};

}  // namespace

FOFormula parse_formula(const std::string& text) {
  FoParser p{lex(text)};
  FOFormula f = p.formula();
  if (p.peek().kind != Tok::End) p.fail("end of input");
  return f;
}

}  // namespace cqe
