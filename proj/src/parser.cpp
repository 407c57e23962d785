#include "lithium/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace lithium {

ParseError::ParseError(Kind kind, SourceLocation where, std::string message,
                       std::vector<std::string> expected)
    : Error(std::string(to_string(kind)) + " error at " + std::to_string(where.line) + ":" +
            std::to_string(where.column) + ": " + message +
            [&] {
              if (expected.empty()) return std::string();
              std::string s = " (expected ";
              for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) s += i + 1 == expected.size() ? " or " : ", ";
                s += expected[i];
              }
              return s + ")";
            }()),
      kind_(kind),
      where_(where),
      detail_(std::move(message)),
      expected_(std::move(expected)) {}

std::string_view to_string(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::syntax: return "syntax";
    case ParseError::Kind::sort: return "sort";
    case ParseError::Kind::shape: return "shape";
  }
  return "syntax";
}

const Query* Document::find_query(std::string_view name) const {
  for (const Query& q : queries)
    if (q.name == name) return &q;
  return nullptr;
}

namespace {

enum class Tok {
  name, lparen, rparen, comma, dot, colon, semi, bang, eq, neq, arrow, amp, bar, end
};

struct Token {
  Tok kind;
  std::string text;
  SourceLocation where;
};

const std::set<std::string, std::less<>> kKeywords = {
    "sort", "const", "func", "pred", "env", "policy", "query",
    "forall", "exists", "permit", "deny", "true"};

std::string describe(Tok t) {
  switch (t) {
    case Tok::name: return "name";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::dot: return "'.'";
    case Tok::colon: return "':'";
    case Tok::semi: return "';'";
    case Tok::bang: return "'!'";
    case Tok::eq: return "'='";
    case Tok::neq: return "'!='";
    case Tok::arrow: return "'=>'";
    case Tok::amp: return "'&'";
    case Tok::bar: return "'|'";
    case Tok::end: return "end of input";
  }
  return "token";
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourceLocation at{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_' || src[j] == '\''))
        ++j;
      out.push_back({Tok::name, std::string(src.substr(i, j - i)), at});
      advance(j - i);
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == "!=") {
      out.push_back({Tok::neq, "!=", at});
      advance(2);
      continue;
    }
    if (two == "=>") {
      out.push_back({Tok::arrow, "=>", at});
      advance(2);
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::lparen; break;
      case ')': k = Tok::rparen; break;
      case ',': k = Tok::comma; break;
      case '.': k = Tok::dot; break;
      case ':': k = Tok::colon; break;
      case ';': k = Tok::semi; break;
      case '!': k = Tok::bang; break;
      case '=': k = Tok::eq; break;
      case '&': k = Tok::amp; break;
      case '|': k = Tok::bar; break;
      default:
        throw ParseError(ParseError::Kind::syntax, at,
                         std::string("unexpected character '") + c + "'");
    }
    out.push_back({k, std::string(1, c), at});
    advance(1);
  }
  out.push_back({Tok::end, "", {line, col}});
  return out;
}

struct Scope {
  std::map<std::string, Term, std::less<>> vars;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Document run() {
    while (peek().kind != Tok::end) item();
    assign_default_labels();
    doc_.base.signature = std::make_shared<const Signature>(std::move(sig_));
    for (Query& q : doc_.queries) q.base = doc_.base;
    return std::move(doc_);
  }

 private:
  using K = ParseError::Kind;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(K kind, const Token& at, std::string msg,
                         std::vector<std::string> expected = {}) {
    throw ParseError(kind, at.where, std::move(msg), std::move(expected));
  }

  const Token& expect(Tok k) {
    if (peek().kind != k)
      fail(K::syntax, peek(), "unexpected " + shown(peek()), {describe(k)});
    return take();
  }

  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  bool at_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::name && peek(ahead).text == kw;
  }

  static std::string shown(const Token& t) {
    if (t.kind == Tok::end) return "end of input";
    return "'" + t.text + "'";
  }

  std::string expect_name(std::string_view what) {
    const Token& t = peek();
    if (t.kind != Tok::name) fail(K::syntax, t, "unexpected " + shown(t), {std::string(what)});
    if (kKeywords.contains(t.text))
      fail(K::syntax, t, "'" + t.text + "' is a reserved word", {std::string(what)});
    return take().text;
  }

  SortId sort_ref() {
    const Token& t = peek();
    std::string name = expect_name("sort name");
    auto s = sig_.find_sort(name);
    if (!s) fail(K::sort, t, "unknown sort '" + name + "'");
    return *s;
  }

  void declare_name_free(const Token& at, const std::string& name) {
    if (sig_.find_symbol(name) || sig_.find_sort(name))
      fail(K::sort, at, "'" + name + "' is already declared");
  }

  void item() {
    const Token& t = peek();
    if (t.kind != Tok::name)
      fail(K::syntax, t, "unexpected " + shown(t),
           {"'sort'", "'const'", "'func'", "'pred'", "'env'", "'policy'", "'query'"});
    if (t.text == "sort") return sort_decl();
    if (t.text == "const") return const_decl();
    if (t.text == "func") return func_decl();
    if (t.text == "pred") return pred_decl();
    if (t.text == "env") return env_item();
    if (t.text == "policy") return policy_item();
    if (t.text == "query") return query_item();
    fail(K::syntax, t, "unexpected " + shown(t),
         {"'sort'", "'const'", "'func'", "'pred'", "'env'", "'policy'", "'query'"});
  }

  void sort_decl() {
    SourceLocation at = take().where;
    const Token& nt = peek();
    std::string name = expect_name("sort name");
    declare_name_free(nt, name);
    sig_.add_sort(name);
    expect(Tok::semi);
    doc_.items.push_back({SourceItem::Kind::declaration, "", at});
  }

  void const_decl() {
    SourceLocation at = take().where;
    std::vector<std::pair<Token, std::string>> names;
    do {
      const Token& nt = peek();
      names.emplace_back(nt, expect_name("constant name"));
    } while (accept(Tok::comma));
    expect(Tok::colon);
    SortId s = sort_ref();
    expect(Tok::semi);
    for (auto& [tok, name] : names) {
      declare_name_free(tok, name);
      sig_.add_constant(name, s);
    }
    doc_.items.push_back({SourceItem::Kind::declaration, "", at});
  }

  std::vector<SortId> sort_list() {
    std::vector<SortId> out;
    expect(Tok::lparen);
    if (accept(Tok::rparen)) return out;
    do out.push_back(sort_ref());
    while (accept(Tok::comma));
    expect(Tok::rparen);
    return out;
  }

  void func_decl() {
    SourceLocation at = take().where;
    const Token& nt = peek();
    std::string name = expect_name("function name");
    declare_name_free(nt, name);
    auto args = sort_list();
    expect(Tok::colon);
    SortId r = sort_ref();
    expect(Tok::semi);
    sig_.add_function(name, std::move(args), r);
    doc_.items.push_back({SourceItem::Kind::declaration, "", at});
  }

  void pred_decl() {
    SourceLocation at = take().where;
    const Token& nt = peek();
    std::string name = expect_name("predicate name");
    std::vector<SortId> args;
    if (peek().kind == Tok::lparen) args = sort_list();
    expect(Tok::semi);
    if (name == "Permitted") {
      if (permitted_used_)
        fail(K::sort, nt, "Permitted's signature must be declared before its first use");
      try {
        sig_.configure_permitted(std::move(args));
      } catch (const SortError& e) {
        fail(K::sort, nt, e.what());
      }
    } else {
      declare_name_free(nt, name);
      sig_.add_predicate(name, std::move(args));
    }
    doc_.items.push_back({SourceItem::Kind::declaration, "", at});
  }

  std::optional<std::string> optional_label() {
    if (peek().kind == Tok::name && peek(1).kind == Tok::colon && !at_keyword("forall") &&
        !at_keyword("true"))
      return take_label();
    return std::nullopt;
  }

  std::string take_label() {
    const Token& t = peek();
    std::string label = expect_name("label");
    if (!labels_.insert(label).second) fail(K::shape, t, "duplicate label '" + label + "'");
    expect(Tok::colon);
    return label;
  }

  Scope quantifier() {
    Scope scope;
    if (at_keyword("exists"))
      fail(K::shape, peek(), "existential quantifiers are outside standard policies and environments");
    if (!at_keyword("forall")) return scope;
    take();
    VarId next = 0;
    do {
      const Token& nt = peek();
      std::string name = expect_name("variable name");
      if (sig_.find_symbol(name) || sig_.find_sort(name))
        fail(K::sort, nt, "variable '" + name + "' shadows a declared symbol");
      expect(Tok::colon);
      SortId s = sort_ref();
      if (!scope.vars.emplace(name, Term::variable(next++, s)).second)
        fail(K::syntax, nt, "variable '" + name + "' bound twice");
    } while (accept(Tok::comma));
    expect(Tok::dot);
    if (at_keyword("forall") || at_keyword("exists"))
      fail(K::shape, peek(), "nested quantifiers are outside standard policies and environments");
    return scope;
  }

  std::vector<Term> term_list(const Scope& scope) {
    std::vector<Term> out;
    expect(Tok::lparen);
    if (accept(Tok::rparen)) return out;
    do out.push_back(term(scope));
    while (accept(Tok::comma));
    expect(Tok::rparen);
    return out;
  }

  Term term(const Scope& scope) {
    const Token& t = peek();
    std::string name = expect_name("term");
    if (auto v = scope.vars.find(name); v != scope.vars.end()) {
      if (peek().kind == Tok::lparen) fail(K::sort, t, "variable '" + name + "' applied to arguments");
      return v->second;
    }
    auto sym = sig_.find_symbol(name);
    if (!sym) fail(K::sort, t, "undeclared symbol '" + name + "'");
    const Symbol& s = sig_.symbol(*sym);
    if (s.kind != SymbolKind::constant && s.kind != SymbolKind::function)
      fail(K::sort, t, "'" + name + "' is a predicate, not a term");
    std::vector<Term> args;
    if (peek().kind == Tok::lparen) args = term_list(scope);
    try {
      return Term::make(sig_, *sym, std::move(args));
    } catch (const SortError& e) {
      fail(K::sort, t, e.what());
    }
  }

  Literal literal(const Scope& scope) {
    if (accept(Tok::bang)) {
      if (accept(Tok::lparen)) {
        Literal inner = literal(scope);
        expect(Tok::rparen);
        return inner.negated();
      }
      return literal(scope).negated();
    }
    const Token& t = peek();
    if (t.kind != Tok::name) fail(K::syntax, t, "unexpected " + shown(t), {"literal"});
    if (t.text == "exists" || t.text == "forall")
      fail(K::shape, t, "quantifiers inside a formula are outside the standard shapes");
    auto sym = sig_.find_symbol(t.text);
    if (sym && sig_.symbol(*sym).kind == SymbolKind::predicate) {
      take();
      if (*sym == kPermitted) permitted_used_ = true;
      std::vector<Term> args;
      if (peek().kind == Tok::lparen) args = term_list(scope);
      try {
        return Literal::make(sig_, true, *sym, std::move(args));
      } catch (const SortError& e) {
        fail(K::sort, t, e.what());
      }
    }
    Term lhs = term(scope);
    const Token& op = peek();
    bool positive;
    if (accept(Tok::eq)) {
      positive = true;
    } else if (accept(Tok::neq)) {
      positive = false;
    } else {
      fail(K::syntax, op, "unexpected " + shown(op), {"'='", "'!='"});
    }
    Term rhs = term(scope);
    try {
      return Literal::make(sig_, positive, kEquality, {std::move(lhs), std::move(rhs)});
    } catch (const SortError& e) {
      fail(K::sort, op, e.what());
    }
  }

  // Returns the literals of `true` or `ℓ1 & … & ℓk`.
  std::vector<Literal> conjunction(const Scope& scope) {
    std::vector<Literal> out;
    if (at_keyword("true") && (peek(1).kind == Tok::arrow || peek(1).kind == Tok::amp)) {
      take();
      if (peek().kind == Tok::arrow) return out;
      expect(Tok::amp);
    }
    out.push_back(literal(scope));
    while (true) {
      if (accept(Tok::amp)) {
        out.push_back(literal(scope));
        continue;
      }
      if (peek().kind == Tok::bar)
        fail(K::shape, peek(), "disjunction is not allowed; antecedents are conjunctions of literals");
      break;
    }
    return out;
  }

  void env_item() {
    const Token& start = take();
    auto label = optional_label();
    bool quantified = at_keyword("forall");
    Scope scope = quantifier();
    const Token& body = peek();
    std::vector<Literal> lits = conjunction(scope);
    bool implication = accept(Tok::arrow);
    if (peek().kind == Tok::bar)
      fail(K::shape, peek(), "disjunction is not allowed in environment facts");
    EnvRule rule;
    if (implication) {
      rule.antecedent = std::move(lits);
      rule.conclusion = literal(scope);
    } else {
      if (lits.size() != 1)
        fail(K::shape, body, "a conjunction must be split into separate environment facts");
      rule.conclusion = std::move(lits.front());
    }
    expect(Tok::semi);
    auto mentions = [](const Literal& l) { return l.mentions_permitted(); };
    if (mentions(rule.conclusion) || std::ranges::any_of(rule.antecedent, mentions))
      fail(K::shape, body, "the environment may not mention Permitted");
    if (!implication && !quantified && rule.conclusion.is_ground()) {
      if (label) labels_.erase(*label);
      doc_.base.e0.push_back(std::move(rule.conclusion));
      doc_.items.push_back({SourceItem::Kind::fact, "", start.where});
      return;
    }
    rule.label = label.value_or("");
    doc_.items.push_back({SourceItem::Kind::rule, rule.label, start.where});
    doc_.base.e1.push_back(std::move(rule));
  }

  std::optional<Decision> decision_keyword() {
    if (at_keyword("permit") && peek(1).kind == Tok::lparen) return Decision::permit;
    if (at_keyword("deny") && peek(1).kind == Tok::lparen) return Decision::deny;
    return std::nullopt;
  }

  std::vector<Term> target(const Scope& scope, const Token& at) {
    take();  // permit / deny
    permitted_used_ = true;
    std::vector<Term> args = term_list(scope);
    try {
      (void)Literal::make(sig_, true, kPermitted, args);
    } catch (const SortError& e) {
      fail(K::sort, at, e.what());
    }
    return args;
  }

  void policy_item() {
    const Token& start = take();
    Policy p;
    p.label = take_label();
    Scope scope = quantifier();
    if (!decision_keyword()) {
      p.antecedent = conjunction(scope);
      if (peek().kind != Tok::arrow) {
        const Token& t = peek();
        if (t.kind == Tok::bar)
          fail(K::shape, t, "disjunction is not allowed; antecedents are conjunctions of literals");
        fail(K::syntax, t, "unexpected " + shown(t), {"'&'", "'=>'"});
      }
      take();
    }
    auto d = decision_keyword();
    if (!d) {
      const Token& t = peek();
      fail(K::shape, t, "a policy must conclude with permit(...) or deny(...)",
           {"'permit'", "'deny'"});
    }
    p.decision = *d;
    const Token& tt = peek();
    p.target = target(scope, tt);
    expect(Tok::semi);
    doc_.items.push_back({SourceItem::Kind::policy, p.label, start.where});
    doc_.base.policies.push_back(std::move(p));
  }

  void query_item() {
    const Token& start = take();
    Query q;
    q.name = take_label();
    auto d = decision_keyword();
    if (!d) fail(K::syntax, peek(), "unexpected " + shown(peek()), {"'permit'", "'deny'"});
    q.goal = *d;
    const Token& tt = peek();
    q.goal_args = target(Scope{}, tt);
    expect(Tok::semi);
    doc_.items.push_back({SourceItem::Kind::query, q.name, start.where});
    doc_.queries.push_back(std::move(q));
  }

  void assign_default_labels() {
    std::size_t n = 0;
    for (EnvRule& r : doc_.base.e1) {
      ++n;
      if (!r.label.empty()) continue;
      std::string l = "env" + std::to_string(n);
      while (labels_.contains(l)) l += "_";
      labels_.insert(l);
      r.label = l;
    }
    std::size_t k = 0;
    for (SourceItem& it : doc_.items)
      if (it.kind == SourceItem::Kind::rule) it.label = doc_.base.e1[k++].label;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Signature sig_;
  Document doc_;
  std::set<std::string, std::less<>> labels_;
  bool permitted_used_ = false;
};

// Variables of a formula with their sorts, in id order.
std::map<VarId, SortId> sorted_variables(const std::vector<const Literal*>& lits) {
  std::map<VarId, SortId> out;
  std::function<void(const Term&)> walk = [&](const Term& t) {
    if (t.is_variable()) {
      out.emplace(t.var(), t.sort());
      return;
    }
    for (const Term& a : t.args()) walk(a);
  };
  for (const Literal* l : lits)
    for (const Term& t : l->args) walk(t);
  return out;
}

std::string quantifier_text(const Printer& pr, const Signature& sig,
                            const std::map<VarId, SortId>& vars) {
  if (vars.empty()) return "";
  std::string out = "forall ";
  bool first = true;
  for (const auto& [v, s] : vars) {
    if (!first) out += ", ";
    first = false;
    out += pr.variable(v) + ":" + sig.sort_name(s);
  }
  return out + ". ";
}

std::string conjunction_text(const Printer& pr, const std::vector<Literal>& lits) {
  std::string out;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i) out += " & ";
    out += pr.literal(lits[i]);
  }
  return out;
}

std::string target_text(const Printer& pr, Decision d, const std::vector<Term>& args) {
  std::string out(to_string(d));
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += pr.term(args[i]);
  }
  return out + ")";
}

}  // namespace

Document parse_document(std::string_view text) {
  try {
    return Parser(text).run();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(ParseError::Kind::sort, {}, e.what());
  }
}

PolicyBase parse_base(std::string_view text) { return parse_document(text).base; }

std::string render(const PolicyBase& base, const std::vector<Query>& queries) {
  const Signature& sig = *base.signature;
  Printer pr(sig);
  std::ostringstream out;
  for (SortId s = kTimes + 1; s < sig.sort_count(); ++s) out << "sort " << sig.sort_name(s) << ";\n";
  const Symbol& perm = sig.symbol(kPermitted);
  if (perm.arg_sorts != std::vector<SortId>{kSubjects, kActions}) {
    out << "pred Permitted(";
    for (std::size_t i = 0; i < perm.arg_sorts.size(); ++i)
      out << (i ? ", " : "") << sig.sort_name(perm.arg_sorts[i]);
    out << ");\n";
  }
  for (SymbolId id = kNow + 1; id < sig.symbol_count(); ++id) {
    const Symbol& s = sig.symbol(id);
    switch (s.kind) {
      case SymbolKind::constant:
        out << "const " << s.name << " : " << sig.sort_name(*s.result_sort) << ";\n";
        break;
      case SymbolKind::function: {
        out << "func " << s.name << "(";
        for (std::size_t i = 0; i < s.arg_sorts.size(); ++i)
          out << (i ? ", " : "") << sig.sort_name(s.arg_sorts[i]);
        out << ") : " << sig.sort_name(*s.result_sort) << ";\n";
        break;
      }
      case SymbolKind::predicate: {
        out << "pred " << s.name;
        if (!s.arg_sorts.empty()) {
          out << "(";
          for (std::size_t i = 0; i < s.arg_sorts.size(); ++i)
            out << (i ? ", " : "") << sig.sort_name(s.arg_sorts[i]);
          out << ")";
        }
        out << ";\n";
        break;
      }
      case SymbolKind::equality: break;
    }
  }
  for (const Literal& l : base.e0) out << "env " << pr.literal(l) << ";\n";
  for (const EnvRule& r : base.e1) {
    std::vector<const Literal*> all{&r.conclusion};
    for (const Literal& l : r.antecedent) all.push_back(&l);
    auto vars = sorted_variables(all);
    out << "env " << r.label << ": " << quantifier_text(pr, sig, vars);
    if (!r.antecedent.empty() || vars.empty())
      out << (r.antecedent.empty() ? std::string("true") : conjunction_text(pr, r.antecedent))
          << " => ";
    out << pr.literal(r.conclusion) << ";\n";
  }
  for (const Policy& p : base.policies) {
    Literal concl = p.conclusion();
    std::vector<const Literal*> all{&concl};
    for (const Literal& l : p.antecedent) all.push_back(&l);
    out << "policy " << p.label << ": " << quantifier_text(pr, sig, sorted_variables(all));
    if (!p.antecedent.empty()) out << conjunction_text(pr, p.antecedent) << " => ";
    out << target_text(pr, p.decision, p.target) << ";\n";
  }
  for (const Query& q : queries)
    out << "query " << q.name << ": " << target_text(pr, q.goal, q.goal_args) << ";\n";
  return out.str();
}

}  // namespace lithium
