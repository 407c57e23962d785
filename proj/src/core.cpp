#include "lithium/core.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace lithium {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

// ---------------------------------------------------------------- Signature

Signature::Signature() {
  add_sort("Subjects");
  add_sort("Actions");
  add_sort("Times");
  add(Symbol{"=", SymbolKind::equality, {}, std::nullopt});
  add(Symbol{"Permitted", SymbolKind::predicate, {kSubjects, kActions}, std::nullopt});
  add(Symbol{"now", SymbolKind::constant, {}, kTimes});
}

SortId Signature::add_sort(std::string name) {
  if (sort_index_.contains(name)) throw SortError("duplicate sort '" + name + "'");
  auto id = static_cast<SortId>(sorts_.size());
  sort_index_.emplace(name, id);
  sorts_.push_back(std::move(name));
  return id;
}

SymbolId Signature::add(Symbol s) {
  if (symbol_index_.contains(s.name)) throw SortError("duplicate symbol '" + s.name + "'");
  for (SortId a : s.arg_sorts)
    if (a >= sorts_.size()) throw SortError("unknown sort in signature of '" + s.name + "'");
  auto id = static_cast<SymbolId>(symbols_.size());
  symbol_index_.emplace(s.name, id);
  symbols_.push_back(std::move(s));
  return id;
}

SymbolId Signature::add_constant(std::string name, SortId sort) {
  if (sort >= sorts_.size()) throw SortError("unknown sort for constant '" + name + "'");
  return add(Symbol{std::move(name), SymbolKind::constant, {}, sort});
}

SymbolId Signature::add_function(std::string name, std::vector<SortId> args, SortId result) {
  if (result >= sorts_.size()) throw SortError("unknown result sort for '" + name + "'");
  if (args.empty()) return add_constant(std::move(name), result);
  return add(Symbol{std::move(name), SymbolKind::function, std::move(args), result});
}

SymbolId Signature::add_predicate(std::string name, std::vector<SortId> args) {
  return add(Symbol{std::move(name), SymbolKind::predicate, std::move(args), std::nullopt});
}

void Signature::configure_permitted(std::vector<SortId> args) {
  for (SortId a : args)
    if (a >= sorts_.size()) throw SortError("unknown sort in Permitted signature");
  if (args.empty()) throw SortError("Permitted needs at least one argument");
  symbols_[kPermitted].arg_sorts = std::move(args);
}

std::optional<SortId> Signature::find_sort(std::string_view name) const {
  auto it = sort_index_.find(std::string(name));
  if (it == sort_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Signature::find_symbol(std::string_view name) const {
  auto it = symbol_index_.find(std::string(name));
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

// --------------------------------------------------------------------- Term

Term Term::variable(VarId id, SortId sort) {
  auto n = std::make_shared<Node>();
  n->is_var = true;
  n->id = id;
  n->sort = sort;
  n->ground = false;
  n->hash = mix(mix(0x51, id), sort);
  return Term(std::move(n));
}

Term Term::apply(SymbolId symbol, SortId sort, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->id = symbol;
  n->sort = sort;
  std::size_t h = mix(0xa7, symbol);
  for (const Term& a : args) {
    n->ground = n->ground && a.is_ground();
    n->size += static_cast<std::uint32_t>(a.size());
    h = mix(h, a.hash());
  }
  n->hash = h;
  n->args = std::move(args);
  return Term(std::move(n));
}

Term Term::make(const Signature& sig, SymbolId symbol, std::vector<Term> args) {
  const Symbol& s = sig.symbol(symbol);
  if (s.kind != SymbolKind::constant && s.kind != SymbolKind::function)
    throw SortError("'" + s.name + "' is not a function or constant");
  if (args.size() != s.arg_sorts.size())
    throw SortError("'" + s.name + "' expects " + std::to_string(s.arg_sorts.size()) +
                    " argument(s), got " + std::to_string(args.size()));
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i].sort() != s.arg_sorts[i])
      throw SortError("argument " + std::to_string(i + 1) + " of '" + s.name + "' must have sort " +
                      sig.sort_name(s.arg_sorts[i]) + ", got " + sig.sort_name(args[i].sort()));
  return apply(symbol, *s.result_sort, std::move(args));
}

bool Term::contains_variable(VarId v) const {
  if (is_ground()) return false;
  if (is_variable()) return var() == v;
  return std::ranges::any_of(args(), [v](const Term& a) { return a.contains_variable(v); });
}

bool Term::contains(const Term& sub) const {
  if (*this == sub) return true;
  if (size() <= sub.size()) return false;
  return std::ranges::any_of(args(), [&](const Term& a) { return a.contains(sub); });
}

void Term::collect_variables(std::vector<VarId>& out) const {
  if (is_ground()) return;
  if (is_variable()) {
    out.push_back(var());
    return;
  }
  for (const Term& a : args()) a.collect_variables(out);
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  return (a <=> b) == 0;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  // Variables sort before applications.
  if (a.is_variable() != b.is_variable())
    return a.is_variable() ? std::strong_ordering::less : std::strong_ordering::greater;
  if (auto c = a.node_->id <=> b.node_->id; c != 0) return c;
  if (auto c = a.sort() <=> b.sort(); c != 0) return c;
  auto aa = a.args();
  auto ba = b.args();
  if (auto c = aa.size() <=> ba.size(); c != 0) return c;
  for (std::size_t i = 0; i < aa.size(); ++i)
    if (auto c = aa[i] <=> ba[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

// ------------------------------------------------------------------ Literal

Literal Literal::make(const Signature& sig, bool positive, SymbolId predicate,
                      std::vector<Term> args) {
  const Symbol& s = sig.symbol(predicate);
  if (s.kind == SymbolKind::equality) {
    if (args.size() != 2) throw SortError("equality takes two arguments");
    if (args[0].sort() != args[1].sort())
      throw SortError("equality between sorts " + sig.sort_name(args[0].sort()) + " and " +
                      sig.sort_name(args[1].sort()));
  } else if (s.kind == SymbolKind::predicate) {
    if (args.size() != s.arg_sorts.size())
      throw SortError("'" + s.name + "' expects " + std::to_string(s.arg_sorts.size()) +
                      " argument(s), got " + std::to_string(args.size()));
    for (std::size_t i = 0; i < args.size(); ++i)
      if (args[i].sort() != s.arg_sorts[i])
        throw SortError("argument " + std::to_string(i + 1) + " of '" + s.name +
                        "' must have sort " + sig.sort_name(s.arg_sorts[i]) + ", got " +
                        sig.sort_name(args[i].sort()));
  } else {
    throw SortError("'" + s.name + "' is not a predicate");
  }
  return Literal{positive, predicate, std::move(args)};
}

bool Literal::is_ground() const {
  return std::ranges::all_of(args, [](const Term& t) { return t.is_ground(); });
}

std::size_t Literal::size() const {
  std::size_t n = positive ? 1 : 2;
  for (const Term& t : args) n += t.size();
  return n;
}

void Literal::collect_variables(std::vector<VarId>& out) const {
  for (const Term& t : args) t.collect_variables(out);
}

std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
  if (auto c = a.predicate <=> b.predicate; c != 0) return c;
  if (auto c = a.args.size() <=> b.args.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (auto c = a.args[i] <=> b.args[i]; c != 0) return c;
  // Negative before positive.
  return a.positive <=> b.positive;
}

// ------------------------------------------------------------------- Clause

Clause::Clause(std::vector<Literal> literals) : literals_(std::move(literals)) {
  std::ranges::sort(literals_);
  auto [first, last] = std::ranges::unique(literals_);
  literals_.erase(first, last);
}

bool Clause::is_ground() const {
  return std::ranges::all_of(literals_, [](const Literal& l) { return l.is_ground(); });
}

bool Clause::contains(const Literal& l) const {
  return std::ranges::binary_search(literals_, l);
}

std::vector<VarId> Clause::variables() const {
  std::vector<VarId> out;
  for (const Literal& l : literals_) l.collect_variables(out);
  std::ranges::sort(out);
  out.erase(std::ranges::unique(out).begin(), out.end());
  return out;
}

std::optional<VarId> Clause::max_variable() const {
  auto vs = variables();
  if (vs.empty()) return std::nullopt;
  return vs.back();
}

std::size_t Clause::length() const {
  std::size_t n = 0;
  for (const Literal& l : literals_) n += l.size();
  return n;
}

std::size_t Clause::longest_term() const {
  std::size_t n = 0;
  for (const Literal& l : literals_)
    for (const Term& t : l.args) n = std::max(n, t.size());
  return n;
}

bool Clause::is_tautology() const {
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    const Literal& l = literals_[i];
    if (l.positive && l.is_equality() && l.args[0] == l.args[1]) return true;
    if (i + 1 < literals_.size() && literals_[i + 1].same_atom(l)) return true;
  }
  return false;
}

std::strong_ordering operator<=>(const Clause& a, const Clause& b) {
  if (auto c = a.literals_.size() <=> b.literals_.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.literals_.size(); ++i)
    if (auto c = a.literals_[i] <=> b.literals_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

// ------------------------------------------------------------- Substitution

const Term* Substitution::find(VarId v) const {
  auto it = bindings_.find(v);
  return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
  if (t.is_ground() || bindings_.empty()) return t;
  if (t.is_variable()) {
    const Term* b = find(t.var());
    return b ? *b : t;
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply(a));
    changed = changed || !(args.back() == a);
  }
  if (!changed) return t;
  return Term::apply(t.symbol(), t.sort(), std::move(args));
}

Literal Substitution::apply(const Literal& l) const {
  Literal out{l.positive, l.predicate, {}};
  out.args.reserve(l.args.size());
  for (const Term& t : l.args) out.args.push_back(apply(t));
  return out;
}

Clause Substitution::apply(const Clause& c) const {
  std::vector<Literal> lits;
  lits.reserve(c.size());
  for (const Literal& l : c.literals()) lits.push_back(apply(l));
  return Clause(std::move(lits));
}

Substitution Substitution::compose(const Substitution& then) const {
  Substitution out;
  for (const auto& [v, t] : bindings_) {
    Term u = then.apply(t);
    if (!(u.is_variable() && u.var() == v)) out.bind(v, std::move(u));
  }
  for (const auto& [v, t] : then.bindings_)
    if (!bindings_.contains(v)) out.bind(v, t);
  return out;
}

bool Substitution::is_idempotent() const {
  for (const auto& [v, t] : bindings_)
    if (!(apply(t) == t)) return false;
  return true;
}

Clause apply_substitution(const Clause& c, const Substitution& s) { return s.apply(c); }

// ----------------------------------------------------------------- Renaming

namespace {

Term rename_term(const Term& t, const std::function<VarId(VarId)>& f) {
  if (t.is_ground()) return t;
  if (t.is_variable()) return Term::variable(f(t.var()), t.sort());
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(rename_term(a, f));
  return Term::apply(t.symbol(), t.sort(), std::move(args));
}

Clause rename(const Clause& c, const std::function<VarId(VarId)>& f) {
  std::vector<Literal> lits;
  lits.reserve(c.size());
  for (const Literal& l : c.literals()) {
    Literal r{l.positive, l.predicate, {}};
    for (const Term& t : l.args) r.args.push_back(rename_term(t, f));
    lits.push_back(std::move(r));
  }
  return Clause(std::move(lits));
}

// Structural order that treats every variable as equal.
std::strong_ordering blind_compare(const Term& a, const Term& b) {
  if (a.is_variable() || b.is_variable()) {
    if (a.is_variable() && b.is_variable()) return std::strong_ordering::equal;
    return a.is_variable() ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (auto c = a.symbol() <=> b.symbol(); c != 0) return c;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (auto c = blind_compare(a.args()[i], b.args()[i]); c != 0) return c;
  return std::strong_ordering::equal;
}

std::strong_ordering blind_compare(const Literal& a, const Literal& b) {
  if (auto c = a.predicate <=> b.predicate; c != 0) return c;
  if (auto c = a.positive <=> b.positive; c != 0) return c;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (auto c = blind_compare(a.args[i], b.args[i]); c != 0) return c;
  return std::strong_ordering::equal;
}

}  // namespace

Clause rename_offset(const Clause& c, VarId offset) {
  if (offset == 0) return c;
  return rename(c, [offset](VarId v) { return v + offset; });
}

Clause canonical_variant(const Clause& c) {
  std::vector<Literal> lits(c.literals().begin(), c.literals().end());
  std::ranges::stable_sort(lits, [](const Literal& a, const Literal& b) {
    return blind_compare(a, b) < 0;
  });
  std::map<VarId, VarId> order;
  for (const Literal& l : lits) {
    std::vector<VarId> vs;
    l.collect_variables(vs);
    for (VarId v : vs) order.try_emplace(v, static_cast<VarId>(order.size()));
  }
  return rename(c, [&order](VarId v) { return order.at(v); });
}

std::pair<Clause, Clause> standardize_apart(const Clause& a, const Clause& b) {
  auto ma = a.max_variable();
  if (!ma) return {a, b};
  return {a, rename_offset(b, *ma + 1)};
}

// ----------------------------------------------------------------- Policies

std::string_view to_string(Decision d) { return d == Decision::permit ? "permit" : "deny"; }

Clause policy_to_clause(const Policy& p) {
  std::vector<Literal> lits;
  lits.reserve(p.antecedent.size() + 1);
  for (const Literal& l : p.antecedent) lits.push_back(l.negated());
  lits.push_back(p.conclusion());
  return Clause(std::move(lits));
}

Clause rule_to_clause(const EnvRule& r) {
  std::vector<Literal> lits;
  lits.reserve(r.antecedent.size() + 1);
  for (const Literal& l : r.antecedent) lits.push_back(l.negated());
  lits.push_back(r.conclusion);
  return Clause(std::move(lits));
}

namespace {

void check_term_sorts(const Signature& sig, const Term& t) {
  if (t.is_variable()) return;
  const Symbol& s = sig.symbol(t.symbol());
  if (s.kind != SymbolKind::constant && s.kind != SymbolKind::function)
    throw SortError("'" + s.name + "' used as a term");
  if (s.arg_sorts.size() != t.args().size() || s.result_sort != t.sort())
    throw SortError("ill-sorted application of '" + s.name + "'");
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (t.args()[i].sort() != s.arg_sorts[i])
      throw SortError("argument " + std::to_string(i + 1) + " of '" + s.name + "' has sort " +
                      sig.sort_name(t.args()[i].sort()) + ", expected " +
                      sig.sort_name(s.arg_sorts[i]));
    check_term_sorts(sig, t.args()[i]);
  }
}

void check_literal_sorts(const Signature& sig, const Literal& l) {
  (void)Literal::make(sig, l.positive, l.predicate, l.args);
  for (const Term& t : l.args) check_term_sorts(sig, t);
}

}  // namespace

void validate_policy(const Signature& sig, const Policy& p) {
  for (const Literal& l : p.antecedent) check_literal_sorts(sig, l);
  check_literal_sorts(sig, p.conclusion());
}

void PolicyBase::validate() const {
  for (const Literal& l : e0) {
    check_literal_sorts(*signature, l);
    if (!l.is_ground()) throw ShapeError("ground environment fact contains a variable");
    if (l.mentions_permitted()) throw ShapeError("the environment may not mention Permitted");
  }
  for (const EnvRule& r : e1) {
    check_literal_sorts(*signature, r.conclusion);
    for (const Literal& l : r.antecedent) check_literal_sorts(*signature, l);
    if (rule_to_clause(r).literals().end() !=
        std::ranges::find_if(rule_to_clause(r).literals(),
                             [](const Literal& l) { return l.mentions_permitted(); }))
      throw ShapeError("environment rule '" + r.label + "' mentions Permitted");
  }
  for (const Policy& p : policies) validate_policy(*signature, p);
}

// ------------------------------------------------------------------ Printer

std::string Printer::variable(VarId v) const {
  std::string name = "x" + std::to_string(v);
  while (sig_.find_symbol(name) || sig_.find_sort(name)) name += "_";
  return name;
}

std::string Printer::term(const Term& t) const {
  if (t.is_variable()) return variable(t.var());
  std::string out = sig_.symbol(t.symbol()).name;
  if (t.args().empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) out += ", ";
    out += term(t.args()[i]);
  }
  out += ')';
  return out;
}

std::string Printer::literal(const Literal& l) const {
  if (l.is_equality())
    return term(l.args[0]) + (l.positive ? " = " : " != ") + term(l.args[1]);
  std::string out = l.positive ? "" : "!";
  out += sig_.symbol(l.predicate).name;
  if (l.args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < l.args.size(); ++i) {
    if (i) out += ", ";
    out += term(l.args[i]);
  }
  out += ')';
  return out;
}

std::string Printer::clause(const Clause& c) const {
  if (c.empty()) return "false";
  std::string out = "{";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ", ";
    out += literal(c[i]);
  }
  out += '}';
  return out;
}

std::string Printer::substitution(const Substitution& s) const {
  std::string out = "{";
  bool first = true;
  for (const auto& [v, t] : s.bindings()) {
    if (!first) out += ", ";
    first = false;
    out += variable(v) + " -> " + term(t);
  }
  out += '}';
  return out;
}

}  // namespace lithium
