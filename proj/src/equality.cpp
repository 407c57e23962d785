#include "lithium/equality.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace lithium {

std::string_view to_string(EqViolation::Kind k) {
  switch (k) {
    case EqViolation::Kind::positive_equation: return "positive-equation";
    case EqViolation::Kind::two_function_terms: return "two-function-terms";
    case EqViolation::Kind::subterm: return "subterm";
    case EqViolation::Kind::congruence: return "congruence";
    case EqViolation::Kind::cyclic: return "cyclic";
  }
  return "?";
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // The smaller index stays root so class numbering follows first appearance.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

bool is_positive_equation(const Literal& l) { return l.positive && l.is_equality(); }

std::string listing(const Printer& pr, std::span<const Term> ts) {
  std::string s = "{";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) s += ", ";
    s += pr.term(ts[i]);
  }
  return s + "}";
}

}  // namespace

EqClasses build_eq_classes(const Signature& sig, std::span<const Literal> e0) {
  EqClasses out;
  Printer pr(sig);

  std::vector<Term> table;
  std::unordered_map<Term, std::size_t, TermHash> index;
  std::function<std::size_t(const Term&)> intern = [&](const Term& t) -> std::size_t {
    if (auto it = index.find(t); it != index.end()) return it->second;
    for (const Term& a : t.args()) intern(a);
    index.emplace(t, table.size());
    table.push_back(t);
    return table.size() - 1;
  };
  for (const Literal& l : e0)
    for (const Term& a : l.args) intern(a);

  UnionFind uf(table.size());
  for (const Literal& l : e0) {
    if (!is_positive_equation(l)) continue;
    std::size_t a = index.at(l.args[0]);
    std::size_t b = index.at(l.args[1]);
    if (a != b) out.trivial_ = false;
    uf.unite(a, b);
  }

  std::vector<std::size_t> cls(table.size());
  std::unordered_map<std::size_t, std::size_t> root_to_class;
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::size_t r = uf.find(i);
    auto [it, fresh] = root_to_class.emplace(r, out.members_.size());
    if (fresh) out.members_.emplace_back();
    cls[i] = it->second;
    out.members_[it->second].push_back(table[i]);
  }

  for (auto& ms : out.members_) {
    std::vector<Term> fn;
    for (const Term& m : ms)
      if (!m.is_constant()) fn.push_back(m);
    if (fn.size() > 1) {
      out.violations_.push_back({EqViolation::Kind::two_function_terms, listing(pr, ms),
                                 pr.term(fn[0]) + " and " + pr.term(fn[1]) + " are equated"});
    }
    if (!fn.empty()) {
      out.rep_.push_back(*std::ranges::min_element(fn, [](const Term& a, const Term& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
      }));
    } else {
      out.rep_.push_back(*std::ranges::min_element(ms, [&](const Term& a, const Term& b) {
        return sig.symbol(a.symbol()).name < sig.symbol(b.symbol()).name;
      }));
    }
  }

  // Congruence keys and the syntactic subterm test.
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Term& t = table[i];
    EqClasses::Key key{t.symbol(), {}};
    for (const Term& a : t.args()) key.second.push_back(cls[index.at(a)]);
    auto [it, fresh] = out.by_key_.emplace(std::move(key), cls[i]);
    if (!fresh && it->second != cls[i]) {
      const Term& other = out.members_[it->second].front();
      out.violations_.push_back({EqViolation::Kind::congruence, pr.term(t),
                                 pr.term(t) + " is implied equal to a term of class " +
                                     listing(pr, out.members_[it->second]) + " (" +
                                     pr.term(other) + ")"});
    }
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Term& t = table[i];
    if (t.is_constant() || out.members_[cls[i]].size() < 2) continue;
    std::function<bool(const Term&)> inside = [&](const Term& s) {
      for (const Term& a : s.args())
        if (cls[index.at(a)] == cls[i] || inside(a)) return true;
      return false;
    };
    if (inside(t))
      out.violations_.push_back({EqViolation::Kind::subterm, listing(pr, out.members_[cls[i]]),
                                 pr.term(t) + " is equated with one of its subterms"});
  }

  // Normal forms of representatives, with cycle detection.
  std::vector<int> state(out.members_.size(), 0);
  out.nrep_ = out.rep_;
  bool cycle_reported = false;
  std::function<Term(std::size_t)> normal = [&](std::size_t c) -> Term {
    if (state[c] == 2) return out.nrep_[c];
    const Term& r = out.rep_[c];
    if (state[c] == 1) {
      if (!cycle_reported) {
        cycle_reported = true;
        out.violations_.push_back({EqViolation::Kind::cyclic, listing(pr, out.members_[c]),
                                   "rewriting " + pr.term(r) + " does not terminate"});
      }
      return r;
    }
    state[c] = 1;
    Term n = r;
    if (!r.is_constant()) {
      std::vector<Term> args;
      for (const Term& a : r.args()) args.push_back(normal(cls[index.at(a)]));
      n = Term::apply(r.symbol(), r.sort(), std::move(args));
    }
    state[c] = 2;
    out.nrep_[c] = n;
    return n;
  };
  for (std::size_t c = 0; c < out.members_.size(); ++c) normal(c);
  return out;
}

namespace {

struct Normal {
  Term term;
  std::optional<std::size_t> cls;
};

}  // namespace

std::optional<std::size_t> EqClasses::class_of(const Term& t) const {
  if (t.is_variable() || !t.is_ground()) return std::nullopt;
  Key key{t.symbol(), {}};
  for (const Term& a : t.args()) {
    auto c = class_of(a);
    if (!c) return std::nullopt;
    key.second.push_back(*c);
  }
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

Term EqClasses::rewrite(const Term& t) const {
  if (trivial_) return t;
  std::function<Normal(const Term&)> go = [&](const Term& u) -> Normal {
    if (u.is_variable()) return {u, std::nullopt};
    std::vector<Term> args;
    Key key{u.symbol(), {}};
    bool keyed = u.is_ground();
    for (const Term& a : u.args()) {
      Normal n = go(a);
      args.push_back(n.term);
      if (n.cls)
        key.second.push_back(*n.cls);
      else
        keyed = false;
    }
    if (keyed) {
      if (auto it = by_key_.find(key); it != by_key_.end()) return {nrep_[it->second], it->second};
    }
    return {Term::apply(u.symbol(), u.sort(), std::move(args)), std::nullopt};
  };
  return go(t).term;
}

Literal EqClasses::rewrite(const Literal& l) const {
  if (trivial_) return l;
  Literal out{l.positive, l.predicate, {}};
  for (const Term& a : l.args) out.args.push_back(rewrite(a));
  return out;
}

Clause EqClasses::rewrite(const Clause& c) const {
  if (trivial_) return c;
  std::vector<Literal> lits;
  for (const Literal& l : c.literals()) lits.push_back(rewrite(l));
  return Clause(std::move(lits));
}

SafeReport equality_safe(const Query& q) {
  SafeReport r;
  const Signature& sig = *q.base.signature;
  Printer pr(sig);
  auto scan = [&](const std::string& label, const Clause& c) {
    for (const Literal& l : c.literals())
      if (is_positive_equation(l))
        r.violations.push_back({EqViolation::Kind::positive_equation, label,
                                "clause " + pr.clause(c) + " has disjunct " + pr.literal(l)});
  };
  for (const EnvRule& e : q.base.e1) scan(e.label, rule_to_clause(e));
  for (const Policy& p : q.base.policies) scan(p.label, policy_to_clause(p));
  EqClasses eq = build_eq_classes(sig, q.base.e0);
  for (const EqViolation& v : eq.violations()) r.violations.push_back(v);
  r.safe = r.violations.empty();
  return r;
}

Query to_equation_free(const Query& q) {
  SafeReport safe = equality_safe(q);
  if (!safe.safe) {
    const EqViolation& v = safe.violations.front();
    throw NotEqualitySafe(std::string(to_string(v.kind)) + " in " + v.where + ": " + v.detail);
  }
  EqClasses eq = build_eq_classes(*q.base.signature, q.base.e0);
  if (eq.trivial() && std::ranges::none_of(q.base.e0, is_positive_equation)) return q;
  Query out = q;
  out.base.e0.clear();
  for (const Literal& l : q.base.e0) {
    if (is_positive_equation(l)) continue;
    out.base.e0.push_back(eq.rewrite(l));
  }
  // Rewriting can make two E0 literals coincide.
  std::set<Literal> seen;
  std::vector<Literal> dedup;
  for (Literal& l : out.base.e0)
    if (seen.insert(l).second) dedup.push_back(std::move(l));
  out.base.e0 = std::move(dedup);
  for (EnvRule& e : out.base.e1) {
    for (Literal& l : e.antecedent) l = eq.rewrite(l);
    e.conclusion = eq.rewrite(e.conclusion);
  }
  for (Policy& p : out.base.policies) {
    for (Literal& l : p.antecedent) l = eq.rewrite(l);
    for (Term& t : p.target) t = eq.rewrite(t);
  }
  for (Term& t : out.goal_args) t = eq.rewrite(t);
  return out;
}

}  // namespace lithium
