#include "lithium/unify.hpp"

#include <algorithm>
#include <limits>
#include <cassert>
#include <functional>
#include <unordered_map>

#include "lithium/equality.hpp"

namespace lithium {

namespace {

// Triangular bindings used while solving; resolved to an idempotent
// substitution at the end.
class Solver {
 public:
  Term walk(Term t) const {
    while (t.is_variable()) {
      auto it = bound_.find(t.var());
      if (it == bound_.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs(VarId v, const Term& t) const {
    Term w = walk(t);
    if (w.is_variable()) return w.var() == v;
    if (w.is_ground()) return false;
    return std::ranges::any_of(w.args(), [&](const Term& a) { return occurs(v, a); });
  }

  bool unify(const Term& a0, const Term& b0) {
    Term a = walk(a0);
    Term b = walk(b0);
    if (a == b) return true;
    if (a.sort() != b.sort()) return false;
    if (a.is_variable()) return bind(a.var(), b);
    if (b.is_variable()) return bind(b.var(), a);
    if (a.symbol() != b.symbol() || a.args().size() != b.args().size()) return false;
    for (std::size_t i = 0; i < a.args().size(); ++i)
      if (!unify(a.args()[i], b.args()[i])) return false;
    return true;
  }

  Term resolve(const Term& t) const {
    if (t.is_ground()) return t;
    Term w = walk(t);
    if (w.is_variable()) return w;
    std::vector<Term> args;
    args.reserve(w.args().size());
    for (const Term& a : w.args()) args.push_back(resolve(a));
    return Term::apply(w.symbol(), w.sort(), std::move(args));
  }

  Substitution result() const {
    Substitution s;
    for (const auto& [v, t] : bound_) s.bind(v, resolve(t));
    return s;
  }

 private:
  bool bind(VarId v, const Term& t) {
    if (occurs(v, t)) return false;
    bound_.emplace(v, t);
    return true;
  }

  std::unordered_map<VarId, Term> bound_;
};

}  // namespace

std::optional<Substitution> mgu(const Term& a, const Term& b) {
  Solver s;
  if (!s.unify(a, b)) return std::nullopt;
  return s.result();
}

std::optional<Substitution> mgu(const Literal& a, const Literal& b) {
  if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;
  Solver s;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!s.unify(a.args[i], b.args[i])) return std::nullopt;
  Substitution out = s.result();
#ifndef NDEBUG
  assert(out.apply(a).same_atom(out.apply(b)));
  assert(out.is_idempotent());
#endif
  return out;
}

bool unify(const Term& a, const Term& b, Substitution& s) {
  auto theta = mgu(s.apply(a), s.apply(b));
  if (!theta) return false;
  if (!theta->empty()) s = s.compose(*theta);
  return true;
}

bool match(const Term& pattern, const Term& target, Substitution& s) {
  if (pattern.is_variable()) {
    if (pattern.sort() != target.sort()) return false;
    if (const Term* b = s.find(pattern.var())) return *b == target;
    s.bind(pattern.var(), target);
    return true;
  }
  if (pattern.is_ground()) return pattern == target;
  if (target.is_variable() || pattern.symbol() != target.symbol() ||
      pattern.args().size() != target.args().size())
    return false;
  for (std::size_t i = 0; i < pattern.args().size(); ++i)
    if (!match(pattern.args()[i], target.args()[i], s)) return false;
  return true;
}

bool match(const Literal& pattern, const Literal& target, Substitution& s) {
  if (pattern.positive != target.positive || pattern.predicate != target.predicate ||
      pattern.args.size() != target.args.size())
    return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (!match(pattern.args[i], target.args[i], s)) return false;
  return true;
}

namespace {

// Matching with a flat binding table and an undo trail; the target's terms
// outlive the search.
class TrailMatcher {
 public:
  explicit TrailMatcher(std::size_t vars) : val_(vars, nullptr) {}

  bool term(const Term& p, const Term& t) {
    if (p.is_variable()) {
      const Term*& slot = val_[p.var()];
      if (slot) return *slot == t;
      if (p.sort() != t.sort()) return false;
      slot = &t;
      trail_.push_back(p.var());
      return true;
    }
    if (t.is_variable() || p.symbol() != t.symbol() || p.args().size() != t.args().size()) return false;
    if (p.is_ground()) return p == t;
    for (std::size_t i = 0; i < p.args().size(); ++i)
      if (!term(p.args()[i], t.args()[i])) return false;
    return true;
  }

  bool literal(const Literal& p, const Literal& t) {
    if (p.positive != t.positive || p.predicate != t.predicate || p.args.size() != t.args.size())
      return false;
    for (std::size_t i = 0; i < p.args.size(); ++i)
      if (!term(p.args[i], t.args[i])) return false;
    return true;
  }

  std::size_t mark() const { return trail_.size(); }
  void undo(std::size_t m) {
    while (trail_.size() > m) {
      val_[trail_.back()] = nullptr;
      trail_.pop_back();
    }
  }

  Substitution result() const {
    Substitution s;
    for (std::size_t v = 0; v < val_.size(); ++v)
      if (val_[v]) s.bind(static_cast<VarId>(v), *val_[v]);
    return s;
  }

 private:
  std::vector<const Term*> val_;
  std::vector<VarId> trail_;
};

}  // namespace

std::optional<Substitution> subsumes(const Clause& c, const Clause& d) {
  return subsumes(c, d, std::numeric_limits<std::size_t>::max());
}

std::optional<Substitution> subsumes(const Clause& c, const Clause& d, std::size_t max_steps) {
  if (c.is_ground() && c.size() > d.size()) return std::nullopt;
  auto mv = c.max_variable();
  TrailMatcher m(mv ? *mv + 1 : 0);
  // Candidates per literal; a literal with none fails at once.
  std::vector<std::vector<std::size_t>> cand(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      std::size_t mark = m.mark();
      if (m.literal(c[i], d[j])) cand[i].push_back(j);
      m.undo(mark);
    }
    if (cand[i].empty()) return std::nullopt;
  }
  std::vector<std::size_t> order(c.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cand[a].size() < cand[b].size(); });
  std::size_t steps = 0;
  auto go = [&](auto& self, std::size_t k) -> bool {
    if (k == order.size()) return true;
    std::size_t i = order[k];
    for (std::size_t j : cand[i]) {
      if (++steps > max_steps) return false;
      std::size_t mark = m.mark();
      if (m.literal(c[i], d[j]) && self(self, k + 1)) return true;
      m.undo(mark);
    }
    return false;
  };
  if (!go(go, 0)) return std::nullopt;
  return m.result();
}

// ---------------------------------------------------------------- bipolars

std::size_t BipolarReport::max_count() const {
  std::size_t m = 0;
  for (std::size_t c : per_clause_count) m = std::max(m, c);
  return m;
}

BipolarReport bipolar_report(std::span<const Clause> clauses, const EqClasses* eq, Execution exec) {
  // Literal positions stay those of the caller's clauses even after rewriting.
  std::vector<std::vector<Literal>> work(clauses.size());
  struct Occ {
    LiteralRef ref;
    const Literal* lit;
    VarId width;  // one past the largest variable id of its clause
  };
  std::vector<Occ> occs;
  for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
    for (const Literal& l : clauses[ci].literals()) work[ci].push_back(eq ? eq->rewrite(l) : l);
    auto mv = clauses[ci].max_variable();
    VarId width = mv ? *mv + 1 : 0;
    for (std::size_t li = 0; li < work[ci].size(); ++li)
      occs.push_back({{ci, li}, &work[ci][li], width});
  }

  // Occurrences grouped by predicate so only candidates are compared.
  std::vector<std::size_t> order(occs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return occs[a].lit->predicate < occs[b].lit->predicate;
  });
  std::vector<std::size_t> group_end(occs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && occs[order[j]].lit->predicate == occs[order[i]].lit->predicate) ++j;
    for (std::size_t k = i; k < j; ++k) group_end[k] = j;
    i = j;
  }

  std::vector<std::vector<BipolarPair>> found(order.size());
  for_each_index(order.size(), exec, [&](std::size_t i) {
    const Occ& a = occs[order[i]];
    for (std::size_t j = i + 1; j < group_end[i]; ++j) {
      const Occ& b = occs[order[j]];
      if (a.lit->positive == b.lit->positive) continue;
      Clause shifted = rename_offset(Clause({*b.lit}), a.width);
      if (!mgu(*a.lit, shifted[0])) continue;
      BipolarPair p{a.ref, b.ref};
      if (p.second < p.first) std::swap(p.first, p.second);
      found[i].push_back(p);
    }
  });

  BipolarReport r;
  r.flags.resize(clauses.size());
  r.per_clause_count.assign(clauses.size(), 0);
  for (std::size_t ci = 0; ci < clauses.size(); ++ci) r.flags[ci].assign(clauses[ci].size(), false);
  for (auto& v : found)
    for (const BipolarPair& p : v) r.pairs.push_back(p);
  std::ranges::sort(r.pairs, [](const BipolarPair& a, const BipolarPair& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  for (const BipolarPair& p : r.pairs) {
    r.flags[p.first.clause][p.first.literal] = true;
    r.flags[p.second.clause][p.second.literal] = true;
  }
  for (std::size_t ci = 0; ci < clauses.size(); ++ci)
    r.per_clause_count[ci] = static_cast<std::size_t>(std::ranges::count(r.flags[ci], true));
  return r;
}

// --------------------------------------------------------- constrainedness

std::vector<VarId> constrained_vars(const Clause& c, const std::vector<bool>* bipolar_flags) {
  std::vector<VarId> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].mentions_permitted()) continue;
    if (bipolar_flags && (*bipolar_flags)[i]) continue;
    c[i].collect_variables(out);
  }
  std::ranges::sort(out);
  out.erase(std::ranges::unique(out).begin(), out.end());
  return out;
}

std::size_t unconstrained_count(const Clause& c, const std::vector<bool>* bipolar_flags) {
  auto all = c.variables();
  auto con = constrained_vars(c, bipolar_flags);
  std::size_t n = 0;
  for (VarId v : all)
    if (!std::ranges::binary_search(con, v)) ++n;
  return n;
}

std::size_t unconstrained_per_literal(const Clause& c, const std::vector<bool>* bipolar_flags) {
  auto con = constrained_vars(c, bipolar_flags);
  std::size_t best = 0;
  for (const Literal& l : c.literals()) {
    std::vector<VarId> vs;
    l.collect_variables(vs);
    std::ranges::sort(vs);
    vs.erase(std::ranges::unique(vs).begin(), vs.end());
    std::size_t n = 0;
    for (VarId v : vs)
      if (!std::ranges::binary_search(con, v)) ++n;
    best = std::max(best, n);
  }
  return best;
}

}  // namespace lithium
