#include "lithium/engine.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace lithium {

// ------------------------------------------------------------ LiteralIndex

namespace {

struct FirstArgKey {
  SymbolId predicate;
  const Term* first;  // null: predicate only
};

struct FirstArgLess {
  static int cmp(const Literal& l, const FirstArgKey& k) {
    if (l.predicate != k.predicate) return l.predicate < k.predicate ? -1 : 1;
    if (!k.first) return 0;
    auto c = l.args[0] <=> *k.first;
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  bool operator()(const Literal& l, const FirstArgKey& k) const { return cmp(l, k) < 0; }
  bool operator()(const FirstArgKey& k, const Literal& l) const { return cmp(l, k) > 0; }
};

}  // namespace

LiteralIndex::LiteralIndex(std::span<const Literal> literals) {
  for (const Literal& l : literals) (l.positive ? pos_ : neg_).push_back(l);
  for (auto* v : {&pos_, &neg_}) {
    std::ranges::sort(*v);
    v->erase(std::ranges::unique(*v).begin(), v->end());
  }
}

bool LiteralIndex::contains(const Literal& l) const {
  const auto& v = l.positive ? pos_ : neg_;
  return std::ranges::binary_search(v, l);
}

std::span<const Literal> LiteralIndex::candidates(const Literal& pattern) const {
  const auto& v = pattern.positive ? pos_ : neg_;
  FirstArgKey key{pattern.predicate, nullptr};
  if (!pattern.args.empty() && pattern.args[0].is_ground()) key.first = &pattern.args[0];
  auto [lo, hi] = std::equal_range(v.begin(), v.end(), key, FirstArgLess{});
  return {lo, hi};
}

// ------------------------------------------------------------------ shared

std::string_view to_string(SuggestedPath p) {
  switch (p) {
    case SuggestedPath::fast: return "fast";
    case SuggestedPath::full: return "full";
    case SuggestedPath::fallback: return "fallback";
  }
  return "?";
}

std::string_view verdict_name(const Verdict& v) {
  struct {
    std::string_view operator()(const Valid&) const { return "Valid"; }
    std::string_view operator()(const Invalid&) const { return "Invalid"; }
    std::string_view operator()(const NotInLithium&) const { return "NotInLithium"; }
    std::string_view operator()(const Unknown&) const { return "Unknown"; }
  } name;
  return std::visit(name, v);
}

std::string_view to_string(SeparationItem::Status s) {
  switch (s) {
    case SeparationItem::Status::implied_by_environment: return "impliedByE";
    case SeparationItem::Status::implied_by_conjunct: return "impliedByConjunct";
    case SeparationItem::Status::missing: return "missing";
  }
  return "?";
}

std::string_view to_string(ConsistencyReport::Status s) {
  switch (s) {
    case ConsistencyReport::Status::consistent: return "Consistent";
    case ConsistencyReport::Status::inconsistent: return "Inconsistent";
    case ConsistencyReport::Status::unknown: return "Unknown";
  }
  return "?";
}

namespace {

std::vector<LabeledClause> base_clauses(const PolicyBase& b) {
  std::vector<LabeledClause> out;
  out.reserve(b.e1.size() + b.policies.size());
  for (const EnvRule& r : b.e1) out.push_back({rule_to_clause(r), r.label});
  for (const Policy& p : b.policies) out.push_back({policy_to_clause(p), p.label});
  return out;
}

std::vector<Clause> plain_clauses(std::span<const LabeledClause> cs) {
  std::vector<Clause> out;
  out.reserve(cs.size());
  for (const LabeledClause& c : cs) out.push_back(c.clause);
  return out;
}

bool mentions_equality(const PolicyBase& b) {
  auto eq = [](const Literal& l) { return l.is_equality(); };
  if (std::ranges::any_of(b.e0, eq)) return true;
  for (const EnvRule& r : b.e1)
    if (std::ranges::any_of(r.antecedent, eq) || r.conclusion.is_equality()) return true;
  for (const Policy& p : b.policies)
    if (std::ranges::any_of(p.antecedent, eq)) return true;
  return false;
}

DerivationStep axiom_step(Clause c, std::string label) {
  DerivationStep s;
  s.clause = std::move(c);
  s.label = std::move(label);
  return s;
}

bool has_positive_equation(std::span<const Literal> ls) {
  return std::ranges::any_of(ls, [](const Literal& l) { return l.positive && l.is_equality(); });
}

// Empty-clause derivation from E0 alone: t != t, or a complementary pair.
std::optional<Derivation> e0_clash(const LiteralIndex& idx) {
  auto finish = [](Clause a, std::string la, Clause b, std::string lb) {
    Derivation d;
    d.steps.push_back(axiom_step(a, std::move(la)));
    d.steps.push_back(axiom_step(b, std::move(lb)));
    VarId off = rename_offset_for(a);
    Clause rb = rename_offset(b, off);
    auto sigma = mgu(a[0], rb[0]);
    DerivationStep s;
    s.kind = DerivationStep::Kind::resolve;
    s.left = 0;
    s.right = 1;
    s.unifier = *sigma;
    s.clause = resolvent_of(a, rb, 0, 0, *sigma);
    d.steps.push_back(std::move(s));
    return d;
  };
  for (const Literal& l : idx.negatives())
    if (l.is_equality() && l.args[0] == l.args[1])
      return finish(Clause({l}), "E0", reflexivity_clause(l.args[0].sort()), "reflexivity");
  for (const Literal& l : idx.positives())
    if (idx.contains(l.negated())) return finish(Clause({l}), "E0", Clause({l.negated()}), "E0");
  return std::nullopt;
}

// Finds θ extending `theta` such that every literal of lits·θ is the
// complement of an indexed literal or has the form s != s.
class Matcher {
 public:
  explicit Matcher(const LiteralIndex& idx) : idx_(idx) {}

  bool solve(std::span<const Literal> lits, Substitution& theta) const {
    // Independent variable-connected components are solved separately.
    std::vector<std::size_t> comp(lits.size());
    std::iota(comp.begin(), comp.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      while (comp[x] != x) x = comp[x] = comp[comp[x]];
      return x;
    };
    std::map<VarId, std::size_t> owner;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      std::vector<VarId> vs;
      theta.apply(lits[i]).collect_variables(vs);
      for (VarId v : vs) {
        auto [it, fresh] = owner.emplace(v, i);
        if (!fresh) {
          std::size_t a = find(i), b = find(it->second);
          if (a != b) comp[std::max(a, b)] = std::min(a, b);
        }
      }
    }
    std::map<std::size_t, std::vector<Literal>> groups;
    for (std::size_t i = 0; i < lits.size(); ++i) groups[find(i)].push_back(theta.apply(lits[i]));
    for (auto& [root, group] : groups) {
      Substitution local;
      if (!search(group, local)) return false;
      if (!local.empty()) theta = theta.compose(local);
    }
    return true;
  }

 private:
  static bool is_disequation(const Literal& l) { return !l.positive && l.is_equality(); }

  std::size_t cost(const Literal& l) const {
    if (l.is_ground()) return 0;
    if (is_disequation(l)) return 1;
    return 2 + idx_.candidates(l.negated()).size();
  }

  bool search(std::vector<Literal> todo, Substitution& theta) const {
    if (todo.empty()) return true;
    std::size_t best = 0;
    std::size_t best_cost = SIZE_MAX;
    for (std::size_t i = 0; i < todo.size(); ++i) {
      std::size_t c = cost(theta.apply(todo[i]));
      if (c < best_cost) {
        best_cost = c;
        best = i;
      }
    }
    Literal l = theta.apply(todo[best]);
    todo.erase(todo.begin() + static_cast<std::ptrdiff_t>(best));

    if (is_disequation(l)) {
      if (auto u = mgu(l.args[0], l.args[1])) {
        Substitution next = u->empty() ? theta : theta.compose(*u);
        if (search(todo, next)) {
          theta = std::move(next);
          return true;
        }
      }
    }
    Literal comp = l.negated();
    for (const Literal& g : idx_.candidates(comp)) {
      Substitution b;
      if (!match(comp, g, b)) continue;
      Substitution next = b.empty() ? theta : theta.compose(b);
      if (search(todo, next)) {
        theta = std::move(next);
        return true;
      }
    }
    return false;
  }

  const LiteralIndex& idx_;
};

// σ for condition (ii) on clause c, if one exists.
std::optional<Substitution> match_clause(const Clause& c, const Literal& goal,
                                         const Matcher& matcher) {
  Substitution sigma;
  std::vector<Literal> env;
  for (const Literal& l : c.literals()) {
    if (!l.mentions_permitted()) {
      env.push_back(l);
      continue;
    }
    if (l.positive != goal.positive) return std::nullopt;
    Substitution b;
    if (!match(sigma.apply(l), goal, b)) return std::nullopt;
    if (!b.empty()) sigma = sigma.compose(b);
  }
  if (!matcher.solve(env, sigma)) return std::nullopt;
  return sigma;
}

// Closure-clause provenance, the instance step, then unit resolutions.
Derivation lithium_witness(const ClosureResult& closure, std::size_t ci, const Substitution& sigma,
                           const Literal& goal, const LiteralIndex& idx) {
  Derivation d = extract_derivation(closure, ci);
  std::size_t cur = d.steps.size() - 1;
  if (!sigma.empty()) {
    DerivationStep s;
    s.kind = DerivationStep::Kind::instance;
    s.left = cur;
    s.unifier = sigma;
    s.clause = sigma.apply(d.steps[cur].clause);
    d.steps.push_back(std::move(s));
    cur = d.steps.size() - 1;
  }
  std::map<Clause, std::size_t> units;
  auto unit = [&](const Clause& u, const std::string& label) {
    auto it = units.find(u);
    if (it != units.end()) return it->second;
    d.steps.push_back(axiom_step(u, label));
    units.emplace(u, d.steps.size() - 1);
    return d.steps.size() - 1;
  };
  while (!d.steps[cur].clause.empty()) {
    const Clause current = d.steps[cur].clause;
    const Literal& l = current[0];
    std::size_t u;
    if (l.mentions_permitted() && l == goal) {
      u = unit(Clause({goal.negated()}), "goal");
    } else if (idx.contains(l.negated())) {
      u = unit(Clause({l.negated()}), "E0");
    } else if (!l.positive && l.is_equality() && mgu(l.args[0], l.args[1])) {
      u = unit(reflexivity_clause(l.args[0].sort()), "reflexivity");
    } else {
      throw std::logic_error("witness construction: literal has no complementary unit");
    }
    const Clause& uc = d.steps[u].clause;
    VarId off = rename_offset_for(current);
    Clause ru = rename_offset(uc, off);
    auto mu = mgu(current[0], ru[0]);
    if (!mu) throw std::logic_error("witness construction: pivot does not unify");
    DerivationStep s;
    s.kind = DerivationStep::Kind::resolve;
    s.left = cur;
    s.right = u;
    s.left_literal = 0;
    s.right_literal = 0;
    s.unifier = *mu;
    s.clause = resolvent_of(current, ru, 0, 0, *mu);
    d.steps.push_back(std::move(s));
    cur = d.steps.size() - 1;
  }
  return d;
}

ClosureResult inputs_only(std::span<const LabeledClause> clauses) {
  ClosureResult r;
  for (const LabeledClause& c : clauses) {
    Provenance p;
    p.label = c.label;
    r.clauses.push_back({c.clause, std::move(p)});
  }
  return r;
}

}  // namespace

// -------------------------------------------------------------- membership

MembershipReport membership(const Query& q, Execution exec) {
  MembershipReport m;
  m.equality = equality_safe(q);
  EqClasses eq = build_eq_classes(*q.base.signature, q.base.e0);
  m.clauses = base_clauses(q.base);
  std::vector<Clause> plain = plain_clauses(m.clauses);
  m.bipolar = bipolar_report(plain, &eq, exec);
  m.k.reserve(plain.size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    m.k.push_back(unconstrained_count(plain[i], &m.bipolar.flags[i]));
    if (unconstrained_per_literal(plain[i], &m.bipolar.flags[i]) > 1)
      m.one_variable_per_literal = false;
  }
  m.in_lithium = m.equality.safe && m.bipolar.max_count() <= 1;
  if (!m.in_lithium) {
    m.suggested = SuggestedPath::fallback;
  } else {
    bool all_constrained = std::ranges::all_of(m.k, [](std::size_t k) { return k == 0; });
    bool fast = q.base.e1.empty() && m.bipolar.empty() && !mentions_equality(q.base) &&
                all_constrained;
    m.suggested = fast ? SuggestedPath::fast : SuggestedPath::full;
  }
  return m;
}

// ------------------------------------------------------------------ answer

Verdict saturation_verdict(const Query& q, std::size_t fuel, Execution exec) {
  bool safe = equality_safe(q).safe;
  Query t = safe ? to_equation_free(q) : q;
  std::vector<LabeledClause> clauses;
  for (const Literal& l : t.base.e0) clauses.push_back({Clause({l}), "E0"});
  for (LabeledClause& c : base_clauses(t.base)) clauses.push_back(std::move(c));
  clauses.push_back({Clause({t.goal_literal().negated()}), "goal"});
  ClosureResult r = saturate(clauses, {fuel, exec});
  if (r.refutation) {
    Valid v;
    v.witness = extract_derivation(r, *r.refutation);
    v.fallback = true;
    v.transformed = safe;
    return v;
  }
  if (r.exhausted || r.truncated || !safe) return Unknown{r.generated};
  // A closed, equation-free saturation without the empty clause.
  return Invalid{true};
}

namespace {

Verdict decide(const Query& q, MembershipReport m, const AnswerOptions& opts) {
  Query t = to_equation_free(q);
  LiteralIndex idx(t.base.e0);

  if (auto clash = e0_clash(idx)) {
    Valid v;
    v.witness = std::move(*clash);
    v.vacuous = true;
    v.transformed = true;
    return v;
  }

  std::vector<LabeledClause> clauses = base_clauses(t.base);
  ClosureResult closure;
  if (m.bipolar.empty()) {
    closure = inputs_only(clauses);
  } else {
    try {
      closure = restricted_closure(clauses, opts.exec);
    } catch (const PreconditionViolated&) {
      if (opts.fallback) return saturation_verdict(q, opts.fuel, opts.exec);
      return NotInLithium{std::move(m)};
    }
  }

  const Literal goal = t.goal_literal();
  Matcher matcher(idx);
  const std::size_t n = closure.clauses.size();
  std::size_t hit = find_first_index(n, opts.exec, [&](std::size_t i) {
    return match_clause(closure.clauses[i].clause, goal, matcher).has_value();
  });
  if (hit == n) return Invalid{};
  Substitution sigma = *match_clause(closure.clauses[hit].clause, goal, matcher);
  Valid v;
  v.witness = lithium_witness(closure, hit, sigma, goal, idx);
  v.transformed = true;
  return v;
}

}  // namespace

std::optional<Query> separated_query(const Query& q) {
  const bool permit = q.goal == Decision::permit;
  Query sub = q;
  sub.base.policies.clear();
  std::size_t other = 0;
  for (const Policy& p : q.base.policies) {
    if (p.decision != q.goal) {
      ++other;
      continue;
    }
    // Pure: no Permitted literal of the opposite sign in the clause.
    Clause c = policy_to_clause(p);
    if (std::ranges::any_of(c.literals(), [&](const Literal& l) {
          return l.mentions_permitted() && l.positive != permit;
        }))
      return std::nullopt;
    sub.base.policies.push_back(p);
  }
  if (other == 0) return std::nullopt;
  SeparationReport s = check_separation(q.base);
  if (std::ranges::any_of(s.resolvents, [](const SeparationItem& it) {
        return it.status == SeparationItem::Status::missing;
      }))
    return std::nullopt;
  return sub;
}

Verdict answer(const Query& q, const AnswerOptions& opts) {
  MembershipReport m = membership(q, opts.exec);
  if (m.in_lithium) return decide(q, std::move(m), opts);
  if (auto sub = separated_query(q)) {
    MembershipReport sm = membership(*sub, opts.exec);
    if (sm.in_lithium) {
      Verdict v = decide(*sub, std::move(sm), opts);
      if (auto* valid = std::get_if<Valid>(&v)) valid->separated = true;
      if (auto* invalid = std::get_if<Invalid>(&v)) invalid->separated = true;
      if (std::holds_alternative<Valid>(v) || std::holds_alternative<Invalid>(v)) return v;
    }
  }
  if (opts.fallback) return saturation_verdict(q, opts.fuel, opts.exec);
  return NotInLithium{std::move(m)};
}

// -------------------------------------------------------------- separation

namespace {

// θ with e·θ = f as literal sets.
bool equal_instance(const Clause& e, const Clause& f) {
  if (e.size() < f.size()) return false;
  Substitution theta;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == e.size()) return theta.apply(e) == f;
    for (const Literal& target : f.literals()) {
      Substitution saved = theta;
      if (match(e[i], target, theta) && go(i + 1)) return true;
      theta = std::move(saved);
    }
    return false;
  };
  return go(0);
}

}  // namespace

SeparationReport check_separation(const PolicyBase& base) {
  SeparationReport r;
  std::vector<std::pair<const Policy*, Clause>> permits, denies;
  for (const Policy& p : base.policies)
    (p.decision == Decision::permit ? permits : denies).emplace_back(&p, policy_to_clause(p));

  for (const auto& [p, c] : permits)
    if (std::ranges::any_of(c.literals(), [](const Literal& l) {
          return l.mentions_permitted() && !l.positive;
        }))
      r.impure.push_back(p->label);

  std::vector<LabeledClause> e1;
  for (const EnvRule& e : base.e1) e1.push_back({rule_to_clause(e), e.label});
  std::vector<LabeledClause> conjuncts;
  for (const auto& [p, c] : permits) conjuncts.push_back({c, p->label});
  for (const auto& [d, c] : denies) conjuncts.push_back({c, d->label});
  LiteralIndex e0(base.e0);

  for (const auto& [p, pc] : permits) {
    for (const auto& [d, dc] : denies) {
      std::set<Clause> seen;
      for (Resolvent& res : resolve_renamed(pc, dc)) {
        if (!pc[res.left_literal].mentions_permitted()) continue;
        if (!seen.insert(canonical_variant(res.clause)).second) continue;
        SeparationItem item;
        item.permit_label = p->label;
        item.deny_label = d->label;
        item.resolvent = res.clause;
        const Clause& f = item.resolvent;
        using S = SeparationItem::Status;
        if (f.is_tautology()) {
          item.status = S::implied_by_environment;
          item.implied_by = "tautology";
        } else if (auto it = std::ranges::find_if(
                       f.literals(), [&](const Literal& l) { return l.is_ground() && e0.contains(l); });
                   it != f.literals().end()) {
          item.status = S::implied_by_environment;
          item.implied_by = "E0";
        } else if (auto e = std::ranges::find_if(
                       e1, [&](const LabeledClause& c) { return equal_instance(c.clause, f); });
                   e != e1.end()) {
          item.status = S::implied_by_environment;
          item.implied_by = e->label;
        } else if (auto q = std::ranges::find_if(
                       conjuncts, [&](const LabeledClause& c) { return equal_instance(c.clause, f); });
                   q != conjuncts.end()) {
          item.status = S::implied_by_conjunct;
          item.implied_by = q->label;
        } else {
          item.status = S::missing;
          r.satisfied = false;
        }
        r.resolvents.push_back(std::move(item));
      }
    }
  }
  if (!r.impure.empty()) r.satisfied = false;
  return r;
}

// ------------------------------------------------------------- consistency

ConsistencyReport::Status environment_status(const PolicyBase& base, std::size_t fuel,
                                             std::optional<Derivation>* witness) {
  using S = ConsistencyReport::Status;
  Query q;
  q.name = "environment";
  q.base = base;
  q.base.policies.clear();
  bool safe = equality_safe(q).safe;
  Query t = safe ? to_equation_free(q) : q;
  LiteralIndex idx(t.base.e0);
  if (auto clash = e0_clash(idx)) {
    if (witness) *witness = std::move(clash);
    return S::inconsistent;
  }
  // A clash-free set of ground literals without equations has a model.
  if (safe && t.base.e1.empty() && !has_positive_equation(t.base.e0)) return S::consistent;
  std::vector<LabeledClause> clauses;
  for (const Literal& l : t.base.e0) clauses.push_back({Clause({l}), "E0"});
  for (LabeledClause& c : base_clauses(t.base)) clauses.push_back(std::move(c));
  ClosureResult r = saturate(clauses, {fuel, Execution::parallel});
  if (r.refutation) {
    if (witness) *witness = extract_derivation(r, *r.refutation);
    return S::inconsistent;
  }
  if (r.exhausted || r.truncated || !safe) return S::unknown;
  return S::consistent;
}

ConsistencyReport check_consistency(const PolicyBase& base, const AnswerOptions& opts) {
  using S = ConsistencyReport::Status;
  ConsistencyReport r;
  r.separation = check_separation(base);
  if (r.separation.satisfied) {
    r.by_separation = true;
    r.status = environment_status(base, opts.fuel, &r.witness);
    r.detail = "separation holds; decided by the environment alone";
    return r;
  }

  auto sig = std::make_shared<Signature>(*base.signature);
  std::map<SortId, Term> fresh;
  std::vector<Term> args;
  for (SortId s : sig->symbol(kPermitted).arg_sorts) {
    auto it = fresh.find(s);
    if (it == fresh.end()) {
      std::string name = "%c_" + sig->sort_name(s);
      while (sig->find_symbol(name)) name += "'";
      SymbolId id = sig->add_constant(name, s);
      it = fresh.emplace(s, Term::apply(id, s)).first;
    }
    args.push_back(it->second);
  }
  PolicyBase b = base;
  b.signature = sig;
  Query permit{"consistency-permit", b, Decision::permit, args};
  Query deny{"consistency-deny", std::move(b), Decision::deny, args};
  r.permit = answer(permit, opts);
  r.deny = answer(deny, opts);
  bool pv = std::holds_alternative<Valid>(*r.permit);
  bool dv = std::holds_alternative<Valid>(*r.deny);
  if (pv && dv) {
    r.status = S::inconsistent;
    r.detail = "both permit and deny hold for fresh constants";
  } else if (std::holds_alternative<Invalid>(*r.permit) || std::holds_alternative<Invalid>(*r.deny)) {
    r.status = S::consistent;
    r.detail = "a fresh-constant query is invalid";
  } else {
    r.status = S::unknown;
    r.detail = "fresh-constant queries were not decided";
  }
  return r;
}

// --------------------------------------------------------------- unfolding

namespace {

VarId max_var(std::span<const Literal> ls, std::span<const Term> ts) {
  std::vector<VarId> vs;
  for (const Literal& l : ls) l.collect_variables(vs);
  for (const Term& t : ts) t.collect_variables(vs);
  return vs.empty() ? 0 : *std::ranges::max_element(vs) + 1;
}

void collect_sorted_vars(const Term& t, std::map<VarId, SortId>& out) {
  if (t.is_variable()) {
    out.emplace(t.var(), t.sort());
    return;
  }
  for (const Term& a : t.args()) collect_sorted_vars(a, out);
}

// Body of definition `def` instantiated for head arguments `args`, with its
// other variables shifted past `offset`.
std::vector<Literal> instantiate_body(const EnvRule& def, std::span<const Term> args, VarId offset) {
  std::map<VarId, SortId> vars;
  for (const Literal& l : def.antecedent)
    for (const Term& t : l.args) collect_sorted_vars(t, vars);
  Substitution s;
  for (const auto& [v, sort] : vars) s.bind(v, Term::variable(v + offset, sort));
  for (std::size_t i = 0; i < args.size(); ++i) s.bind(def.conclusion.args[i].var(), args[i]);
  std::vector<Literal> out;
  for (const Literal& l : def.antecedent) out.push_back(s.apply(l));
  return out;
}

bool body_can_hold(const EnvRule& def, const LiteralIndex& e0,
                   const std::set<std::pair<SymbolId, bool>>& derivable) {
  std::vector<Literal> need;
  for (const Literal& l : def.antecedent)
    if (!l.is_equality() && !derivable.contains({l.predicate, l.positive})) need.push_back(l);
  Substitution theta;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == need.size()) return true;
    Literal l = theta.apply(need[i]);
    for (const Literal& g : e0.candidates(l)) {
      Substitution b;
      if (!match(l, g, b)) continue;
      Substitution saved = theta;
      if (!b.empty()) theta = theta.compose(b);
      if (go(i + 1)) return true;
      theta = std::move(saved);
    }
    return false;
  };
  return go(0);
}

}  // namespace

PolicyBase unfold_definitions(const PolicyBase& base, const std::set<std::string>& predicates,
                              const UnfoldOptions& opts) {
  const Signature& sig = *base.signature;
  std::set<SymbolId> defined;
  for (const std::string& name : predicates) {
    auto id = sig.find_symbol(name);
    if (!id || sig.symbol(*id).kind != SymbolKind::predicate || *id == kPermitted)
      throw NotADefinition("'" + name + "' is not a user predicate");
    defined.insert(*id);
  }
  if (defined.empty()) return base;

  std::map<SymbolId, std::vector<std::size_t>> defs;
  std::vector<char> is_def(base.e1.size(), 0);
  for (std::size_t i = 0; i < base.e1.size(); ++i) {
    const EnvRule& r = base.e1[i];
    const Literal& head = r.conclusion;
    bool defines = defined.contains(head.predicate);
    if (defines) {
      if (!head.positive)
        throw NotADefinition("rule '" + r.label + "' concludes a negated " +
                             sig.symbol(head.predicate).name);
      std::set<VarId> seen;
      for (const Term& t : head.args)
        if (!t.is_variable() || !seen.insert(t.var()).second)
          throw NotADefinition("rule '" + r.label + "': head arguments must be distinct variables");
      defs[head.predicate].push_back(i);
      is_def[i] = 1;
    }
    for (const Literal& l : r.antecedent) {
      if (!defined.contains(l.predicate)) continue;
      if (!defines || !l.positive)
        throw NotADefinition("rule '" + r.label + "' uses " + sig.symbol(l.predicate).name +
                             " outside a definition");
    }
  }
  for (const Literal& l : base.e0)
    if (defined.contains(l.predicate))
      throw NotADefinition(sig.symbol(l.predicate).name + " has ground facts in the environment");
  for (SymbolId p : defined)
    if (!defs.contains(p)) throw NotADefinition(sig.symbol(p).name + " has no defining rule");
  for (const Policy& p : base.policies)
    for (const Literal& l : p.antecedent)
      if (defined.contains(l.predicate) && !l.positive)
        throw NotADefinition("policy '" + p.label + "' uses " + sig.symbol(l.predicate).name +
                             " negatively");

  // Cycles among definitions.
  std::map<SymbolId, int> state;
  std::function<void(SymbolId)> visit = [&](SymbolId p) {
    if (state[p] == 2) return;
    if (state[p] == 1) throw NotADefinition(sig.symbol(p).name + " is defined cyclically");
    state[p] = 1;
    for (std::size_t i : defs[p])
      for (const Literal& l : base.e1[i].antecedent)
        if (defined.contains(l.predicate)) visit(l.predicate);
    state[p] = 2;
  };
  for (SymbolId p : defined) visit(p);

  if (opts.prune) {
    LiteralIndex e0(base.e0);
    std::set<std::pair<SymbolId, bool>> derivable;
    for (std::size_t i = 0; i < base.e1.size(); ++i)
      if (!is_def[i]) derivable.insert({base.e1[i].conclusion.predicate, base.e1[i].conclusion.positive});
    for (SymbolId p : defined) derivable.insert({p, true});
    for (auto& [p, list] : defs)
      std::erase_if(list, [&](std::size_t i) { return !body_can_hold(base.e1[i], e0, derivable); });
  }

  PolicyBase out = base;
  out.e1.clear();
  for (std::size_t i = 0; i < base.e1.size(); ++i)
    if (!is_def[i]) out.e1.push_back(base.e1[i]);

  std::set<std::string> labels;
  for (const EnvRule& r : out.e1) labels.insert(r.label);
  for (const Policy& p : base.policies) labels.insert(p.label);

  out.policies.clear();
  for (const Policy& p : base.policies) {
    bool uses = std::ranges::any_of(p.antecedent, [&](const Literal& l) { return defined.contains(l.predicate); });
    if (!uses) {
      out.policies.push_back(p);
      continue;
    }
    std::vector<std::vector<Literal>> work{p.antecedent};
    std::vector<std::vector<Literal>> done;
    while (!work.empty()) {
      std::vector<Literal> ante = std::move(work.front());
      work.erase(work.begin());
      auto it = std::ranges::find_if(ante, [&](const Literal& l) { return defined.contains(l.predicate); });
      if (it == ante.end()) {
        done.push_back(std::move(ante));
        continue;
      }
      std::size_t pos = static_cast<std::size_t>(it - ante.begin());
      Literal use = *it;
      VarId offset = max_var(ante, p.target);
      for (std::size_t d : defs[use.predicate]) {
        std::vector<Literal> next(ante.begin(), ante.begin() + static_cast<std::ptrdiff_t>(pos));
        for (Literal& l : instantiate_body(base.e1[d], use.args, offset)) next.push_back(std::move(l));
        next.insert(next.end(), ante.begin() + static_cast<std::ptrdiff_t>(pos) + 1, ante.end());
        work.push_back(std::move(next));
      }
    }
    for (std::size_t k = 0; k < done.size(); ++k) {
      Policy np = p;
      np.antecedent = std::move(done[k]);
      std::string label = p.label + "_" + std::to_string(k + 1);
      while (labels.contains(label)) label += "_";
      labels.insert(label);
      np.label = label;
      out.policies.push_back(std::move(np));
    }
  }
  return out;
}

}  // namespace lithium
