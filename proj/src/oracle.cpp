#include "lithium/oracle.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace lithium {

namespace {

using Disjunction = std::vector<Literal>;
using Env = std::map<VarId, std::size_t>;

Disjunction rule_form(std::span<const Literal> antecedent, const Literal& conclusion) {
  Disjunction d;
  for (const Literal& l : antecedent) d.push_back(l.negated());
  d.push_back(conclusion);
  return d;
}

void add_environment(const PolicyBase& b, std::vector<Disjunction>& out) {
  for (const Literal& l : b.e0) out.push_back({l});
  for (const EnvRule& r : b.e1) out.push_back(rule_form(r.antecedent, r.conclusion));
}

void add_policies(const PolicyBase& b, std::vector<Disjunction>& out) {
  for (const Policy& p : b.policies) out.push_back(rule_form(p.antecedent, p.conclusion()));
}

void scan_term(const Term& t, std::map<VarId, SortId>& vars, std::set<SymbolId>& constants) {
  if (t.is_variable()) {
    vars.emplace(t.var(), t.sort());
  } else if (t.is_constant()) {
    constants.insert(t.symbol());
  } else {
    throw FunctionSymbolsPresent("finite-model oracle: function symbols are not supported");
  }
}

std::size_t eval(const Term& t, const FiniteModel& m, const Env& env) {
  if (t.is_variable()) return env.at(t.var());
  if (!t.is_constant()) throw FunctionSymbolsPresent("finite-model oracle: function term");
  return m.constants.at(t.symbol());
}

// Calls fn(env) for every assignment of `vars` into the model's domains;
// stops early when fn returns false. Returns false iff stopped.
bool for_each_assignment(const std::map<VarId, SortId>& vars, const std::vector<std::size_t>& sizes,
                         const std::function<bool(const Env&)>& fn) {
  std::vector<std::pair<VarId, SortId>> vs(vars.begin(), vars.end());
  Env env;
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == vs.size()) return fn(env);
    for (std::size_t e = 0; e < sizes[vs[i].second]; ++e) {
      env[vs[i].first] = e;
      if (!go(i + 1)) return false;
    }
    return true;
  };
  return go(0);
}

bool satisfies(const FiniteModel& m, std::span<const Disjunction> forms) {
  for (const Disjunction& d : forms) {
    std::map<VarId, SortId> vars;
    std::set<SymbolId> consts;
    for (const Literal& l : d)
      for (const Term& t : l.args) scan_term(t, vars, consts);
    bool ok = for_each_assignment(vars, m.domain_size, [&](const Env& env) {
      return std::ranges::any_of(d, [&](const Literal& l) { return holds(m, l, env); });
    });
    if (!ok) return false;
  }
  return true;
}

// Restricted growth strings of length n: all partitions of n items.
std::vector<std::vector<std::size_t>> partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> a(n, 0);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t blocks) {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (std::size_t b = 0; b <= blocks && (i > 0 || b == 0); ++b) {
      a[i] = b;
      go(i + 1, std::max(blocks, b + 1));
    }
  };
  go(0, 0);
  return out;
}

// Small DPLL over atoms 1..n; literals are ±atom.
class Dpll {
 public:
  Dpll(std::size_t atoms, std::vector<std::vector<int>> clauses)
      : n_(atoms), clauses_(std::move(clauses)) {}

  std::optional<std::vector<signed char>> solve() {
    std::vector<signed char> a(n_ + 1, 0);
    if (!search(a)) return std::nullopt;
    return a;
  }

 private:
  static int value(const std::vector<signed char>& a, int lit) {
    int v = a[static_cast<std::size_t>(std::abs(lit))];
    return lit > 0 ? v : -v;
  }

  bool propagate(std::vector<signed char>& a) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& c : clauses_) {
        int open = 0, last = 0;
        bool sat = false;
        for (int l : c) {
          int v = value(a, l);
          if (v > 0) {
            sat = true;
            break;
          }
          if (v == 0) {
            ++open;
            last = l;
          }
        }
        if (sat) continue;
        if (open == 0) return false;
        if (open == 1) {
          a[static_cast<std::size_t>(std::abs(last))] = last > 0 ? 1 : -1;
          changed = true;
        }
      }
    }
    return true;
  }

  bool search(std::vector<signed char>& a) const {
    if (!propagate(a)) return false;
    int pick = 0;
    for (const auto& c : clauses_) {
      if (std::ranges::any_of(c, [&](int l) { return value(a, l) > 0; })) continue;
      for (int l : c)
        if (value(a, l) == 0) {
          pick = std::abs(l);
          break;
        }
      if (pick) break;
    }
    if (!pick) return true;
    for (signed char v : {-1, 1}) {
      std::vector<signed char> b = a;
      b[static_cast<std::size_t>(pick)] = v;
      if (search(b)) {
        a = std::move(b);
        return true;
      }
    }
    return false;
  }

  std::size_t n_;
  std::vector<std::vector<int>> clauses_;
};

class ModelSearch {
 public:
  ModelSearch(const Signature& sig, std::vector<Disjunction> forms, const OracleLimits& limits)
      : sig_(sig), forms_(std::move(forms)) {
    std::set<SymbolId> consts;
    std::set<SymbolId> preds;
    for (const Disjunction& d : forms_) {
      std::map<VarId, SortId> vars;
      for (const Literal& l : d) {
        for (const Term& t : l.args) scan_term(t, vars, consts);
        if (!l.is_equality()) preds.insert(l.predicate);
      }
      vars_.push_back(std::move(vars));
    }
    if (preds.size() > limits.max_predicates)
      throw OracleRefused("finite-model oracle: " + std::to_string(preds.size()) +
                          " predicates exceed the limit of " + std::to_string(limits.max_predicates));
    for (SymbolId p : preds)
      if (sig.symbol(p).arg_sorts.size() > limits.max_arity)
        throw OracleRefused("finite-model oracle: " + sig.symbol(p).name + " has arity above " +
                            std::to_string(limits.max_arity));
    by_sort_.resize(sig.sort_count());
    for (SymbolId c : consts) by_sort_[*sig.symbol(c).result_sort].push_back(c);
    for (std::size_t s = 0; s < by_sort_.size(); ++s) {
      if (by_sort_[s].size() > limits.max_constants_per_sort)
        throw OracleRefused("finite-model oracle: sort " + sig.sort_name(static_cast<SortId>(s)) +
                            " has more than " + std::to_string(limits.max_constants_per_sort) +
                            " constants");
      parts_.push_back(partitions(by_sort_[s].size()));
    }
    total_ = 1;
    for (const auto& p : parts_) total_ *= p.size();
  }

  std::size_t total() const { return total_; }

  std::optional<FiniteModel> model_at(std::size_t index) const {
    FiniteModel m;
    m.domain_size.assign(parts_.size(), 1);
    // The last sort varies fastest.
    for (std::size_t s = parts_.size(); s-- > 0;) {
      const auto& rgs = parts_[s][index % parts_[s].size()];
      index /= parts_[s].size();
      std::size_t blocks = 0;
      for (std::size_t i = 0; i < rgs.size(); ++i) {
        m.constants[by_sort_[s][i]] = rgs[i];
        blocks = std::max(blocks, rgs[i] + 1);
      }
      m.domain_size[s] = std::max<std::size_t>(blocks, 1);
    }

    std::map<std::pair<SymbolId, std::vector<std::size_t>>, int> atoms;
    std::vector<std::pair<SymbolId, std::vector<std::size_t>>> atom_list;
    std::vector<std::vector<int>> clauses;
    bool unsat = false;
    for (std::size_t k = 0; k < forms_.size() && !unsat; ++k) {
      const Disjunction& d = forms_[k];
      for_each_assignment(vars_[k], m.domain_size, [&](const Env& env) {
        std::vector<int> c;
        for (const Literal& l : d) {
          std::vector<std::size_t> tuple;
          for (const Term& t : l.args) tuple.push_back(eval(t, m, env));
          if (l.is_equality()) {
            if ((tuple[0] == tuple[1]) == l.positive) return true;  // clause satisfied
            continue;
          }
          auto key = std::make_pair(l.predicate, std::move(tuple));
          auto [it, fresh] = atoms.emplace(key, static_cast<int>(atom_list.size()) + 1);
          if (fresh) atom_list.push_back(std::move(key));
          c.push_back(l.positive ? it->second : -it->second);
        }
        if (c.empty()) {
          unsat = true;
          return false;
        }
        clauses.push_back(std::move(c));
        return true;
      });
    }
    if (unsat) return std::nullopt;
    auto assignment = Dpll(atom_list.size(), std::move(clauses)).solve();
    if (!assignment) return std::nullopt;
    for (std::size_t i = 0; i < atom_list.size(); ++i)
      if ((*assignment)[i + 1] > 0) m.relations[atom_list[i].first].insert(atom_list[i].second);
    return m;
  }

  // Lowest model in enumeration order; `checked` is the number of
  // identifications examined up to and including it.
  std::optional<FiniteModel> first_model(Execution exec, std::size_t& checked) const {
    std::size_t hit = find_first_index(total_, exec, [&](std::size_t i) { return model_at(i).has_value(); });
    checked = hit == total_ ? total_ : hit + 1;
    if (hit == total_) return std::nullopt;
    return model_at(hit);
  }

  std::span<const Disjunction> forms() const { return forms_; }

 private:
  const Signature& sig_;
  std::vector<Disjunction> forms_;
  std::vector<std::map<VarId, SortId>> vars_;
  std::vector<std::vector<SymbolId>> by_sort_;
  std::vector<std::vector<std::vector<std::size_t>>> parts_;
  std::size_t total_ = 1;
};

}  // namespace

bool holds(const FiniteModel& m, const Literal& l, const Env& env) {
  std::vector<std::size_t> tuple;
  for (const Term& t : l.args) tuple.push_back(eval(t, m, env));
  bool atom;
  if (l.is_equality()) {
    atom = tuple[0] == tuple[1];
  } else {
    auto it = m.relations.find(l.predicate);
    atom = it != m.relations.end() && it->second.contains(tuple);
  }
  return atom == l.positive;
}

bool satisfies_environment(const FiniteModel& m, const PolicyBase& b) {
  std::vector<Disjunction> forms;
  add_environment(b, forms);
  return satisfies(m, forms);
}

bool satisfies_base(const FiniteModel& m, const PolicyBase& b) {
  std::vector<Disjunction> forms;
  add_environment(b, forms);
  add_policies(b, forms);
  return satisfies(m, forms);
}

std::string to_table(const FiniteModel& m, const Signature& sig) {
  std::ostringstream os;
  for (std::size_t s = 0; s < m.domain_size.size(); ++s) {
    os << sig.sort_name(static_cast<SortId>(s)) << ": " << m.domain_size[s] << " element"
       << (m.domain_size[s] == 1 ? "" : "s");
    bool first = true;
    for (const auto& [c, e] : m.constants) {
      if (*sig.symbol(c).result_sort != s) continue;
      os << (first ? "  " : ", ") << sig.symbol(c).name << "=" << e;
      first = false;
    }
    os << "\n";
  }
  for (const auto& [p, tuples] : m.relations) {
    os << sig.symbol(p).name << ":";
    for (const auto& t : tuples) {
      os << " (";
      for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
      os << ")";
    }
    os << "\n";
  }
  return os.str();
}

OracleVerdict finite_model_valid(const Query& q, const OracleLimits& limits, Execution exec) {
  std::vector<Disjunction> forms;
  add_environment(q.base, forms);
  add_policies(q.base, forms);
  forms.push_back({q.goal_literal().negated()});
  ModelSearch search(*q.base.signature, std::move(forms), limits);
  OracleVerdict v;
  v.countermodel = search.first_model(exec, v.models_checked);
  v.valid = !v.countermodel.has_value();
  if (v.countermodel && (!satisfies_base(*v.countermodel, q.base) ||
                         holds(*v.countermodel, q.goal_literal(), {})))
    throw std::logic_error("finite-model oracle: countermodel does not evaluate as one");
  return v;
}

std::optional<FiniteModel> environment_model(const PolicyBase& b, const OracleLimits& limits,
                                             Execution exec) {
  std::vector<Disjunction> forms;
  add_environment(b, forms);
  ModelSearch search(*b.signature, std::move(forms), limits);
  std::size_t checked = 0;
  auto m = search.first_model(exec, checked);
  if (m && !satisfies_environment(*m, b))
    throw std::logic_error("finite-model oracle: model does not satisfy the environment");
  return m;
}

SaturationOutcome ground_saturation_valid(const Query& q, std::size_t fuel, Execution exec) {
  SaturationOutcome out;
  out.transformed = equality_safe(q).safe;
  Query t = out.transformed ? to_equation_free(q) : q;
  std::vector<LabeledClause> clauses;
  for (const Literal& l : t.base.e0) clauses.push_back({Clause({l}), "E0"});
  for (const EnvRule& r : t.base.e1) clauses.push_back({rule_to_clause(r), r.label});
  for (const Policy& p : t.base.policies) clauses.push_back({policy_to_clause(p), p.label});
  clauses.push_back({Clause({t.goal_literal().negated()}), "goal"});
  ClosureResult r = saturate(clauses, {fuel, exec});
  out.generated = r.generated;
  if (r.refutation) {
    out.valid = true;
    out.witness = extract_derivation(r, *r.refutation);
  }
  return out;
}

CheckResult check_derivation(const Derivation& d, std::span<const Clause> axioms,
                             std::size_t sort_count) {
  std::set<Clause> allowed;
  for (const Clause& c : axioms) allowed.insert(canonical_variant(c));
  for (std::size_t s = 0; s < sort_count; ++s)
    allowed.insert(canonical_variant(reflexivity_clause(static_cast<SortId>(s))));

  auto fail = [](std::size_t i, std::string why) { return CheckResult{false, i, std::move(why)}; };
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const DerivationStep& s = d.steps[i];
    switch (s.kind) {
      case DerivationStep::Kind::axiom:
        if (!allowed.contains(canonical_variant(s.clause))) return fail(i, "axiom is not part of the query");
        break;
      case DerivationStep::Kind::instance: {
        if (s.left >= i) return fail(i, "instance refers forward");
        if (apply_substitution(d.steps[s.left].clause, s.unifier) != s.clause)
          return fail(i, "instance does not match its parent");
        break;
      }
      case DerivationStep::Kind::resolve: {
        if (s.left >= i || s.right >= i) return fail(i, "resolution refers forward");
        const Clause& left = d.steps[s.left].clause;
        Clause right = rename_offset(d.steps[s.right].clause, rename_offset_for(left));
        if (s.left_literal >= left.size() || s.right_literal >= right.size())
          return fail(i, "pivot index out of range");
        Literal a = s.unifier.apply(left[s.left_literal]);
        Literal b = s.unifier.apply(right[s.right_literal]);
        if (a.positive == b.positive || !a.same_atom(b)) return fail(i, "pivots are not complementary");
        if (resolvent_of(left, right, s.left_literal, s.right_literal, s.unifier) != s.clause)
          return fail(i, "resolvent does not match");
        break;
      }
    }
  }
  if (!d.refutes()) return fail(d.steps.size(), "derivation does not end in the empty clause");
  return {true, d.steps.size(), ""};
}

CheckResult check_witness(const Query& q, const Valid& v) {
  // A transformed witness lives in the representative-rewritten query. The
  // rewrite is applied clause by clause, so a witness that only uses some
  // policies (a separated query) is checked against every policy of q.
  std::vector<Clause> axioms;
  if (v.transformed) {
    EqClasses eq = build_eq_classes(*q.base.signature, q.base.e0);
    for (const Literal& l : q.base.e0)
      if (!(l.is_equality() && l.positive))
        axioms.push_back(eq.rewrite(Clause({l})));
    for (const EnvRule& r : q.base.e1) axioms.push_back(eq.rewrite(rule_to_clause(r)));
    for (const Policy& p : q.base.policies) axioms.push_back(eq.rewrite(policy_to_clause(p)));
    axioms.push_back(eq.rewrite(Clause({q.goal_literal().negated()})));
  } else {
    for (const Literal& l : q.base.e0) axioms.push_back(Clause({l}));
    for (const EnvRule& r : q.base.e1) axioms.push_back(rule_to_clause(r));
    for (const Policy& p : q.base.policies) axioms.push_back(policy_to_clause(p));
    axioms.push_back(Clause({q.goal_literal().negated()}));
  }
  return check_derivation(v.witness, axioms, q.base.signature->sort_count());
}

}  // namespace lithium
