// Random .lith documents for property tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lithium/parser.hpp"

namespace lithium::gen {

struct Params {
  int max_constants = 3;  // per sort
  int max_predicates = 4;
  int max_arity = 2;
  int max_policies = 4;
  int max_e0 = 6;
  int max_rules = 0;           // E1 clauses
  int max_antecedent = 3;
  double deny = 0.3;           // chance a policy denies
  double negative = 0.3;       // chance an antecedent literal is negated
  double permitted_in_body = 0.0;  // chance an antecedent literal is Permitted(...)
  double equation = 0.0;       // chance an E0 literal is a constant equation
  double body_equation = 0.0;  // chance an antecedent literal is an (in)equation
  bool functions = false;      // unary f : Subjects -> Subjects
  bool deny_goal = true;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  int below(int n) { return n <= 0 ? 0 : std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  int upto(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  // One document with a single query named `q`.
  std::string document(const Params& p) {
    p_ = p;
    std::ostringstream out;
    nconst_[0] = upto(1, p.max_constants);
    nconst_[1] = upto(1, p.max_constants);
    out << "const";
    for (int i = 0; i < nconst_[0]; ++i) out << (i ? ", " : " ") << "s" << i;
    out << " : Subjects;\nconst";
    for (int i = 0; i < nconst_[1]; ++i) out << (i ? ", " : " ") << "a" << i;
    out << " : Actions;\n";
    if (p.functions) out << "func f(Subjects) : Subjects;\n";
    preds_.clear();
    int np = upto(1, p.max_predicates);
    for (int i = 0; i < np; ++i) {
      std::vector<int> sorts;
      int ar = upto(0, p.max_arity);
      for (int k = 0; k < ar; ++k) sorts.push_back(chance(0.7) ? 0 : 1);
      preds_.push_back(sorts);
      out << "pred R" << i;
      if (!sorts.empty()) {
        out << "(";
        for (std::size_t k = 0; k < sorts.size(); ++k) out << (k ? ", " : "") << kSort[sorts[k]];
        out << ")";
      }
      out << ";\n";
    }
    int ne = upto(0, p.max_e0);
    for (int i = 0; i < ne; ++i) {
      if (chance(p.equation)) {
        int s = chance(0.7) ? 0 : 1;
        out << "env " << ground(s) << (chance(0.8) ? " = " : " != ") << ground(s) << ";\n";
      } else {
        out << "env " << (chance(p.negative) ? "!" : "") << atom(nullptr) << ";\n";
      }
    }
    int nr = upto(0, p.max_rules);
    for (int i = 0; i < nr; ++i) {
      Vars v;
      std::string body = conjunction(v, false);
      std::string head = (chance(p.negative) ? "!" : "") + atom(&v);
      out << "env e" << i << ": " << v.prefix() << body << " => " << head << ";\n";
    }
    int npol = upto(1, p.max_policies);
    for (int i = 0; i < npol; ++i) {
      Vars v;
      std::string body = conjunction(v, true);
      std::string target = "(" + term(0, &v) + ", " + term(1, &v) + ")";
      out << "policy p" << i << ": " << v.prefix() << body << " => "
          << (chance(p.deny) ? "deny" : "permit") << target << ";\n";
    }
    out << "query q: " << (p.deny_goal && chance(p.deny) ? "deny" : "permit") << "(" << ground(0)
        << ", " << ground(1) << ");\n";
    return out.str();
  }

  Query query(const Params& p) { return parse_document(document(p)).queries.at(0); }

 private:
  static constexpr const char* kSort[2] = {"Subjects", "Actions"};

  struct Vars {
    int used[2] = {0, 0};
    std::string prefix() const {
      std::string s;
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < used[k]; ++i)
          s += (s.empty() ? "forall " : ", ") + std::string(k ? "y" : "x") + std::to_string(i) +
               ":" + kSort[k];
      return s.empty() ? s : s + ". ";
    }
  };

  std::string ground(int sort) {
    std::string c = (sort ? "a" : "s") + std::to_string(below(nconst_[sort]));
    if (sort == 0 && p_.functions && chance(0.2)) return "f(" + c + ")";
    return c;
  }

  // At most three variables per sort and clause.
  std::string term(int sort, Vars* v) {
    if (!v || chance(0.35)) return ground(sort);
    int i = below(std::min(v->used[sort] + 1, 3));
    if (i == v->used[sort]) ++v->used[sort];
    std::string x = (sort ? "y" : "x") + std::to_string(i);
    if (sort == 0 && p_.functions && chance(0.2)) return "f(" + x + ")";
    return x;
  }

  std::string atom(Vars* v) {
    int k = below(static_cast<int>(preds_.size()));
    std::string s = "R" + std::to_string(k);
    if (preds_[k].empty()) return s;
    s += "(";
    for (std::size_t i = 0; i < preds_[k].size(); ++i) s += (i ? ", " : "") + term(preds_[k][i], v);
    return s + ")";
  }

  std::string conjunction(Vars& v, bool policy) {
    int n = upto(policy ? 0 : 1, p_.max_antecedent);
    if (n == 0) return "true";
    std::string s;
    for (int i = 0; i < n; ++i) {
      if (i) s += " & ";
      if (policy && chance(p_.permitted_in_body)) {
        s += std::string(chance(p_.negative) ? "!" : "") + "Permitted(" + term(0, &v) + ", " +
             term(1, &v) + ")";
      } else if (chance(p_.body_equation)) {
        int sort = chance(0.7) ? 0 : 1;
        s += term(sort, &v) + (chance(0.5) ? " = " : " != ") + term(sort, &v);
      } else {
        s += (chance(p_.negative) ? "!" : "") + atom(&v);
      }
    }
    return s;
  }

  std::mt19937_64 rng_;
  Params p_;
  int nconst_[2] = {1, 1};
  std::vector<std::vector<int>> preds_;
};

// Lithium query over `facts` ground literals and `policies` policies. Policy
// j reads R_j(x) & S(x) => permit(x, a_j); every third one is paired with a
// complementary Q_j policy so the closure has work to do.
inline Query scaled_query(std::size_t facts, std::size_t policies) {
  auto sig = std::make_shared<Signature>();
  const std::size_t subjects = std::max<std::size_t>(facts / 4, 1);
  std::vector<Term> s, a;
  for (std::size_t i = 0; i < subjects; ++i)
    s.push_back(Term::make(*sig, sig->add_constant("s" + std::to_string(i), kSubjects)));
  for (std::size_t j = 0; j < policies; ++j)
    a.push_back(Term::make(*sig, sig->add_constant("a" + std::to_string(j), kActions)));
  std::vector<SymbolId> r, qs;
  for (std::size_t j = 0; j < policies; ++j) {
    r.push_back(sig->add_predicate("R" + std::to_string(j), {kSubjects}));
    qs.push_back(sig->add_predicate("Q" + std::to_string(j), {kSubjects}));
  }
  SymbolId sp = sig->add_predicate("S", {kSubjects});
  Query q;
  q.name = "scaled";
  for (std::size_t i = 0; q.base.e0.size() < facts; ++i) {
    const Term& t = s[i % subjects];
    std::size_t k = i / subjects;
    if (k == 0)
      q.base.e0.push_back(Literal{true, sp, {t}});
    else
      q.base.e0.push_back(Literal{(i % 5) != 0, r[(k - 1 + i) % policies], {t}});
  }
  Term x = Term::variable(0, kSubjects);
  for (std::size_t j = 0; j < policies; ++j) {
    Policy p;
    p.label = "p" + std::to_string(j);
    p.antecedent = {Literal{true, r[j], {x}}, Literal{true, sp, {x}}};
    p.target = {x, a[j]};
    q.base.policies.push_back(p);
    if (j % 3 == 0) {
      Policy a1 = p, a2 = p;
      a1.label += "q";
      a1.antecedent = {Literal{true, qs[j], {x}}};
      a2.label += "nq";
      a2.antecedent = {Literal{false, qs[j], {x}}, Literal{true, sp, {x}}};
      q.base.policies.push_back(a1);
      q.base.policies.push_back(a2);
    }
  }
  q.base.signature = sig;
  q.goal_args = {s[subjects - 1], a[policies - 1]};
  return q;
}

}  // namespace lithium::gen
