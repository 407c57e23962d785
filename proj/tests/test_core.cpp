#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "lithium/core.hpp"
#include "lithium/oracle.hpp"
#include "util.hpp"

using namespace lithium;
using namespace lithium::test;

namespace {

const char* kLibrary = R"(
const Alice, Bob : Subjects;
const editCat, sing : Actions;
pred Librarian(Subjects);
policy only: forall x:Subjects. !Librarian(x) => deny(x, editCat);
policy sing: forall x:Subjects. permit(x, sing);
)";

}  // namespace

TEST(Core, BuiltinsExist) {
  Signature sig;
  EXPECT_EQ(sig.sort_name(kSubjects), "Subjects");
  EXPECT_EQ(sig.sort_name(kActions), "Actions");
  EXPECT_EQ(sig.sort_name(kTimes), "Times");
  EXPECT_EQ(sig.symbol(kPermitted).arg_sorts, (std::vector<SortId>{kSubjects, kActions}));
  EXPECT_EQ(sig.symbol(kNow).result_sort, kTimes);
  EXPECT_THROW(sig.add_sort("Subjects"), SortError);
  sig.add_constant("a", kSubjects);
  EXPECT_THROW(sig.add_constant("a", kActions), SortError);
}

TEST(Core, TermSortsChecked) {
  Signature sig;
  SymbolId a = sig.add_constant("a", kSubjects);
  SymbolId f = sig.add_function("f", {kSubjects}, kActions);
  Term ta = Term::make(sig, a);
  EXPECT_EQ(Term::make(sig, f, {ta}).sort(), kActions);
  EXPECT_THROW(Term::make(sig, f, {Term::make(sig, f, {ta})}), SortError);
  EXPECT_THROW(Term::make(sig, f), SortError);
  EXPECT_THROW(Literal::make(sig, true, kEquality, {ta, Term::make(sig, f, {ta})}), SortError);
}

TEST(Core, PolicyToClauseNegatedAntecedent) {
  Document d = parse_document(kLibrary);
  EXPECT_EQ(show(d, policy_clause(d, "only")), "{!Permitted(x0, editCat), Librarian(x0)}");
}

TEST(Core, PolicyToClauseEmptyAntecedent) {
  Document d = parse_document(kLibrary);
  EXPECT_EQ(show(d, policy_clause(d, "sing")), "{Permitted(x0, sing)}");
}

TEST(Core, PolicyToClauseGround) {
  Document d = load("ex4_3.lith");
  EXPECT_EQ(show(d, policy_clause(d, "p1")), "{Permitted(Alice, cry), !Happy(Alice)}");
}

TEST(Core, PolicyToClauseMergesDuplicates) {
  Document d = parse_document(R"(
const a : Subjects; const b : Actions; pred R(Subjects);
policy p: R(a) & R(a) => permit(a, b);
)");
  EXPECT_EQ(policy_clause(d, "p").size(), 2u);
}

TEST(Core, ApplySubstitutionIntoFunctionTerm) {
  Document d = parse_document(R"(
const nap : Actions;
func Advisor(Subjects) : Subjects;
policy p: forall x:Subjects. Permitted(x, nap) => permit(x, nap);
)");
  const Signature& sig = *d.base.signature;
  Clause c({Literal{false, kPermitted, {Term::variable(0, kSubjects), constant(d, "nap")}}});
  Substitution s;
  s.bind(0, Term::make(sig, *sig.find_symbol("Advisor"), {Term::variable(1, kSubjects)}));
  EXPECT_EQ(show(d, apply_substitution(c, s)), "{!Permitted(Advisor(x1), nap)}");
  EXPECT_EQ(apply_substitution(c, Substitution{}), c);
}

TEST(Core, ApplySubstitutionMergesDuplicates) {
  Document d = parse_document("const c : Subjects; pred R(Subjects);");
  const Signature& sig = *d.base.signature;
  SymbolId r = *sig.find_symbol("R");
  Term c = constant(d, "c");
  Clause cl({Literal{true, r, {Term::variable(0, kSubjects)}}, Literal{true, r, {c}}});
  Substitution s;
  s.bind(0, c);
  Clause out = apply_substitution(cl, s);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(show(d, out), "{R(c)}");
}

TEST(Core, StandardizeApart) {
  Document d = parse_document("pred R(Subjects);");
  SymbolId r = *d.base.signature->find_symbol("R");
  Clause a({Literal{true, r, {Term::variable(0, kSubjects)}}});
  Clause b({Literal{false, r, {Term::variable(0, kSubjects)}}});
  auto [x, y] = standardize_apart(a, b);
  EXPECT_EQ(x, a);
  ASSERT_TRUE(y.max_variable());
  EXPECT_NE(x.variables(), y.variables());
  auto [s, t] = standardize_apart(a, a);
  EXPECT_NE(s.variables(), t.variables());
  EXPECT_EQ(canonical_variant(s), canonical_variant(t));

  Document g = load("ex4_3.lith");
  Clause p1 = policy_clause(g, "p1");
  auto [u, v] = standardize_apart(p1, p1);
  EXPECT_EQ(u, p1);
  EXPECT_EQ(v, p1);
}

TEST(Core, ClauseIsSetAndOrdered) {
  Document d = parse_document("const c : Subjects; pred R(Subjects); pred S(Subjects);");
  const Signature& sig = *d.base.signature;
  Literal r{true, *sig.find_symbol("R"), {constant(d, "c")}};
  Literal s{false, *sig.find_symbol("S"), {constant(d, "c")}};
  EXPECT_EQ(Clause({r, s, r}), Clause({s, r}));
  EXPECT_TRUE(Clause({r, r.negated()}).is_tautology());
  EXPECT_TRUE(Clause{}.empty());
}

namespace {

// Random terms over f(Subjects) : Subjects, constants a, b and variables 0..3.
struct TermGen {
  std::mt19937_64 rng;
  const Signature& sig;
  SymbolId f, a, b, r;

  Term term(int depth) {
    int k = std::uniform_int_distribution<int>(0, depth > 0 ? 3 : 2)(rng);
    if (k == 0) return Term::make(sig, a);
    if (k == 1) return Term::make(sig, b);
    if (k == 2) return Term::variable(std::uniform_int_distribution<VarId>(0, 3)(rng), kSubjects);
    return Term::make(sig, f, {term(depth - 1)});
  }
  Clause clause() {
    std::vector<Literal> ls;
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n; ++i)
      ls.push_back(Literal{std::bernoulli_distribution(0.5)(rng), r, {term(2), term(2)}});
    return Clause(std::move(ls));
  }
  Substitution subst() {
    Substitution s;
    for (VarId v = 0; v < 4; ++v)
      if (std::bernoulli_distribution(0.5)(rng)) s.bind(v, term(1));
    return s;
  }
};

}  // namespace

TEST(CoreProperty, CompositionAgreesWithSequentialApplication) {
  Document d = parse_document("const a, b : Subjects; func f(Subjects) : Subjects; pred R(Subjects, Subjects);");
  const Signature& sig = *d.base.signature;
  TermGen g{std::mt19937_64(5), sig, *sig.find_symbol("f"), *sig.find_symbol("a"),
            *sig.find_symbol("b"), *sig.find_symbol("R")};
  for (int i = 0; i < 500; ++i) {
    Clause c = g.clause();
    Substitution s = g.subst(), t = g.subst();
    EXPECT_EQ(apply_substitution(apply_substitution(c, s), t), apply_substitution(c, s.compose(t)));
  }
}

TEST(CoreProperty, SubstitutionDistributesOverLiterals) {
  Document d = parse_document("const a, b : Subjects; func f(Subjects) : Subjects; pred R(Subjects, Subjects);");
  const Signature& sig = *d.base.signature;
  TermGen g{std::mt19937_64(9), sig, *sig.find_symbol("f"), *sig.find_symbol("a"),
            *sig.find_symbol("b"), *sig.find_symbol("R")};
  for (int i = 0; i < 300; ++i) {
    Clause c = g.clause();
    Substitution s = g.subst();
    std::vector<Literal> each;
    for (const Literal& l : c.literals()) each.push_back(s.apply(l));
    EXPECT_EQ(apply_substitution(c, s), Clause(each));
  }
}

TEST(CoreProperty, ClauseFormMatchesImplicationOnModels) {
  gen::Generator g(17);
  gen::Params p;
  p.max_policies = 1;
  p.negative = 0.5;
  p.permitted_in_body = 0.3;
  p.body_equation = 0.2;
  std::mt19937_64 rng(3);
  int checked = 0;
  while (checked < 300) {
    Query q = g.query(p);
    const Policy& pol = q.base.policies[0];
    if (!policy_to_clause(pol).is_ground()) continue;
    ++checked;
    const Signature& sig = *q.base.signature;
    for (int trial = 0; trial < 20; ++trial) {
      FiniteModel m;
      m.domain_size.assign(sig.sort_count(), 1);
      m.domain_size[kSubjects] = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
      m.domain_size[kActions] = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
      for (SymbolId s = 0; s < sig.symbol_count(); ++s) {
        const Symbol& sym = sig.symbol(s);
        if (sym.kind == SymbolKind::constant)
          m.constants[s] = std::uniform_int_distribution<std::size_t>(
              0, m.domain_size[*sym.result_sort] - 1)(rng);
        if (sym.kind != SymbolKind::predicate) continue;
        std::vector<std::vector<std::size_t>> tuples{{}};
        for (SortId a : sym.arg_sorts) {
          std::vector<std::vector<std::size_t>> next;
          for (auto& t : tuples)
            for (std::size_t e = 0; e < m.domain_size[a]; ++e) {
              next.push_back(t);
              next.back().push_back(e);
            }
          tuples = std::move(next);
        }
        for (auto& t : tuples)
          if (std::bernoulli_distribution(0.5)(rng)) m.relations[s].insert(t);
      }
      bool body = true;
      for (const Literal& l : pol.antecedent) body = body && holds(m, l, {});
      bool implication = !body || holds(m, pol.conclusion(), {});
      bool clause = false;
      Clause c = policy_to_clause(pol);
      for (const Literal& l : c.literals()) clause = clause || holds(m, l, {});
      ASSERT_EQ(implication, clause) << render(q.base);
    }
  }
}
