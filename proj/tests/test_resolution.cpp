#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "lithium/oracle.hpp"
#include "lithium/resolution.hpp"
#include "util.hpp"

using namespace lithium;
using namespace lithium::test;

namespace {

std::vector<LabeledClause> labeled(const Document& d, std::initializer_list<const char*> labels) {
  std::vector<LabeledClause> out;
  for (const char* l : labels) {
    bool policy = std::ranges::any_of(d.base.policies, [&](const Policy& p) { return p.label == l; });
    out.push_back({policy ? policy_clause(d, l) : env_clause(d, l), l});
  }
  return out;
}

std::vector<std::string> shown(const Document& d, const ClosureResult& r) {
  std::vector<std::string> out;
  for (const ClosureEntry& e : r.clauses) out.push_back(show(d, canonical_variant(e.clause)));
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::ranges::find(v, s) != v.end();
}

}  // namespace

TEST(Resolution, CryResolvent) {
  Document d = load("ex4_3.lith");
  auto rs = resolve(policy_clause(d, "p1"), policy_clause(d, "p2"));
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(show(d, rs[0].clause), "{Permitted(Alice, cry)}");
}

TEST(Resolution, MostGeneralResolvent) {
  Document d = parse_document(R"(
func f(Subjects) : Subjects; func g(Subjects) : Subjects;
pred R(Subjects); pred S(Subjects);
env c: forall y:Subjects. !R(y) => S(y);
env cp: forall x:Subjects. R(f(x)) => S(g(x));
)");
  auto rs = resolve(env_clause(d, "c"), env_clause(d, "cp"));
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(show(d, canonical_variant(rs[0].clause)), "{S(f(x0)), S(g(x0))}");
  // Parents' pivots become complementary under the unifier.
  const Resolvent& r = rs[0];
  Clause right = rename_offset(env_clause(d, "cp"), r.offset);
  Literal a = r.unifier.apply(env_clause(d, "c")[r.left_literal]);
  Literal b = r.unifier.apply(right[r.right_literal]);
  EXPECT_EQ(a, b.negated());
}

TEST(Resolution, FacultyResolventOnPermitted) {
  Document d = load("faculty.lith");
  auto rs = resolve(policy_clause(d, "p1"), policy_clause(d, "p2"));
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(show(d, canonical_variant(rs[0].clause)), "{!Faculty(x0), !Student(x0)}");
}

TEST(Resolution, NothingToResolve) {
  Document d = load("faculty.lith");
  EXPECT_TRUE(resolve(policy_clause(d, "p2"), policy_clause(d, "p3")).empty());
}

TEST(Resolution, SameClauseRejected) {
  Document d = load("faculty.lith");
  EXPECT_THROW(resolve(policy_clause(d, "p1"), policy_clause(d, "p1")), SameClause);
}

TEST(Resolution, DisequationAgainstReflexivity) {
  Document d = parse_document("const a : Subjects; const n : Actions;"
                              " policy p: forall x:Subjects. x = x => permit(a, n);");
  Clause c = policy_clause(d, "p");
  auto rs = resolve(c, reflexivity_clause(kSubjects));
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(show(d, rs[0].clause), "{Permitted(a, n)}");
}

TEST(Resolution, Factors) {
  Document d = parse_document("const a : Subjects; pred R(Subjects);"
                              " env r: forall x:Subjects, y:Subjects. R(x) & R(y) => R(a);");
  Clause c = env_clause(d, "r");
  auto fs = factors(c);
  ASSERT_FALSE(fs.empty());
  EXPECT_EQ(fs[0].clause.size(), 2u);
}

TEST(Resolution, RestrictedClosureRepairedFaculty) {
  Document d = load("faculty_repaired.lith");
  ClosureBounds b;
  ClosureResult r = restricted_closure(labeled(d, {"e", "p1", "p3"}), Execution::serial, &b);
  auto s = shown(d, r);
  // Inputs and the pairwise resolvents, worked out by hand:
  //   e  x p1: both Faculty literals are negative, no resolvent
  //   e  x p3 on Faculty:   {!Student(x), Permitted(x, nap)}
  //   p1 x p3 on Faculty:   {Permitted(x, chair), Permitted(x, nap)}
  EXPECT_EQ(r.clauses.size(), 5u);
  EXPECT_TRUE(contains(s, "{Permitted(x0, nap), !Student(x0)}"));
  EXPECT_TRUE(contains(s, "{Permitted(x0, chair), Permitted(x0, nap)}"));
  EXPECT_TRUE(b.ok());
  for (const ClosureEntry& e : r.clauses) EXPECT_LE(e.from.depth, 1u);
}

TEST(Resolution, NoBipolarsClosureIsInputs) {
  Document d = load("alice_play.lith");
  ClosureResult r = restricted_closure(labeled(d, {"work", "play"}));
  EXPECT_EQ(r.clauses.size(), 2u);
}

TEST(Resolution, ChainRejected) {
  Document d = load("ex4_4.lith");
  try {
    restricted_closure(labeled(d, {"p1", "p2"}));
    FAIL();
  } catch (const PreconditionViolated& e) {
    EXPECT_EQ(e.clause(), 1u);
    ASSERT_FALSE(e.pairs().empty());
    bool self = std::ranges::any_of(e.pairs(), [](const BipolarPair& p) {
      return p.first.clause == 1 && p.second.clause == 1;
    });
    EXPECT_TRUE(self);
  }
}

TEST(Resolution, SaturateWifeRefutes) {
  Document d = load("exB_8.lith");
  Query t = to_equation_free(query(d, "bob_naps"));
  std::vector<LabeledClause> cs;
  for (const Policy& p : t.base.policies) cs.push_back({policy_to_clause(p), p.label});
  cs.push_back({Clause({t.goal_literal().negated()}), "goal"});
  ClosureResult r = saturate(cs, {500, Execution::serial});
  ASSERT_TRUE(r.refutation);
  EXPECT_FALSE(r.exhausted);
  Derivation w = extract_derivation(r, *r.refutation);
  EXPECT_TRUE(w.refutes());
  std::vector<Clause> axioms;
  for (const LabeledClause& c : cs) axioms.push_back(c.clause);
  EXPECT_TRUE(check_derivation(w, axioms, t.base.signature->sort_count()).ok);
}

TEST(Resolution, SaturateSatisfiableSingleton) {
  Document d = parse_document("const c : Subjects; pred P(Subjects); env P(c);");
  std::vector<LabeledClause> cs{{Clause({d.base.e0[0]}), "E0"}};
  ClosureResult r = saturate(cs);
  EXPECT_FALSE(r.refutation);
  EXPECT_FALSE(r.exhausted);
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(r.clauses.size(), 1u);
}

TEST(Resolution, SaturateChainExhaustsFuel) {
  Document d = load("ex4_4.lith");
  std::vector<LabeledClause> cs = labeled(d, {"p1", "p2"});
  cs.push_back({Clause({query(d, "carol_plays").goal_literal().negated()}), "goal"});
  SaturateOptions unlimited{2000, Execution::serial, 0};
  ClosureResult r = saturate(cs, unlimited);
  EXPECT_TRUE(r.exhausted);
  EXPECT_FALSE(r.refutation);
  // With the default length limit the chain is cut instead; neither run
  // claims satisfiability.
  ClosureResult cut = saturate(cs);
  EXPECT_FALSE(cut.refutation);
  EXPECT_TRUE(cut.exhausted || cut.truncated);
}

TEST(Resolution, SaturateEmptyInputClause) {
  std::vector<LabeledClause> cs{{Clause{}, "false"}};
  ClosureResult r = saturate(cs, {0, Execution::serial});
  ASSERT_TRUE(r.refutation);
}

namespace {

std::vector<LabeledClause> random_clauses(gen::Generator& g, const gen::Params& p, Query* q = nullptr) {
  Query x = g.query(p);
  std::vector<LabeledClause> cs;
  for (const EnvRule& r : x.base.e1) cs.push_back({rule_to_clause(r), r.label});
  for (const Policy& pol : x.base.policies) cs.push_back({policy_to_clause(pol), pol.label});
  if (q) *q = x;
  return cs;
}

}  // namespace

TEST(ResolutionProperty, ClosureBoundsHold) {
  gen::Generator g(67);
  gen::Params p;
  p.max_rules = 3;
  p.max_policies = 5;
  p.permitted_in_body = 0.3;
  p.functions = true;
  int checked = 0;
  for (int i = 0; i < 20000 && checked < 300; ++i) {
    auto cs = random_clauses(g, p);
    std::vector<Clause> plain;
    for (auto& c : cs) plain.push_back(c.clause);
    BipolarReport br = bipolar_report(plain);
    if (br.max_count() != 1) continue;
    ++checked;
    ClosureBounds b;
    ClosureResult r = restricted_closure(cs, Execution::parallel, &b);
    EXPECT_TRUE(b.size_ok());
    EXPECT_TRUE(b.length_ok());
    EXPECT_TRUE(b.depth_ok());
    EXPECT_TRUE(b.k_ok());
    ClosureResult s = restricted_closure(cs, Execution::serial);
    ASSERT_EQ(r.clauses.size(), s.clauses.size());
    for (std::size_t k = 0; k < r.clauses.size(); ++k) EXPECT_EQ(r.clauses[k].clause, s.clauses[k].clause);
  }
  EXPECT_EQ(checked, 300);
}

namespace {

// Function-free clause truth: every assignment of its variables.
bool clause_holds(const FiniteModel& m, const Clause& c) {
  std::vector<std::pair<VarId, SortId>> vars;
  for (const Literal& l : c.literals())
    for (const Term& t : l.args)
      if (t.is_variable() && std::ranges::find(vars, std::pair{t.var(), t.sort()}) == vars.end())
        vars.emplace_back(t.var(), t.sort());
  std::map<VarId, std::size_t> env;
  auto go = [&](auto& self, std::size_t i) -> bool {
    if (i == vars.size())
      return std::ranges::any_of(c.literals(), [&](const Literal& l) { return holds(m, l, env); });
    for (std::size_t e = 0; e < m.domain_size[vars[i].second]; ++e) {
      env[vars[i].first] = e;
      if (!self(self, i + 1)) return false;
    }
    return true;
  };
  return go(go, 0);
}

FiniteModel random_model(const Signature& sig, std::mt19937_64& rng) {
  FiniteModel m;
  m.domain_size.assign(sig.sort_count(), 1);
  for (SortId s : {kSubjects, kActions}) m.domain_size[s] = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  for (SymbolId s = 0; s < sig.symbol_count(); ++s) {
    const Symbol& sym = sig.symbol(s);
    if (sym.kind == SymbolKind::constant)
      m.constants[s] = std::uniform_int_distribution<std::size_t>(0, m.domain_size[*sym.result_sort] - 1)(rng);
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
  return m;
}

}  // namespace

TEST(ResolutionProperty, ResolventsAreEntailed) {
  // Every model of both parents satisfies each resolvent and each factor.
  gen::Generator g(71);
  gen::Params p;
  p.max_policies = 2;
  p.max_rules = 1;
  p.permitted_in_body = 0.4;
  p.body_equation = 0.2;
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int i = 0; i < 2000 && checked < 300; ++i) {
    Query q;
    auto cs = random_clauses(g, p, &q);
    if (cs.size() < 2 || cs[0].clause == cs[1].clause) continue;
    auto rs = resolve(cs[0].clause, cs[1].clause);
    auto fs = factors(cs[0].clause);
    if (rs.empty() && fs.empty()) continue;
    ++checked;
    Clause right = rename_offset(cs[1].clause, rename_offset_for(cs[0].clause));
    for (int trial = 0; trial < 30; ++trial) {
      FiniteModel m = random_model(*q.base.signature, rng);
      if (!clause_holds(m, cs[0].clause)) continue;
      for (const Factor& f : fs) EXPECT_TRUE(clause_holds(m, f.clause)) << render(q.base);
      if (!clause_holds(m, right)) continue;
      for (const Resolvent& r : rs) EXPECT_TRUE(clause_holds(m, r.clause)) << render(q.base);
    }
  }
  EXPECT_EQ(checked, 300);
}

TEST(ResolutionProperty, SaturateFindsEveryOracleRefutation) {
  gen::Generator g(73);
  gen::Params p;
  p.max_rules = 2;
  p.permitted_in_body = 0.3;
  p.body_equation = 0.1;
  int valid = 0;
  for (int i = 0; i < 400; ++i) {
    Query q = g.query(p);
    if (!finite_model_valid(q).valid) continue;
    ++valid;
    SaturationOutcome s = ground_saturation_valid(q, 50000);
    EXPECT_TRUE(s.valid) << render(q.base, {q});
  }
  EXPECT_GT(valid, 50);
}

TEST(ResolutionProperty, SaturateSerialEqualsParallel) {
  gen::Generator g(79);
  gen::Params p;
  p.max_rules = 2;
  p.permitted_in_body = 0.4;
  for (int i = 0; i < 100; ++i) {
    Query q;
    auto cs = random_clauses(g, p, &q);
    cs.push_back({Clause({q.goal_literal().negated()}), "goal"});
    ClosureResult a = saturate(cs, {5000, Execution::serial});
    ClosureResult b = saturate(cs, {5000, Execution::parallel});
    ASSERT_EQ(a.clauses.size(), b.clauses.size());
    for (std::size_t k = 0; k < a.clauses.size(); ++k) EXPECT_EQ(a.clauses[k].clause, b.clauses[k].clause);
    EXPECT_EQ(a.refutation, b.refutation);
    EXPECT_EQ(a.generated, b.generated);
  }
}
