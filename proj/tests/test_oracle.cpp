#include <gtest/gtest.h>

#include "gen.hpp"
#include "lithium/oracle.hpp"
#include "util.hpp"

using namespace lithium;
using namespace lithium::test;

TEST(Oracle, LibraryExamples) {
  Document d = load("ex2_1.lith");
  EXPECT_TRUE(finite_model_valid(query(d, "alice_edits")).valid);
  EXPECT_TRUE(finite_model_valid(query(d, "bob_denied")).valid);
}

TEST(Oracle, CountermodelSatisfiesBaseAndRefutesGoal) {
  Document d = load("ex4_3.lith");
  Query q = query(d, "cry");
  q.base.policies.pop_back();
  OracleVerdict v = finite_model_valid(q);
  ASSERT_FALSE(v.valid);
  ASSERT_TRUE(v.countermodel);
  EXPECT_TRUE(satisfies_base(*v.countermodel, q.base));
  EXPECT_FALSE(holds(*v.countermodel, q.goal_literal(), {}));
  EXPECT_FALSE(to_table(*v.countermodel, *q.base.signature).empty());
}

TEST(Oracle, InconsistentEnvironmentIsVacuouslyValid) {
  Document d = load("happy_clash.lith");
  EXPECT_FALSE(environment_model(d.base));
  Query q;
  q.base = d.base;
  q.goal_args = {constant(d, "Alice"), constant(d, "sing")};
  EXPECT_TRUE(finite_model_valid(q).valid);
}

TEST(Oracle, EnvironmentModelFound) {
  Document d = load("faculty_separated.lith");
  auto m = environment_model(d.base);
  ASSERT_TRUE(m);
  EXPECT_TRUE(satisfies_environment(*m, d.base));
}

TEST(Oracle, RefusesFunctionSymbols) {
  EXPECT_THROW(finite_model_valid(query(load("exB_8.lith"), "bob_naps")), FunctionSymbolsPresent);
}

TEST(Oracle, RefusesBeyondLimits) {
  Document d = load("video.lith");
  EXPECT_THROW(finite_model_valid(query(d, "alice_asks")), OracleRefused);
  OracleLimits wide;
  wide.max_predicates = 12;
  EXPECT_TRUE(finite_model_valid(query(d, "alice_asks"), wide).valid);
}

TEST(Oracle, SaturationFindsWifeProof) {
  Query q = query(load("exB_8.lith"), "bob_naps");
  SaturationOutcome s = ground_saturation_valid(q, 2000);
  ASSERT_TRUE(s.valid);
  ASSERT_TRUE(s.witness);
  EXPECT_TRUE(s.witness->refutes());
}

TEST(Oracle, CheckerRejectsTamperedDerivation) {
  Document d = load("ex4_3.lith");
  Query q = query(d, "cry");
  SaturationOutcome s = ground_saturation_valid(q, 2000);
  ASSERT_TRUE(s.valid);
  std::vector<Clause> axioms{policy_clause(d, "p1"), policy_clause(d, "p2"),
                             Clause({q.goal_literal().negated()})};
  std::size_t sorts = d.base.signature->sort_count();
  EXPECT_TRUE(check_derivation(*s.witness, axioms, sorts).ok);

  // An axiom that is not in the base.
  Derivation forged = *s.witness;
  forged.steps[0].clause = Clause({Literal{true, kPermitted, q.goal_args}});
  EXPECT_FALSE(check_derivation(forged, axioms, sorts).ok);

  // A resolve step whose claimed result differs from the recomputed one.
  Derivation wrong = *s.witness;
  for (DerivationStep& st : wrong.steps)
    if (st.kind == DerivationStep::Kind::resolve && !st.clause.empty()) {
      st.clause = Clause{};
      break;
    }
  CheckResult r = check_derivation(wrong, axioms, sorts);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.error.empty());

  // Not ending in the empty clause.
  Derivation cut = *s.witness;
  cut.steps.pop_back();
  EXPECT_FALSE(check_derivation(cut, axioms, sorts).ok);
}

TEST(OracleProperty, SaturationNeverContradictsFiniteModels) {
  gen::Generator g(83);
  gen::Params p;
  p.max_rules = 1;
  p.permitted_in_body = 0.3;
  p.equation = 0.2;
  p.body_equation = 0.1;
  int valid = 0;
  for (int i = 0; i < 300; ++i) {
    Query q = g.query(p);
    bool truth = finite_model_valid(q).valid;
    SaturationOutcome s = ground_saturation_valid(q, 20000);
    if (s.valid) {
      ++valid;
      EXPECT_TRUE(truth) << render(q.base, {q});
    }
  }
  EXPECT_GT(valid, 30);
}

TEST(OracleProperty, CountermodelsAreModels) {
  gen::Generator g(89);
  gen::Params p;
  p.max_rules = 2;
  p.permitted_in_body = 0.2;
  int invalid = 0;
  for (int i = 0; i < 300; ++i) {
    Query q = g.query(p);
    OracleVerdict v = finite_model_valid(q);
    if (v.valid) continue;
    ++invalid;
    ASSERT_TRUE(v.countermodel);
    EXPECT_TRUE(satisfies_base(*v.countermodel, q.base));
    EXPECT_FALSE(holds(*v.countermodel, q.goal_literal(), {}));
  }
  EXPECT_GT(invalid, 50);
}

TEST(OracleProperty, SerialEqualsParallel) {
  gen::Generator g(97);
  gen::Params p;
  p.max_rules = 1;
  for (int i = 0; i < 100; ++i) {
    Query q = g.query(p);
    EXPECT_EQ(finite_model_valid(q, {}, Execution::serial).valid,
              finite_model_valid(q, {}, Execution::parallel).valid);
  }
}
