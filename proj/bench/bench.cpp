// Serial against parallel execution of the kernels that take an Execution.
#include <benchmark/benchmark.h>

#include "gen.hpp"
#include "lithium/engine.hpp"
#include "lithium/oracle.hpp"

using namespace lithium;

namespace {

Execution mode(const benchmark::State& s) { return s.range(1) ? Execution::parallel : Execution::serial; }

std::vector<LabeledClause> policy_clauses(const Query& q) {
  std::vector<LabeledClause> out;
  for (const Policy& p : q.base.policies) out.push_back({policy_to_clause(p), p.label});
  return out;
}

void BM_Answer(benchmark::State& s) {
  Query q = gen::scaled_query(static_cast<std::size_t>(s.range(0)), 30);
  AnswerOptions o;
  o.exec = mode(s);
  for (auto _ : s) benchmark::DoNotOptimize(answer(q, o));
}

void BM_RestrictedClosure(benchmark::State& s) {
  Query q = gen::scaled_query(1000, static_cast<std::size_t>(s.range(0)));
  auto cs = policy_clauses(q);
  for (auto _ : s) benchmark::DoNotOptimize(restricted_closure(cs, mode(s)));
}

void BM_BipolarReport(benchmark::State& s) {
  Query q = gen::scaled_query(1000, static_cast<std::size_t>(s.range(0)));
  std::vector<Clause> cs;
  for (const Policy& p : q.base.policies) cs.push_back(policy_to_clause(p));
  for (auto _ : s) benchmark::DoNotOptimize(bipolar_report(cs, nullptr, mode(s)));
}

void BM_Saturate(benchmark::State& s) {
  gen::Generator g(7);
  gen::Params p;
  p.max_rules = 3;
  p.max_policies = 6;
  p.permitted_in_body = 0.5;
  std::vector<std::vector<LabeledClause>> sets;
  for (int i = 0; i < s.range(0); ++i) {
    Query q = g.query(p);
    auto cs = policy_clauses(q);
    for (const EnvRule& r : q.base.e1) cs.push_back({rule_to_clause(r), r.label});
    cs.push_back({Clause({q.goal_literal().negated()}), "goal"});
    sets.push_back(std::move(cs));
  }
  for (auto _ : s)
    for (const auto& cs : sets) benchmark::DoNotOptimize(saturate(cs, {5000, mode(s)}));
}

void BM_FiniteModel(benchmark::State& s) {
  gen::Generator g(11);
  gen::Params p;
  p.max_rules = 2;
  std::vector<Query> qs;
  for (int i = 0; i < s.range(0); ++i) qs.push_back(g.query(p));
  for (auto _ : s)
    for (const Query& q : qs) benchmark::DoNotOptimize(finite_model_valid(q, {}, mode(s)));
}

}  // namespace

BENCHMARK(BM_Answer)->ArgsProduct({{1000, 10000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RestrictedClosure)->ArgsProduct({{30, 300}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BipolarReport)->ArgsProduct({{30, 300}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Saturate)->ArgsProduct({{50}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FiniteModel)->ArgsProduct({{50}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
