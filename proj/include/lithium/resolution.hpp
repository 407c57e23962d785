// Binary resolution, the one-level closure used when every clause carries at
// most one bipolar literal, and fuel-limited level saturation with factoring
// and forward subsumption.
#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lithium/core.hpp"
#include "lithium/parallel.hpp"
#include "lithium/unify.hpp"

namespace lithium {

class SameClause : public Error {
 public:
  SameClause() : Error("resolve: both parents are the same clause") {}
};

class PreconditionViolated : public Error {
 public:
  PreconditionViolated(std::string what, std::size_t clause, std::vector<BipolarPair> pairs)
      : Error(std::move(what)), clause_(clause), pairs_(std::move(pairs)) {}
  std::size_t clause() const { return clause_; }
  const std::vector<BipolarPair>& pairs() const { return pairs_; }

 private:
  std::size_t clause_;
  std::vector<BipolarPair> pairs_;
};

// The right parent is renamed by `offset` (one past the left parent's largest
// variable) before unifying; literal indices refer to the left clause and the
// renamed right clause.
struct Resolvent {
  Clause clause;
  std::size_t left_literal = 0;
  std::size_t right_literal = 0;
  VarId offset = 0;
  Substitution unifier;
};

VarId rename_offset_for(const Clause& left);

// (Lσ - {pivotσ}) ∪ (R'σ - {pivot'σ}). Shared with the derivation checker.
Clause resolvent_of(const Clause& left, const Clause& renamed_right, std::size_t li,
                    std::size_t ri, const Substitution& sigma);

// All resolvents of two distinct clauses. Throws SameClause when they are
// identical.
std::vector<Resolvent> resolve(const Clause& left, const Clause& right);
// Same, but a clause may be resolved against a renamed copy of itself.
std::vector<Resolvent> resolve_renamed(const Clause& left, const Clause& right);

// ∀x (x = x) for variables of `sort`.
Clause reflexivity_clause(SortId sort);

struct Factor {
  Clause clause;
  Substitution unifier;
};

// cσ for each pair of same-sign literals of c whose atoms unify.
std::vector<Factor> factors(const Clause& c);

struct LabeledClause {
  Clause clause;
  std::string label;
};

struct Provenance {
  enum class Kind { input, resolvent, factor };
  Kind kind = Kind::input;
  std::string label;  // inputs only
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t left_literal = 0;
  std::size_t right_literal = 0;
  VarId offset = 0;
  Substitution unifier;
  unsigned depth = 0;
};

struct ClosureEntry {
  Clause clause;
  Provenance from;
};

struct ClosureResult {
  std::vector<ClosureEntry> clauses;
  bool exhausted = false;
  bool truncated = false;  // some resolvent exceeded max_literals and was dropped
  std::size_t generated = 0;
  std::optional<std::size_t> refutation;  // index of the empty clause
};

// Measured quantities checked against the one-level closure bounds.
struct ClosureBounds {
  std::size_t inputs = 0;
  std::size_t size = 0;
  std::size_t longest_input = 0;      // L, in symbols
  std::size_t longest_term = 0;       // L'
  std::size_t longest_output = 0;
  unsigned max_depth = 0;
  std::size_t k_in = 0;               // unconstrained, relative to the input's bipolars
  std::size_t k_out = 0;              // unconstrained, plain

  bool size_ok() const { return size <= inputs + inputs * (inputs ? inputs - 1 : 0); }
  // A term length of 0 (only nullary predicates) counts as 1.
  bool length_ok() const {
    return longest_output <= 2 * longest_input * std::max<std::size_t>(longest_term, 1);
  }
  bool depth_ok() const { return max_depth <= 1; }
  bool k_ok() const { return k_out <= 2 * k_in; }
  bool ok() const { return size_ok() && length_ok() && depth_ok() && k_ok(); }
};

// Inputs plus every resolvent of two distinct inputs, deduplicated modulo
// renaming. Throws PreconditionViolated if a clause has two bipolar literals.
ClosureResult restricted_closure(std::span<const LabeledClause> clauses,
                                 Execution exec = Execution::parallel,
                                 ClosureBounds* bounds = nullptr);

inline constexpr std::size_t kDefaultFuel = 50'000;

inline constexpr std::size_t kDefaultMaxLiterals = 12;

struct SaturateOptions {
  std::size_t fuel = kDefaultFuel;
  Execution exec = Execution::parallel;
  std::size_t max_literals = kDefaultMaxLiterals;  // 0: no limit
};

// Breadth-first saturation with reflexivity clauses for every sort that occurs
// in an equality literal. Stops at the empty clause, at a fixed point, or when
// more than `fuel` clauses have been generated. Resolvents longer than
// max_literals still count as generated but are dropped; a fixed point
// reached after dropping one is not a proof of satisfiability.
ClosureResult saturate(std::span<const LabeledClause> clauses, const SaturateOptions& opts = {});

// Replayable proof of a clause of a closure.
struct DerivationStep {
  enum class Kind { axiom, resolve, instance };
  Kind kind = Kind::axiom;
  Clause clause;
  std::string label;  // axioms
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t left_literal = 0;
  std::size_t right_literal = 0;
  Substitution unifier;
};

struct Derivation {
  std::vector<DerivationStep> steps;
  bool refutes() const { return !steps.empty() && steps.back().clause.empty(); }
};

Derivation extract_derivation(const ClosureResult& r, std::size_t index);

std::string to_text(const Derivation& d, const Signature& sig);

}  // namespace lithium
