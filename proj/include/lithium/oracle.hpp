// Ground truth for tests and for `check --oracle`: exhaustive finite models
// for function-free queries, saturation as a semi-decision procedure, and a
// replay checker for derivations.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lithium/core.hpp"
#include "lithium/engine.hpp"
#include "lithium/equality.hpp"
#include "lithium/parallel.hpp"
#include "lithium/resolution.hpp"

namespace lithium {

class FunctionSymbolsPresent : public Error {
 public:
  using Error::Error;
};

// Raised instead of enumerating beyond the limits.
class OracleRefused : public Error {
 public:
  using Error::Error;
};

struct OracleLimits {
  std::size_t max_constants_per_sort = 4;
  std::size_t max_predicates = 6;  // Permitted included, equality not
  std::size_t max_arity = 2;
};

struct FiniteModel {
  std::vector<std::size_t> domain_size;                          // by sort
  std::map<SymbolId, std::size_t> constants;                     // element of the constant's sort
  std::map<SymbolId, std::set<std::vector<std::size_t>>> relations;  // true tuples only
};

// One table per sort and per predicate.
std::string to_table(const FiniteModel& m, const Signature& sig);

// Direct evaluation; variables range over the whole domain of their sort.
bool holds(const FiniteModel& m, const Literal& ground_pattern, const std::map<VarId, std::size_t>& env);
bool satisfies_environment(const FiniteModel& m, const PolicyBase& b);
bool satisfies_base(const FiniteModel& m, const PolicyBase& b);  // E0, E1 and the policies

struct OracleVerdict {
  bool valid = false;
  std::optional<FiniteModel> countermodel;  // when invalid
  std::size_t models_checked = 0;           // domain identifications tried
};

// Every model of a function-free query is, restricted to the named
// constants, one of the identifications of those constants (one element for
// a sort without constants), so enumerating them decides validity.
OracleVerdict finite_model_valid(const Query& q, const OracleLimits& limits = {},
                                 Execution exec = Execution::parallel);

// A model of E0 ∧ E1 if one exists.
std::optional<FiniteModel> environment_model(const PolicyBase& b, const OracleLimits& limits = {},
                                             Execution exec = Execution::parallel);

struct SaturationOutcome {
  bool valid = false;  // false means Unknown: never Invalid
  std::size_t generated = 0;
  std::optional<Derivation> witness;
  bool transformed = false;
};

SaturationOutcome ground_saturation_valid(const Query& q, std::size_t fuel = kDefaultFuel,
                                          Execution exec = Execution::parallel);

struct CheckResult {
  bool ok = false;
  std::size_t step = 0;
  std::string error;
};

// Replays each step: axioms must be renamings of `axioms` or a reflexivity
// clause of a sort below `sort_count`; resolve steps are recomputed with
// resolvent_of; instance steps with apply_substitution. The last step must
// be the empty clause.
CheckResult check_derivation(const Derivation& d, std::span<const Clause> axioms,
                             std::size_t sort_count);

// Axioms of q (or of to_equation_free(q) when the witness says so) plus the
// negated goal.
CheckResult check_witness(const Query& q, const Valid& v);

}  // namespace lithium
