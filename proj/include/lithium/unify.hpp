// Syntactic unification (occurs check always on), one-way matching, and the
// bipolar / constrained-variable analyses that decide Lithium membership.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lithium/core.hpp"
#include "lithium/parallel.hpp"

namespace lithium {

class EqClasses;

// Most general unifier of the two atoms; signs are ignored. The result is
// idempotent. Callers standardize apart first.
std::optional<Substitution> mgu(const Literal& a, const Literal& b);
std::optional<Substitution> mgu(const Term& a, const Term& b);

// Extends the idempotent `s` so that a·s = b·s, keeping it idempotent.
// Leaves `s` unspecified on failure.
bool unify(const Term& a, const Term& b, Substitution& s);

// One-way matching: binds variables of `pattern` only. Variables in `target`
// are treated as constants.
bool match(const Term& pattern, const Term& target, Substitution& s);
// Sign and predicate must agree.
bool match(const Literal& pattern, const Literal& target, Substitution& s);

// θ with c·θ ⊆ d (as literal sets), if one exists.
std::optional<Substitution> subsumes(const Clause& c, const Clause& d);

// As above, but gives up (nullopt) after `max_steps` backtracking steps.
std::optional<Substitution> subsumes(const Clause& c, const Clause& d, std::size_t max_steps);

struct LiteralRef {
  std::size_t clause = 0;
  std::size_t literal = 0;
  friend auto operator<=>(const LiteralRef&, const LiteralRef&) = default;
};

struct BipolarPair {
  LiteralRef first;   // first < second
  LiteralRef second;
};

struct BipolarReport {
  std::vector<BipolarPair> pairs;
  std::vector<std::vector<bool>> flags;  // [clause][literal]
  std::vector<std::size_t> per_clause_count;

  bool is_bipolar(LiteralRef r) const { return flags[r.clause][r.literal]; }
  std::size_t max_count() const;
  bool empty() const { return pairs.empty(); }
};

// A literal occurrence is bipolar when it and the negation of some other
// occurrence (same clause allowed) unify after renaming apart. With `eq`,
// closed terms are first rewritten to their class representatives.
BipolarReport bipolar_report(std::span<const Clause> clauses, const EqClasses* eq = nullptr,
                             Execution exec = Execution::parallel);

// Variables occurring anywhere inside an argument of a Permitted literal of
// `c`. When `bipolar_flags` is given (one flag per literal of c), bipolar
// Permitted literals are skipped: the "relative" reading.
std::vector<VarId> constrained_vars(const Clause& c, const std::vector<bool>* bipolar_flags = nullptr);

std::size_t unconstrained_count(const Clause& c, const std::vector<bool>* bipolar_flags = nullptr);

// Largest number of distinct unconstrained variables in a single literal.
std::size_t unconstrained_per_literal(const Clause& c, const std::vector<bool>* bipolar_flags = nullptr);

}  // namespace lithium
