// Equality classes over the ground environment, the equality-safe test and
// the rewrite to an equation-free query.
#pragma once

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lithium/core.hpp"

namespace lithium {

class NotEqualitySafe : public Error {
 public:
  using Error::Error;
};

struct EqViolation {
  enum class Kind {
    positive_equation,   // t = t' disjunct in an E1 or policy clause
    two_function_terms,  // a class holds two non-constant terms
    subterm,             // a class holds a term and one of its proper subterms
    congruence,          // f(a), f(b) both in E0 with a, b in one class
    cyclic,              // representatives rewrite into each other
  };
  Kind kind;
  std::string where;   // rule/policy label or class listing
  std::string detail;
};

std::string_view to_string(EqViolation::Kind k);

// Partition of the closed terms of E0 (subterms included) under the positive
// ground equations of E0. No congruence propagation; congruent pairs are only
// reported. Rewriting is bottom-up, so a term whose arguments fall into
// classes is matched against class members through those classes.
class EqClasses {
 public:
  EqClasses() = default;

  // True when E0 has no usable equation: rewrite is then the identity.
  bool trivial() const { return trivial_; }
  std::size_t class_count() const { return members_.size(); }
  std::span<const Term> members(std::size_t c) const { return members_[c]; }
  // Chosen member: the non-constant one if any, else the least constant name.
  const Term& representative(std::size_t c) const { return rep_[c]; }
  // Representative with its own arguments rewritten.
  const Term& normal_form(std::size_t c) const { return nrep_[c]; }
  std::optional<std::size_t> class_of(const Term& t) const;

  Term rewrite(const Term& t) const;
  Literal rewrite(const Literal& l) const;
  Clause rewrite(const Clause& c) const;

  // Structural problems found while building (everything but
  // positive_equation, which concerns E1 and P).
  std::span<const EqViolation> violations() const { return violations_; }

 private:
  friend EqClasses build_eq_classes(const Signature& sig, std::span<const Literal> e0);

  using Key = std::pair<SymbolId, std::vector<std::size_t>>;

  bool trivial_ = true;
  std::vector<std::vector<Term>> members_;
  std::vector<Term> rep_;
  std::vector<Term> nrep_;
  std::map<Key, std::size_t> by_key_;
  std::vector<EqViolation> violations_;
};

EqClasses build_eq_classes(const Signature& sig, std::span<const Literal> e0);

struct SafeReport {
  bool safe = true;
  std::vector<EqViolation> violations;
};

SafeReport equality_safe(const Query& q);

// Drops the positive equations of E0 and rewrites every closed term of the
// rest of the query to its class representative. Throws NotEqualitySafe.
Query to_equation_free(const Query& q);

}  // namespace lithium
