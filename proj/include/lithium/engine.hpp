// The Lithium decision procedure and the operations built on it: membership,
// separation of permitting and denying policies, consistency, and unfolding
// of environment-defined predicates.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lithium/core.hpp"
#include "lithium/equality.hpp"
#include "lithium/parallel.hpp"
#include "lithium/resolution.hpp"
#include "lithium/unify.hpp"

namespace lithium {

// Ground literals kept sorted for logarithmic lookup. Read-only after
// construction, so concurrent queries need no locking.
class LiteralIndex {
 public:
  LiteralIndex() = default;
  explicit LiteralIndex(std::span<const Literal> literals);

  bool contains(const Literal& l) const;
  // Literals with the sign and predicate of `pattern` that may match it; when
  // the first argument of `pattern` is ground the range is narrowed to it.
  std::span<const Literal> candidates(const Literal& pattern) const;
  std::size_t size() const { return pos_.size() + neg_.size(); }
  std::span<const Literal> positives() const { return pos_; }
  std::span<const Literal> negatives() const { return neg_; }

 private:
  std::vector<Literal> pos_;
  std::vector<Literal> neg_;
};

enum class SuggestedPath { fast, full, fallback };
std::string_view to_string(SuggestedPath p);

struct MembershipReport {
  bool in_lithium = false;
  SafeReport equality;
  std::vector<LabeledClause> clauses;  // E1 then P, in document order
  BipolarReport bipolar;               // over `clauses`, relative to E0's equations
  std::vector<std::size_t> k;          // unconstrained variables relative to the query
  bool one_variable_per_literal = true;
  SuggestedPath suggested = SuggestedPath::fallback;
};

MembershipReport membership(const Query& q, Execution exec = Execution::parallel);

struct Valid {
  Derivation witness;
  bool vacuous = false;      // E0 alone is contradictory
  bool fallback = false;     // found by saturation outside the fragment
  bool transformed = false;  // witness refers to to_equation_free(q)
  bool separated = false;    // decided on the goal-sign policies alone
};
struct Invalid {
  bool fallback = false;
  bool separated = false;
};
struct NotInLithium {
  MembershipReport report;
};
struct Unknown {
  std::size_t fuel_spent = 0;
};
using Verdict = std::variant<Valid, Invalid, NotInLithium, Unknown>;

std::string_view verdict_name(const Verdict& v);

struct AnswerOptions {
  bool fallback = false;
  std::size_t fuel = kDefaultFuel;
  Execution exec = Execution::parallel;
};

// Outside Lithium, a base whose permitting and denying policies separate is
// decided on the policies of the goal's sign when that sub-query is in
// Lithium; otherwise the fallback or NotInLithium applies.
Verdict answer(const Query& q, const AnswerOptions& opts = {});

// The sub-query keeping only policies of the goal's sign, when they are pure
// and every permit/deny resolvent on Permitted is implied.
std::optional<Query> separated_query(const Query& q);

// Saturation on the negated query; used for fallback and as an oracle.
Verdict saturation_verdict(const Query& q, std::size_t fuel, Execution exec = Execution::parallel);

struct SeparationItem {
  enum class Status { implied_by_environment, implied_by_conjunct, missing };
  std::string permit_label;
  std::string deny_label;
  Clause resolvent;
  Status status = Status::missing;
  std::string implied_by;  // label of the implying clause, or a reason
};
std::string_view to_string(SeparationItem::Status s);

struct SeparationReport {
  bool satisfied = true;
  std::vector<SeparationItem> resolvents;
  std::vector<std::string> impure;
};

SeparationReport check_separation(const PolicyBase& base);

struct ConsistencyReport {
  enum class Status { consistent, inconsistent, unknown };
  Status status = Status::unknown;
  bool by_separation = false;
  SeparationReport separation;
  std::optional<Verdict> permit;  // fresh-constant queries, when run
  std::optional<Verdict> deny;
  std::optional<Derivation> witness;  // refutation of E when found directly
  std::string detail;
};
std::string_view to_string(ConsistencyReport::Status s);

ConsistencyReport check_consistency(const PolicyBase& base, const AnswerOptions& opts = {});

// Satisfiability of E0 ∧ E1 by clash scan plus saturation.
ConsistencyReport::Status environment_status(const PolicyBase& base, std::size_t fuel,
                                             std::optional<Derivation>* witness = nullptr);

class NotADefinition : public Error {
 public:
  using Error::Error;
};

struct UnfoldOptions {
  bool prune = false;  // drop definitions whose bodies cannot hold given E0
};

PolicyBase unfold_definitions(const PolicyBase& base, const std::set<std::string>& predicates,
                              const UnfoldOptions& opts = {});

}  // namespace lithium
