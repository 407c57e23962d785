// Sorted first-order terms, literals, clauses, substitutions and the policy
// base model. Every value here is immutable once built and may be shared
// across threads freely.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lithium {

using SortId = std::uint32_t;
using SymbolId = std::uint32_t;
using VarId = std::uint32_t;

inline constexpr SortId kSubjects = 0;
inline constexpr SortId kActions = 1;
inline constexpr SortId kTimes = 2;

inline constexpr SymbolId kEquality = 0;
inline constexpr SymbolId kPermitted = 1;
inline constexpr SymbolId kNow = 2;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SortError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

enum class SymbolKind { constant, function, predicate, equality };

struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::constant;
  std::vector<SortId> arg_sorts;
  std::optional<SortId> result_sort;  // absent for predicates
};

// Symbol table. Built single-writer by the parser (or by tests), then shared
// read-only through a shared_ptr<const Signature>.
class Signature {
 public:
  Signature();

  SortId add_sort(std::string name);
  SymbolId add_constant(std::string name, SortId sort);
  SymbolId add_function(std::string name, std::vector<SortId> args, SortId result);
  SymbolId add_predicate(std::string name, std::vector<SortId> args);

  // Permitted's argument sorts may be changed until the first policy or query
  // uses it; the parser enforces the "before first use" part.
  void configure_permitted(std::vector<SortId> args);

  const Symbol& symbol(SymbolId id) const { return symbols_.at(id); }
  const std::string& sort_name(SortId id) const { return sorts_.at(id); }
  std::size_t sort_count() const { return sorts_.size(); }
  std::size_t symbol_count() const { return symbols_.size(); }
  std::optional<SortId> find_sort(std::string_view name) const;
  std::optional<SymbolId> find_symbol(std::string_view name) const;
  std::size_t permitted_arity() const { return symbols_[kPermitted].arg_sorts.size(); }

 private:
  SymbolId add(Symbol s);

  std::vector<std::string> sorts_;
  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, SortId> sort_index_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
};

class Term {
 public:
  static Term variable(VarId id, SortId sort);
  // Unchecked constructor; `sort` is the symbol's result sort.
  static Term apply(SymbolId symbol, SortId sort, std::vector<Term> args = {});
  // Checked constructor: arity and argument sorts must match the signature.
  static Term make(const Signature& sig, SymbolId symbol, std::vector<Term> args = {});

  bool is_variable() const { return node_->is_var; }
  VarId var() const { return node_->id; }
  SymbolId symbol() const { return node_->id; }
  SortId sort() const { return node_->sort; }
  std::span<const Term> args() const { return node_->args; }
  bool is_ground() const { return node_->ground; }
  bool is_constant() const { return !node_->is_var && node_->args.empty(); }
  // Number of symbol occurrences (variables count as one).
  std::size_t size() const { return node_->size; }
  std::size_t hash() const { return node_->hash; }

  bool contains_variable(VarId v) const;
  bool contains(const Term& sub) const;  // reflexive subterm test
  void collect_variables(std::vector<VarId>& out) const;

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node {
    bool is_var = false;
    std::uint32_t id = 0;
    SortId sort = 0;
    std::vector<Term> args;
    bool ground = true;
    std::uint32_t size = 1;
    std::size_t hash = 0;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

struct Literal {
  bool positive = true;
  SymbolId predicate = kEquality;
  std::vector<Term> args;

  static Literal make(const Signature& sig, bool positive, SymbolId predicate,
                      std::vector<Term> args);

  Literal negated() const { return Literal{!positive, predicate, args}; }
  bool is_equality() const { return predicate == kEquality; }
  bool mentions_permitted() const { return predicate == kPermitted; }
  bool is_ground() const;
  std::size_t size() const;
  void collect_variables(std::vector<VarId>& out) const;
  bool same_atom(const Literal& other) const {
    return predicate == other.predicate && args == other.args;
  }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b);
};

// A set of literals, kept sorted and duplicate-free. Variables are implicitly
// universally quantified. The empty clause is false.
class Clause {
 public:
  Clause() = default;
  explicit Clause(std::vector<Literal> literals);

  std::span<const Literal> literals() const { return literals_; }
  const Literal& operator[](std::size_t i) const { return literals_[i]; }
  std::size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }
  bool is_ground() const;
  bool contains(const Literal& l) const;
  std::vector<VarId> variables() const;  // sorted, unique
  std::optional<VarId> max_variable() const;
  // Total symbol count, the clause "length" used by closure size bounds.
  std::size_t length() const;
  // Longest argument term, in symbols.
  std::size_t longest_term() const;
  bool is_tautology() const;

  friend bool operator==(const Clause&, const Clause&) = default;
  friend std::strong_ordering operator<=>(const Clause& a, const Clause& b);

 private:
  std::vector<Literal> literals_;
};

class Substitution {
 public:
  Substitution() = default;

  void bind(VarId v, Term t) { bindings_.insert_or_assign(v, std::move(t)); }
  const Term* find(VarId v) const;
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const std::map<VarId, Term>& bindings() const { return bindings_; }

  Term apply(const Term& t) const;
  Literal apply(const Literal& l) const;
  Clause apply(const Clause& c) const;

  // x(this ∘ then) = (x this) then.
  Substitution compose(const Substitution& then) const;
  bool is_idempotent() const;

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::map<VarId, Term> bindings_;
};

Clause apply_substitution(const Clause& c, const Substitution& s);

// Shifts every variable id by `offset`.
Clause rename_offset(const Clause& c, VarId offset);
// Renames variables to 0..k-1 in order of first occurrence after a
// variable-blind sort, so renamed copies usually map to the same clause.
Clause canonical_variant(const Clause& c);
// Returns copies sharing no variables: the first clause is unchanged, the
// second has its variables shifted past the first's.
std::pair<Clause, Clause> standardize_apart(const Clause& a, const Clause& b);

enum class Decision { permit, deny };

std::string_view to_string(Decision d);

struct Policy {
  std::string label;
  std::vector<Literal> antecedent;
  Decision decision = Decision::permit;
  std::vector<Term> target;  // Permitted arguments

  Literal conclusion() const {
    return Literal{decision == Decision::permit, kPermitted, target};
  }
};

// ∀x(ℓ1 ∧ … ∧ ℓk ⇒ ℓ) from the universal part of the environment.
struct EnvRule {
  std::string label;
  std::vector<Literal> antecedent;
  Literal conclusion;
};

Clause policy_to_clause(const Policy& p);
Clause rule_to_clause(const EnvRule& r);
// Throws SortError / ShapeError for ill-formed input.
void validate_policy(const Signature& sig, const Policy& p);

struct PolicyBase {
  std::shared_ptr<const Signature> signature = std::make_shared<const Signature>();
  std::vector<Literal> e0;
  std::vector<EnvRule> e1;
  std::vector<Policy> policies;

  // Throws ShapeError when an invariant (ground E0, Permitted-free
  // environment) does not hold.
  void validate() const;
};

struct Query {
  std::string name;
  PolicyBase base;
  Decision goal = Decision::permit;
  std::vector<Term> goal_args;

  Literal goal_literal() const {
    return Literal{goal == Decision::permit, kPermitted, goal_args};
  }
};

// Printing. Variables print as x<id> unless that would collide with a symbol.
class Printer {
 public:
  explicit Printer(const Signature& sig) : sig_(sig) {}
  std::string term(const Term& t) const;
  std::string literal(const Literal& l) const;
  std::string clause(const Clause& c) const;
  std::string substitution(const Substitution& s) const;
  std::string variable(VarId v) const;

 private:
  const Signature& sig_;
};

}  // namespace lithium
