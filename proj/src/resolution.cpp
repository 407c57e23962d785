#include "lithium/resolution.hpp"

#include <cassert>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace lithium {

VarId rename_offset_for(const Clause& left) {
  auto mv = left.max_variable();
  return mv ? *mv + 1 : 0;
}

Clause resolvent_of(const Clause& left, const Clause& renamed_right, std::size_t li,
                    std::size_t ri, const Substitution& sigma) {
  Literal lp = sigma.apply(left[li]);
  Literal rp = sigma.apply(renamed_right[ri]);
  std::vector<Literal> out;
  for (const Literal& l : left.literals()) {
    Literal x = sigma.apply(l);
    if (x != lp) out.push_back(std::move(x));
  }
  for (const Literal& l : renamed_right.literals()) {
    Literal x = sigma.apply(l);
    if (x != rp) out.push_back(std::move(x));
  }
  return Clause(std::move(out));
}

std::vector<Resolvent> resolve_renamed(const Clause& left, const Clause& right) {
  std::vector<Resolvent> out;
  bool any = std::ranges::any_of(left.literals(), [&](const Literal& a) {
    return std::ranges::any_of(right.literals(), [&](const Literal& b) {
      return a.positive != b.positive && a.predicate == b.predicate;
    });
  });
  if (!any) return out;
  VarId offset = rename_offset_for(left);
  Clause r = rename_offset(right, offset);
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (left[i].positive == r[j].positive || left[i].predicate != r[j].predicate) continue;
      auto sigma = mgu(left[i], r[j]);
      if (!sigma) continue;
      out.push_back({resolvent_of(left, r, i, j, *sigma), i, j, offset, std::move(*sigma)});
    }
  }
  return out;
}

std::vector<Resolvent> resolve(const Clause& left, const Clause& right) {
  if (left == right) throw SameClause();
  return resolve_renamed(left, right);
}

Clause reflexivity_clause(SortId sort) {
  Term x = Term::variable(0, sort);
  return Clause({Literal{true, kEquality, {x, x}}});
}

std::vector<Factor> factors(const Clause& c) {
  std::vector<Factor> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if (c[i].positive != c[j].positive || c[i].predicate != c[j].predicate) continue;
      auto sigma = mgu(c[i], c[j]);
      if (!sigma) continue;
      out.push_back({sigma->apply(c), std::move(*sigma)});
    }
  }
  return out;
}

namespace {

std::uint64_t key_bit(const Literal& l) {
  return std::uint64_t{1} << ((l.predicate * 2 + (l.positive ? 1 : 0)) % 64);
}

struct Masks {
  std::uint64_t all = 0;
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

Masks masks_of(const Clause& c) {
  Masks m;
  for (const Literal& l : c.literals()) {
    m.all |= key_bit(l);
    std::uint64_t p = std::uint64_t{1} << (l.predicate % 64);
    (l.positive ? m.pos : m.neg) |= p;
  }
  return m;
}

bool may_resolve(const Masks& a, const Masks& b) { return (a.pos & b.neg) || (a.neg & b.pos); }

}  // namespace

ClosureResult restricted_closure(std::span<const LabeledClause> clauses, Execution exec,
                                 ClosureBounds* bounds) {
  std::vector<Clause> plain;
  plain.reserve(clauses.size());
  for (const LabeledClause& c : clauses) plain.push_back(c.clause);
  BipolarReport report = bipolar_report(plain, nullptr, exec);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    if (report.per_clause_count[i] > 1) {
      std::vector<BipolarPair> mine;
      for (const BipolarPair& p : report.pairs)
        if (p.first.clause == i || p.second.clause == i) mine.push_back(p);
      throw PreconditionViolated("clause '" + clauses[i].label + "' has " +
                                     std::to_string(report.per_clause_count[i]) +
                                     " bipolar literals",
                                 i, std::move(mine));
    }
  }

  ClosureResult out;
  std::set<Clause> seen;
  for (const LabeledClause& c : clauses) {
    Provenance p;
    p.label = c.label;
    out.clauses.push_back({c.clause, std::move(p)});
    seen.insert(canonical_variant(c.clause));
  }

  const std::size_t n = plain.size();
  // Pairs (i, j), i < j, in row-major order, found through a (predicate,
  // sign) index so that only clauses with a complementary predicate meet.
  std::map<std::pair<SymbolId, bool>, std::vector<std::size_t>> by_key;
  for (std::size_t i = 0; i < n; ++i)
    for (const Literal& l : plain[i].literals()) {
      auto& list = by_key[{l.predicate, l.positive}];
      if (list.empty() || list.back() != i) list.push_back(i);
    }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> partners;
  for (std::size_t i = 0; i < n; ++i) {
    partners.clear();
    for (const Literal& l : plain[i].literals()) {
      auto it = by_key.find({l.predicate, !l.positive});
      if (it == by_key.end()) continue;
      auto from = std::upper_bound(it->second.begin(), it->second.end(), i);
      partners.insert(partners.end(), from, it->second.end());
    }
    std::ranges::sort(partners);
    auto dup = std::ranges::unique(partners);
    partners.erase(dup.begin(), dup.end());
    for (std::size_t j : partners)
      if (plain[i] != plain[j]) pairs.emplace_back(i, j);
  }

  std::vector<std::vector<Resolvent>> found(pairs.size());
  for_each_index(pairs.size(), exec, [&](std::size_t k) {
    found[k] = resolve(plain[pairs[k].first], plain[pairs[k].second]);
  });

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (Resolvent& r : found[k]) {
      ++out.generated;
      if (!seen.insert(canonical_variant(r.clause)).second) continue;
      Provenance p;
      p.kind = Provenance::Kind::resolvent;
      p.left = pairs[k].first;
      p.right = pairs[k].second;
      p.left_literal = r.left_literal;
      p.right_literal = r.right_literal;
      p.offset = r.offset;
      p.unifier = std::move(r.unifier);
      p.depth = 1;
      out.clauses.push_back({std::move(r.clause), std::move(p)});
    }
  }

  ClosureBounds b;
  b.inputs = n;
  b.size = out.clauses.size();
  for (std::size_t i = 0; i < n; ++i) {
    b.longest_input = std::max(b.longest_input, plain[i].length());
    b.longest_term = std::max(b.longest_term, plain[i].longest_term());
    b.k_in = std::max(b.k_in, unconstrained_count(plain[i], &report.flags[i]));
  }
  for (const ClosureEntry& e : out.clauses) {
    b.longest_output = std::max(b.longest_output, e.clause.length());
    b.max_depth = std::max(b.max_depth, e.from.depth);
    b.k_out = std::max(b.k_out, unconstrained_count(e.clause));
  }
  assert(b.size_ok() && b.depth_ok());
  if (bounds) *bounds = b;
  return out;
}

namespace {

class Saturator {
 public:
  Saturator(const SaturateOptions& opts) : opts_(opts) {}

  ClosureResult run(std::span<const LabeledClause> inputs) {
    std::set<SortId> eq_sorts;
    for (const LabeledClause& c : inputs)
      for (const Literal& l : c.clause.literals())
        if (l.is_equality()) eq_sorts.insert(l.args[0].sort());
    for (const LabeledClause& c : inputs) {
      Provenance p;
      p.label = c.label;
      if (add(c.clause, std::move(p))) return finish();
    }
    for (SortId s : eq_sorts) {
      Provenance p;
      p.label = "reflexivity";
      if (add(reflexivity_clause(s), std::move(p), true)) return finish();
    }

    std::size_t new_begin = 0;
    while (new_begin < out_.clauses.size()) {
      const std::size_t new_end = out_.clauses.size();
      if (level(new_begin, new_end)) return finish();
      new_begin = new_end;
    }
    return finish();
  }

 private:
  struct Task {
    bool factor = false;
    std::size_t i = 0;
    std::size_t j = 0;
  };
  struct Generated {
    Clause clause;
    Provenance from;
  };

  ClosureResult finish() { return std::move(out_); }

  // Returns true when saturation must stop.
  bool level(std::size_t nb, std::size_t ne) {
    std::vector<Task> chunk;
    auto flush = [&]() -> bool {
      std::vector<std::vector<Generated>> made(chunk.size());
      for_each_index(chunk.size(), opts_.exec, [&](std::size_t k) { made[k] = perform(chunk[k]); });
      chunk.clear();
      for (auto& batch : made) {
        for (Generated& g : batch) {
          if (++out_.generated > opts_.fuel) {
            out_.exhausted = true;
            return true;
          }
          if (opts_.max_literals && g.clause.size() > opts_.max_literals) {
            out_.truncated = true;
            continue;
          }
          if (add(std::move(g.clause), std::move(g.from))) return true;
        }
      }
      return false;
    };
    for (std::size_t j = nb; j < ne; ++j) {
      chunk.push_back({true, j, j});
      for (std::size_t i = 0; i <= j; ++i) {
        if (!may_resolve(masks_[i], masks_[j])) continue;
        chunk.push_back({false, i, j});
        if (chunk.size() >= kChunk && flush()) return true;
      }
    }
    return !chunk.empty() && flush();
  }

  std::vector<Generated> perform(const Task& t) const {
    std::vector<Generated> out;
    const ClosureEntry& a = out_.clauses[t.i];
    unsigned depth = 0;
    if (t.factor) {
      for (Factor& f : factors(a.clause)) {
        Provenance p;
        p.kind = Provenance::Kind::factor;
        p.left = t.i;
        p.unifier = std::move(f.unifier);
        p.depth = a.from.depth + 1;
        out.push_back({std::move(f.clause), std::move(p)});
      }
      return out;
    }
    const ClosureEntry& b = out_.clauses[t.j];
    depth = std::max(a.from.depth, b.from.depth) + 1;
    for (Resolvent& r : resolve_renamed(a.clause, b.clause)) {
      Provenance p;
      p.kind = Provenance::Kind::resolvent;
      p.left = t.i;
      p.right = t.j;
      p.left_literal = r.left_literal;
      p.right_literal = r.right_literal;
      p.offset = r.offset;
      p.unifier = std::move(r.unifier);
      p.depth = depth;
      out.push_back({std::move(r.clause), std::move(p)});
    }
    return out;
  }

  bool subsumed(const Clause& c, const Masks& m) const {
    std::size_t n = out_.clauses.size();
    std::size_t len = c.length();
    auto hit = [&](std::size_t k) {
      const Masks& km = masks_[k];
      const Clause& d = out_.clauses[k].clause;
      if ((km.all & ~m.all) != 0 || d.size() > c.size() || d.length() > len) return false;
      return subsumes(d, c, kSubsumptionSteps).has_value();
    };
    Execution exec = n >= 4096 ? opts_.exec : Execution::serial;
    return find_first_index(n, exec, hit) < n;
  }

  // Returns true on the empty clause.
  bool add(Clause c, Provenance from, bool axiom = false) {
    if (!axiom && c.is_tautology()) return false;
    Clause canon = canonical_variant(c);
    if (seen_.contains(canon)) return false;
    Masks m = masks_of(c);
    if (from.kind != Provenance::Kind::input && subsumed(c, m)) return false;
    seen_.insert(std::move(canon));
    masks_.push_back(m);
    bool empty = c.empty();
    out_.clauses.push_back({std::move(c), std::move(from)});
    if (empty) out_.refutation = out_.clauses.size() - 1;
    return empty;
  }

  static constexpr std::size_t kChunk = 256;
  // Forward subsumption may miss a subsumer; that only keeps a redundant clause.
  static constexpr std::size_t kSubsumptionSteps = 2000;

  SaturateOptions opts_;
  ClosureResult out_;
  std::set<Clause> seen_;
  std::vector<Masks> masks_;
};

}  // namespace

ClosureResult saturate(std::span<const LabeledClause> clauses, const SaturateOptions& opts) {
  return Saturator(opts).run(clauses);
}

Derivation extract_derivation(const ClosureResult& r, std::size_t index) {
  // Ancestors in index order; parents always precede children.
  std::vector<char> need(r.clauses.size(), 0);
  std::vector<std::size_t> stack{index};
  while (!stack.empty()) {
    std::size_t k = stack.back();
    stack.pop_back();
    if (need[k]) continue;
    need[k] = 1;
    const Provenance& p = r.clauses[k].from;
    if (p.kind == Provenance::Kind::resolvent) {
      stack.push_back(p.left);
      stack.push_back(p.right);
    } else if (p.kind == Provenance::Kind::factor) {
      stack.push_back(p.left);
    }
  }
  Derivation d;
  std::vector<std::size_t> pos(r.clauses.size(), 0);
  for (std::size_t k = 0; k <= index; ++k) {
    if (!need[k]) continue;
    const ClosureEntry& e = r.clauses[k];
    DerivationStep s;
    s.clause = e.clause;
    switch (e.from.kind) {
      case Provenance::Kind::input:
        s.kind = DerivationStep::Kind::axiom;
        s.label = e.from.label;
        break;
      case Provenance::Kind::resolvent:
        s.kind = DerivationStep::Kind::resolve;
        s.left = pos[e.from.left];
        s.right = pos[e.from.right];
        s.left_literal = e.from.left_literal;
        s.right_literal = e.from.right_literal;
        s.unifier = e.from.unifier;
        break;
      case Provenance::Kind::factor:
        s.kind = DerivationStep::Kind::instance;
        s.left = pos[e.from.left];
        s.unifier = e.from.unifier;
        break;
    }
    pos[k] = d.steps.size();
    d.steps.push_back(std::move(s));
  }
  return d;
}

std::string to_text(const Derivation& d, const Signature& sig) {
  Printer pr(sig);
  std::ostringstream os;
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const DerivationStep& s = d.steps[i];
    os << "[" << i << "] " << pr.clause(s.clause);
    switch (s.kind) {
      case DerivationStep::Kind::axiom:
        os << "  axiom " << s.label;
        break;
      case DerivationStep::Kind::resolve:
        os << "  resolve [" << s.left << "]." << s.left_literal << " with [" << s.right << "]."
           << s.right_literal << " by " << pr.substitution(s.unifier);
        break;
      case DerivationStep::Kind::instance:
        os << "  instance of [" << s.left << "] by " << pr.substitution(s.unifier);
        break;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace lithium
