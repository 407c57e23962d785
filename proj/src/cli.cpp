#include "lithium/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lithium/engine.hpp"
#include "lithium/oracle.hpp"
#include "lithium/parser.hpp"

namespace lithium::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

struct Options {
  std::string command;
  std::string file;
  std::string query;
  std::string format = "text";
  std::optional<std::size_t> fuel;
  std::string preds;
  bool fallback = false;
  bool oracle = false;
  bool explain = false;
  bool all_queries = false;
  bool prune = false;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t resolve_fuel(const Options& o) {
  if (o.fuel) return *o.fuel;
  if (const char* env = std::getenv("LITHIUM_FUEL")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && end != env) return static_cast<std::size_t>(v);
    throw InputError(std::string("LITHIUM_FUEL is not a number: ") + env);
  }
  return kDefaultFuel;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json derivation_json(const Derivation& d, const Printer& pr) {
  json steps = json::array();
  for (const DerivationStep& s : d.steps) {
    json j;
    j["clause"] = pr.clause(s.clause);
    switch (s.kind) {
      case DerivationStep::Kind::axiom:
        j["rule"] = "axiom";
        j["label"] = s.label;
        break;
      case DerivationStep::Kind::resolve:
        j["rule"] = "resolve";
        j["left"] = s.left;
        j["right"] = s.right;
        j["left_literal"] = s.left_literal;
        j["right_literal"] = s.right_literal;
        j["unifier"] = pr.substitution(s.unifier);
        break;
      case DerivationStep::Kind::instance:
        j["rule"] = "instance";
        j["parent"] = s.left;
        j["unifier"] = pr.substitution(s.unifier);
        break;
    }
    steps.push_back(std::move(j));
  }
  return steps;
}

json membership_json(const MembershipReport& m, const Printer& pr) {
  json j;
  j["in_lithium"] = m.in_lithium;
  j["equality_safe"] = m.equality.safe;
  json viol = json::array();
  for (const EqViolation& v : m.equality.violations)
    viol.push_back({{"kind", std::string(to_string(v.kind))}, {"where", v.where}, {"detail", v.detail}});
  j["violations"] = std::move(viol);
  json clauses = json::array();
  for (std::size_t i = 0; i < m.clauses.size(); ++i) {
    const Clause& c = m.clauses[i].clause;
    json bip = json::array();
    for (std::size_t l = 0; l < c.size(); ++l)
      if (m.bipolar.flags[i][l]) bip.push_back(pr.literal(c[l]));
    clauses.push_back({{"label", m.clauses[i].label},
                       {"clause", pr.clause(c)},
                       {"bipolar", std::move(bip)},
                       {"k", m.k[i]}});
  }
  j["clauses"] = std::move(clauses);
  json pairs = json::array();
  for (const BipolarPair& p : m.bipolar.pairs) {
    auto side = [&](LiteralRef r) {
      return json{{"label", m.clauses[r.clause].label},
                  {"literal", pr.literal(m.clauses[r.clause].clause[r.literal])}};
    };
    pairs.push_back({{"first", side(p.first)}, {"second", side(p.second)}});
  }
  j["bipolar_pairs"] = std::move(pairs);
  j["one_variable_per_literal"] = m.one_variable_per_literal;
  j["suggested_path"] = std::string(to_string(m.suggested));
  return j;
}

void membership_text(const MembershipReport& m, const Printer& pr, std::ostream& os) {
  os << (m.in_lithium ? "in Lithium" : "not in Lithium") << " (suggested path: " << to_string(m.suggested)
     << ")\n";
  for (const EqViolation& v : m.equality.violations)
    os << "  equality: " << to_string(v.kind) << " in " << v.where << ": " << v.detail << "\n";
  for (std::size_t i = 0; i < m.clauses.size(); ++i) {
    const Clause& c = m.clauses[i].clause;
    os << "  " << m.clauses[i].label << ": " << pr.clause(c) << "  k=" << m.k[i];
    if (m.bipolar.per_clause_count[i]) {
      os << "  bipolar:";
      for (std::size_t l = 0; l < c.size(); ++l)
        if (m.bipolar.flags[i][l]) os << " " << pr.literal(c[l]);
    }
    os << "\n";
  }
  for (const BipolarPair& p : m.bipolar.pairs)
    os << "  pair: " << m.clauses[p.first.clause].label << " "
       << pr.literal(m.clauses[p.first.clause].clause[p.first.literal]) << " ~ "
       << m.clauses[p.second.clause].label << " "
       << pr.literal(m.clauses[p.second.clause].clause[p.second.literal]) << "\n";
}

int verdict_exit(const Verdict& v) {
  if (std::holds_alternative<Valid>(v)) return kExitYes;
  if (std::holds_alternative<Unknown>(v)) return kExitUnknown;
  return kExitNo;
}

struct CheckOutcome {
  json report;
  std::string text;
  int code = kExitYes;
};

CheckOutcome check_one(const Query& q, const Options& o, std::size_t fuel, Execution exec) {
  CheckOutcome r;
  Printer pr(*q.base.signature);
  auto t0 = Clock::now();
  AnswerOptions ao{o.fallback, fuel, exec};
  Verdict v = answer(q, ao);
  double answer_ms = ms_since(t0);
  r.code = verdict_exit(v);

  json& j = r.report;
  std::ostringstream tx;
  j["query"] = q.name;
  j["verdict"] = std::string(verdict_name(v));
  tx << "query " << q.name << ": " << verdict_name(v);
  if (auto* valid = std::get_if<Valid>(&v)) {
    j["vacuous"] = valid->vacuous;
    j["fallback"] = valid->fallback;
    j["separated"] = valid->separated;
    j["witness"] = derivation_json(valid->witness, pr);
    if (valid->vacuous) tx << " (environment is contradictory)";
    if (valid->fallback) tx << " (by saturation, outside Lithium)";
    if (valid->separated) tx << " (on the " << to_string(q.goal) << " policies alone)";
  } else if (auto* inv = std::get_if<Invalid>(&v)) {
    j["fallback"] = inv->fallback;
    j["separated"] = inv->separated;
    if (inv->separated) tx << " (on the " << to_string(q.goal) << " policies alone)";
    if (inv->fallback) tx << " (by saturation, outside Lithium)";
  } else if (auto* nil = std::get_if<NotInLithium>(&v)) {
    j["diagnosis"] = membership_json(nil->report, pr);
  } else if (auto* unk = std::get_if<Unknown>(&v)) {
    j["fuel_spent"] = unk->fuel_spent;
    tx << " (fuel spent: " << unk->fuel_spent << ")";
  }
  tx << "\n";
  if (o.explain) {
    if (auto* valid = std::get_if<Valid>(&v)) tx << to_text(valid->witness, *q.base.signature);
    if (auto* nil = std::get_if<NotInLithium>(&v)) membership_text(nil->report, pr, tx);
  } else if (auto* nil = std::get_if<NotInLithium>(&v)) {
    membership_text(nil->report, pr, tx);
  }

  json timings{{"answer_ms", answer_ms}};
  if (o.oracle) {
    auto t1 = Clock::now();
    json oj;
    if (auto* valid = std::get_if<Valid>(&v)) {
      CheckResult c = check_witness(q, *valid);
      oj["witness_replay"] = c.ok;
      if (!c.ok) {
        oj["witness_error"] = "step " + std::to_string(c.step) + ": " + c.error;
        r.code = kExitUnknown;
        tx << "oracle: witness replay failed at step " << c.step << ": " << c.error << "\n";
      }
    }
    try {
      OracleVerdict ov = finite_model_valid(q, {}, exec);
      oj["finite_model"] = ov.valid ? "Valid" : "Invalid";
      bool definite = std::holds_alternative<Valid>(v) || std::holds_alternative<Invalid>(v);
      bool agree = !definite || ov.valid == std::holds_alternative<Valid>(v);
      oj["agree"] = agree;
      tx << "oracle: finite models say " << (ov.valid ? "Valid" : "Invalid");
      if (!agree) {
        r.code = kExitUnknown;
        tx << ", DISAGREEMENT";
      }
      tx << "\n";
      if (ov.countermodel) {
        oj["countermodel"] = to_table(*ov.countermodel, *q.base.signature);
        if (o.explain) tx << to_table(*ov.countermodel, *q.base.signature);
      }
    } catch (const Error& e) {
      SaturationOutcome so = ground_saturation_valid(q, fuel, exec);
      oj["finite_model"] = nullptr;
      oj["finite_model_refused"] = e.what();
      oj["saturation"] = so.valid ? "Valid" : "Unknown";
      bool disagree = so.valid && std::holds_alternative<Invalid>(v);
      oj["agree"] = !disagree;
      tx << "oracle: " << e.what() << "; saturation says " << (so.valid ? "Valid" : "Unknown");
      if (disagree) {
        r.code = kExitUnknown;
        tx << ", DISAGREEMENT";
      }
      tx << "\n";
    }
    timings["oracle_ms"] = ms_since(t1);
    j["oracle"] = std::move(oj);
  }
  j["timings"] = std::move(timings);
  r.text = tx.str();
  return r;
}

Query base_query(const Document& doc) {
  Query q;
  q.name = "";
  q.base = doc.base;
  return q;
}

int run_command(const Options& o, std::ostream& out) {
  auto t0 = Clock::now();
  const std::size_t fuel = resolve_fuel(o);
  Document doc = parse_document(read_file(o.file));
  const double parse_ms = ms_since(t0);
  const Printer pr(*doc.base.signature);
  const bool as_json = o.format == "json";

  json report;
  report["schema"] = "lithium/1";
  report["command"] = o.command;
  report["file"] = o.file;
  std::ostringstream text;
  int code = kExitYes;

  if (o.command == "check") {
    std::vector<const Query*> targets;
    if (o.all_queries) {
      for (const Query& q : doc.queries) targets.push_back(&q);
    } else {
      if (o.query.empty()) throw InputError("check needs --query NAME or --all-queries");
      const Query* q = doc.find_query(o.query);
      if (!q) throw InputError("no query named '" + o.query + "' in " + o.file);
      targets.push_back(q);
    }
    std::vector<CheckOutcome> results(targets.size());
    // Queries in parallel, each one serial inside; output stays in document order.
    Execution outer = targets.size() > 1 ? Execution::parallel : Execution::serial;
    Execution inner = targets.size() > 1 ? Execution::serial : Execution::parallel;
    for_each_index(targets.size(), outer,
                   [&](std::size_t i) { results[i] = check_one(*targets[i], o, fuel, inner); });
    code = kExitYes;
    for (const CheckOutcome& r : results) code = std::max(code, r.code);
    if (o.all_queries) {
      json arr = json::array();
      for (CheckOutcome& r : results) {
        arr.push_back(std::move(r.report));
        text << r.text;
      }
      report["verdict"] = code == kExitYes ? "Valid" : (code == kExitUnknown ? "Unknown" : "Invalid");
      report["results"] = std::move(arr);
    } else {
      json& r = results[0].report;
      for (auto it = r.begin(); it != r.end(); ++it)
        if (it.key() != "timings") report[it.key()] = it.value();
      report["timings"] = r["timings"];
      text << results[0].text;
    }
  } else if (o.command == "membership") {
    Query q = base_query(doc);
    if (!o.query.empty()) {
      const Query* found = doc.find_query(o.query);
      if (!found) throw InputError("no query named '" + o.query + "' in " + o.file);
      q = *found;
    }
    MembershipReport m = membership(q);
    code = m.in_lithium ? kExitYes : kExitNo;
    report["verdict"] = m.in_lithium ? "InLithium" : "NotInLithium";
    report["diagnosis"] = membership_json(m, pr);
    membership_text(m, pr, text);
  } else if (o.command == "consistency") {
    AnswerOptions ao{o.fallback, fuel, Execution::parallel};
    ConsistencyReport c = check_consistency(doc.base, ao);
    report["verdict"] = std::string(to_string(c.status));
    code = c.status == ConsistencyReport::Status::consistent     ? kExitYes
           : c.status == ConsistencyReport::Status::inconsistent ? kExitNo
                                                                 : kExitUnknown;
    json d;
    d["by_separation"] = c.by_separation;
    d["detail"] = c.detail;
    if (c.permit) d["permit"] = std::string(verdict_name(*c.permit));
    if (c.deny) d["deny"] = std::string(verdict_name(*c.deny));
    report["diagnosis"] = std::move(d);
    text << to_string(c.status) << ": " << c.detail << "\n";
    if (c.witness) {
      report["witness"] = derivation_json(*c.witness, pr);
      if (o.explain) text << to_text(*c.witness, *doc.base.signature);
    }
    if (c.status == ConsistencyReport::Status::inconsistent && c.permit && c.deny) {
      json both;
      both["permit"] = derivation_json(std::get<Valid>(*c.permit).witness, pr);
      both["deny"] = derivation_json(std::get<Valid>(*c.deny).witness, pr);
      report["witness"] = std::move(both);
    }
  } else if (o.command == "separate") {
    SeparationReport s = check_separation(doc.base);
    code = s.satisfied ? kExitYes : kExitNo;
    report["verdict"] = s.satisfied ? "Satisfied" : "Missing";
    json items = json::array();
    text << (s.satisfied ? "separation holds" : "separation fails") << "\n";
    for (const SeparationItem& it : s.resolvents) {
      json j{{"permit", it.permit_label},
             {"deny", it.deny_label},
             {"resolvent", pr.clause(it.resolvent)},
             {"status", std::string(to_string(it.status))}};
      if (!it.implied_by.empty()) j["implied_by"] = it.implied_by;
      items.push_back(std::move(j));
      text << "  " << it.permit_label << " x " << it.deny_label << ": " << pr.clause(it.resolvent) << "  "
           << to_string(it.status);
      if (!it.implied_by.empty()) text << " (" << it.implied_by << ")";
      text << "\n";
    }
    for (const std::string& l : s.impure) text << "  impure: " << l << "\n";
    report["diagnosis"] = {{"resolvents", std::move(items)}, {"impure", s.impure}};
  } else if (o.command == "unfold") {
    std::set<std::string> preds;
    std::stringstream ss(o.preds);
    for (std::string p; std::getline(ss, p, ',');)
      if (!p.empty()) preds.insert(p);
    if (preds.empty()) throw InputError("unfold needs --preds a,b");
    PolicyBase b = unfold_definitions(doc.base, preds, {o.prune});
    std::string rendered = render(b, doc.queries);
    report["verdict"] = "Unfolded";
    report["base"] = rendered;
    report["policies"] = b.policies.size();
    text << rendered;
  }

  report["timings"]["parse_ms"] = parse_ms;
  report["timings"]["total_ms"] = ms_since(t0);
  if (as_json)
    out << report.dump(2) << "\n";
  else
    out << text.str();
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decide permissions and consistency of .lith policy bases"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "policy base (.lith)")->required();
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--fuel", o.fuel, "saturation fuel (overrides LITHIUM_FUEL)");
  };
  CLI::App* check = app.add_subcommand("check", "verdict for a named query");
  add_common(check);
  check->add_option("--query", o.query, "query name");
  check->add_flag("--fallback", o.fallback, "saturate queries outside Lithium");
  check->add_flag("--oracle", o.oracle, "cross-check with the finite-model oracle");
  check->add_flag("--explain", o.explain, "print the witness or diagnosis");
  check->add_flag("--all-queries", o.all_queries, "check every query of the file");
  CLI::App* mem = app.add_subcommand("membership", "is the query in Lithium");
  add_common(mem);
  mem->add_option("--query", o.query, "query name");
  CLI::App* cons = app.add_subcommand("consistency", "can a permission be both granted and denied");
  add_common(cons);
  cons->add_flag("--fallback", o.fallback, "saturate queries outside Lithium");
  cons->add_flag("--explain", o.explain, "print the refutation when one is found");
  CLI::App* sep = app.add_subcommand("separate", "resolvents of permitting and denying policies");
  add_common(sep);
  CLI::App* unf = app.add_subcommand("unfold", "replace defined predicates by their definitions");
  add_common(unf);
  unf->add_option("--preds", o.preds, "comma-separated predicate names")->required();
  unf->add_flag("--prune", o.prune, "drop definitions that cannot hold given E0");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitYes;
  } catch (const CLI::ParseError& e) {
    err << "lithium: " << e.what() << "\n";
    return kExitInput;
  }
  for (CLI::App* sub : app.get_subcommands()) o.command = sub->get_name();

  try {
    return run_command(o, out);
  } catch (const ParseError& e) {
    err << o.file << ":" << e.where().line << ":" << e.where().column << ": " << to_string(e.kind())
        << " error: " << e.detail();
    if (!e.expected().empty()) {
      err << " (expected";
      for (const std::string& x : e.expected()) err << " " << x;
      err << ")";
    }
    err << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "lithium: " << e.what() << "\n";
    return kExitInput;
  } catch (const NotADefinition& e) {
    err << "lithium: not a definition: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "lithium: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace lithium::cli
