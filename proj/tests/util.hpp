// Small helpers shared by the unit tests.
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lithium/core.hpp"
#include "lithium/parser.hpp"

namespace lithium::test {

inline std::string data_path(std::string_view name) {
  return std::string(LITHIUM_TEST_DATA) + "/" + std::string(name);
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Document load(std::string_view name) { return parse_document(slurp(data_path(name))); }

inline const Query& query(const Document& d, std::string_view name) {
  const Query* q = d.find_query(name);
  if (!q) throw std::runtime_error("no query " + std::string(name));
  return *q;
}

inline Clause policy_clause(const Document& d, std::string_view label) {
  for (const Policy& p : d.base.policies)
    if (p.label == label) return policy_to_clause(p);
  throw std::runtime_error("no policy " + std::string(label));
}

inline Clause env_clause(const Document& d, std::string_view label) {
  for (const EnvRule& r : d.base.e1)
    if (r.label == label) return rule_to_clause(r);
  throw std::runtime_error("no rule " + std::string(label));
}

inline std::string show(const Document& d, const Clause& c) { return Printer(*d.base.signature).clause(c); }
inline std::string show(const Document& d, const Literal& l) { return Printer(*d.base.signature).literal(l); }
inline std::string show(const Document& d, const Term& t) { return Printer(*d.base.signature).term(t); }

inline Term constant(const Document& d, std::string_view name) {
  const Signature& sig = *d.base.signature;
  return Term::make(sig, *sig.find_symbol(name));
}

}  // namespace lithium::test
