// Reader and writer for the .lith policy-base format. The grammar is
// documented in README.md.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lithium/core.hpp"

namespace lithium {

struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;
};

class ParseError : public Error {
 public:
  enum class Kind { syntax, sort, shape };

  ParseError(Kind kind, SourceLocation where, std::string message,
             std::vector<std::string> expected = {});

  Kind kind() const { return kind_; }
  SourceLocation where() const { return where_; }
  const std::string& detail() const { return detail_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  Kind kind_;
  SourceLocation where_;
  std::string detail_;
  std::vector<std::string> expected_;
};

std::string_view to_string(ParseError::Kind k);

struct SourceItem {
  enum class Kind { declaration, fact, rule, policy, query };
  Kind kind;
  std::string label;  // empty for declarations and ground facts
  SourceLocation where;
};

struct Document {
  PolicyBase base;
  std::vector<Query> queries;
  std::vector<SourceItem> items;

  const Query* find_query(std::string_view name) const;
};

// Throws ParseError; never terminates the process on bad input.
Document parse_document(std::string_view text);
PolicyBase parse_base(std::string_view text);

// Inverse of parse_document up to variable renaming.
std::string render(const PolicyBase& base, const std::vector<Query>& queries = {});

}  // namespace lithium
