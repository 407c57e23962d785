#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lithium/cli.hpp"
#include "util.hpp"

using namespace lithium;
using json = nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "lithium");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args, int expect) {
  args.push_back("--format");
  args.push_back("json");
  CliRun r = run(std::move(args));
  EXPECT_EQ(r.code, expect) << r.err;
  return json::parse(r.out);
}

std::string data(const char* name) { return test::data_path(name); }

}  // namespace

TEST(Cli, CheckValid) {
  json j = run_json({"check", data("ex2_1.lith"), "--query", "alice_edits"}, cli::kExitYes);
  EXPECT_EQ(j["schema"], "lithium/1");
  EXPECT_EQ(j["command"], "check");
  EXPECT_EQ(j["verdict"], "Valid");
  EXPECT_TRUE(j["witness"].is_array());
  EXPECT_TRUE(j["timings"].contains("total_ms"));
}

TEST(Cli, CheckText) {
  CliRun r = run({"check", data("alice_play.lith"), "--query", "alice_plays", "--format", "text"});
  EXPECT_EQ(r.code, cli::kExitYes);
  EXPECT_NE(r.out.find("Valid"), std::string::npos);
}

TEST(Cli, CheckInvalidExitsOne) {
  std::string path = ::testing::TempDir() + "invalid.lith";
  {
    std::ofstream f(path);
    f << "const a : Subjects; const n : Actions; pred R(Subjects);\n"
         "policy p: forall x:Subjects. R(x) => permit(x, n);\n"
         "query q: permit(a, n);\n";
  }
  json j = run_json({"check", path, "--query", "q"}, cli::kExitNo);
  EXPECT_EQ(j["verdict"], "Invalid");
}

TEST(Cli, NotInLithiumExitsOne) {
  json j = run_json({"check", data("ex4_4.lith"), "--query", "carol_plays"}, cli::kExitNo);
  EXPECT_EQ(j["verdict"], "NotInLithium");
  EXPECT_FALSE(j["diagnosis"]["in_lithium"]);
  EXPECT_FALSE(j["diagnosis"]["bipolar_pairs"].empty());
}

TEST(Cli, FallbackAndFuelEnvironment) {
  json j = run_json({"check", data("exB_8.lith"), "--query", "bob_naps", "--fallback"}, cli::kExitYes);
  EXPECT_EQ(j["verdict"], "Valid");
  EXPECT_TRUE(j["fallback"]);
  ::setenv("LITHIUM_FUEL", "1", 1);
  json k = run_json({"check", data("ex4_4.lith"), "--query", "carol_plays", "--fallback"}, cli::kExitUnknown);
  ::unsetenv("LITHIUM_FUEL");
  EXPECT_EQ(k["verdict"], "Unknown");
}

TEST(Cli, OracleCrossCheck) {
  json j = run_json({"check", data("ex4_3.lith"), "--query", "cry", "--oracle"}, cli::kExitYes);
  EXPECT_EQ(j["oracle"]["finite_model"], "Valid");
  EXPECT_TRUE(j["oracle"]["agree"]);
  EXPECT_TRUE(j["oracle"]["witness_replay"]);
}

TEST(Cli, AllQueries) {
  json j = run_json({"check", data("faculty_separated.lith"), "--all-queries"}, cli::kExitYes);
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][0]["query"], "alice_naps");
  EXPECT_EQ(j["results"][1]["query"], "alice_no_chair");
}

TEST(Cli, Membership) {
  json j = run_json({"membership", data("ex4_3.lith"), "--query", "cry"}, cli::kExitYes);
  EXPECT_EQ(j["verdict"], "InLithium");
  EXPECT_EQ(j["diagnosis"]["suggested_path"], "full");
  run_json({"membership", data("ex4_4.lith")}, cli::kExitNo);
}

TEST(Cli, Consistency) {
  json j = run_json({"consistency", data("happy_clash.lith")}, cli::kExitNo);
  EXPECT_EQ(j["verdict"], "Inconsistent");
  EXPECT_TRUE(j.contains("witness"));
  run_json({"consistency", data("faculty_separated.lith")}, cli::kExitYes);
}

TEST(Cli, Separate) {
  json j = run_json({"separate", data("faculty_separated.lith")}, cli::kExitYes);
  EXPECT_EQ(j["verdict"], "Satisfied");
  EXPECT_EQ(j["diagnosis"]["resolvents"][0]["implied_by"], "e");
  run_json({"separate", data("faculty.lith")}, cli::kExitNo);
}

TEST(Cli, Unfold) {
  CliRun r = run({"unfold", data("video.lith"), "--preds", "Adult,Member", "--prune"});
  EXPECT_EQ(r.code, cli::kExitYes);
  Document d = parse_document(r.out);
  EXPECT_EQ(d.base.policies.size(), 1u);
  CliRun bad = run({"unfold", data("video.lith"), "--preds", "InAK"});
  EXPECT_EQ(bad.code, cli::kExitInput);
}

TEST(Cli, InputErrors) {
  CliRun missing = run({"check", data("nope.lith"), "--query", "q"});
  EXPECT_EQ(missing.code, cli::kExitInput);
  CliRun noquery = run({"check", data("ex2_1.lith"), "--query", "q"});
  EXPECT_EQ(noquery.code, cli::kExitInput);
  EXPECT_NE(noquery.err.find("no query"), std::string::npos);
  CliRun usage = run({"frobnicate"});
  EXPECT_EQ(usage.code, cli::kExitInput);
  CliRun format = run({"check", data("ex2_1.lith"), "--query", "alice_edits", "--format", "xml"});
  EXPECT_EQ(format.code, cli::kExitInput);
}

TEST(Cli, ParseErrorPosition) {
  std::string path = ::testing::TempDir() + "bad.lith";
  {
    std::ofstream f(path);
    f << "const a : Subjects;\nconst b : Actions\nquery q: permit(a, b);\n";
  }
  CliRun r = run({"check", path, "--query", "q"});
  EXPECT_EQ(r.code, cli::kExitInput);
  EXPECT_NE(r.err.find(":3:1: syntax error"), std::string::npos) << r.err;
}
