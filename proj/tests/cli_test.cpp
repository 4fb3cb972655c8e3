#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uss/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = uss::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, ParamsDefaults) {
  auto r = run({"params", "--n", "7", "--lmax", "1", "--p-target", "1e-10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "k = 900 (solved)"));
  EXPECT_TRUE(contains(r.out, "s_1 = 0.005\n"));
  EXPECT_TRUE(contains(r.out, "s_0 = 0.252\n"));
  EXPECT_TRUE(contains(r.out, "s_-1 = 0.499\n"));
  EXPECT_TRUE(contains(r.out, "delta_-1 = 0.5\n"));
  EXPECT_TRUE(contains(r.out, "bound level=1 n_p=15"));
  EXPECT_TRUE(contains(r.out, "7,900,8,8,accounting,"));
}

TEST(Cli, ParamsLiteralMode) {
  auto r = run({"params", "--mode", "literal"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "k = 223 (solved)"));
}

TEST(Cli, SmallestHonestRun) {
  auto r = run({"run", "--n", "2", "--k", "1", "--a", "1", "--t", "1", "--seed", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "recipient 0 level 0 tests_passed 2/2 accepted"));
  EXPECT_TRUE(contains(r.out, "recipient 1 level 0 tests_passed 2/2 accepted"));
  EXPECT_TRUE(contains(r.out, "accepted 2/2 at level 0"));
}

TEST(Cli, RunWithConfigFile) {
  auto r = run({"run", "--config", USS_TEST_DATA "/slow_link.json", "--k", "20", "--message",
                "10100101"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "forward hop 1 recipient 1 level 0"));
  auto bad = run({"run", "--message", "101"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(contains(bad.err, "message"));
}

TEST(Cli, SweepRowMatchesParams) {
  auto sweep = run({"sweep", "--axis", "p_target", "--from", "1e-4", "--to", "1e-14", "--n",
                    "7", "--a", "8"});
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  auto params = run({"params", "--n", "7", "--a", "8", "--p-target", "1e-10"});
  std::string acc_row;
  for (const auto& l : lines(params.out)) {
    if (contains(l, ",accounting,")) acc_row = l;
  }
  // n,k,a,t,mode,prep,share,total,id
  std::vector<std::string> f;
  std::stringstream ss(acc_row);
  for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
  ASSERT_EQ(f.size(), 9U);
  auto rows = lines(sweep.out);
  EXPECT_EQ(rows[0].rfind("# uss ", 0), 0U);
  EXPECT_TRUE(contains(rows[1], "# params "));
  bool found = false;
  for (const auto& l : rows) {
    if (l.rfind("1e-10,", 0) == 0) {
      found = true;
      EXPECT_TRUE(contains(l, "," + f[1] + "," + f[8] + ","));
      EXPECT_EQ(l.substr(l.rfind(',') + 1), f[7]);
    }
  }
  EXPECT_TRUE(found) << sweep.out;
  EXPECT_EQ(rows.size(), 3U + 11U);
}

TEST(Cli, AttackCsvToFile) {
  auto path = std::filesystem::temp_directory_path() / "uss_cli_attack.csv";
  auto r = run({"attack", "--kind", "forge", "--n", "3", "--k", "4", "--a", "1", "--t", "1",
                "--eps1", "0.252", "--trials", "200", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto rows = lines(buf.str());
  ASSERT_EQ(rows.size(), 4U);
  EXPECT_EQ(rows[2].rfind("kind,n,k,", 0), 0U);
  EXPECT_EQ(rows[3].rfind("forge,3,4,1,1,0,200,", 0), 0U);
  std::filesystem::remove(path);
}

TEST(Cli, Deterministic) {
  std::vector<std::string> args{"attack", "--k", "10", "--trials", "50", "--seed", "9",
                                "--gamma", "0.4,0.4,0.4,0,0,0,0"};
  EXPECT_EQ(run(args).out, run(args).out);
  std::vector<std::string> err{"sweep", "--axis", "error", "--from", "0", "--to", "0.004",
                               "--trials", "2", "--seed", "3"};
  auto a = run(err);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, run(err).out);
}

TEST(Cli, SeedFromEnvironment) {
  std::vector<std::string> args{"attack", "--k", "10", "--trials", "30", "--gamma", "0.4"};
  setenv("USS_SEED", "77", 1);
  auto env = run(args);
  unsetenv("USS_SEED");
  auto explicit_seed = args;
  explicit_seed.insert(explicit_seed.end(), {"--seed", "77"});
  EXPECT_EQ(env.out, run(explicit_seed).out);
  EXPECT_TRUE(contains(env.out, "seed=77"));
}

TEST(Cli, TimeToReady) {
  auto r = run({"time-to-ready", "--k", "906"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(contains(r.out, "time_to_ready_s = 101.472\n"));
  EXPECT_TRUE(contains(r.out, "binding_link = 0-1\n"));
  auto slow = run({"time-to-ready", "--k", "906", "--config", USS_TEST_DATA "/slow_link.json"});
  EXPECT_TRUE(contains(slow.out, "binding_link = 0-3\n"));
}

TEST(Cli, ValidationErrorsExitTwo) {
  auto check = [](std::vector<std::string> args, const std::string& name) {
    auto r = run(args);
    EXPECT_EQ(r.code, 2) << name;
    EXPECT_TRUE(contains(r.err, name)) << r.err;
  };
  check({"params", "--n", "1"}, "n");
  check({"params", "--n", "2.5"}, "--n");
  check({"params", "--p-target", "0"}, "p_target");
  check({"params", "--mode", "cubic"}, "mode");
  check({"params", "--bogus", "1"}, "bogus");
  check({"run", "--config", "/nonexistent/net.json"}, "config");
  check({"attack", "--kind", "replay"}, "kind");
  check({"sweep", "--axis", "k", "--from", "1", "--to", "2"}, "axis");
  check({"sweep", "--axis", "n", "--from", "2"}, "from");
  check({"sweep", "--axis", "error", "--from", "0", "--to", "0.05", "--step", "0.05"}, "q");
  auto none = run({});
  EXPECT_EQ(none.code, 2);
}

TEST(Cli, HelpAndVersion) {
  auto h = run({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_TRUE(contains(h.out, "time-to-ready"));
  auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, std::string(uss::cli::version()) + "\n");
}
