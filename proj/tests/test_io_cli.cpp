#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "spiked/io.hpp"

using namespace spiked;

namespace {

struct CliRun {
  int status;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(SPIKED_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header_line(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // seed comment
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(FormatNumber, RoundTripsSeventeenDigits) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(CsvTable, SeedLineHeaderAndQuoting) {
  CsvTable t({"a", "b"});
  t.add_row({1.5, 2.0});
  t.add_cells({"x,y", 3});
  EXPECT_EQ(t.to_csv(42), "# seed=42\na,b\n1.5,2\n\"x,y\",3\n");
  EXPECT_THROW(t.add_row({1.0}), DomainError);
  const auto j = t.to_json(42);
  EXPECT_EQ(j["rows"][1]["a"], "x,y");
  EXPECT_EQ(j["seed"], 42);
}

TEST(ParseList, RangesAndLists) {
  const auto r = parse_real_list("0.1:1:0.1");
  ASSERT_EQ(r.size(), 10u);
  EXPECT_EQ(r[2], 0.3);
  EXPECT_EQ(r.back(), 1.0);
  EXPECT_EQ(parse_int_list("3,4,5,10"), (std::vector<int>{3, 4, 5, 10}));
  EXPECT_THROW(parse_real_list("1:0:0.1"), DomainError);
  EXPECT_THROW(parse_int_list("1.5"), DomainError);
  EXPECT_THROW(parse_real_list("a,b"), DomainError);
}

TEST(Cli, ThresholdSmoke) {
  const CliRun r = run_cli("threshold --prior rademacher --p 3");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("rademacher,3,b2xi,1.08"), std::string::npos) << r.out;
}

TEST(Cli, OutputHeaders) {
  EXPECT_EQ(header_line(run_cli("sweep --p-list 3 --rho-list 1").out), "p,rho,beta_c,bracket_lo,bracket_hi,h_bound");
  EXPECT_EQ(header_line(run_cli("gamma --b 1 --s-grid 0:1:0.5").out), "s,gamma,gamma_minus_s");
  EXPECT_EQ(header_line(run_cli("mmse --n 4 --beta-bar 1 --replicas 4").out), "t,mmse,stderr,dmse");
  EXPECT_EQ(header_line(run_cli("nishimori --n 4 --beta-bar 1 --replicas 4 --t-list 0.5").out), "t,lhs,rhs,z");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("threshold --prior sparse:2").status, 1);
  EXPECT_EQ(run_cli("threshold --p one").status, 1);
  EXPECT_EQ(run_cli("frobnicate").status, 1);
  EXPECT_EQ(run_cli("simulate-fe --n 30 --p 3").status, 2);
  EXPECT_EQ(run_cli("validate --level fast").status, 0);
}

TEST(Cli, SameSeedGivesIdenticalFilesAndSidecar) {
  const std::string dir = ::testing::TempDir();
  const std::string cfg = dir + "spiked_cfg.json";
  std::ofstream(cfg) << R"({"subcommand": "tv", "n-list": [5, 6], "beta-list": "0.5,1.5", "replicas": 40, "seed": 77})";
  const std::string a = dir + "spiked_a.csv", b = dir + "spiked_b.csv";
  ASSERT_EQ(run_cli("--config " + cfg + " --out " + a).status, 0);
  ASSERT_EQ(run_cli("--config " + cfg + " --out " + b + " --threads 1").status, 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(read_file(a).rfind("# seed=77\n", 0), 0u);
  const auto meta = nlohmann::json::parse(read_file(a + ".meta.json"));
  EXPECT_EQ(meta["seed"], 77);
  EXPECT_EQ(meta["subcommand"], "tv");
  EXPECT_EQ(meta["config"]["tv"]["replicas"], "40");
  EXPECT_TRUE(meta.contains("wall_time_seconds"));
  EXPECT_TRUE(meta.contains("version"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const std::string cfg = ::testing::TempDir() + "spiked_cfg2.json";
  std::ofstream(cfg) << R"({"subcommand": "threshold", "p": 4})";
  const CliRun file_only = run_cli("--config " + cfg);
  const CliRun overridden = run_cli("--config " + cfg + " --p 3");
  EXPECT_NE(file_only.out.find("rademacher,4,"), std::string::npos);
  EXPECT_NE(overridden.out.find("rademacher,3,"), std::string::npos);
}
