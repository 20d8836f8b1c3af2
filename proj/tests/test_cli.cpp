#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "graph_calculus/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct Output {
  int status = -1;
  std::string out;  // stdout and stderr interleaved
};

Output run_cli(const std::string& args) {
  const std::string cmd = std::string("GRAPH_CALCULUS_LOG=quiet '") + GRAPH_CALCULUS_CLI + "' " + args + " 2>&1";
  Output o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / (std::string("gc_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& body) const { std::ofstream(dir_ / name) << body; }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunSingleCellWritesResults) {
  write("spec.json", R"({"manifold":"circle","function":"sin_theta","N_list":[200],"epsilon_list":[0.05]})");
  const auto o = run_cli("run --config " + path("spec.json") + " --out " + path("out"));
  ASSERT_EQ(o.status, 0) << o.out;
  const auto table = gcalc::read_table(path("out/results.csv"));
  EXPECT_EQ(table.rows.size(), 1u);
  const auto summary = nlohmann::json::parse(gcalc::read_file(path("out/summary.json")));
  EXPECT_EQ(summary["cells"], 1);
}

TEST_F(CliTest, RunIsByteIdenticalAcrossReruns) {
  write("spec.json",
        R"({"manifold":"sphere","function":"z","N_list":[100,150],"epsilon_list":[0.1,0.2],"trials":2,"master_seed":9})");
  ASSERT_EQ(run_cli("run --config " + path("spec.json") + " --out " + path("a") + " --parallelism 1").status, 0);
  ASSERT_EQ(run_cli("run --config " + path("spec.json") + " --out " + path("b") + " --parallelism 3").status, 0);
  EXPECT_EQ(gcalc::read_file(path("a/results.csv")), gcalc::read_file(path("b/results.csv")));
}

TEST_F(CliTest, RunRejectsUnknownManifold) {
  write("spec.json", R"({"manifold":"moebius","function":"z","N_list":[100],"epsilon_list":[0.1]})");
  const auto o = run_cli("run --config " + path("spec.json") + " --out " + path("out"));
  EXPECT_EQ(o.status, 1);
  for (const char* id : {"circle", "sphere", "torus"}) EXPECT_NE(o.out.find(id), std::string::npos) << o.out;
  EXPECT_FALSE(fs::exists(path("out/results.csv")));
}

TEST_F(CliTest, RunOverridesSeedAndMode) {
  write("spec.json", R"({"manifold":"circle","function":"sin_theta","N_list":[100],"epsilon_list":[0.05]})");
  ASSERT_EQ(run_cli("run --config " + path("spec.json") + " --out " + path("a") + " --seed 5 --mode sparse --tau 1e-6").status, 0);
  const auto t = gcalc::read_table(path("a/results.csv"));
  EXPECT_EQ(t.rows[0][t.column("mode")], "sparse");
}

TEST_F(CliTest, VerifyPassesAndInjectionFails) {
  const auto ok = run_cli("verify --N 50 --seeds 2");
  EXPECT_EQ(ok.status, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos) << ok.out;
  const auto bad = run_cli("verify --N 50 --seeds 1 --inject-asymmetry");
  EXPECT_EQ(bad.status, 2) << bad.out;
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos) << bad.out;
  EXPECT_EQ(run_cli("verify --N 5000").status, 1);
}

TEST_F(CliTest, ListCommandsEmitJson) {
  const auto m = run_cli("list-manifolds");
  ASSERT_EQ(m.status, 0);
  EXPECT_EQ(nlohmann::json::parse(m.out).size(), 3u);
  const auto f = run_cli("list-functions --manifold sphere");
  ASSERT_EQ(f.status, 0);
  EXPECT_NE(f.out.find("xy"), std::string::npos);
  EXPECT_EQ(run_cli("list-functions --manifold plane").status, 1);
}

TEST_F(CliTest, OperatorsOnFiles) {
  write("points.csv", "0,0\n1,0\n0,2\n");
  write("f.csv", "0\n1\n0\n");
  const auto lap = run_cli("laplacian --points " + path("points.csv") + " --epsilon 1 --function " + path("f.csv") +
                           " --out " + path("lap.csv") + " --matrix-out " + path("L.csv"));
  ASSERT_EQ(lap.status, 0) << lap.out;
  EXPECT_EQ(gcalc::read_numeric_csv(path("lap.csv")).size(), 3u);
  EXPECT_EQ(gcalc::read_numeric_csv(path("L.csv")).size(), 3u);

  const auto grad = run_cli("grad --points " + path("points.csv") + " --epsilon 1 --function " + path("f.csv") +
                            " --out " + path("grad.csv"));
  ASSERT_EQ(grad.status, 0) << grad.out;
  const auto g = gcalc::read_numeric_csv(path("grad.csv"));
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0][1], -g[1][0]);

  const auto div = run_cli("div --points " + path("points.csv") + " --epsilon 1 --field " + path("grad.csv"));
  ASSERT_EQ(div.status, 0) << div.out;
  // div(grad f) equals Delta f.
  const auto d = gcalc::parse_numeric_csv(div.out, "stdout");
  const auto l = gcalc::read_numeric_csv(path("lap.csv"));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d[i][0], l[i][0], 1e-14);

  write("short.csv", "1\n2\n");
  EXPECT_EQ(run_cli("laplacian --points " + path("points.csv") + " --epsilon 1 --function " + path("short.csv")).status,
            1);
  EXPECT_EQ(run_cli("laplacian --points " + path("points.csv") + " --epsilon -1 --function " + path("f.csv")).status, 1);
}

TEST_F(CliTest, DegreeCheckPrintsJson) {
  const auto o = run_cli("degree-check --manifold circle --N 2000 --epsilon 0.01 --sampling grid");
  ASSERT_EQ(o.status, 0) << o.out;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_NEAR(j["ratio_mean"].get<double>(), 1.0, 1e-2);
}

TEST_F(CliTest, PlotDataFromRunOutput) {
  write("spec.json", R"({"manifold":"circle","function":"sin_theta","N_list":[100,200,400],"epsilon_list":[0.1]})");
  ASSERT_EQ(run_cli("run --config " + path("spec.json") + " --out " + path("r")).status, 0);
  const auto o = run_cli("plot-data --results " + path("r/results.csv") +
                         " --x N --y err_abs_median --group-by epsilon --out " + path("plots"));
  ASSERT_EQ(o.status, 0) << o.out;
  EXPECT_TRUE(fs::exists(path("plots/series_epsilon_0.10000000000000001.csv")));
  EXPECT_NE(gcalc::read_file(path("plots/plot_summary.txt")).find("slope="), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli("").status, 1);
  EXPECT_EQ(run_cli("frobnicate").status, 1);
  EXPECT_EQ(run_cli("verify --bogus").status, 1);
  EXPECT_EQ(run_cli("--help").status, 0);
}
