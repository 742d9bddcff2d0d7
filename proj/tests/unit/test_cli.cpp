#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "dualpath/config.hpp"
#include "dualpath/csv.hpp"
#include "dualpath/error.hpp"
#include "dualpath/experiments.hpp"
#include "dualpath/parallel.hpp"

namespace dualpath {
namespace {

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  ADD_FAILURE() << "missing column " << name;
  return 0;
}

double cell(const CsvTable& t, std::size_t row, const std::string& name) {
  return std::stod(t.rows[row][column(t, name)]);
}

TEST(Config, DefaultsAndDbConversion) {
  const ExperimentConfig c = parse_config(R"({"params": {"sir_threshold_db": -5, "lambda_c": 0.001}})");
  EXPECT_NEAR(c.params.sir_threshold, 0.316227766016838, 1e-15);
  EXPECT_EQ(c.params.lambda_c, 0.001);
  EXPECT_EQ(c.params.alpha_nlos, 5.0);
  EXPECT_EQ(parse_config("{}"), ExperimentConfig{});
}

TEST(Config, RoundTrip) {
  const ExperimentConfig c = parse_config(R"({
    "params": {"lambda_b": 1e-5, "l": 20, "w": 5, "phi": 0.25, "alpha_los": 2.5},
    "sweep": {"lambda_c": [0.0005, 0.001], "sir_threshold_db": [-5, 0]},
    "seed": 77, "trials": 1234, "mode": "bound", "blockage": "geometric",
    "assoc": "argmax_fading", "k": 2, "k_max": 4, "r": 250, "theta": 1.5,
    "assoc_samples": 5000, "out": "x.csv"})");
  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(c.sweep[1].name, "sir_threshold");
  EXPECT_NEAR(c.sweep[1].values[1], 1.0, 1e-15);
  EXPECT_EQ(c.mode, LaplaceMode::bessel_bound);
  EXPECT_EQ(c.association, AssociationRule::argmax_with_fading);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config("[]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"params": {"lambda_x": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"params": {"lambda_b": "dense"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"params": {"lambda_b": -1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"params": {"alpha_los": 6}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sweep": {"lambda_c": []}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sweep": {"lambda_c": [-0.1]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mode": "approx"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"trials": -5})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, DigestIgnoresOutputPath) {
  ExperimentConfig a;
  ExperimentConfig b;
  b.output_path = "elsewhere.csv";
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.seed = 2;
  EXPECT_NE(config_digest(a), config_digest(b));
  EXPECT_EQ(config_digest(a).size(), 16u);
}

TEST(Config, SweepPointsRowMajor) {
  const ExperimentConfig c =
      parse_config(R"({"sweep": {"lambda_c": [0.001, 0.002], "alpha_nlos": [4, 5, 6]}})");
  const auto pts = sweep_points(c);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[0].lambda_c, 0.001);
  EXPECT_EQ(pts[0].alpha_nlos, 4.0);
  EXPECT_EQ(pts[2].alpha_nlos, 6.0);
  EXPECT_EQ(pts[3].lambda_c, 0.002);
}

TEST(Csv, FormattingAndQuoting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.5), "-2.5");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
  CsvTable t{{"a", "b"}, {}};
  t.add_row({"1", "x,y"});
  EXPECT_THROW(t.add_row({"1"}), std::logic_error);
  const std::string s = render_csv({{"tool", "dualpath"}, {"config", "{\n  \"k\": 1\n}"}}, t);
  EXPECT_EQ(s, "# tool: dualpath\n# config: {\n#           \"k\": 1\n#         }\na,b\n1,\"x,y\"\n");
}

TEST(Fig4, ShapeAndTrends) {
  const ExperimentOutput out = run_fig4(ExperimentConfig{});
  const auto lcs = fig4_lambda_c();
  const auto rs = fig4_distances();
  ASSERT_EQ(out.table.rows.size(), lcs.size() * rs.size());
  EXPECT_EQ(out.table.header, (std::vector<std::string>{"lambda_c", "r_m", "p_los", "status"}));
  const NetworkParams p;
  for (std::size_t c = 0; c < lcs.size(); ++c) {
    const std::size_t base = c * rs.size();
    EXPECT_NEAR(cell(out.table, base, "p_los"), std::exp(-lcs[c] * p.width * p.length), 1e-12);
    for (std::size_t i = 1; i < rs.size(); ++i) {
      EXPECT_LT(cell(out.table, base + i, "p_los"), cell(out.table, base + i - 1, "p_los"));
      if (c > 0)
        EXPECT_LT(cell(out.table, base + i, "p_los"), cell(out.table, base - rs.size() + i, "p_los"));
    }
  }
}

TEST(Fig2, ShapeAndTrendsAtSmallTrialCount) {
  ExperimentConfig cfg;
  cfg.trials = 300;
  const ExperimentOutput out = run_fig2(cfg);
  ASSERT_EQ(out.table.rows.size(), 45u);
  EXPECT_TRUE(out.clean);
  for (std::size_t i = 0; i < out.table.rows.size(); ++i) {
    for (const char* col : {"p_analytic", "p_mc"}) {
      EXPECT_GE(cell(out.table, i, col), 0.0);
      EXPECT_LE(cell(out.table, i, col), 1.0);
    }
    EXPECT_EQ(out.table.rows[i].back(), "ok");
  }
  for (std::size_t t = 0; t < 9; ++t)
    for (std::size_t k = 1; k < 5; ++k)
      EXPECT_LE(cell(out.table, k * 9 + t, "p_analytic"), cell(out.table, (k - 1) * 9 + t, "p_analytic"));
}

TEST(Fig2, BoundModeFlagsDivergence) {
  ExperimentConfig cfg;
  cfg.trials = 50;
  cfg.mode = LaplaceMode::bessel_bound;
  const ExperimentOutput out = run_fig2(cfg);
  EXPECT_FALSE(out.clean);
  EXPECT_EQ(out.table.rows[0].back(), "diverged");
}

TEST(Fig3, RowCount) {
  ExperimentConfig cfg;
  cfg.trials = 100;
  EXPECT_EQ(run_fig3(cfg).table.rows.size(), 20u);
}

TEST(Fig5, SweepOverridesGridAndRejectsDivergentCells) {
  ExperimentConfig cfg = parse_config(
      R"({"sweep": {"lambda_b": [2e-5], "lambda_c": [0.0, 0.001]}, "trials": 200})");
  const ExperimentOutput out = run_fig5(cfg);
  ASSERT_EQ(out.table.rows.size(), 2u);
  EXPECT_EQ(out.table.rows[0].back(), "rejected");  // all-LoS with alpha_los = 2
  EXPECT_EQ(out.table.rows[0][column(out.table, "rate_analytic")], "nan");
  EXPECT_EQ(out.table.rows[1].back(), "ok");
  EXPECT_GT(cell(out.table, 1, "rate_analytic"), 0.0);
}

TEST(SinglePoint, SweepRowsAndColumns) {
  ExperimentConfig cfg = parse_config(R"({"sweep": {"lambda_c": [0.001, 0.002]}, "trials": 500})");
  const ExperimentOutput cov = run_coverage(cfg);
  ASSERT_EQ(cov.table.rows.size(), 2u);
  EXPECT_EQ(cov.table.header.front(), "lambda_c");
  EXPECT_LE(cell(cov.table, 0, "p_bound"), cell(cov.table, 0, "p_exact"));
  const ExperimentOutput assoc = run_assoc(cfg);
  EXPECT_EQ(assoc.table.rows.size(), 2u * 6u);
  EXPECT_EQ(assoc.table.rows[5][1], "tail");
  const ExperimentOutput los = run_los(cfg);
  EXPECT_NEAR(cell(los.table, 0, "expected_count"), 0.001 * (100 * 10 + 150), 1e-12);
  EXPECT_THROW(run_experiment("fig9", cfg), ConfigError);
}

TEST(Experiments, ByteIdenticalAcrossWorkerCounts) {
  ExperimentConfig cfg;
  cfg.trials = 1500;
  setenv(kWorkersEnvVar, "1", 1);
  const ExperimentOutput a = run_fig2(cfg);
  const std::string sa = render_csv(csv_metadata(a, cfg), a.table);
  setenv(kWorkersEnvVar, "3", 1);
  const ExperimentOutput b = run_fig2(cfg);
  const std::string sb = render_csv(csv_metadata(b, cfg), b.table);
  unsetenv(kWorkersEnvVar);
  EXPECT_EQ(sa, sb);
}

#ifdef DUALPATH_TOOL_PATH
int run_tool(const std::string& args) {
  const std::string cmd = std::string(DUALPATH_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Tool, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "dualpath_cli_test";
  std::filesystem::create_directories(dir);
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"params": {"lambda_b": -3}})";
  const auto out = dir / "fig4.csv";
  EXPECT_EQ(run_tool("fig4 --out " + out.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(out));
  EXPECT_EQ(run_tool("fig4 --config " + bad.string()), 2);
  EXPECT_EQ(run_tool("fig4 --mode approximate"), 2);
  EXPECT_EQ(run_tool("nonsense"), 2);
  EXPECT_EQ(run_tool("los --set lambda_q=1"), 2);
  EXPECT_EQ(run_tool("los --trials 1000 --set sir_threshold_db=-3"), 0);
  // All-LoS with alpha_los = 2 is outside the model domain: an input error.
  EXPECT_EQ(run_tool("validate --trials 200 --set lambda_c=0"), 2);
}
#endif

}  // namespace
}  // namespace dualpath
