#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "qfs/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json desk_config(const std::string& mode = "closed_form") {
  json j = json::parse(R"({
    "params": {"E": 1, "epsilon": 0.5, "eta": 0.5, "tau": 1,
               "sigma_plus": 0.1, "sigma_minus": 0.4, "N": 1},
    "beta0": 2, "beta": 1, "t_max": 0.5, "sample_dt": 0.25
  })");
  j["mode"] = mode;
  return j;
}

std::vector<std::string> problems_of(const json& cfg) {
  try {
    qfs::parse_config(cfg.dump());
  } catch (const qfs::ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

std::vector<qfs::TrajectoryRecord> collect(const qfs::ScenarioConfig& cfg,
                                           qfs::RunSummary* summary = nullptr) {
  std::vector<qfs::TrajectoryRecord> out;
  auto s = qfs::run_scenario(cfg, [&out](const qfs::TrajectoryRecord& r) { out.push_back(r); });
  if (summary) *summary = s;
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qfs_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QFS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ParseConfig, MinimalConfigGetsDefaults) {
  const auto cfg = qfs::parse_config(desk_config().dump());
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.rk4_dt, 1e-3);
  EXPECT_TRUE(cfg.default_probes);
  ASSERT_EQ(cfg.probes.size(), 7u);
  EXPECT_DOUBLE_EQ(cfg.probes[0](0).real(), 0.4);
  EXPECT_DOUBLE_EQ(cfg.probes[1](1).real(), 0.4);
  for (const auto& z : cfg.probes) {
    EXPECT_GT(z.norm(), 0.0);
    EXPECT_LE(z.norm(), 0.5 + 1e-15);
  }
  EXPECT_EQ(cfg.tol.xval, 5e-3);
  EXPECT_FALSE(cfg.cutoff_M.has_value());
}

TEST(ParseConfig, H2ViolationIsNamed) {
  auto cfg = desk_config();
  cfg["params"]["sigma_plus"] = 0.4;
  EXPECT_TRUE(mentions(problems_of(cfg), "H2"));
}

TEST(ParseConfig, HorizonIsHalfOpen) {
  auto cfg = desk_config();
  cfg["t_max"] = 1.0;
  EXPECT_TRUE(mentions(problems_of(cfg), "t_max"));
  cfg["t_max"] = 0.999;
  EXPECT_TRUE(problems_of(cfg).empty());
}

TEST(ParseConfig, UnknownKeysAreErrors) {
  auto cfg = desk_config();
  cfg["colour"] = "blue";
  cfg["params"]["gamma"] = 1;
  cfg["tolerances"] = {{"xvla", 1e-3}};
  const auto problems = problems_of(cfg);
  EXPECT_TRUE(mentions(problems, "colour"));
  EXPECT_TRUE(mentions(problems, "params.gamma"));
  EXPECT_TRUE(mentions(problems, "tolerances.xvla"));
}

TEST(ParseConfig, AllViolationsReportedTogether) {
  auto cfg = desk_config();
  cfg["params"]["eta"] = 2;
  cfg["params"]["sigma_plus"] = 1;
  cfg["sample_dt"] = 0;
  cfg.erase("beta");
  const auto problems = problems_of(cfg);
  EXPECT_TRUE(mentions(problems, "H1"));
  EXPECT_TRUE(mentions(problems, "H2"));
  EXPECT_TRUE(mentions(problems, "sample_dt"));
  EXPECT_TRUE(mentions(problems, "beta"));
}

TEST(ParseConfig, OracleModesNeedCutoffWithinBudget) {
  EXPECT_TRUE(mentions(problems_of(desk_config("oracle")), "cutoff_M"));
  auto cfg = desk_config("cross_validate");
  cfg["cutoff_M"] = 100;  // 10000 > 4096
  EXPECT_TRUE(mentions(problems_of(cfg), "budget"));
  cfg["cutoff_M"] = 14;
  EXPECT_TRUE(problems_of(cfg).empty());
}

TEST(ParseConfig, MalformedInput) {
  EXPECT_THROW(qfs::parse_config("{not json"), qfs::ConfigError);
  EXPECT_THROW(qfs::parse_config("[1, 2]"), qfs::ConfigError);
  auto cfg = desk_config();
  cfg["probes"] = json::array({json::array({json::array({0.1, 0.0})})});
  EXPECT_TRUE(mentions(problems_of(cfg), "probes[0]"));
  cfg = desk_config();
  cfg["mode"] = "fast";
  EXPECT_TRUE(mentions(problems_of(cfg), "mode"));
  EXPECT_THROW(qfs::load_config("/nonexistent/qfs.json"), qfs::ConfigError);
}

TEST(ParseConfig, OverridesApply) {
  auto text = desk_config().dump();
  qfs::ConfigOverrides o;
  o.mode = qfs::RunMode::cross_validate;
  EXPECT_THROW(qfs::parse_config(text, o), qfs::ConfigError);  // cutoff now required
  o.mode = qfs::RunMode::closed_form;
  o.seed = 7;
  o.xval_tol = 1e-3;
  const auto cfg = qfs::parse_config(text, o);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.tol.xval, 1e-3);
  EXPECT_NE(cfg.probes[2], qfs::default_probes(1, 0)[2]);
}

TEST(ParseConfig, ExplicitProbesKept) {
  auto cfg = desk_config();
  cfg["probes"] = json::parse("[[[0.1, 0.2], [0.0, -0.3]]]");
  const auto parsed = qfs::parse_config(cfg.dump());
  ASSERT_EQ(parsed.probes.size(), 1u);
  EXPECT_EQ(parsed.probes[0](1), std::complex<double>(0, -0.3));
  EXPECT_FALSE(parsed.default_probes);
}

TEST(RunScenario, MatchedGibbsClosedFormIsConstant) {
  auto j = desk_config();
  j["params"]["N"] = 3;
  j["beta0"] = j["beta"] = std::log(4.0);
  j["t_max"] = 2.9;
  j["sample_dt"] = 0.1;
  const auto records = collect(qfs::parse_config(j.dump()));
  ASSERT_EQ(records.size(), 30u);
  for (const auto& r : records)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.occ(k), (5.0 / 3.0 - 1) / 2, 1e-13);
}

TEST(RunScenario, ZeroHorizonGivesSingleInitialRecord) {
  auto j = desk_config();
  j["t_max"] = 0;
  const auto records = collect(qfs::parse_config(j.dump()));
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].time, 0.0);
  EXPECT_EQ(records[0].window_n, 1);
  EXPECT_NEAR(records[0].occ(0), 1 / std::expm1(2.0), 1e-15);
  EXPECT_NEAR(records[0].occ(1), 1 / std::expm1(1.0), 1e-15);
  for (Eigen::Index k = 0; k < records[0].gamma_probe.size(); ++k)
    EXPECT_EQ(records[0].gamma_probe(k), 1.0);
}

TEST(RunScenario, RecordsAreMonotoneAndWindowsSwitch) {
  auto j = desk_config();
  j["params"]["N"] = 3;
  j["t_max"] = 2.5;
  j["sample_dt"] = 0.5;
  qfs::RunSummary s;
  const auto records = collect(qfs::parse_config(j.dump()), &s);
  ASSERT_EQ(records.size(), 6u);
  const int windows[] = {1, 1, 2, 2, 3, 3};
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].window_n, windows[i]);
    if (i) {
      EXPECT_GT(records[i].time, records[i - 1].time);
    }
    EXPECT_GE(records[i].min_eig_X_minus_I, -1e-10);
  }
  EXPECT_TRUE(s.passed);
  EXPECT_TRUE(s.cp_verdict);
  EXPECT_EQ(s.absent_columns, std::vector<std::string>{"trace_err"});
}

TEST(CrossValidate, DeskParamsPass) {
  auto j = desk_config("cross_validate");
  j["cutoff_M"] = 14;
  j["t_max"] = 0.75;
  qfs::RunSummary s;
  const auto records = collect(qfs::parse_config(j.dump()), &s);
  EXPECT_EQ(records.size(), 4u);
  EXPECT_TRUE(s.passed) << (s.failures.empty() ? "" : s.failures[0]);
  EXPECT_LE(s.max_char_deviation, 5e-3);
  EXPECT_LE(s.max_occ_deviation, 5e-3);
  EXPECT_LE(s.max_tail_mass, 1e-4);
  EXPECT_EQ(s.deviations.size(), 4u * 7u);
}

TEST(CrossValidate, DecoupledIsTighter) {
  auto j = desk_config("cross_validate");
  j["params"]["eta"] = 0;
  j["cutoff_M"] = 14;
  j["t_max"] = 0.5;
  const auto s = qfs::cross_validate(qfs::parse_config(j.dump()));
  EXPECT_TRUE(s.passed);
  EXPECT_LE(s.max_char_deviation, 1e-4);
}

TEST(CrossValidate, TinyCutoffFailsOnTailMass) {
  auto j = desk_config("cross_validate");
  j["cutoff_M"] = 3;
  const auto s = qfs::cross_validate(qfs::parse_config(j.dump()));
  EXPECT_FALSE(s.passed);
  ASSERT_FALSE(s.failures.empty());
  EXPECT_NE(s.failures[0].find("tail mass"), std::string::npos);
}

TEST(CrossValidate, RequiresCrossMode) {
  EXPECT_THROW(qfs::cross_validate(qfs::parse_config(desk_config().dump())), qfs::DomainError);
}

TEST(OracleMode, ReportsTraceDriftAndFillsClosedFormColumns) {
  auto j = desk_config("oracle");
  j["cutoff_M"] = 12;
  qfs::RunSummary s;
  const auto records = collect(qfs::parse_config(j.dump()), &s);
  EXPECT_TRUE(s.passed);
  EXPECT_LE(s.max_trace_drift_rate, 1e-8);
  for (const auto& r : records) {
    EXPECT_EQ(r.min_eig_X_minus_I, 0.0);
    EXPECT_TRUE(r.gamma_probe.isZero(0.0));
  }
  EXPECT_EQ(s.absent_columns.size(), 2u);
}

TEST(Csv, HeaderAndPrecision) {
  std::ostringstream out;
  qfs::CsvTrajectoryWriter w(out, 2, 1);
  qfs::TrajectoryRecord r;
  r.time = 0.1;
  r.occ = Eigen::VectorXd::Constant(2, 1.0 / 3.0);
  r.gamma_probe = Eigen::VectorXd::Constant(1, 1.0);
  w.write(r);
  EXPECT_EQ(out.str(),
            "step,time,window_n,occ_0,occ_1,gamma_probe_0,trace_err,min_eig_X_minus_I\n"
            "0,0.10000000000000001,1,0.33333333333333331,0.33333333333333331,1,0,0\n");
}

TEST(Summary, ContainsRequiredFields) {
  auto j = desk_config();
  const auto cfg = qfs::parse_config(j.dump());
  const auto s = qfs::run_scenario(cfg, {});
  const auto out = qfs::summary_to_json(cfg, s);
  for (const char* key : {"config", "kappa", "relative_bound_c", "cp_certificate",
                          "max_trace_drift", "max_char_deviation", "verdict"})
    EXPECT_TRUE(out.contains(key)) << key;
  EXPECT_EQ(out["config"]["params"]["N"], 1);
  EXPECT_TRUE(out["cp_certificate"]["completely_positive"].get<bool>());
}

class Cli : public ::testing::Test {
 protected:
  fs::path write_config(const json& j, const std::string& name) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }
  fs::path dir_ = scratch(::testing::UnitTest::GetInstance()->current_test_info()->name());
};

TEST_F(Cli, ExitCodes) {
  const auto good = write_config(desk_config(), "good.json");
  EXPECT_EQ(run_cli("validate-config --config " + good.string()), 0);
  EXPECT_EQ(run_cli("cp-check --config " + good.string()), 0);
  EXPECT_EQ(run_cli("run --config " + good.string() + " --out " + (dir_ / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.json"));

  auto bad = desk_config();
  bad["params"]["sigma_plus"] = 0.5;
  const auto badp = write_config(bad, "bad.json");
  EXPECT_EQ(run_cli("validate-config --config " + badp.string()), 1);
  EXPECT_EQ(run_cli("run --config " + badp.string() + " --out " + (dir_ / "x").string()), 1);
  EXPECT_EQ(run_cli("validate-config"), 1);

  auto tiny = desk_config("cross_validate");
  tiny["cutoff_M"] = 3;
  const auto tinyp = write_config(tiny, "tiny.json");
  EXPECT_EQ(run_cli("run --config " + tinyp.string() + " --out " + (dir_ / "tiny").string()), 2);
  const auto summary = json::parse(slurp(dir_ / "tiny" / "summary.json"));
  EXPECT_EQ(summary["verdict"], "fail");
}

TEST_F(Cli, ModeAndToleranceOverrides) {
  const auto good = write_config(desk_config(), "good.json");
  // Cross-validation needs a cutoff that the closed-form config lacks.
  EXPECT_EQ(run_cli("run --config " + good.string() + " --mode oracle --out " +
                    (dir_ / "o").string()),
            1);
  auto j = desk_config("cross_validate");
  j["cutoff_M"] = 14;
  j["t_max"] = 0.25;
  const auto xp = write_config(j, "x.json");
  EXPECT_EQ(run_cli("run --config " + xp.string() + " --tol 1e-9 --out " + (dir_ / "t").string()),
            2);
}

TEST_F(Cli, RepeatedRunsAreBitIdentical) {
  auto j = desk_config();
  j["params"]["N"] = 2;
  j["t_max"] = 1.9;
  j["sample_dt"] = 0.05;
  j["seed"] = 42;
  const auto p = write_config(j, "det.json");
  ASSERT_EQ(run_cli("run --config " + p.string() + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run_cli("run --config " + p.string() + " --out " + (dir_ / "b").string()), 0);
  const auto a = slurp(dir_ / "a" / "trajectory.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "trajectory.csv"));
  ASSERT_EQ(run_cli("run --config " + p.string() + " --seed 43 --out " + (dir_ / "c").string()),
            0);
  EXPECT_NE(a, slurp(dir_ / "c" / "trajectory.csv"));
}
