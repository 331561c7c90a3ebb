#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qemetro/harness.hpp"

using namespace qemetro;

namespace {

std::filesystem::path scratch_file(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "qemetro_tests";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QEMETRO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string sweep_csv(const SweepConfig& cfg) {
  std::ostringstream os;
  run_sweep(cfg, &os);
  return os.str();
}

}  // namespace

TEST(Config, Defaults) {
  const SweepConfig c;
  EXPECT_EQ(c.evaluation, Evaluation::Device);
  EXPECT_EQ(c.d_free, 10);
  EXPECT_DOUBLE_EQ(c.dt, 0.1);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonKeysAndFlagSpellings) {
  SweepConfig c;
  apply_json(c, nlohmann::json::parse(R"js({"state":"ghz","noise":"nmpd","nq":[2,3],
      "tau":1e-3,"theta-rule":"pi/(2N)","qem-order":2,"evaluation":"exact","seed":9})js"));
  EXPECT_EQ(c.state, StateKind::GHZ);
  EXPECT_EQ(c.noise, NoiseKind::NMPD);
  EXPECT_EQ(c.n_qubits, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.taus, (std::vector<double>{1e-3}));
  EXPECT_EQ(c.qem_orders, (std::vector<int>{2}));
  EXPECT_EQ(c.evaluation, Evaluation::Exact);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_NEAR(c.thetas_for(3).front(), std::numbers::pi / 6, 1e-15);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"colour":"red"})")), ConfigError);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"dt":"slow"})")), ConfigError);
}

TEST(Config, KeyValueFile) {
  const auto p = scratch_file("kv.cfg",
                              "# sweep settings\n"
                              "state = css\n"
                              "nq = 1, 2\n"
                              "tau = 1e-2, 1e-3   # two strengths\n"
                              "theta_rule = grid\n"
                              "theta_step = 0.1\n"
                              "grid_first = 2\n"
                              "grid_last = 4\n");
  SweepConfig c;
  apply_config_file(c, p.string());
  EXPECT_EQ(c.n_qubits, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.taus.size(), 2u);
  const auto th = c.thetas_for(1);
  ASSERT_EQ(th.size(), 3u);
  EXPECT_NEAR(th[0], 0.2, 1e-15);
  EXPECT_NEAR(th[2], 0.4, 1e-15);
  EXPECT_THROW(apply_config_file(c, scratch_file("bad.cfg", "state css\n").string()), ConfigError);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/qemetro.cfg"), ConfigError);
}

TEST(Config, ValidationErrors) {
  SweepConfig c;
  c.taus = {-1.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = SweepConfig{};
  c.qem_orders = {3};
  EXPECT_THROW(c.validate(), ConfigError);
  c = SweepConfig{};
  c.theta_rule = ThetaRule::Grid;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SweepConfig{};
  c.state = StateKind::SDS;
  c.n_qubits = {3};
  EXPECT_THROW(c.validate(), CapabilityError);
  c = SweepConfig{};
  c.noise = NoiseKind::MAD;
  c.pec = PecConfig{};
  EXPECT_THROW(c.validate(), CapabilityError);
}

TEST(Sweep, CsvIsIndependentOfWorkerCount) {
  SweepConfig c;
  c.state = StateKind::GHZ;
  c.noise = NoiseKind::MAD;
  c.n_qubits = {2, 3};
  c.taus = {1e-2, 1e-3};
  c.theta_rule = ThetaRule::List;
  c.thetas = {0.2, 0.5};
  c.workers = 1;
  const std::string serial = sweep_csv(c);
  c.workers = 4;
  EXPECT_EQ(serial, sweep_csv(c));
  // Header lines plus one row per grid point.
  EXPECT_EQ(std::count(serial.begin(), serial.end(), '\n'), 3 + 8);
  EXPECT_NE(serial.find("state,noise,n_qubits,tau,theta"), std::string::npos);
}

TEST(Sweep, ReportContents) {
  SweepConfig c;
  c.n_qubits = {2};
  const FisherReport r = evaluate_point(c, 2, 1e-2, std::numbers::pi / 2);
  EXPECT_NEAR(r.cfi.ideal, 1.0, 1e-8);
  EXPECT_NEAR(r.qfi.ideal, 1.0, 1e-8);
  EXPECT_LT(r.cfi.noisy, r.cfi.ideal);
  EXPECT_LT(r.distance.qem2, r.distance.qem1);
  EXPECT_LT(r.distance.qem1, r.distance.noisy);
  EXPECT_GT(r.rt2_cfi.value, r.rt1_cfi.value);
  EXPECT_FALSE(r.negative_cfi);
}

TEST(Sweep, DegenerateSlopeIsFlagged) {
  SweepConfig c;
  c.state = StateKind::GHZ;
  c.n_qubits = {2};
  const FisherReport r = evaluate_point(c, 2, 1e-3, 0.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(Pec, ComparisonUsesGroupBudgets) {
  SweepConfig c;
  c.n_qubits = {3};
  c.taus = {1e-3};
  c.pec = PecConfig{10, 0};
  const PecComparison p = compare_pec_point(c, 3, 1e-3, 1);
  EXPECT_EQ(p.n_qem1, 37u);
  EXPECT_EQ(p.n_qem2, 739u);
  EXPECT_LT(p.sigma2_qem2, p.sigma2_qem1);
  EXPECT_LT(p.sigma2_qem1, p.sigma2_pec_n2);
  EXPECT_LT(p.sigma2_pec_n2, p.sigma2_pec_n1);
  const PecComparison q = compare_pec_point(c, 3, 1e-3, 1);
  EXPECT_EQ(p.sigma2_pec_n1, q.sigma2_pec_n1);
}

TEST(Environment, OutputDirectory) {
  setenv("QEMETRO_OUT_DIR", "/tmp/qemetro_out", 1);
  EXPECT_EQ(default_output_dir(), "/tmp/qemetro_out");
  unsetenv("QEMETRO_OUT_DIR");
  EXPECT_EQ(default_output_dir(), ".");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("sweep --state css --nq 1 --tau 1e-3 --out -"), 0);
  EXPECT_EQ(run_cli("sweep --state sds --nq 3 --out -"), 3);
  EXPECT_EQ(run_cli("pec-compare --noise mad --nq 1 --out -"), 3);
  EXPECT_EQ(run_cli("sweep --qem-order 5 --out -"), 2);
  EXPECT_EQ(run_cli("sweep --bogus"), 2);
  EXPECT_EQ(run_cli("oracle-check --state ghz --nq 2,3 --tau 1e-2 --theta-rule 'pi/(2N)'"), 0);
}

TEST(Cli, ConfigFileErrorsAreConfigErrors) {
  const auto p = scratch_file("unknown.json", R"({"nq":[1],"frobnicate":1})");
  EXPECT_EQ(run_cli("sweep --config " + p.string() + " --out -"), 2);
}
