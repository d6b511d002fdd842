#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "catsim/csv.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("catsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const json& j) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  int run(const fs::path& config) {
    err_.str("");
    return catsim::cli::run_config_file(config, {}, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  catsim::CsvTable table(const std::string& name) const { return catsim::read_csv_file((dir_ / name).string()); }

  json summary(const std::string& name) const { return json::parse(slurp(dir_ / name)); }

  fs::path dir_;
  std::ostringstream err_;
};

json cat_config() {
  return {{"experiment", "cat-sequence"},
          {"params", {{"epsilon", 0.19}}},
          {"protocol", {{"alpha", 1.42}, {"nbar0", 0.25}, {"fock_dim", 40}}},
          {"phi_grid", {{"points", 24}}}};
}

}  // namespace

TEST_F(CliRun, OutputIsByteDeterministic) {
  json cfg = cat_config();
  cfg["noise"] = {{"sigma", 0.01}, {"seed", 7}};
  const fs::path p = write("cat.json", cfg);
  ASSERT_EQ(run(p), 0) << err_.str();
  const std::string csv1 = slurp(dir_ / "cat.csv"), sum1 = slurp(dir_ / "cat.summary.json");
  ASSERT_EQ(run(p), 0);
  EXPECT_EQ(slurp(dir_ / "cat.csv"), csv1);
  EXPECT_EQ(slurp(dir_ / "cat.summary.json"), sum1);
}

TEST_F(CliRun, SeedChangesNoise) {
  json cfg = cat_config();
  cfg["noise"] = {{"sigma", 0.01}, {"seed", 7}};
  ASSERT_EQ(run(write("a.json", cfg)), 0);
  cfg["noise"]["seed"] = 8;
  ASSERT_EQ(run(write("b.json", cfg)), 0);
  EXPECT_NE(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(table("a.csv").rows[0][2], 0.01);
}

TEST_F(CliRun, MisspelledKeyIsConfigError) {
  json cfg = cat_config();
  cfg["protocol"]["t_drive_s"] = 0.45e-6;
  EXPECT_EQ(run(write("bad.json", cfg)), 1);
  EXPECT_NE(err_.str().find("t_drive_s"), std::string::npos);
}

TEST_F(CliRun, UnknownOrForeignSectionIsConfigError) {
  json cfg = cat_config();
  cfg["cooling"] = {{"cycles", 3}};
  EXPECT_EQ(run(write("bad.json", cfg)), 1);
  cfg.erase("cooling");
  cfg["extra"] = json::object();
  EXPECT_EQ(run(write("bad2.json", cfg)), 1);
}

TEST_F(CliRun, BadValuesAreConfigErrors) {
  json cfg = cat_config();
  cfg["protocol"]["nbar0"] = -1.0;
  EXPECT_EQ(run(write("a.json", cfg)), 1);
  cfg = cat_config();
  cfg["params"]["rabi_rad_per_s"] = 1e6;
  EXPECT_EQ(run(write("b.json", cfg)), 1);  // rabi and alpha together
  cfg = cat_config();
  cfg["experiment"] = "cat";
  EXPECT_EQ(run(write("c.json", cfg)), 1);
  std::ofstream(dir_ / "d.json") << "{ not json";
  EXPECT_EQ(run(dir_ / "d.json"), 1);
  EXPECT_EQ(run(dir_ / "missing.json"), 1);
}

TEST_F(CliRun, NoDriveFringeIsBareRamsey) {
  const double dM = 1.1;
  const json cfg = {{"experiment", "cat-sequence"},
                    {"protocol", {{"t_drive_us", 0.0}, {"delta_M_rad", dM}}},
                    {"phi_grid", {{"points", 8}}}};
  ASSERT_EQ(run(write("r.json", cfg)), 0) << err_.str();
  for (const auto& row : table("r.csv").rows) EXPECT_NEAR(row[1], (1.0 - std::cos(dM)) / 2.0, 1e-12);
}

TEST_F(CliRun, SimulateThenFitRecoversAlpha) {
  json sim = cat_config();
  sim["phi_grid"]["points"] = 64;
  sim["noise"] = {{"sigma", 0.005}, {"seed", 11}};
  ASSERT_EQ(run(write("sim.json", sim)), 0) << err_.str();
  const json fit = {{"experiment", "fit-fringe"},
                    {"params", {{"epsilon", 0.19}}},
                    {"protocol", {{"alpha", 1.3}, {"nbar0", 0.25}}},
                    {"fit", {{"input_csv", "sim.csv"}}}};
  ASSERT_EQ(run(write("fit.json", fit)), 0) << err_.str();
  const json s = summary("fit.summary.json");
  EXPECT_EQ(s["status"], "ok");
  EXPECT_NEAR(s["results"]["fit"]["parameters"]["alpha"]["value"].get<double>(), 1.42, 0.03 * 1.42);
  EXPECT_EQ(table("fit.csv").header[2], "p_up_fit");
}

TEST_F(CliRun, MissingFitInputIsConfigError) {
  const json fit = {{"experiment", "fit-sinusoid"}, {"fit", {{"input_csv", "nope.csv"}}}};
  EXPECT_EQ(run(write("fit.json", fit)), 1);
}

TEST_F(CliRun, ThermalFringeCloudRadii) {
  const json cfg = {{"experiment", "thermal-fringe"},
                    {"params", {{"epsilon", 0.19}}},
                    {"protocol", {{"delta_M_rad", 0.0}}},
                    {"phi_grid", {{"points", 4}}},
                    {"radial", {{"temperatures_uK", {2.0, 150.0}}}}};
  ASSERT_EQ(run(write("t.json", cfg)), 0) << err_.str();
  const json s = summary("t.summary.json");
  EXPECT_NEAR(s["derived"]["w_a_um"][0].get<double>(), 0.9, 1e-9);
  EXPECT_NEAR(s["derived"]["w_a_um"][1].get<double>(), 7.79, 0.005);
  EXPECT_EQ(table("t.csv").rows.size(), 8u);
}

TEST_F(CliRun, UnconvergedQuadratureIsNumericalFailure) {
  const json cfg = {{"experiment", "thermal-fringe"},
                    {"phi_grid", {{"points", 2}}},
                    {"radial", {{"temperatures_uK", {150.0}}, {"rel_tol", 1e-300}}}};
  EXPECT_EQ(run(write("t.json", cfg)), 2);
  EXPECT_EQ(summary("t.summary.json")["status"], "numerical_failure");
}

TEST_F(CliRun, SummaryCarriesDerivedQuantities) {
  ASSERT_EQ(run(write("c.json", cat_config())), 0);
  const json s = summary("c.summary.json");
  EXPECT_EQ(s["experiment"], "cat-sequence");
  EXPECT_NEAR(s["derived"]["z0_m"].get<double>(), 12.198e-9, 0.001e-9);
  EXPECT_EQ(s["derived"]["epsilon_used"].get<double>(), 0.19);
  EXPECT_NEAR(s["derived"]["separation_at_alpha_m"].get<double>(), 48.99e-9, 0.01e-9);
  EXPECT_EQ(s["outputs"]["rows"], 24);
}

TEST_F(CliRun, BinaryVersionAndExitCodes) {
  const std::string bin = CATSIM_BINARY;
  EXPECT_EQ(std::system((bin + " version > " + (dir_ / "v.txt").string()).c_str()), 0);
  EXPECT_EQ(slurp(dir_ / "v.txt"), std::string("catsim ") + catsim::cli::version() + "\n");
  json cfg = cat_config();
  cfg["protocol"]["alpah"] = 1.0;
  const fs::path p = write("bad.json", cfg);
  const int status = std::system((bin + " run " + p.string() + " 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 1);
}

TEST_F(CliRun, SampleConfigsRun) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(CATSIM_TEST_DATA)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    catsim::cli::RunOptions opts;
    opts.output_dir = dir_ / "out";
    EXPECT_EQ(catsim::cli::run_config_file(entry.path(), opts, err_), 0) << entry.path() << "\n" << err_.str();
    const fs::path summary_path = opts.output_dir / (entry.path().stem().string() + ".summary.json");
    ASSERT_TRUE(fs::exists(summary_path)) << summary_path;
    EXPECT_EQ(json::parse(slurp(summary_path))["status"], "ok");
  }
  EXPECT_GE(seen, 6);
}
