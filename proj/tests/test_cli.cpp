#include "mixsing/cli.hpp"
#include "mixsing/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mixsing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("mixsing_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

RunConfig small(Command c, const std::string& dir)
{
  RunConfig cfg;
  cfg.command = c;
  cfg.n = {63};
  cfg.output_dir = dir;
  return cfg;
}

}  // namespace

TEST(Commands, NamesRoundTrip)
{
  for (const char* name : {"eigen", "pure-singular", "g1", "g2", "sweep-lambda", "verify"})
    EXPECT_EQ(command_name(*parse_command(name)), name);
  EXPECT_FALSE(parse_command("g3").has_value());
}

TEST(Validate, ListsAllErrorsAtOnce)
{
  RunConfig c = small(Command::g1, scratch("validate").string());
  c.gamma = 1.5;
  c.lambda = "auto";
  c.n = {2};
  c.h = "cubic";
  c.eps_ratio = 2.0;
  const auto errors = validate(c);
  EXPECT_EQ(errors.size(), 5u);
  bool cites_range = false;
  for (const auto& e : errors) cites_range |= e.find("gamma") != std::string::npos && e.find("(0,1)") != std::string::npos;
  EXPECT_TRUE(cites_range);
}

TEST(Run, EigenReport)
{
  const fs::path dir = scratch("eigen");
  RunConfig c = small(Command::eigen, dir.string());
  c.n = {127};
  std::ostringstream out, err;
  ASSERT_EQ(run(c, out, err), 0) << err.str();
  const auto r = load(dir / "report.json");
  EXPECT_GT(r["result"]["eigen"]["lambda1"].get<double>(), 0.0);
  EXPECT_LT(r["result"]["eigen"]["residual"].get<double>(), 1e-8);
  EXPECT_TRUE(fs::exists(dir / "e1.csv"));
  EXPECT_TRUE(fs::exists(dir / "timing.json"));
  EXPECT_EQ(r["config"]["s"], 0.5);
  EXPECT_FALSE(r["config"].contains("output_dir"));
}

TEST(Run, G2WithAutoLambda)
{
  const fs::path dir = scratch("g2");
  RunConfig c = small(Command::g2, dir.string());
  c.lambda = "auto";
  std::ostringstream out, err;
  ASSERT_EQ(run(c, out, err), 0) << err.str();
  const auto r = load(dir / "report.json")["result"];
  const auto& two = r["two_solutions"];
  EXPECT_LT(two["energy_nu"].get<double>(), 0.0);
  EXPECT_GT(two["energy_zeta"].get<double>(), 0.0);
  EXPECT_NEAR(r["lambda"].get<double>(), two["geometry"]["Lambda_est"].get<double>() / 4, 1e-15);
  for (const char* f : {"nu.csv", "zeta.csv", "barrier.csv", "eps_trace.csv"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(Run, InvalidGammaFailsWithMachineReadableJson)
{
  const fs::path dir = scratch("bad");
  RunConfig c = small(Command::g2, dir.string());
  c.gamma = 1.5;
  std::ostringstream out, err;
  EXPECT_NE(run(c, out, err), 0);
  const auto f = load(dir / "failure.json");
  EXPECT_EQ(f["stage"], "config");
  EXPECT_TRUE(f.contains("message"));
  EXPECT_NE(f["data"]["errors"][0].get<std::string>().find("(0,1)"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(err.str()), f);
}

TEST(Run, PipelineFailurePropagatesStage)
{
  const fs::path dir = scratch("fail");
  RunConfig c = small(Command::pure_singular, dir.string());
  c.eps_floor = 0.4;
  c.tol = 1e-14;
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), 2);
  EXPECT_EQ(load(dir / "failure.json")["stage"], "pure_singular");
}

TEST(Run, ReportsAreByteIdentical)
{
  for (Command cmd : {Command::g1, Command::g2, Command::verify}) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    std::ostringstream out, err;
    RunConfig ca = small(cmd, a.string()), cb = small(cmd, b.string());
    if (cmd == Command::g2) ca.lambda = cb.lambda = "auto";
    ASSERT_EQ(run(ca, out, err), 0) << err.str();
    ASSERT_EQ(run(cb, out, err), 0) << err.str();
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json")) << command_name(cmd);
  }
}

TEST(CliMain, FlagsOverrideConfigFile)
{
  const fs::path dir = scratch("main");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "n = 31\ns = 0.25\neps-ratio = 0.25\noutput-dir = " << (dir / "out").string() << "\n";
  const std::string cfg_s = cfg.string();
  std::vector<std::string> args{"mixsing", "eigen", "--config", cfg_s, "--n", "15"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  testing::internal::CaptureStdout();
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  testing::internal::GetCapturedStdout();
  ASSERT_EQ(code, 0);
  const auto r = load(dir / "out" / "report.json")["config"];
  EXPECT_EQ(r["n"][0], 15);
  EXPECT_EQ(r["s"], 0.25);
  EXPECT_EQ(r["eps_ratio"], 0.25);
}

TEST(Report, EmptyFieldSummaryIsNull)
{
  EXPECT_TRUE(field_summary(Field{}).is_null());
}
