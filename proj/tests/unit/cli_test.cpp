#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "wavedecay/cli.hpp"

namespace wavedecay {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "wavedecay");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& body) {
  const auto dir = fs::temp_directory_path() / ("wavedecay_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << body;
  return dir;
}

const char* kSmall = R"({
  "grid": {"dimension": 1, "length": 1.0, "nodes": 100},
  "damper": {"intervals": [[0.3, 0.7]], "amplitude": 2.0},
  "numerics": {"horizon": 6.0},
  "ensemble": {"runs": 3, "modes": 8, "nodes": 50, "workers": 1}
})";

TEST(Cli, SimulateWritesTrace) {
  const auto dir = write_config("simulate", kSmall);
  const auto r = run({"simulate", (dir / "config.json").string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "trace.csv"));
  fs::remove_all(dir);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"bound"}).code, kExitUsage);
  EXPECT_EQ(run({"bound", "/nonexistent.json"}).code, kExitUsage);
}

TEST(Cli, HorizonShorterThanControlTime) {
  const auto dir = write_config("short", kSmall);
  const auto r = run({"bound", (dir / "config.json").string(), "--horizon", "0.5", "--out",
                      (dir / "out").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("horizon must exceed T"), std::string::npos) << r.err;
  fs::remove_all(dir);
}

TEST(Cli, ReportPassesAndOverridesApply) {
  const auto dir = write_config("bound", kSmall);
  const auto r = run({"report", (dir / "config.json").string(), "--out", (dir / "out").string(),
                      "--seed", "4", "--dx", "0.02", "--horizon", "8"});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  std::ifstream in(dir / "out" / "scenario.json");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str());
  EXPECT_EQ(j["grid"]["nodes"], 50);
  EXPECT_EQ(j["numerics"]["horizon"], 8.0);
  EXPECT_EQ(j["seed"], 4);
  fs::remove_all(dir);
}

TEST(Cli, DominanceViolationExitsTwo) {
  // A deliberately wrong constant: C_T = 1 with a weak damper cannot dominate.
  const auto dir = write_config("violate", R"({
    "grid": {"dimension": 1, "length": 1.0, "nodes": 100},
    "damper": {"intervals": [[0.45, 0.55]], "amplitude": 0.05},
    "numerics": {"horizon": 6.0},
    "constants": {"T": 0.7, "C_T": 1.0}
  })");
  const auto r = run({"bound", (dir / "config.json").string(), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, kExitViolation) << r.err;
  fs::remove_all(dir);
}

TEST(Cli, ConjugateAndObservability) {
  const auto dir = write_config("misc", kSmall);
  EXPECT_EQ(run({"conjugate", (dir / "config.json").string(), "--out", (dir / "c").string()}).code,
            kExitPass);
  EXPECT_TRUE(fs::exists(dir / "c" / "conjugate.csv"));
  EXPECT_EQ(
      run({"observability", (dir / "config.json").string(), "--out", (dir / "o").string()}).code,
      kExitPass);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace wavedecay
