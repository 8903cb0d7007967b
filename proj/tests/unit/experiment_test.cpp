#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "wavedecay/error.hpp"
#include "wavedecay/experiment.hpp"

namespace wavedecay {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

Scenario small(const std::string& forcing = "zero") {
  json j = json::parse(R"({
    "name": "small",
    "grid": {"dimension": 1, "length": 1.0, "nodes": 100},
    "damper": {"intervals": [[0.3, 0.7]], "amplitude": 2.0},
    "initial": {"kind": "sine_mode", "mode": 1, "amplitude": 0.5},
    "numerics": {"horizon": 8.0, "sample_stride": 2},
    "ensemble": {"runs": 4, "modes": 8, "nodes": 50, "workers": 1}
  })");
  if (forcing == "exponential") {
    j["forcing"] = {{"profile", "exponential"}, {"M", 0.5}, {"theta", 0.2}};
  }
  return Scenario::from_json(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wavedecay_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Pipeline, UnforcedLinearEndToEnd) {
  Pipeline p(small(), 11);
  const auto& trace = p.simulate();
  EXPECT_GT(trace.t.size(), 10u);
  const auto& c = p.calibrate();
  EXPECT_GE(c.C_T, 1.0);
  EXPECT_EQ(c.K, 0.0);  // only the nonlinear bound uses K
  EXPECT_NEAR(c.E0, trace.E.front(), 1e-12);
  const auto& v = p.verify();
  EXPECT_TRUE(v.dominance.pass);
  EXPECT_EQ(v.prediction_source, "rate-table");
  ASSERT_TRUE(v.envelope_fit.has_value());
  EXPECT_EQ(v.envelope_fit->model, DecayModel::exponential);
  EXPECT_TRUE(v.agreement);
}

TEST(Pipeline, ArtifactsAreDeterministic) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  Pipeline(small("exponential"), 3).write_all(a.string());
  Pipeline(small("exponential"), 3).write_all(b.string());
  for (const char* name : {"trace.csv", "ode.csv", "envelope.csv", "constants.json",
                           "classification.json", "verdict.json", "scenario.json"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  const auto verdict = json::parse(slurp(a / "verdict.json"));
  EXPECT_EQ(verdict["seed"], 3);
  EXPECT_TRUE(verdict["dominance"]["pass"].get<bool>());
  const auto effective = json::parse(slurp(a / "scenario.json"));
  EXPECT_EQ(effective["seed"], 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, SeedChangesEnsembleOnly) {
  Pipeline p1(small(), 1);
  Pipeline p2(small(), 2);
  EXPECT_EQ(p1.simulate().E, p2.simulate().E);
  ASSERT_TRUE(p1.calibrate().report && p2.calibrate().report);
  EXPECT_NE(p1.calibrate().report->ratios, p2.calibrate().report->ratios);
}

TEST(Pipeline, OverriddenConstantsSkipEnsemble) {
  auto s = small();
  s.constants.C_T = 3.0;
  Pipeline p(s, 1);
  const auto& c = p.calibrate();
  EXPECT_EQ(c.C_T, 3.0);
  EXPECT_EQ(c.C_T_source, "config");
  EXPECT_FALSE(c.report.has_value());
}

TEST(Pipeline, ConstructorValidates) {
  auto s = small();
  s.numerics.horizon = 0.5;
  EXPECT_THROW(Pipeline(s, 1), InvalidArgument);
}

TEST(Pipeline, StageErrorsCarryTheStage) {
  const StageError e("bound", "overflow");
  EXPECT_EQ(std::string(e.what()), "[bound] overflow");
  EXPECT_EQ(e.stage(), "bound");
}

TEST(Pipeline, ConjugateTable) {
  auto s = small();
  s.law.kind = "sublinear";
  const auto dir = scratch("conj");
  Pipeline(s, 1).write_conjugate(dir.string());
  const auto text = slurp(dir / "conjugate.csv");
  EXPECT_EQ(text.rfind("s,psi,psi_star\r\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 142);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace wavedecay
