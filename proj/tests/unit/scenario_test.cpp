#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "wavedecay/error.hpp"
#include "wavedecay/scenario.hpp"

namespace wavedecay {
namespace {

using nlohmann::json;

const std::filesystem::path kScenarioDir = WAVEDECAY_SCENARIO_DIR;

json minimal() {
  return json::parse(R"({
    "name": "t",
    "grid": {"dimension": 1, "length": 1.0, "nodes": 100},
    "damper": {"intervals": [[0.3, 0.7]], "amplitude": 1.0},
    "numerics": {"horizon": 6.0}
  })");
}

std::string validation_error(const json& j) {
  try {
    Scenario::from_json(j).validate();
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return "";
}

TEST(Scenario, ShippedConfigsRoundTrip) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kScenarioDir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const auto s = Scenario::from_file(entry.path().string());
    EXPECT_NO_THROW(s.validate()) << entry.path();
    const json once = s.to_json();
    const json twice = Scenario::from_json(once, s.base_dir).to_json();
    EXPECT_EQ(once.dump(), twice.dump()) << entry.path();
  }
  EXPECT_GE(count, 7);
}

TEST(Scenario, DefaultsFillIn) {
  const auto s = Scenario::from_json(minimal());
  EXPECT_EQ(s.law.kind, "linear");
  EXPECT_EQ(s.forcing.profile, "zero");
  EXPECT_FALSE(s.seed.has_value());
  const Grid g = s.build_grid();
  EXPECT_NEAR(s.dt(g), 0.45 * g.dx(), 1e-15);
  EXPECT_NEAR(s.working_T(), 1.25 * 2.0 * 0.3, 1e-12);
  EXPECT_EQ(s.ode_horizon(), 6.0);
}

TEST(Scenario, UnknownKeysAreRejected) {
  auto j = minimal();
  j["numerics"]["horizn"] = 3.0;
  try {
    Scenario::from_json(j);
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key 'horizn'"), std::string::npos);
  }
  auto k = minimal();
  k["extra"] = 1;
  EXPECT_THROW(Scenario::from_json(k), InvalidArgument);
}

TEST(Scenario, TypeErrorsAreRejected) {
  auto j = minimal();
  j["grid"]["nodes"] = "many";
  EXPECT_THROW(Scenario::from_json(j), InvalidArgument);
  auto k = minimal();
  k["seed"] = -4;
  EXPECT_THROW(Scenario::from_json(k), InvalidArgument);
}

TEST(Scenario, ValidationMessages) {
  auto j = minimal();
  j["numerics"]["horizon"] = 0.5;
  EXPECT_EQ(validation_error(j), "horizon must exceed T");
  j["numerics"]["horizon"] = 1.0;
  EXPECT_EQ(validation_error(j), "horizon must be at least 2T");

  auto cfl = minimal();
  cfl["numerics"]["dt"] = 0.05;
  EXPECT_NE(validation_error(cfl).find("CFL"), std::string::npos);

  auto k = minimal();
  k["constants"] = {{"C_T", 4.0}, {"K", 2.0}};
  EXPECT_EQ(validation_error(k), "K must be at least C_T");

  auto ct = minimal();
  ct["constants"] = {{"C_T", 0.5}};
  EXPECT_EQ(validation_error(ct), "C_T must be at least 1");

  auto fw = minimal();
  fw["numerics"]["fit_window"] = {4.0, 9.0};
  EXPECT_EQ(validation_error(fw), "fit_window must satisfy 0 <= t0 < t1 <= horizon");

  auto two_d = minimal();
  two_d["grid"] = {{"dimension", 2}, {"nodes", 16}};
  two_d["damper"] = {{"rectangles", {{0.0, 0.2, 0.0, 1.0}}}};
  EXPECT_NE(validation_error(two_d).find("constants.T"), std::string::npos);

  auto law = minimal();
  law["law"] = {{"kind", "cubic"}};
  EXPECT_EQ(validation_error(law), "unknown damping law 'cubic'");

  auto missing = minimal();
  missing["forcing"] = {{"profile", "table"}, {"file", "no_such_file.csv"}};
  EXPECT_FALSE(validation_error(missing).empty());

  EXPECT_EQ(validation_error(minimal()), "");
}

TEST(Scenario, UnreadableFiles) {
  EXPECT_THROW(Scenario::from_file("/nonexistent/config.json"), InvalidArgument);
  const auto bad = std::filesystem::temp_directory_path() / "wavedecay_bad.json";
  {
    std::FILE* f = std::fopen(bad.string().c_str(), "w");
    std::fputs("{ not json", f);
    std::fclose(f);
  }
  EXPECT_THROW(Scenario::from_file(bad.string()), InvalidArgument);
  std::filesystem::remove(bad);
}

TEST(Scenario, TwoDimensionalGridAndInitialData) {
  auto j = minimal();
  j["grid"] = {{"dimension", 2}, {"length", 1.0}, {"nodes", 16}};
  j["damper"] = {{"rectangles", {{0.0, 0.2, 0.0, 1.0}}}};
  j["constants"] = {{"T", 2.0}};
  const auto s = Scenario::from_json(j);
  EXPECT_NO_THROW(s.validate());
  const Grid g = s.build_grid();
  EXPECT_EQ(g.dimension(), 2);
  EXPECT_EQ(s.control_time().t_min, 2.0 / 1.25);
  EXPECT_EQ(s.working_T(), 2.0);
  const auto state = s.build_initial(g);
  EXPECT_GT(energy(state, g), 0.0);
}

TEST(ResolveSeed, Precedence) {
  auto s = Scenario::from_json(minimal());
  ::unsetenv("WAVEDECAY_SEED");
  EXPECT_EQ(resolve_seed(std::nullopt, s), 1u);
  ::setenv("WAVEDECAY_SEED", "77", 1);
  EXPECT_EQ(resolve_seed(std::nullopt, s), 77u);
  s.seed = 5;
  EXPECT_EQ(resolve_seed(std::nullopt, s), 5u);
  EXPECT_EQ(resolve_seed(9, s), 9u);
  s.seed.reset();
  ::setenv("WAVEDECAY_SEED", "abc", 1);
  EXPECT_THROW(resolve_seed(std::nullopt, s), InvalidArgument);
  ::unsetenv("WAVEDECAY_SEED");
}

}  // namespace
}  // namespace wavedecay
