#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridplan/cli.hpp"

using namespace gridplan;
namespace fs = std::filesystem;

namespace {

const std::string kData = GRIDPLAN_DATA_DIR;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome plan(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = plan_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("five-bus example in both modes") {
  const auto dir = fresh_dir("gridplan_cli_both");
  const auto r = plan({"--network", kData + "/example_5bus.json", "--scenarios",
                       kData + "/example_5bus_scenarios.json", "--mode", "both", "--baseline", "--svg", "--out",
                       dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"report.json", "iterations.csv", "placements.geojson", "soe.csv", "costs.csv",
                        "placements.svg"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto doc = read_json(dir / "report.json");
  CHECK(doc["mode"] == "both");
  CHECK(doc["relative_difference"].get<double>() <= 1e-5);
  CHECK(doc["baseline"]["objective_musd"].get<double>() >= doc["objective_musd"].get<double>() - 1e-9);
  CHECK(r.out.find("relative difference") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("battery-only scheme never undergrounds") {
  const auto dir = fresh_dir("gridplan_cli_batt");
  const auto r = plan({"--network", kData + "/tutorial_2bus.json", "--scenarios",
                       kData + "/tutorial_2bus_scenarios.json", "--scheme", "battery-only", "--out", dir.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = read_json(dir / "report.json");
  CHECK(doc["scheme"] == "battery-only");
  for (const auto& u : doc["decision"]["underground"]) CHECK(u["undergrounded"] == false);
  fs::remove_all(dir);
}

TEST_CASE("input errors exit with status 1") {
  SUBCASE("missing network file names the path") {
    const auto r = plan({"--network", "/nonexistent/grid.json", "--scenarios", kData + "/example_5bus_scenarios.json"});
    CHECK(r.code == 1);
    CHECK(r.err.find("/nonexistent/grid.json") != std::string::npos);
  }
  SUBCASE("unknown scheme") {
    const auto r = plan({"--network", kData + "/example_5bus.json", "--scenarios",
                         kData + "/example_5bus_scenarios.json", "--scheme", "lines-only"});
    CHECK(r.code == 1);
  }
  SUBCASE("required options") {
    CHECK(plan({"--network", kData + "/example_5bus.json"}).code == 1);
  }
  SUBCASE("non-positive epsilon") {
    const auto r = plan({"--network", kData + "/example_5bus.json", "--scenarios",
                         kData + "/example_5bus_scenarios.json", "--epsilon", "0"});
    CHECK(r.code == 1);
  }
}

TEST_CASE("help") {
  const auto r = plan({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("--scheme") != std::string::npos);
}

TEST_CASE("installed executable") {
  const auto dir = fresh_dir("gridplan_cli_exe");
  const std::string cmd = std::string(PLAN_EXE) + " --network " + kData + "/tutorial_2bus.json --scenarios " + kData +
                          "/tutorial_2bus_scenarios.json --out " + dir.string() + " > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "report.json"));
  const std::string bad = std::string(PLAN_EXE) + " --network /nonexistent.json --scenarios x.json > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 1);
  fs::remove_all(dir);
}
