#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridplan/benders.hpp"
#include "gridplan/reporting.hpp"

namespace gridplan {

enum class RunMode : std::uint8_t { Monolithic, Benders, Both };

struct RunConfig {
  std::filesystem::path network_path;
  std::filesystem::path scenarios_path;
  Scheme scheme = Scheme::BatteryPlusUnderground;
  RunMode mode = RunMode::Benders;
  EngineConfig engine;
  std::filesystem::path output_dir = "plan_out";
  bool baseline = false;
  bool svg = false;
  long seed = 0;
};

/// Solves the planning problem as configured. Does not write files.
RunReport execute(const RunConfig& config, const Network& net, const std::vector<Scenario>& scenarios,
                  const RiskyLineSet& risky);

/// Baseline: every scenario operated with no investment.
BaselineSummary evaluate_baseline(const Network& net, const std::vector<Scenario>& scenarios,
                                  const RiskyLineSet& risky);

/// Full command-line entry point. Returns 0 on success, 1 for input errors
/// and 2 for solver failures.
int plan_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridplan
