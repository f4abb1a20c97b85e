#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "terracover/coverage_metrics.hpp"
#include "terracover/error.hpp"
#include "terracover/lane_planner.hpp"
#include "terracover/terrain.hpp"

namespace terracover {

enum class Command { gridify, plan, baseline, compare };

const char* to_string(Command command) noexcept;

struct RunConfig {
  Command command = Command::plan;
  std::filesystem::path terrain;
  std::filesystem::path contour;  // unused by gridify
  std::filesystem::path out_dir = ".";
  VehicleConfig vehicle;
  SolverConfig solver;
  GridBuildParams grid;
  PlanOptions plan;
  ReportOptions report{10.0, 0.1};
  bool compare = false;  // plan/baseline: also run the other planner and compare
  bool svg = false;

  void validate() const;
};

struct RunResult {
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> written;
};

/// Runs one subcommand end to end. All outputs are computed before anything is
/// written, then written atomically. Throws Error on failure.
RunResult run_pipeline(const RunConfig& config);

/// 2 for I/O, 3 for validation and extent errors, 4 for planning failures.
int exit_code(ErrorKind kind) noexcept;

/// Machine-readable single-line error document.
std::string error_json(const Error& error);

}  // namespace terracover
