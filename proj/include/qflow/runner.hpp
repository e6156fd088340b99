#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qflow/scenario.hpp"

namespace qflow {

inline constexpr const char* kCodeVersion = "qflow 0.1.0";

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the scenario's trajectory seed
  int workers = 1;
  std::string format = "csv";  // aggregate output format for sweeps
  bool write_outputs = true;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double abs_norm = 0.0;     // un-normalized residual where applicable
  double scale = 0.0;        // normalization scale where applicable
  long frame_index = -1;     // frame the check was evaluated at, -1 if global
};

struct RunResult {
  nlohmann::ordered_json manifest;
  bool all_pass = false;
  std::filesystem::path manifest_path;
  std::vector<CheckResult> checks;
};

/// Evolve, decompose, transport, check, export; the manifest records every
/// configured check and every output file with its content hash.
RunResult run_scenario(const Scenario& s, const RunOptions& opt);

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  nlohmann::ordered_json metrics;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
  nlohmann::ordered_json aggregate;  // includes measured convergence orders
};

SweepResult sweep_scenario(const Scenario& base, const std::string& axis,
                           const std::vector<double>& values, const RunOptions& opt);

std::string format_report(const nlohmann::ordered_json& manifest);

}  // namespace qflow
