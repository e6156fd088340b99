#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qflow/evolve.hpp"
#include "qflow/potential.hpp"
#include "qflow/wavefield.hpp"

namespace qflow {

struct GaussianInit {
  double x0 = 0.0;
  double sigma = 1.0;
  double k0 = 0.0;
};
struct CoherentInit {
  double x0 = 1.0;
};
struct DoubleSlitInit {
  double separation = 2.0;
  double slit_width = 0.25;
  double k0 = 0.0;
};
using InitialWave = std::variant<GaussianInit, CoherentInit, DoubleSlitInit>;

struct TrajectorySpec {
  long n = 0;  // 0 disables the ensemble
  std::uint64_t seed = 1;
  long export_stride = 10;
};

struct DeviationSpec {
  bool enabled = false;
  double segment_dt = 0.1;
  long n_segments = 4;
};

struct CheckSpec {
  std::string name;
  double threshold = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  Grid1D grid{-16.0, 16.0, 2048};
  PhysicalConstants constants;
  Potential potential = Free{};
  InitialWave initial = GaussianInit{};
  EvolutionConfig evolution{1e-3, 1000, 0};  // store_every 0 -> default (<= 2000 frames)
  TrajectorySpec trajectories;
  DeviationSpec deviation;
  std::vector<CheckSpec> checks;  // empty -> default check set
};

/// Flat INI sections: [scenario] [grid] [constants] [potential] [initial]
/// [evolution] [trajectories] [deviation] [checks]. Unknown keys are errors;
/// omitted keys take the documented defaults.
Scenario parse_config(const std::string& text);

/// Known check names with their default thresholds.
const std::vector<CheckSpec>& default_checks();

/// Materializes defaults (store_every, checks) and validates all invariants,
/// including the boundary-density guard on the constructed initial packet.
Scenario finalize_scenario(Scenario s);

WaveField build_initial_wave(const Scenario& s);

const std::vector<std::string>& preset_names();
std::string preset_config(const std::string& name);
bool is_preset(const std::string& name);

}  // namespace qflow
