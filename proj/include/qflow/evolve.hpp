#pragma once

#include <vector>

#include "qflow/madelung.hpp"
#include "qflow/potential.hpp"
#include "qflow/wavefield.hpp"

namespace qflow {

struct EvolutionConfig {
  double dt = 1e-3;
  long n_steps = 1;
  long store_every = 1;
  /// rho_floor for frame decompositions, as a fraction of each frame's max rho.
  double rho_floor_scale = 1e-12;
};

/// Stored evolution frames plus their Madelung decompositions. Frames land at
/// multiples of store_every and at the final step; times are uniform whenever
/// store_every divides n_steps (the time-residual checks require that).
struct FrameSeries {
  Grid1D grid;
  PhysicalConstants constants;
  Potential potential;
  EvolutionConfig config;
  std::vector<double> times;
  std::vector<WaveField> waves;
  std::vector<MadelungFields> fields;
  /// Per-frame additive constants that make S continuous in time at the
  /// density-maximum anchor of each consecutive pair.
  std::vector<double> s_offsets;

  struct Diagnostics {
    double max_boundary_density_ratio = 0.0;  // max over frames of rho(edge)/max(rho)
    double stability_advisory_ratio = 0.0;    // dt / (dx^2 m / hbar), informational
  } diagnostics;

  long frame_count() const { return static_cast<long>(times.size()); }
  /// Spacing between consecutive frames; throws if the series is non-uniform.
  double frame_dt() const;
  /// Local uniformity check used by the centered time differences.
  void require_uniform_around(long k) const;
  /// S of frame k with its time-alignment offset applied.
  std::vector<double> aligned_S(long k) const;
};

/// One Crank-Nicolson step with homogeneous Dirichlet walls; advances t by dt.
WaveField cn_step(const WaveField& w, const Potential& p, const PhysicalConstants& c, double dt);

FrameSeries evolve(const WaveField& w0, const Potential& p, const PhysicalConstants& c,
                   const EvolutionConfig& cfg);

struct MeanEnergy {
  double value = 0.0;
  double imag_part = 0.0;  // quadrature diagnostic; should sit at roundoff
};

/// Re of the trapezoidal integral of psi* (-(hbar^2/2m) psi'' + V psi).
MeanEnergy mean_energy(const WaveField& w, const Potential& p, const PhysicalConstants& c);

}  // namespace qflow
