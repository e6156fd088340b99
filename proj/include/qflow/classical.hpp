#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qflow/grid.hpp"
#include "qflow/potential.hpp"

namespace qflow {

struct ClassicalState {
  double x = 0.0;
  double p = 0.0;
  double t = 0.0;
};

/// One symplectic step of the Hamilton equations. Free and harmonic use
/// velocity Verlet; the barrier is piecewise free, so the step is exact
/// flight with energy-conserving momentum jumps at the edges (transmit when
/// p^2/2m clears the rise, reflect otherwise). Negative dt integrates backward.
ClassicalState hamilton_step(const ClassicalState& s, const Potential& p,
                             const PhysicalConstants& c, double dt);

struct StationaryActionResult {
  double action = 0.0;
  double initial_momentum = 0.0;
  int iterations = 0;
  double residual = 0.0;  // terminal position mismatch
};

/// Two-point action via Newton shooting on the initial momentum; the action is
/// the midpoint-rule integral of the Lagrangian along the solved leapfrog path.
StationaryActionResult stationary_action_shooting(double x1, double t1, double x2, double t2,
                                                  const Potential& p, const PhysicalConstants& c,
                                                  double tol);

/// Same contract, but free and harmonic segments return their closed forms.
StationaryActionResult stationary_action(double x1, double t1, double x2, double t2,
                                         const Potential& p, const PhysicalConstants& c,
                                         double tol);

/// Velocity field tabulated on a grid at uniformly spaced times.
struct SampledFlow {
  Grid1D grid;
  double t0 = 0.0;
  double frame_dt = 0.0;
  std::vector<std::vector<double>> frames;

  double at(double x, double t) const;
  double t_end() const { return t0 + frame_dt * double(frames.size() - 1); }
};

struct AdvectedSamples {
  std::vector<double> positions;
  std::vector<std::uint8_t> in_domain;
  long exited = 0;
};

/// Characteristics transport: RK4 of dx/dt = v_c(x, t) with linear
/// interpolation in x and t. Samples that leave the grid are frozen, flagged,
/// and counted.
AdvectedSamples advect_classical_ensemble(std::span<const double> samples,
                                          const SampledFlow& flow, double dt, long n_steps);

}  // namespace qflow
