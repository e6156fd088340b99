#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qflow/evolve.hpp"

namespace qflow {

/// Deterministic trajectory ensemble carried by the momentum flow p = dS/dx.
struct TrajectoryEnsemble {
  std::vector<double> positions;
  std::vector<double> actions;
  std::vector<std::uint8_t> alive;
  std::uint64_t seed = 0;
  double t = 0.0;
  long masked_interp_touches = 0;  // diagnostic: interpolation reached a masked node

  long alive_count() const {
    long n = 0;
    for (auto a : alive) n += a != 0;
    return n;
  }
};

/// Inverse-CDF draw of n positions from the piecewise-linear CDF of rho0.
/// Deterministic given the seed; per-trajectory RNG streams. Actions start at 0.
TrajectoryEnsemble sample_initial(std::span<const double> rho0, const Grid1D& g, long n,
                                  std::uint64_t seed);

/// Sets each trajectory's action to S(x0) interpolated from the given frame.
void seed_actions_from_phase(TrajectoryEnsemble& e, const MadelungFields& m0, double s_offset = 0.0);

/// RK4 transport through the frame sequence: cubic interpolation in x, linear
/// in t. Trajectories leaving the grid are frozen and marked not alive.
TrajectoryEnsemble advect(TrajectoryEnsemble e, const FrameSeries& frames, double dt, long n_steps,
                          const PhysicalConstants& c);

/// Transport plus the running action integral of (m v^2/2 - V - Q) by the
/// midpoint rule along each moving position.
TrajectoryEnsemble accumulate_action(TrajectoryEnsemble e, const FrameSeries& frames, double dt,
                                     long n_steps, const PhysicalConstants& c);

/// KS distance between the alive positions and the CDF of rho.
double equivariance_distance(const TrajectoryEnsemble& e, std::span<const double> rho,
                             const Grid1D& g);

struct PositionHistogram {
  std::vector<double> centers;
  std::vector<long> counts;
  std::vector<double> density;  // normalized to unit mass
  double bin_width = 0.0;
};

PositionHistogram histogram(const TrajectoryEnsemble& e, const Grid1D& g, int bins);

}  // namespace qflow
