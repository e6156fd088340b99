#pragma once

#include <cstdint>
#include <vector>

#include "qflow/wavefield.hpp"

namespace qflow {

/// Hydrodynamic fields of a wavefunction: rho = |psi|^2, R = sqrt(rho),
/// S = hbar * unwrapped phase, v = dS/dx / m, Q = -(hbar^2/2m) R''/R.
/// Nodes with rho below rho_floor are masked and carry interpolated values.
struct MadelungFields {
  Grid1D grid;
  double t = 0.0;
  std::vector<double> rho;
  std::vector<double> R;
  std::vector<double> S;
  std::vector<double> v;
  std::vector<double> Q;
  std::vector<std::uint8_t> node_mask;
  double rho_floor = 0.0;

  /// Residual checks restrict themselves to nodes comfortably above the mask.
  double bulk_threshold() const { return 1e3 * rho_floor; }
};

double default_rho_floor(const WaveField& w);

MadelungFields decompose(const WaveField& w, const PhysicalConstants& c, double rho_floor);
MadelungFields decompose(const WaveField& w, const PhysicalConstants& c);

WaveField compose(const MadelungFields& m, const PhysicalConstants& c);

}  // namespace qflow
