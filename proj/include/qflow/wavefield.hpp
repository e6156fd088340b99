#pragma once

#include <complex>
#include <vector>

#include "qflow/grid.hpp"

namespace qflow {

using cplx = std::complex<double>;

/// Complex amplitude sampled on a uniform grid at one time instant.
struct WaveField {
  Grid1D grid;
  double t = 0.0;
  std::vector<cplx> psi;
};

/// Trapezoidal L2 norm of |psi|^2. Throws invalid-field on non-finite
/// amplitudes or a vanishing norm.
double norm(const WaveField& w);

/// Rescales to unit norm.
WaveField normalize(const WaveField& w);

/// Normalized packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x); sigma is the
/// standard deviation of |psi|^2.
WaveField gaussian_packet(const Grid1D& g, const PhysicalConstants& c, double x0, double sigma,
                          double k0);

/// Harmonic-oscillator ground state displaced to x0 (width^2 = hbar/(2 m omega)).
WaveField coherent_packet(const Grid1D& g, const PhysicalConstants& c, double omega, double x0);

/// Equal-weight sum of two packets of width slit_sigma centered at +-separation/2,
/// boosted by k0, then normalized.
WaveField double_slit_packet(const Grid1D& g, const PhysicalConstants& c, double separation,
                             double slit_sigma, double k0);

}  // namespace qflow
