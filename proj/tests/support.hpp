#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "qflow/evolve.hpp"
#include "qflow/madelung.hpp"
#include "qflow/rng.hpp"
#include "qflow/stencil.hpp"

namespace qtest {

using namespace qflow;

/// Madelung fields built directly from callables, with v and Q derived through
/// the same discrete operators the library uses.
inline MadelungFields synth_fields(const Grid1D& g, const PhysicalConstants& c,
                                   const std::function<double(double)>& rho_fn,
                                   const std::function<double(double)>& s_fn, double t = 0.0) {
  MadelungFields m;
  m.grid = g;
  m.t = t;
  m.rho.resize(g.n);
  m.R.resize(g.n);
  m.S.resize(g.n);
  m.node_mask.assign(g.n, 0);
  double rho_max = 0.0;
  for (long i = 0; i < g.n; ++i) {
    m.rho[i] = rho_fn(g.x(i));
    m.R[i] = std::sqrt(m.rho[i]);
    m.S[i] = s_fn(g.x(i));
    rho_max = std::max(rho_max, m.rho[i]);
  }
  m.rho_floor = 1e-12 * rho_max;
  m.v = derivative(m.S, g, 1);
  for (auto& vi : m.v) vi /= c.mass;
  const auto d2R = derivative(m.R, g, 2);
  m.Q.resize(g.n);
  const double qfac = -c.hbar * c.hbar / (2.0 * c.mass);
  for (long i = 0; i < g.n; ++i)
    m.Q[i] = qfac * d2R[i] / std::max(m.R[i], std::sqrt(m.rho_floor));
  return m;
}

/// Random positive density and smooth phase from a few low-order modes.
struct SmoothPair {
  std::function<double(double)> rho;
  std::function<double(double)> S;
};

inline SmoothPair random_smooth_pair(std::uint64_t seed, double hbar = 1.0) {
  Rng rng = make_rng(seed);
  auto modes = [&rng](int k_modes) {
    std::vector<double> amp(k_modes), freq(k_modes), phase(k_modes);
    for (int k = 0; k < k_modes; ++k) {
      amp[k] = (0.2 + 0.4 * uniform01(rng)) / double(k + 1);
      freq[k] = 0.3 + 1.2 * uniform01(rng);
      phase[k] = 6.28318530717958648 * uniform01(rng);
    }
    return [amp, freq, phase, k_modes](double x) {
      double acc = 0.0;
      for (int k = 0; k < k_modes; ++k) acc += amp[k] * std::sin(freq[k] * x + phase[k]);
      return acc;
    };
  };
  auto g1 = modes(4);
  auto g2 = modes(4);
  SmoothPair out;
  out.rho = [g1](double x) { return std::exp(g1(x)); };
  out.S = [g2, hbar](double x) { return 2.0 * hbar * g2(x); };
  return out;
}

/// Frame series assembled from synthetic fields (waves left empty; the
/// transport and residual paths only read the Madelung frames).
inline FrameSeries synth_series(const Grid1D& g, const PhysicalConstants& c, const Potential& p,
                                const std::vector<double>& times,
                                const std::vector<MadelungFields>& fields) {
  FrameSeries f;
  f.grid = g;
  f.constants = c;
  f.potential = p;
  f.times = times;
  f.fields = fields;
  f.s_offsets.assign(times.size(), 0.0);
  return f;
}

/// Oracle: quantum potential of a real Gaussian whose density has std sigma.
inline double gaussian_q_oracle(double x, double x0, double sigma, const PhysicalConstants& c) {
  const double d = x - x0;
  const double s2 = sigma * sigma;
  return c.hbar * c.hbar / (2.0 * c.mass) * (0.5 / s2 - 0.25 * d * d / (s2 * s2));
}

/// Oracle: free-packet density std at time t for initial std sigma0.
inline double free_packet_sigma(double t, double sigma0, const PhysicalConstants& c) {
  const double r = c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

inline double density_mean(const std::vector<double>& rho, const Grid1D& g) {
  std::vector<double> xr(g.n);
  for (long i = 0; i < g.n; ++i) xr[i] = g.x(i) * rho[i];
  return trapezoid(xr, g.dx()) / trapezoid(rho, g.dx());
}

inline double density_variance(const std::vector<double>& rho, const Grid1D& g) {
  const double mu = density_mean(rho, g);
  std::vector<double> xxr(g.n);
  for (long i = 0; i < g.n; ++i) xxr[i] = (g.x(i) - mu) * (g.x(i) - mu) * rho[i];
  return trapezoid(xxr, g.dx()) / trapezoid(rho, g.dx());
}

}  // namespace qtest
