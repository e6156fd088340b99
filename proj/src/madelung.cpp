#include "qflow/madelung.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qflow/errors.hpp"
#include "qflow/stencil.hpp"

namespace qflow {

namespace {

/// Linear fill of masked entries from the nearest unmasked neighbors; constant
/// extension where a masked run touches a boundary.
void fill_masked(std::vector<double>& f, const std::vector<std::uint8_t>& mask,
                 const Grid1D& g) {
  const long n = g.n;
  long i = 0;
  while (i < n) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    long lo = i - 1;               // last unmasked before the run, or -1
    long hi = i;
    while (hi < n && mask[hi]) ++hi;  // first unmasked after the run, or n
    if (lo < 0 && hi >= n) return;    // fully masked; caller rejects earlier
    if (lo < 0) {
      for (long j = i; j < hi; ++j) f[j] = f[hi];
    } else if (hi >= n) {
      for (long j = i; j < n; ++j) f[j] = f[lo];
    } else {
      const double span = double(hi - lo);
      for (long j = i; j < hi; ++j) {
        const double w = double(j - lo) / span;
        f[j] = f[lo] * (1.0 - w) + f[hi] * w;
      }
    }
    i = hi;
  }
}

}  // namespace

double default_rho_floor(const WaveField& w) {
  double rho_max = 0.0;
  for (const auto& a : w.psi) rho_max = std::max(rho_max, std::norm(a));
  return 1e-12 * rho_max;
}

MadelungFields decompose(const WaveField& w, const PhysicalConstants& c, double rho_floor) {
  validate(c);
  (void)norm(w);  // validates finiteness and non-degeneracy
  const Grid1D& g = w.grid;
  const long n = g.n;

  MadelungFields m;
  m.grid = g;
  m.t = w.t;
  m.rho_floor = rho_floor;
  m.rho.resize(n);
  m.R.resize(n);
  m.node_mask.assign(n, 0);

  double rho_max = 0.0;
  for (long i = 0; i < n; ++i) {
    m.rho[i] = std::norm(w.psi[i]);
    m.R[i] = std::sqrt(m.rho[i]);
    rho_max = std::max(rho_max, m.rho[i]);
  }
  if (!(rho_floor > 0.0) || !(rho_floor < rho_max))
    fail(errc::config, "decompose: rho_floor must satisfy 0 < rho_floor < max(rho)");

  long n_unmasked = 0;
  for (long i = 0; i < n; ++i) {
    m.node_mask[i] = m.rho[i] < rho_floor ? 1 : 0;
    if (!m.node_mask[i]) ++n_unmasked;
  }
  if (n_unmasked == 0) fail(errc::degenerate_field, "decompose: all nodes below rho_floor");

  // Phase: single left-to-right pass across unmasked nodes, removing the
  // 2*pi multiple that minimizes the jump between consecutive unmasked nodes.
  m.S.assign(n, 0.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  long prev = -1;
  double theta_prev = 0.0;
  double theta_acc = 0.0;
  for (long i = 0; i < n; ++i) {
    if (m.node_mask[i]) continue;
    const double theta = std::arg(w.psi[i]);
    if (prev < 0) {
      theta_acc = theta;
    } else {
      double delta = theta - theta_prev;
      delta -= two_pi * std::floor(delta / two_pi + 0.5);
      theta_acc += delta;
    }
    m.S[i] = c.hbar * theta_acc;
    theta_prev = theta;
    prev = i;
  }
  fill_masked(m.S, m.node_mask, g);

  m.v = derivative(m.S, g, 1);
  for (auto& vi : m.v) vi /= c.mass;

  const std::vector<double> d2R = derivative(m.R, g, 2);
  const double r_floor = std::sqrt(rho_floor);
  m.Q.resize(n);
  const double qfac = -c.hbar * c.hbar / (2.0 * c.mass);
  for (long i = 0; i < n; ++i) m.Q[i] = qfac * d2R[i] / std::max(m.R[i], r_floor);

  fill_masked(m.v, m.node_mask, g);
  fill_masked(m.Q, m.node_mask, g);
  return m;
}

MadelungFields decompose(const WaveField& w, const PhysicalConstants& c) {
  return decompose(w, c, default_rho_floor(w));
}

WaveField compose(const MadelungFields& m, const PhysicalConstants& c) {
  validate(c);
  WaveField w{m.grid, m.t, std::vector<cplx>(m.grid.n)};
  for (long i = 0; i < m.grid.n; ++i) {
    if (!(m.rho[i] >= 0.0) || !std::isfinite(m.rho[i]))
      fail(errc::invalid_density, "compose: density must be finite and non-negative");
    w.psi[i] = std::sqrt(m.rho[i]) * std::exp(cplx(0.0, m.S[i] / c.hbar));
  }
  return w;
}

}  // namespace qflow
