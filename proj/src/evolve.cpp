#include "qflow/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qflow/errors.hpp"
#include "qflow/stencil.hpp"

namespace qflow {

namespace {

/// Thomas solve of (diag, off) tridiagonal system with constant off-diagonals.
void solve_tridiagonal_const_off(const std::vector<cplx>& diag, cplx off,
                                 std::vector<cplx>& rhs, std::vector<cplx>& scratch) {
  const long n = static_cast<long>(diag.size());
  scratch.resize(n);
  cplx pivot = diag[0];
  if (std::abs(pivot) < 1e-300) fail(errc::solver_failure, "cn: singular tridiagonal pivot");
  rhs[0] /= pivot;
  for (long i = 1; i < n; ++i) {
    scratch[i] = off / pivot;
    pivot = diag[i] - off * scratch[i];
    if (std::abs(pivot) < 1e-300) fail(errc::solver_failure, "cn: singular tridiagonal pivot");
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / pivot;
  }
  for (long i = n - 2; i >= 0; --i) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

struct CrankNicolson {
  const Grid1D& grid;
  const PhysicalConstants& c;
  std::vector<double> V;  // evaluated once; shipped potentials are static
  double dt;

  std::vector<cplx> diag, rhs, scratch;

  CrankNicolson(const Grid1D& g, const PhysicalConstants& pc, std::vector<double> pot, double step)
      : grid(g), c(pc), V(std::move(pot)), dt(step) {
    const double dx = g.dx();
    const double kin = c.hbar * c.hbar / (2.0 * c.mass * dx * dx);
    const cplx ilambda(0.0, dt / (2.0 * c.hbar));
    const long m = g.n - 2;  // interior unknowns; walls pinned to zero
    diag.resize(m);
    for (long i = 0; i < m; ++i) diag[i] = 1.0 + ilambda * (2.0 * kin + V[i + 1]);
    off = ilambda * (-kin);
    kin_coupling = ilambda * kin;
  }

  cplx off;
  cplx kin_coupling;

  void step(std::vector<cplx>& psi) {
    const long n = grid.n;
    const long m = n - 2;
    rhs.resize(m);
    const double dx = grid.dx();
    const double kin = c.hbar * c.hbar / (2.0 * c.mass * dx * dx);
    const cplx ilambda(0.0, dt / (2.0 * c.hbar));
    for (long i = 0; i < m; ++i) {
      const cplx left = (i == 0) ? cplx(0.0) : psi[i];
      const cplx right = (i == m - 1) ? cplx(0.0) : psi[i + 2];
      rhs[i] = (1.0 - ilambda * (2.0 * kin + V[i + 1])) * psi[i + 1] +
               kin_coupling * (left + right);
    }
    solve_tridiagonal_const_off(diag, off, rhs, scratch);
    psi[0] = 0.0;
    psi[n - 1] = 0.0;
    for (long i = 0; i < m; ++i) psi[i + 1] = rhs[i];
  }
};

void check_finite_or_diverged(const std::vector<cplx>& psi, long step_index) {
  for (const auto& a : psi)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
      fail(errc::divergence,
           "evolve: non-finite amplitude at step " + std::to_string(step_index));
}

}  // namespace

double FrameSeries::frame_dt() const {
  if (times.size() < 2) fail(errc::config, "frames: need at least 2 frames");
  const double dt0 = times[1] - times[0];
  for (std::size_t k = 1; k + 1 < times.size(); ++k)
    if (std::abs((times[k + 1] - times[k]) - dt0) > 1e-9 * std::max(1.0, std::abs(dt0)))
      fail(errc::config, "frames: non-uniform frame spacing");
  return dt0;
}

void FrameSeries::require_uniform_around(long k) const {
  if (k < 1 || k + 1 >= frame_count())
    fail(errc::config, "frames: index needs a frame on both sides");
  const double a = times[k] - times[k - 1];
  const double b = times[k + 1] - times[k];
  if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a)))
    fail(errc::config, "frames: non-uniform frame spacing around index " + std::to_string(k));
}

std::vector<double> FrameSeries::aligned_S(long k) const {
  if (k < 0 || k >= frame_count()) fail(errc::config, "frames: index out of range");
  std::vector<double> s = fields[k].S;
  const double off = s_offsets.empty() ? 0.0 : s_offsets[k];
  for (auto& x : s) x += off;
  return s;
}

WaveField cn_step(const WaveField& w, const Potential& p, const PhysicalConstants& c, double dt) {
  validate(c);
  validate(p);
  if (!(dt > 0.0)) fail(errc::config, "cn_step: dt must be positive");
  WaveField out = w;
  CrankNicolson stepper(w.grid, c, potential_values(p, w.grid, c, w.t + 0.5 * dt), dt);
  stepper.step(out.psi);
  out.t = w.t + dt;
  return out;
}

FrameSeries evolve(const WaveField& w0, const Potential& p, const PhysicalConstants& c,
                   const EvolutionConfig& cfg) {
  validate(c);
  validate(p);
  if (!(cfg.dt > 0.0)) fail(errc::config, "evolve: dt must be positive");
  if (cfg.n_steps < 1) fail(errc::config, "evolve: n_steps must be at least 1");
  if (cfg.store_every < 1) fail(errc::config, "evolve: store_every must be at least 1");
  if (std::abs(norm(w0) - 1.0) > 1e-6) fail(errc::config, "evolve: initial field not normalized");

  FrameSeries out;
  out.grid = w0.grid;
  out.constants = c;
  out.potential = p;
  out.config = cfg;
  const double dx = w0.grid.dx();
  out.diagnostics.stability_advisory_ratio = cfg.dt * c.hbar / (dx * dx * c.mass);

  if (!(cfg.rho_floor_scale > 0.0) || !(cfg.rho_floor_scale < 1.0))
    fail(errc::config, "evolve: rho_floor_scale must lie in (0, 1)");

  auto store = [&](const WaveField& w) {
    out.times.push_back(w.t);
    out.waves.push_back(w);
    double rho_max = 0.0;
    for (const auto& a : w.psi) rho_max = std::max(rho_max, std::norm(a));
    out.fields.push_back(decompose(w, c, cfg.rho_floor_scale * rho_max));
    const auto& m = out.fields.back();
    double edge = std::max(m.rho.front(), m.rho.back());
    out.diagnostics.max_boundary_density_ratio =
        std::max(out.diagnostics.max_boundary_density_ratio, edge / rho_max);
  };

  WaveField w = w0;
  store(w);
  CrankNicolson stepper(w.grid, c, potential_values(p, w.grid, c, w.t + 0.5 * cfg.dt), cfg.dt);
  for (long k = 1; k <= cfg.n_steps; ++k) {
    stepper.step(w.psi);
    w.t = w0.t + double(k) * cfg.dt;
    if (k % cfg.store_every == 0 || k == cfg.n_steps) {
      check_finite_or_diverged(w.psi, k);
      store(w);
    }
  }

  // Cumulative time alignment of S, anchored per pair at the density maximum
  // of the earlier frame. round() picks the 2*pi*hbar multiple that minimizes
  // the jump; ambiguity near the half-period is re-checked by the residual ops.
  out.s_offsets.assign(out.frame_count(), 0.0);
  const double period = 2.0 * std::numbers::pi * c.hbar;
  for (long k = 0; k + 1 < out.frame_count(); ++k) {
    const auto& mk = out.fields[k];
    long anchor = long(std::max_element(mk.rho.begin(), mk.rho.end()) - mk.rho.begin());
    const double here = mk.S[anchor] + out.s_offsets[k];
    const double next = out.fields[k + 1].S[anchor];
    out.s_offsets[k + 1] = period * std::round((here - next) / period);
  }
  return out;
}

MeanEnergy mean_energy(const WaveField& w, const Potential& p, const PhysicalConstants& c) {
  validate(c);
  validate(p);
  if (std::abs(norm(w) - 1.0) > 1e-6)
    fail(errc::invalid_field, "mean_energy: field must be normalized");
  const auto V = potential_values(p, w.grid, c, w.t);
  const auto d2 = derivative(w.psi, w.grid, 2);
  const double kfac = -c.hbar * c.hbar / (2.0 * c.mass);
  std::vector<double> re(w.grid.n), im(w.grid.n);
  for (long i = 0; i < w.grid.n; ++i) {
    const cplx e = std::conj(w.psi[i]) * (kfac * d2[i] + V[i] * w.psi[i]);
    re[i] = e.real();
    im[i] = e.imag();
  }
  return {trapezoid(re, w.grid.dx()), trapezoid(im, w.grid.dx())};
}

}  // namespace qflow
