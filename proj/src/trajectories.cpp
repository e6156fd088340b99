#include "qflow/trajectories.hpp"

#include <algorithm>
#include <cmath>

#include "qflow/errors.hpp"
#include "qflow/interp.hpp"
#include "qflow/rng.hpp"
#include "qflow/stats.hpp"

namespace qflow {

namespace {

/// Field sampler over a frame series: cubic in x, linear in t.
struct FieldSampler {
  const FrameSeries& frames;
  long* mask_touches;

  double bracket(double t, long& k, double& w) const {
    const auto& ts = frames.times;
    const long nf = frames.frame_count();
    if (t <= ts.front()) {
      k = 0;
      w = 0.0;
      return ts.front();
    }
    if (t >= ts.back()) {
      k = nf - 2;
      w = 1.0;
      return ts.back();
    }
    long lo = long(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
    k = std::clamp(lo, 0L, nf - 2);
    w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    return t;
  }

  double field_at(const std::vector<double> MadelungFields::*field, double x, double t) const {
    long k;
    double w;
    bracket(t, k, w);
    const auto& a = frames.fields[k];
    const auto& b = frames.fields[k + 1];
    const double fa = cubic_at(a.*field, frames.grid, x, &a.node_mask, mask_touches);
    const double fb = cubic_at(b.*field, frames.grid, x, &b.node_mask, mask_touches);
    return (1.0 - w) * fa + w * fb;
  }

  double v(double x, double t) const { return field_at(&MadelungFields::v, x, t); }
  double q(double x, double t) const { return field_at(&MadelungFields::Q, x, t); }
};

TrajectoryEnsemble transport(TrajectoryEnsemble e, const FrameSeries& frames, double dt,
                             long n_steps, const PhysicalConstants& c, bool with_action) {
  validate(c);
  if (n_steps < 1 || !(dt > 0.0)) fail(errc::config, "advect: need dt > 0 and n_steps >= 1");
  const double t_end = e.t + double(n_steps) * dt;
  const double tol = 1e-9 * std::max(1.0, std::abs(t_end));
  if (e.t < frames.times.front() - tol || t_end > frames.times.back() + tol)
    fail(errc::coverage, "advect: frames do not span the requested time interval");

  FieldSampler sampler{frames, &e.masked_interp_touches};
  const Grid1D& g = frames.grid;
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    if (!e.alive[i]) continue;
    double x = e.positions[i];
    double t = e.t;
    double action = e.actions.empty() ? 0.0 : e.actions[i];
    bool alive = true;
    for (long k = 0; k < n_steps; ++k) {
      const double k1 = sampler.v(x, t);
      const double k2 = sampler.v(x + 0.5 * dt * k1, t + 0.5 * dt);
      const double k3 = sampler.v(x + 0.5 * dt * k2, t + 0.5 * dt);
      const double k4 = sampler.v(x + dt * k3, t + dt);
      const double xn = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (with_action) {
        const double xm = 0.5 * (x + xn);
        const double tm = t + 0.5 * dt;
        const double vm = sampler.v(xm, tm);
        const double qm = sampler.q(xm, tm);
        const double vm_pot = potential_at(frames.potential, c, xm, tm);
        action += dt * (0.5 * c.mass * vm * vm - vm_pot - qm);
      }
      x = xn;
      t += dt;
      if (!g.contains(x)) {
        alive = false;
        x = std::clamp(x, g.x_min, g.x_max);
        break;
      }
    }
    e.positions[i] = x;
    if (!e.actions.empty()) e.actions[i] = action;
    if (!alive) e.alive[i] = 0;
  }
  e.t = t_end;
  return e;
}

}  // namespace

TrajectoryEnsemble sample_initial(std::span<const double> rho0, const Grid1D& g, long n,
                                  std::uint64_t seed) {
  if (n < 1) fail(errc::config, "sample_initial: need at least one trajectory");
  PiecewiseLinearCdf cdf(rho0, g);
  if (std::abs(cdf.total_mass() - 1.0) > 1e-6)
    fail(errc::config, "sample_initial: density must integrate to 1 within 1e-6");
  TrajectoryEnsemble e;
  e.seed = seed;
  e.t = 0.0;
  e.positions.resize(n);
  e.actions.assign(n, 0.0);
  e.alive.assign(n, 1);
  for (long i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, std::uint64_t(i));
    e.positions[i] = cdf.sample(uniform01(rng));
  }
  return e;
}

void seed_actions_from_phase(TrajectoryEnsemble& e, const MadelungFields& m0, double s_offset) {
  e.actions.resize(e.positions.size());
  for (std::size_t i = 0; i < e.positions.size(); ++i)
    e.actions[i] =
        cubic_at(m0.S, m0.grid, e.positions[i], &m0.node_mask, &e.masked_interp_touches) +
        s_offset;
}

TrajectoryEnsemble advect(TrajectoryEnsemble e, const FrameSeries& frames, double dt, long n_steps,
                          const PhysicalConstants& c) {
  return transport(std::move(e), frames, dt, n_steps, c, false);
}

TrajectoryEnsemble accumulate_action(TrajectoryEnsemble e, const FrameSeries& frames, double dt,
                                     long n_steps, const PhysicalConstants& c) {
  return transport(std::move(e), frames, dt, n_steps, c, true);
}

double equivariance_distance(const TrajectoryEnsemble& e, std::span<const double> rho,
                             const Grid1D& g) {
  std::vector<double> xs;
  xs.reserve(e.positions.size());
  for (std::size_t i = 0; i < e.positions.size(); ++i)
    if (e.alive[i]) xs.push_back(e.positions[i]);
  if (long(xs.size()) < 100)
    fail(errc::insufficient_sample, "equivariance: need at least 100 alive trajectories");
  PiecewiseLinearCdf cdf(rho, g);
  return ks_statistic(xs, [&cdf](double x) { return cdf.eval(x); });
}

PositionHistogram histogram(const TrajectoryEnsemble& e, const Grid1D& g, int bins) {
  if (bins < 4) fail(errc::config, "histogram: need at least 4 bins");
  PositionHistogram h;
  h.bin_width = (g.x_max - g.x_min) / double(bins);
  h.centers.resize(bins);
  h.counts.assign(bins, 0);
  for (int b = 0; b < bins; ++b) h.centers[b] = g.x_min + (double(b) + 0.5) * h.bin_width;
  long total = 0;
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    if (!e.alive[i]) continue;
    long b = long((e.positions[i] - g.x_min) / h.bin_width);
    b = std::clamp(b, 0L, long(bins) - 1);
    ++h.counts[b];
    ++total;
  }
  if (total == 0) fail(errc::insufficient_sample, "histogram: no alive trajectories");
  h.density.resize(bins);
  for (int b = 0; b < bins; ++b) h.density[b] = double(h.counts[b]) / (double(total) * h.bin_width);
  return h;
}

}  // namespace qflow
