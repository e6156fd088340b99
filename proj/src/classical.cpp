#include "qflow/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qflow/errors.hpp"
#include "qflow/interp.hpp"

namespace qflow {

namespace {

/// Exact flight through a piecewise-constant barrier: free motion between edge
/// events; at an edge the momentum jump conserves energy (reflection when the
/// kinetic energy cannot clear the rise). Optionally accumulates the action
/// integral of (p^2/2m - V) dt, which is exact for this dynamics.
void barrier_advance(const Barrier& b, const PhysicalConstants& c, double& x, double& p,
                     double dt, double* action) {
  const double e1 = b.center - 0.5 * b.width;
  const double e2 = b.center + 0.5 * b.width;
  auto region_v = [&](double xq) { return (xq > e1 && xq < e2) ? b.height : 0.0; };

  if (dt < 0.0) {
    // Backward flight of (x, p) is forward flight of (x, -p).
    if (action != nullptr) fail(errc::config, "barrier flight: action needs dt > 0");
    p = -p;
    barrier_advance(b, c, x, p, -dt, nullptr);
    p = -p;
    return;
  }

  double remaining = dt;
  // Rests strictly on an edge are resolved by which side the motion enters.
  double v_here = region_v(x);
  if (x == e1 && p > 0.0) v_here = b.height;
  if (x == e2 && p < 0.0) v_here = b.height;
  int guard = 0;
  while (remaining > 0.0) {
    if (++guard > 64) fail(errc::no_convergence, "barrier flight: too many edge events");
    const double vel = p / c.mass;
    if (vel == 0.0) {
      if (action) *action += remaining * (p * p / (2.0 * c.mass) - v_here);
      return;
    }
    double t_edge = remaining;
    double edge = 0.0;
    bool hit = false;
    for (double e : {e1, e2}) {
      if ((vel > 0.0 && e > x) || (vel < 0.0 && e < x)) {
        const double te = (e - x) / vel;
        if (te < t_edge) {
          t_edge = te;
          edge = e;
          hit = true;
        }
      }
    }
    if (!hit) {
      if (action) *action += remaining * (p * p / (2.0 * c.mass) - v_here);
      x += vel * remaining;
      return;
    }
    if (action) *action += t_edge * (p * p / (2.0 * c.mass) - v_here);
    x = edge;
    remaining -= t_edge;
    const double v_next = (edge == e1) ? (vel > 0.0 ? b.height : 0.0)
                                       : (vel > 0.0 ? 0.0 : b.height);
    const double dV = v_next - v_here;
    const double p2 = p * p - 2.0 * c.mass * dV;
    if (p2 > 0.0) {
      p = (vel > 0.0 ? 1.0 : -1.0) * std::sqrt(p2);
      v_here = v_next;
    } else {
      p = -p;  // reflection; stays in the current region
    }
  }
}

}  // namespace

ClassicalState hamilton_step(const ClassicalState& s, const Potential& pot,
                             const PhysicalConstants& c, double dt) {
  validate(c);
  validate(pot);
  if (dt == 0.0) fail(errc::config, "hamilton_step: dt must be nonzero");
  ClassicalState out = s;
  if (const auto* b = std::get_if<Barrier>(&pot)) {
    barrier_advance(*b, c, out.x, out.p, dt, nullptr);
  } else {
    const double f0 = force_at(pot, c, s.x, s.t);
    const double p_half = s.p + 0.5 * dt * f0;
    out.x = s.x + dt * p_half / c.mass;
    const double f1 = force_at(pot, c, out.x, s.t + dt);
    out.p = p_half + 0.5 * dt * f1;
  }
  out.t = s.t + dt;
  return out;
}

namespace {

struct ShotResult {
  double x_end = 0.0;
  double action = 0.0;
};

long substep_count(double dtau) {
  const double target = dtau * 4096.0;
  return std::clamp(long(std::ceil(target)), 64L, 1L << 17);
}

ShotResult integrate_shot(double x1, double p0, double dtau, const Potential& pot,
                          const PhysicalConstants& c, bool want_action) {
  ShotResult r;
  if (const auto* b = std::get_if<Barrier>(&pot)) {
    double x = x1, p = p0, a = 0.0;
    barrier_advance(*b, c, x, p, dtau, want_action ? &a : nullptr);
    r.x_end = x;
    r.action = a;
    return r;
  }
  const long n = substep_count(dtau);
  const double h = dtau / double(n);
  double x = x1, p = p0, a = 0.0;
  for (long k = 0; k < n; ++k) {
    const double p_half = p + 0.5 * h * force_at(pot, c, x, 0.0);
    const double xn = x + h * p_half / c.mass;
    if (want_action) {
      const double xm = 0.5 * (x + xn);
      a += h * (p_half * p_half / (2.0 * c.mass) - potential_at(pot, c, xm, 0.0));
    }
    p = p_half + 0.5 * h * force_at(pot, c, xn, 0.0);
    x = xn;
  }
  r.x_end = x;
  r.action = a;
  return r;
}

}  // namespace

StationaryActionResult stationary_action_shooting(double x1, double t1, double x2, double t2,
                                                  const Potential& pot,
                                                  const PhysicalConstants& c, double tol) {
  validate(c);
  validate(pot);
  if (!(t2 > t1)) fail(errc::bad_ordering, "stationary_action: t2 must exceed t1");
  const double dtau = t2 - t1;
  if (const auto* h = std::get_if<Harmonic>(&pot)) {
    if (h->omega * dtau >= std::numbers::pi)
      fail(errc::no_convergence,
           "stationary_action: segment reaches the conjugate point (omega*dt >= pi)");
  }
  if (!(tol > 0.0)) tol = 1e-10 * std::max(1.0, std::abs(x2 - x1));

  double p0 = c.mass * (x2 - x1) / dtau;
  double r = integrate_shot(x1, p0, dtau, pot, c, false).x_end - x2;
  int iters = 0;
  while (std::abs(r) > tol) {
    if (++iters > 50)
      fail(errc::no_convergence, "stationary_action: Newton did not converge in 50 iterations");
    const double dp = 1e-6 * std::max(1.0, std::abs(p0));
    const double r1 = integrate_shot(x1, p0 + dp, dtau, pot, c, false).x_end - x2;
    const double jac = (r1 - r) / dp;
    if (!(std::abs(jac) > 1e-14))
      fail(errc::no_convergence, "stationary_action: flat shooting map");
    p0 -= r / jac;
    if (!std::isfinite(p0))
      fail(errc::no_convergence, "stationary_action: shooting diverged");
    r = integrate_shot(x1, p0, dtau, pot, c, false).x_end - x2;
  }
  const auto final_shot = integrate_shot(x1, p0, dtau, pot, c, true);
  return {final_shot.action, p0, iters, std::abs(final_shot.x_end - x2)};
}

StationaryActionResult stationary_action(double x1, double t1, double x2, double t2,
                                         const Potential& pot, const PhysicalConstants& c,
                                         double tol) {
  validate(c);
  validate(pot);
  if (!(t2 > t1)) fail(errc::bad_ordering, "stationary_action: t2 must exceed t1");
  const double dtau = t2 - t1;
  if (std::holds_alternative<Free>(pot)) {
    const double d = x2 - x1;
    return {c.mass * d * d / (2.0 * dtau), c.mass * d / dtau, 0, 0.0};
  }
  if (const auto* h = std::get_if<Harmonic>(&pot)) {
    const double w = h->omega;
    if (w * dtau >= std::numbers::pi)
      fail(errc::no_convergence,
           "stationary_action: segment reaches the conjugate point (omega*dt >= pi)");
    const double s = std::sin(w * dtau);
    const double action =
        c.mass * w / (2.0 * s) * ((x1 * x1 + x2 * x2) * std::cos(w * dtau) - 2.0 * x1 * x2);
    const double p0 = c.mass * w * (x2 - x1 * std::cos(w * dtau)) / s;
    return {action, p0, 0, 0.0};
  }
  return stationary_action_shooting(x1, t1, x2, t2, pot, c, tol);
}

double SampledFlow::at(double x, double t) const {
  const long nf = static_cast<long>(frames.size());
  if (nf == 1) return linear_at(frames[0], grid, x);
  double s = (t - t0) / frame_dt;
  s = std::clamp(s, 0.0, double(nf - 1));
  long j = std::min(long(s), nf - 2);
  const double w = s - double(j);
  return (1.0 - w) * linear_at(frames[j], grid, x) + w * linear_at(frames[j + 1], grid, x);
}

AdvectedSamples advect_classical_ensemble(std::span<const double> samples,
                                          const SampledFlow& flow, double dt, long n_steps) {
  if (flow.frames.size() < 2) fail(errc::coverage, "classical advect: need at least 2 frames");
  if (n_steps < 1 || !(dt != 0.0)) fail(errc::config, "classical advect: bad step config");
  const double t_final = flow.t0 + double(n_steps) * dt;
  if (t_final > flow.t_end() + 1e-9 * std::max(1.0, std::abs(flow.t_end())) ||
      t_final < flow.t0 - 1e-12)
    fail(errc::coverage, "classical advect: frames do not span the requested time interval");

  AdvectedSamples out;
  out.positions.assign(samples.begin(), samples.end());
  out.in_domain.assign(samples.size(), 1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double x = samples[i];
    if (!flow.grid.contains(x)) {
      out.in_domain[i] = 0;
      ++out.exited;
      continue;
    }
    double t = flow.t0;
    bool inside = true;
    for (long k = 0; k < n_steps; ++k) {
      const double k1 = flow.at(x, t);
      const double k2 = flow.at(x + 0.5 * dt * k1, t + 0.5 * dt);
      const double k3 = flow.at(x + 0.5 * dt * k2, t + 0.5 * dt);
      const double k4 = flow.at(x + dt * k3, t + dt);
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += dt;
      if (!flow.grid.contains(x)) {
        inside = false;
        x = std::clamp(x, flow.grid.x_min, flow.grid.x_max);
        break;
      }
    }
    out.positions[i] = x;
    if (!inside) {
      out.in_domain[i] = 0;
      ++out.exited;
    }
  }
  return out;
}

}  // namespace qflow
