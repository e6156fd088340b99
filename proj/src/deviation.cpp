#include "qflow/deviation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qflow/errors.hpp"
#include "qflow/interp.hpp"
#include "qflow/stats.hpp"
#include "qflow/stencil.hpp"

namespace qflow {

namespace {

constexpr double kTiny = 1e-300;

void validate_sign(int sign) {
  if (sign != 1 && sign != -1) fail(errc::config, "deviation: sign must be +1 or -1");
}

std::vector<std::uint8_t> bulk_mask(const MadelungFields& m) {
  std::vector<std::uint8_t> bulk(m.grid.n, 0);
  const double thr = m.bulk_threshold();
  for (long i = 0; i < m.grid.n; ++i) bulk[i] = m.rho[i] > thr ? 1 : 0;
  return bulk;
}

/// Time-aligned S on frames k-1, k, k+1, re-checking that the alignment at the
/// density-maximum anchor is unambiguous.
struct AlignedTriple {
  std::vector<double> prev, mid, next;
  double frame_dt;
};

AlignedTriple aligned_s_triple(const FrameSeries& frames, long k, const PhysicalConstants& c) {
  frames.require_uniform_around(k);
  AlignedTriple out{frames.aligned_S(k - 1), frames.aligned_S(k), frames.aligned_S(k + 1),
                    frames.times[k] - frames.times[k - 1]};
  const auto& mk = frames.fields[k];
  const long anchor =
      long(std::max_element(mk.rho.begin(), mk.rho.end()) - mk.rho.begin());
  const double half_period = std::numbers::pi * c.hbar;
  for (const auto* s : {&out.prev, &out.next}) {
    const double jump = std::abs((*s)[anchor] - out.mid[anchor]);
    if (jump > 0.9 * half_period)
      fail(errc::unwrap_failure,
           "time unwrap: inter-frame phase jump at the anchor is ambiguous (> 0.9*pi*hbar)");
  }
  return out;
}

}  // namespace

double deviation_magnitude_from_uniform(double u, const PhysicalConstants& c) {
  validate(c);
  if (!(u > 0.0) || u > 1.0) fail(errc::config, "deviation: u must lie in (0, 1]");
  return -0.5 * c.hbar * std::log(u);
}

DeviationSample sample_deviation(Rng& rng, const PhysicalConstants& c) {
  const double mag = deviation_magnitude_from_uniform(uniform01(rng), c);
  return {mag, fair_sign(rng)};
}

DeviationHistogram fit_exponential(std::span<const double> magnitudes, std::span<const int> signs,
                                   int bins_override) {
  const long n = long(magnitudes.size());
  if (n < 100) fail(errc::insufficient_sample, "fit_exponential: need at least 100 samples");
  double sum = 0.0;
  double max_mag = 0.0;
  for (double m : magnitudes) {
    if (!(m >= 0.0) || !std::isfinite(m))
      fail(errc::config, "fit_exponential: magnitudes must be finite and non-negative");
    sum += m;
    max_mag = std::max(max_mag, m);
  }
  if (!(sum > 0.0)) fail(errc::degenerate_fit, "fit_exponential: all samples are zero");

  DeviationHistogram h;
  h.total = n;
  h.fitted_mean = sum / double(n);
  h.fitted_rate = double(n) / sum;
  h.ks_statistic = ks_vs_exponential(magnitudes, h.fitted_rate);

  long plus = 0;
  for (int s : signs) plus += s > 0;
  h.sign_plus_fraction = signs.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : double(plus) / double(signs.size());

  long bins;
  if (bins_override > 0) {
    bins = bins_override;
  } else {
    // Freedman-Diaconis width from the interquartile range.
    std::vector<double> sorted(magnitudes.begin(), magnitudes.end());
    std::sort(sorted.begin(), sorted.end());
    const double q1 = sorted[std::size_t(0.25 * double(n - 1))];
    const double q3 = sorted[std::size_t(0.75 * double(n - 1))];
    const double iqr = q3 - q1;
    const double width = 2.0 * iqr / std::cbrt(double(n));
    bins = width > 0.0 ? long(std::ceil(max_mag / width)) : 4;
    bins = std::clamp(bins, 4L, 512L);
  }
  const double top = max_mag > 0.0 ? max_mag : 1.0;
  h.edges.resize(bins + 1);
  for (long b = 0; b <= bins; ++b) h.edges[b] = top * double(b) / double(bins);
  h.counts.assign(bins, 0);
  for (double m : magnitudes) {
    long b = std::min(long(double(bins) * m / top), bins - 1);
    ++h.counts[b];
  }
  return h;
}

std::vector<double> branch_rhs(const MadelungFields& m, const PhysicalConstants& c, int sign) {
  validate(c);
  validate_sign(sign);
  const long n = m.grid.n;
  const auto d2rho = derivative(m.rho, m.grid, 2);
  std::vector<double> rho_v(n);
  for (long i = 0; i < n; ++i) rho_v[i] = m.rho[i] * m.v[i];
  const auto flux = derivative(rho_v, m.grid, 1);
  const double diff = c.hbar / (2.0 * c.mass);
  std::vector<double> out(n);
  for (long i = 0; i < n; ++i) out[i] = -double(sign) * diff * d2rho[i] - flux[i];
  return out;
}

Residual branch_average_residual(const MadelungFields& m, const PhysicalConstants& c) {
  const auto plus = branch_rhs(m, c, +1);
  const auto minus = branch_rhs(m, c, -1);
  const long n = m.grid.n;
  std::vector<double> rho_v(n);
  for (long i = 0; i < n; ++i) rho_v[i] = m.rho[i] * m.v[i];
  const auto flux = derivative(rho_v, m.grid, 1);
  const auto d2rho = derivative(m.rho, m.grid, 2);
  const double diff = c.hbar / (2.0 * c.mass);

  Residual r;
  for (long i = 0; i < n; ++i) {
    r.abs_norm = std::max(r.abs_norm, std::abs(0.5 * (plus[i] + minus[i]) - (-flux[i])));
    r.scale = std::max({r.scale, std::abs(diff * d2rho[i]), std::abs(flux[i])});
  }
  r.normalized = r.abs_norm / std::max(r.scale, kTiny);
  return r;
}

Residual continuity_residual(const FrameSeries& frames, long k, const PhysicalConstants& c) {
  validate(c);
  frames.require_uniform_around(k);
  const auto& m = frames.fields[k];
  const auto& prev = frames.fields[k - 1];
  const auto& next = frames.fields[k + 1];
  const double dtf = frames.times[k] - frames.times[k - 1];
  const long n = m.grid.n;

  std::vector<double> rho_v(n);
  for (long i = 0; i < n; ++i) rho_v[i] = m.rho[i] * m.v[i];
  const auto flux = derivative(rho_v, m.grid, 1);

  const auto bulk = bulk_mask(m);
  double resid = 0.0, max_dtrho = 0.0, max_flux = 0.0, rho_max = 0.0;
  for (long i = 0; i < n; ++i) {
    rho_max = std::max(rho_max, m.rho[i]);
    if (!bulk[i]) continue;
    const double dtrho = (next.rho[i] - prev.rho[i]) / (2.0 * dtf);
    resid = std::max(resid, std::abs(dtrho + flux[i]));
    max_dtrho = std::max(max_dtrho, std::abs(dtrho));
    max_flux = std::max(max_flux, std::abs(flux[i]));
  }
  // Stationary states drive both terms to the noise floor; the density scale
  // over the series duration keeps the ratio meaningful there.
  const double duration = frames.times.back() - frames.times.front();
  const double floor = rho_max / std::max(duration, dtf);
  Residual r{resid, std::max({max_dtrho, max_flux, floor}), 0.0};
  r.normalized = r.abs_norm / std::max(r.scale, kTiny);
  return r;
}

Residual identity_residual(const MadelungFields& m, const PhysicalConstants& c) {
  validate(c);
  const long n = m.grid.n;
  const auto d1rho = derivative(m.rho, m.grid, 1);
  const auto d2rho = derivative(m.rho, m.grid, 2);
  const auto d2R = derivative(m.R, m.grid, 2);
  const auto bulk = bulk_mask(m);
  const double h2m = c.hbar * c.hbar / c.mass;

  Residual r;
  for (long i = 0; i < n; ++i) {
    if (!bulk[i]) continue;
    const double g = d1rho[i] / m.rho[i];
    const double lhs = 0.125 * h2m * g * g;
    const double t1 = -0.5 * h2m * d2R[i] / m.R[i];
    const double t2 = 0.25 * h2m * d2rho[i] / m.rho[i];
    r.abs_norm = std::max(r.abs_norm, std::abs(lhs - (t1 + t2)));
    r.scale = std::max({r.scale, std::abs(lhs), std::abs(t1), std::abs(t2)});
  }
  r.normalized = r.abs_norm / std::max(r.scale, kTiny);
  return r;
}

Residual madelung_residual(const FrameSeries& frames, long k, const Potential& p,
                           const PhysicalConstants& c) {
  validate(c);
  const auto triple = aligned_s_triple(frames, k, c);
  const auto& m = frames.fields[k];
  const long n = m.grid.n;
  const auto grad = derivative(m.S, m.grid, 1);
  const auto V = potential_values(p, m.grid, c, m.t);
  const auto bulk = bulk_mask(m);

  Residual r;
  double max_dts = 0.0, max_h = 0.0;
  for (long i = 0; i < n; ++i) {
    if (!bulk[i]) continue;
    const double dts = (triple.next[i] - triple.prev[i]) / (2.0 * triple.frame_dt);
    const double hterm = grad[i] * grad[i] / (2.0 * c.mass) + V[i] + m.Q[i];
    r.abs_norm = std::max(r.abs_norm, std::abs(dts + hterm));
    max_dts = std::max(max_dts, std::abs(dts));
    max_h = std::max(max_h, std::abs(hterm));
  }
  r.scale = std::max(max_dts, max_h);
  r.normalized = r.abs_norm / std::max(r.scale, kTiny);
  return r;
}

BranchFields implied_classical_fields(const FrameSeries& frames, long k,
                                      const PhysicalConstants& c, int sign) {
  validate(c);
  validate_sign(sign);
  const auto triple = aligned_s_triple(frames, k, c);
  const auto& m = frames.fields[k];
  const long n = m.grid.n;
  const auto grad = derivative(m.S, m.grid, 1);
  const auto d2S = derivative(m.S, m.grid, 2);
  const auto d1rho = derivative(m.rho, m.grid, 1);
  const auto rhs = branch_rhs(m, c, sign);

  BranchFields b;
  b.sign = sign;
  b.bulk = bulk_mask(m);
  b.dxSc.resize(n);
  b.dtSc.resize(n);
  const double half_h = 0.5 * c.hbar;
  const double h2m = c.hbar / (2.0 * c.mass);
  for (long i = 0; i < n; ++i) {
    const double dts = (triple.next[i] - triple.prev[i]) / (2.0 * triple.frame_dt);
    b.dxSc[i] = grad[i] + double(sign) * half_h * d1rho[i] / std::max(m.rho[i], kTiny);
    b.dtSc[i] =
        dts + double(sign) * (half_h * rhs[i] / std::max(m.rho[i], kTiny) + h2m * d2S[i]);
  }
  return b;
}

Residual classical_hj_residual(const BranchFields& b, const MadelungFields& m, const Potential& p,
                               const PhysicalConstants& c) {
  validate(c);
  if (long(b.dxSc.size()) != m.grid.n)
    fail(errc::config, "classical_hj_residual: field size mismatch");
  const auto V = potential_values(p, m.grid, c, m.t);
  // Density-weighted max-norm: the derivation is an ensemble statement, so
  // each node enters with its trajectory weight rho/rho_max. Unweighted
  // max-norms are dominated by the singular near-node tails the mask policy
  // exists to contain.
  double rho_max = kTiny;
  for (long i = 0; i < m.grid.n; ++i)
    if (b.bulk[i]) rho_max = std::max(rho_max, m.rho[i]);
  Residual r;
  double weighted_resid = 0.0, weighted_scale = 0.0;
  for (long i = 0; i < m.grid.n; ++i) {
    if (!b.bulk[i]) continue;
    const double kin = b.dxSc[i] * b.dxSc[i] / (2.0 * c.mass);
    const double resid = std::abs(b.dtSc[i] + kin + V[i]);
    const double terms = std::abs(b.dtSc[i]) + std::abs(kin) + std::abs(V[i]);
    const double w = m.rho[i] / rho_max;
    r.abs_norm = std::max(r.abs_norm, resid);
    r.scale = std::max(r.scale, terms);
    weighted_resid = std::max(weighted_resid, w * resid);
    weighted_scale = std::max(weighted_scale, w * terms);
  }
  r.normalized = weighted_resid / std::max(weighted_scale, kTiny);
  return r;
}

DeviationHistogram measure_deviation_histogram(const TrajectoryEnsemble& ens,
                                               const FrameSeries& frames, const Potential& p,
                                               const PhysicalConstants& c, double segment_dt,
                                               long n_segments) {
  validate(c);
  validate(p);
  if (!(segment_dt > 0.0) || n_segments < 1)
    fail(errc::config, "deviation measure: bad segment configuration");
  const double frame_dt = frames.frame_dt();
  if (segment_dt < 5.0 * frame_dt - 1e-12)
    fail(errc::config, "deviation measure: segment_dt must be at least 5 frame spacings");
  const double t_end = ens.t + double(n_segments) * segment_dt;
  if (t_end > frames.times.back() + 1e-9)
    fail(errc::coverage, "deviation measure: frames do not span the requested segments");

  const long n_sub = std::max(5L, long(std::llround(segment_dt / frame_dt)));
  const double dt_adv = segment_dt / double(n_sub);

  TrajectoryEnsemble e = ens;
  std::vector<double> magnitudes;
  std::vector<int> signs;
  long skipped = 0;

  for (long seg = 0; seg < n_segments; ++seg) {
    const double t0 = e.t;
    const std::vector<double> x0 = e.positions;
    const std::vector<double> a0 = e.actions;
    const std::vector<std::uint8_t> alive0 = e.alive;
    e = accumulate_action(std::move(e), frames, dt_adv, n_sub, c);
    for (std::size_t i = 0; i < e.positions.size(); ++i) {
      if (!alive0[i] || !e.alive[i]) continue;
      const double ds = e.actions[i] - a0[i];
      double dsc;
      try {
        const auto sa = stationary_action(x0[i], t0, e.positions[i], e.t, p, c,
                                          1e-9 * std::max(1.0, std::abs(e.positions[i] - x0[i])));
        dsc = sa.action;
      } catch (const error&) {
        ++skipped;
        continue;
      }
      const double dev = ds - dsc;
      magnitudes.push_back(std::abs(dev));
      signs.push_back(dev >= 0.0 ? 1 : -1);
    }
  }

  DeviationHistogram h;
  if (long(magnitudes.size()) < 100)
    fail(errc::insufficient_sample, "deviation measure: fewer than 100 usable segments");
  try {
    h = fit_exponential(magnitudes, signs);
  } catch (const error& err) {
    if (err.code() != errc::degenerate_fit) throw;
    // All deviations vanish (exactly classical motion); report an empty fit.
    h.total = long(magnitudes.size());
    h.fitted_mean = 0.0;
    h.fitted_rate = std::numeric_limits<double>::infinity();
    h.ks_statistic = 0.0;
    long plus = 0;
    for (int s : signs) plus += s > 0;
    h.sign_plus_fraction = double(plus) / double(signs.size());
    h.edges = {0.0, 1.0};
    h.counts = {h.total};
  }
  h.skipped_segments = skipped;
  return h;
}

HbarLimitRow hbar_limit_point(const Scenario& s, const PhysicalConstants& base, double scale) {
  validate(base);
  if (!(scale > 0.0)) fail(errc::config, "hbar_limit_point: scale must be positive");
  const PhysicalConstants c{base.hbar * scale, base.mass};

  // Hold the classical momentum p = hbar*k and the packet width fixed;
  // the coherent packet keeps its hbar-defined ground-state width.
  WaveField w0;
  double x_center = 0.0;
  if (const auto* gi = std::get_if<GaussianInit>(&s.initial)) {
    w0 = gaussian_packet(s.grid, c, gi->x0, gi->sigma, gi->k0 * base.hbar / c.hbar);
    x_center = gi->x0;
  } else if (const auto* ci = std::get_if<CoherentInit>(&s.initial)) {
    const auto& h = std::get<Harmonic>(s.potential);
    w0 = coherent_packet(s.grid, c, h.omega, ci->x0);
    x_center = ci->x0;
  } else {
    const auto& ds = std::get<DoubleSlitInit>(s.initial);
    w0 = double_slit_packet(s.grid, c, ds.separation, ds.slit_width,
                            ds.k0 * base.hbar / c.hbar);
    x_center = 0.0;
  }

  const FrameSeries frames = evolve(w0, s.potential, c, s.evolution);

  // Resolution guard: the grid must resolve the packet's phase gradient.
  // Density-weighted max, which recovers the momentum scale hbar*k; the bare
  // max diverges at interference minima where v is singular by itself.
  double max_grad = 0.0;
  for (const auto& m : frames.fields) {
    const double rho_max = *std::max_element(m.rho.begin(), m.rho.end());
    for (long i = 0; i < m.grid.n; ++i)
      max_grad =
          std::max(max_grad, (m.rho[i] / rho_max) * std::abs(c.mass * m.v[i]));
  }
  if (s.grid.dx() > c.hbar / (10.0 * std::max(max_grad, kTiny)))
    fail(errc::resolution, "hbar_limit_study: dx too coarse for the phase gradient at hbar=" +
                               std::to_string(c.hbar));

  HbarLimitRow row;
  row.scale = scale;
  row.hbar = c.hbar;

  const auto& mf = frames.fields.back();
  const auto V = potential_values(s.potential, s.grid, c, frames.times.back());
  std::vector<double> num(s.grid.n), den(s.grid.n);
  for (long i = 0; i < s.grid.n; ++i) {
    num[i] = std::abs(mf.Q[i]) * mf.rho[i];
    den[i] = (0.5 * c.mass * mf.v[i] * mf.v[i] + std::abs(V[i])) * mf.rho[i];
  }
  row.q_fraction = trapezoid(num, s.grid.dx()) / std::max(trapezoid(den, s.grid.dx()), kTiny);

  // Center trajectory against the matched classical one.
  TrajectoryEnsemble one;
  one.positions = {x_center};
  one.actions = {0.0};
  one.alive = {1};
  one.t = frames.times.front();
  const double frame_dt = frames.frame_dt();
  const long steps_per_frame = 5;
  const long n_adv = steps_per_frame * (frames.frame_count() - 1);
  one = advect(std::move(one), frames, frame_dt / double(steps_per_frame), n_adv, c);

  ClassicalState cs{x_center,
                    c.mass * cubic_at(frames.fields.front().v, s.grid, x_center), 0.0};
  const long n_cl = s.evolution.n_steps;
  for (long k = 0; k < n_cl; ++k) cs = hamilton_step(cs, s.potential, c, s.evolution.dt);
  row.trajectory_deviation = std::abs(one.positions[0] - cs.x);
  return row;
}

HbarLimitReport hbar_limit_study(const Scenario& s, const PhysicalConstants& base,
                                 std::span<const double> scales) {
  validate(base);
  if (scales.size() < 3)
    fail(errc::config, "hbar_limit_study: need at least 3 scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] < scales[i - 1]) || !(scales[i] > 0.0))
      fail(errc::config, "hbar_limit_study: scales must be positive and strictly decreasing");

  HbarLimitReport report;
  for (double scale : scales) report.rows.push_back(hbar_limit_point(s, base, scale));

  report.q_fraction_decreasing = true;
  report.deviation_decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    report.q_fraction_decreasing &= report.rows[i].q_fraction < report.rows[i - 1].q_fraction;
    report.deviation_decreasing &=
        report.rows[i].trajectory_deviation < report.rows[i - 1].trajectory_deviation;
  }
  return report;
}

}  // namespace qflow
