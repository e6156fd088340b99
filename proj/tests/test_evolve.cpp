#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qflow/evolve.hpp"
#include "support.hpp"

using namespace qflow;
using qtest::density_mean;
using qtest::density_variance;

namespace {
const PhysicalConstants kC{1.0, 1.0};
}  // namespace

TEST_CASE("potential_values: all variants") {
  const Grid1D g(-2.0, 2.0, 17);  // dx = 0.25, x=1 on a node
  const auto zero = potential_values(Free{}, g, kC, 0.0);
  for (double v : zero) CHECK(v == 0.0);

  const auto harm = potential_values(Harmonic{2.0}, g, kC, 0.0);
  CHECK(harm[12] == doctest::Approx(2.0).epsilon(1e-14));  // 0.5*1*4*1

  const Potential barrier = Barrier{3.0, 0.0, 2.0};
  CHECK(potential_at(barrier, kC, 0.99, 0.0) == 3.0);
  CHECK(potential_at(barrier, kC, 1.01, 0.0) == 0.0);

  CHECK_THROWS_AS(potential_values(Harmonic{-1.0}, g, kC, 0.0), error);
  CHECK_THROWS_AS(potential_values(Barrier{1.0, 0.0, -2.0}, g, kC, 0.0), error);
}

TEST_CASE("cn_step: ground-state amplitude frozen, phase advances by -omega*dt/2") {
  const Grid1D g(-8.0, 8.0, 8192);
  const WaveField w0 = coherent_packet(g, kC, 1.0, 0.0);
  const double dt = 1e-3;
  const WaveField w1 = cn_step(w0, Harmonic{1.0}, kC, dt);
  CHECK(w1.t == doctest::Approx(dt));

  for (long i = 0; i < g.n; ++i)
    CHECK(std::abs(std::abs(w1.psi[i]) - std::abs(w0.psi[i])) < 1e-9);

  cplx overlap = 0.0;
  for (long i = 0; i < g.n; ++i) overlap += std::conj(w0.psi[i]) * w1.psi[i];
  CHECK(std::arg(overlap) == doctest::Approx(-0.5 * dt).epsilon(1e-6));
}

TEST_CASE("cn_step: single-step unitarity on a rough field") {
  const Grid1D g(-10.0, 10.0, 1024);
  Rng rng = make_rng(3);
  WaveField w{g, 0.0, std::vector<cplx>(g.n)};
  for (long i = 1; i + 1 < g.n; ++i)
    w.psi[i] = cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5) *
               std::exp(-0.05 * g.x(i) * g.x(i));
  w.psi[0] = w.psi[g.n - 1] = 0.0;
  w = normalize(w);
  const WaveField w1 = cn_step(w, Free{}, kC, 2e-3);
  CHECK(std::abs(norm(w1) / norm(w) - 1.0) < 1e-12);
}

TEST_CASE("cn_step: free gaussian spreading matches the analytic width law") {
  const Grid1D g(-16.0, 16.0, 2048);
  const double sigma0 = 0.5;
  WaveField w = gaussian_packet(g, kC, 0.0, sigma0, 0.0);
  const double dt = 1e-3;
  // Width doubles at t = 2*sqrt(3)*m*sigma0^2/hbar.
  const double t_double = 2.0 * std::sqrt(3.0) * kC.mass * sigma0 * sigma0 / kC.hbar;
  const long steps = long(std::llround(t_double / dt));
  EvolutionConfig cfg{dt, steps, steps};
  const FrameSeries f = evolve(w, Free{}, kC, cfg);
  const double sigma_T = std::sqrt(density_variance(f.fields.back().rho, g));
  const double oracle = qtest::free_packet_sigma(double(steps) * dt, sigma0, kC);
  CHECK(std::abs(sigma_T - oracle) / oracle < 5e-3);
}

TEST_CASE("evolve: frame bookkeeping") {
  const Grid1D g(-10.0, 10.0, 256);
  const WaveField w = gaussian_packet(g, kC, 0.0, 1.0, 0.0);
  const FrameSeries f = evolve(w, Free{}, kC, {1e-3, 1, 1});
  CHECK(f.frame_count() == 2);
  CHECK(f.times[0] == 0.0);
  CHECK(f.times[1] == doctest::Approx(1e-3));
  CHECK(f.frame_dt() == doctest::Approx(1e-3));

  // Non-divisible stride keeps the final frame but breaks uniform spacing.
  const FrameSeries f2 = evolve(w, Free{}, kC, {1e-3, 5, 2});
  CHECK(f2.frame_count() == 4);  // steps 0, 2, 4, 5
  CHECK_THROWS_AS(f2.frame_dt(), error);

  CHECK_THROWS_AS(evolve(w, Free{}, kC, {1e-3, 0, 1}), error);
  WaveField not_normalized = w;
  for (auto& a : not_normalized.psi) a *= 2.0;
  CHECK_THROWS_AS(evolve(not_normalized, Free{}, kC, {1e-3, 1, 1}), error);
}

TEST_CASE("evolve: coherent-state centroid tracks x0*cos(omega*t)") {
  const Grid1D g(-12.0, 12.0, 2048);
  const double x0 = 1.0;
  const WaveField w = coherent_packet(g, kC, 1.0, x0);
  const double period = 2.0 * std::numbers::pi;
  const long steps = 6284;
  const double dt = period / double(steps);
  const FrameSeries f = evolve(w, Harmonic{1.0}, kC, {dt, steps, steps / 4});
  for (long k = 0; k < f.frame_count(); ++k) {
    const double centroid = density_mean(f.fields[k].rho, g);
    CHECK(std::abs(centroid - x0 * std::cos(f.times[k])) < 1e-3 * x0);
  }
}

TEST_CASE("evolve: norm drift over 1e4 steps stays below 1e-10") {
  const Grid1D g(-16.0, 16.0, 2048);
  const WaveField w = gaussian_packet(g, kC, 0.0, 1.0, 0.0);
  const FrameSeries f = evolve(w, Free{}, kC, {1e-3, 10000, 10000});
  CHECK(std::abs(norm(f.waves.back()) - norm(f.waves.front())) < 1e-10);
}

TEST_CASE("mean_energy: harmonic ground state sits at hbar*omega/2") {
  const Grid1D g(-12.0, 12.0, 2048);
  const WaveField w = coherent_packet(g, kC, 1.0, 0.0);
  const MeanEnergy e = mean_energy(w, Harmonic{1.0}, kC);
  CHECK(std::abs(e.value - 0.5) < 1e-4);
  CHECK(std::abs(e.imag_part) < 1e-10);
}

TEST_CASE("mean_energy: conservation over 1e4 steps for static potential") {
  const Grid1D g(-12.0, 12.0, 2048);
  const WaveField w = coherent_packet(g, kC, 1.0, 1.0);
  const Potential pot = Harmonic{1.0};
  const double e0 = mean_energy(w, pot, kC).value;
  const FrameSeries f = evolve(w, pot, kC, {1e-3, 10000, 10000});
  const double e1 = mean_energy(f.waves.back(), pot, kC).value;
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-6);
}

TEST_CASE("mean_energy: precondition rejects non-normalized fields") {
  const Grid1D g(-12.0, 12.0, 512);
  WaveField w = gaussian_packet(g, kC, 0.0, 1.0, 0.0);
  for (auto& a : w.psi) a *= 1.5;
  CHECK_THROWS_AS(mean_energy(w, Free{}, kC), error);
}

TEST_CASE("mean_energy: hydrodynamic and operator forms agree") {
  const Grid1D g(-8.0, 8.0, 16384);
  const WaveField w = gaussian_packet(g, kC, 0.0, 1.0, 0.7);
  const MeanEnergy op_form = mean_energy(w, Free{}, kC);
  const auto m = decompose(w, kC);
  std::vector<double> integrand(g.n);
  for (long i = 0; i < g.n; ++i)
    integrand[i] = (0.5 * kC.mass * m.v[i] * m.v[i] + m.Q[i]) * m.rho[i];
  const double hydro = trapezoid(integrand, g.dx());
  CHECK(std::abs(hydro - op_form.value) <= 1e-6 * std::abs(op_form.value));
}

TEST_CASE("evolve: width-error convergence is second order") {
  const double sigma0 = 0.5;
  const double T = 1.0;
  auto width_error = [&](long n, double dt) {
    const Grid1D g(-12.0, 12.0, n);
    const WaveField w = gaussian_packet(g, kC, 0.0, sigma0, 0.0);
    const long steps = long(std::llround(T / dt));
    const FrameSeries f = evolve(w, Free{}, kC, {dt, steps, steps});
    const double sigma_T = std::sqrt(density_variance(f.fields.back().rho, g));
    return std::abs(sigma_T - qtest::free_packet_sigma(T, sigma0, kC));
  };
  const double coarse = width_error(192, 2.0e-2);
  const double fine = width_error(384, 1.0e-2);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.20));
}
