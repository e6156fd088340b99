#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "qflow/madelung.hpp"
#include "qflow/stencil.hpp"
#include "qflow/wavefield.hpp"
#include "support.hpp"

using namespace qflow;
using qtest::random_smooth_pair;
using qtest::synth_fields;

namespace {
const PhysicalConstants kC{1.0, 1.0};

WaveField constant_field(const Grid1D& g, cplx value) {
  return {g, 0.0, std::vector<cplx>(g.n, value)};
}
}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid1D(1.0, 0.0, 64), error);
  CHECK_THROWS_AS(Grid1D(0.0, 1.0, 8), error);
  Grid1D g(0.0, 1.0, 101);
  CHECK(g.dx() == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(g.x(100) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("norm: constant field on unit interval") {
  const Grid1D g(0.0, 1.0, 101);
  CHECK(norm(constant_field(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("norm: zero field rejected") {
  const Grid1D g(0.0, 1.0, 101);
  CHECK_THROWS_AS(norm(constant_field(g, 0.0)), error);
}

TEST_CASE("norm: non-finite amplitude rejected") {
  const Grid1D g(0.0, 1.0, 101);
  WaveField w = constant_field(g, 1.0);
  w.psi[50] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(norm(w), error);
}

TEST_CASE("norm: analytically normalized gaussian") {
  // |psi|^2 is the standard normal density; its integral over [-10,10] is 1
  // up to a 1e-23 tail truncation.
  const Grid1D g(-10.0, 10.0, 1024);
  WaveField w{g, 0.0, std::vector<cplx>(g.n)};
  const double amp = std::pow(2.0 * std::numbers::pi, -0.25);
  for (long i = 0; i < g.n; ++i) w.psi[i] = amp * std::exp(-g.x(i) * g.x(i) / 4.0);
  CHECK(std::abs(norm(w) - 1.0) < 1e-10);
}

TEST_CASE("normalize: scaling, idempotence, random field") {
  const Grid1D g(-10.0, 10.0, 512);
  WaveField w = gaussian_packet(g, kC, 0.5, 1.0, 0.3);
  for (auto& a : w.psi) a *= 2.0;  // norm 4
  const WaveField n1 = normalize(w);
  for (long i = 0; i < g.n; i += 37)
    CHECK(std::abs(n1.psi[i] - 0.5 * w.psi[i]) < 1e-14);

  const WaveField n2 = normalize(n1);
  for (long i = 0; i < g.n; ++i) CHECK(std::abs(n2.psi[i] - n1.psi[i]) <= 1e-14);

  Rng rng = make_rng(7);
  WaveField r{g, 0.0, std::vector<cplx>(g.n)};
  for (auto& a : r.psi) a = cplx(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  CHECK(std::abs(norm(normalize(r)) - 1.0) < 1e-12);
}

TEST_CASE("derivative: linear and quadratic exactness") {
  const Grid1D g(0.0, 1.0, 101);
  std::vector<double> lin(g.n), quad(g.n);
  for (long i = 0; i < g.n; ++i) {
    lin[i] = g.x(i);
    quad[i] = g.x(i) * g.x(i);
  }
  const auto d1 = derivative(lin, g, 1);
  for (long i = 0; i < g.n; ++i) CHECK(d1[i] == doctest::Approx(1.0).epsilon(1e-12));
  const auto d2 = derivative(quad, g, 2);
  for (long i = 1; i + 1 < g.n; ++i) CHECK(d2[i] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("derivative: second-order convergence on sin") {
  auto max_interior_err = [](long n) {
    const Grid1D g(0.0, 6.2831853071795864, n);
    std::vector<double> f(g.n);
    for (long i = 0; i < g.n; ++i) f[i] = std::sin(g.x(i));
    const auto d = derivative(f, g, 1);
    double err = 0.0;
    for (long i = 1; i + 1 < g.n; ++i) err = std::max(err, std::abs(d[i] - std::cos(g.x(i))));
    return err;
  };
  const double ratio = max_interior_err(512) / max_interior_err(1024);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("derivative: error paths") {
  std::vector<double> f{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(derivative(std::span<const double>(f), 0.1, 1), error);
  const Grid1D g(0.0, 1.0, 32);
  std::vector<double> ok(g.n, 1.0);
  CHECK_THROWS_AS(derivative(ok, g, 3), error);
}

TEST_CASE("decompose: plane wave") {
  const Grid1D g(-8.0, 8.0, 512);
  const double k = 5.0;
  WaveField w{g, 0.0, std::vector<cplx>(g.n)};
  for (long i = 0; i < g.n; ++i) w.psi[i] = std::exp(cplx(0.0, k * g.x(i)));
  const auto m = decompose(w, kC);
  for (long i = 0; i < g.n; ++i) {
    CHECK(m.rho[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.v[i] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::abs(m.Q[i]) < 1e-9);
  }
  // S is hbar*k*x plus a constant: uniform increments.
  for (long i = 0; i + 1 < g.n; ++i)
    CHECK(m.S[i + 1] - m.S[i] == doctest::Approx(k * g.dx()).epsilon(1e-10));
}

TEST_CASE("decompose: stationary gaussian against the symbolic Q oracle") {
  const double sigma = 0.8;
  auto run = [&](long n) {
    const Grid1D g(-10.0, 10.0, n);
    const WaveField w = gaussian_packet(g, kC, 0.0, sigma, 0.0);
    const auto m = decompose(w, kC);
    double verr = 0.0, qerr = 0.0, qscale = 0.0;
    for (long i = 0; i < g.n; ++i) {
      if (m.rho[i] <= m.bulk_threshold()) continue;
      verr = std::max(verr, std::abs(m.v[i]));
      const double qa = qtest::gaussian_q_oracle(g.x(i), 0.0, sigma, kC);
      qerr = std::max(qerr, std::abs(m.Q[i] - qa));
      qscale = std::max(qscale, std::abs(qa));
    }
    CHECK(verr < 1e-8);
    return qerr / qscale;
  };
  const double coarse = run(1024);
  const double fine = run(2048);
  CHECK(coarse < 1e-2);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("decompose/compose: roundtrips on smooth fields") {
  const Grid1D g(-6.0, 6.0, 700);
  const auto pair = random_smooth_pair(11);
  const auto m0 = synth_fields(g, kC, pair.rho, pair.S);

  // compose then decompose: recovers rho and S up to one additive constant
  const WaveField w = compose(m0, kC);
  const auto m1 = decompose(w, kC, 1e-12);
  const double s_shift = m1.S[0] - m0.S[0];
  for (long i = 0; i < g.n; ++i) {
    CHECK(std::abs(m1.rho[i] - m0.rho[i]) < 1e-10);
    CHECK(std::abs((m1.S[i] - m0.S[i]) - s_shift) < 1e-8);
  }

  // decompose then compose: identity up to a global phase
  const WaveField w2 = compose(m1, kC);
  const cplx phase = w.psi[0] / w2.psi[0];
  for (long i = 0; i < g.n; ++i) CHECK(std::abs(w2.psi[i] * phase - w.psi[i]) < 1e-8);
}

TEST_CASE("decompose: unwrap continuity on a fast phase") {
  const Grid1D g(-6.0, 6.0, 512);
  const auto pair = random_smooth_pair(23);
  auto fast_s = [&](double x) { return pair.S(x) + 4.0 * x; };  // multiple wraps
  const auto m0 = synth_fields(g, kC, pair.rho, fast_s);
  const auto m1 = decompose(compose(m0, kC), kC, 1e-12);
  const double pi_hbar = std::numbers::pi * kC.hbar;
  for (long i = 0; i + 1 < g.n; ++i)
    if (!m1.node_mask[i] && !m1.node_mask[i + 1])
      CHECK(std::abs(m1.S[i + 1] - m1.S[i]) < pi_hbar);
}

TEST_CASE("decompose: masking fills the gap by interpolation") {
  // Two far-separated humps with a dead valley between them.
  const Grid1D g(-12.0, 12.0, 1024);
  WaveField w{g, 0.0, std::vector<cplx>(g.n)};
  for (long i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    const double a = std::exp(-(x - 6.0) * (x - 6.0));
    const double b = std::exp(-(x + 6.0) * (x + 6.0));
    w.psi[i] = (a + b) * std::exp(cplx(0.0, 0.5 * x));
  }
  const auto m = decompose(w, kC, 1e-8);
  long masked = 0;
  for (long i = 0; i < g.n; ++i) {
    masked += m.node_mask[i];
    CHECK(std::isfinite(m.S[i]));
    CHECK(std::isfinite(m.v[i]));
    CHECK(std::isfinite(m.Q[i]));
  }
  CHECK(masked > 0);
  CHECK(masked < g.n);
}

TEST_CASE("decompose: rho_floor precondition") {
  const Grid1D g(-6.0, 6.0, 128);
  const WaveField w = gaussian_packet(g, kC, 0.0, 1.0, 0.0);
  CHECK_THROWS_AS(decompose(w, kC, 1.0), error);  // floor above max(rho)
  CHECK_THROWS_AS(decompose(w, kC, 0.0), error);  // floor must be positive
}

TEST_CASE("compose: trivial cases and error path") {
  const Grid1D g(0.0, 1.0, 64);
  MadelungFields m;
  m.grid = g;
  m.rho.assign(g.n, 1.0);
  m.S.assign(g.n, 0.0);
  WaveField w = compose(m, kC);
  for (long i = 0; i < g.n; ++i) CHECK(std::abs(w.psi[i] - cplx(1.0, 0.0)) < 1e-15);

  m.S.assign(g.n, kC.hbar * std::numbers::pi / 2.0);
  w = compose(m, kC);
  for (long i = 0; i < g.n; ++i) CHECK(std::abs(w.psi[i] - cplx(0.0, 1.0)) < 1e-15);

  m.rho[3] = -1.0;
  CHECK_THROWS_AS(compose(m, kC), error);
}
