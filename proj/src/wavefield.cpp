#include "qflow/wavefield.hpp"

#include <cmath>

#include "qflow/errors.hpp"

namespace qflow {

double norm(const WaveField& w) {
  if (static_cast<long>(w.psi.size()) != w.grid.n)
    fail(errc::invalid_field, "norm: amplitude count does not match grid");
  std::vector<double> rho(w.psi.size());
  for (std::size_t i = 0; i < w.psi.size(); ++i) {
    const double re = w.psi[i].real(), im = w.psi[i].imag();
    if (!std::isfinite(re) || !std::isfinite(im))
      fail(errc::invalid_field, "norm: non-finite amplitude at node " + std::to_string(i));
    rho[i] = re * re + im * im;
  }
  const double result = trapezoid(rho, w.grid.dx());
  if (!(result > 0.0)) fail(errc::invalid_field, "norm: field has zero norm");
  return result;
}

WaveField normalize(const WaveField& w) {
  const double scale = 1.0 / std::sqrt(norm(w));
  WaveField out = w;
  for (auto& a : out.psi) a *= scale;
  return out;
}

WaveField gaussian_packet(const Grid1D& g, const PhysicalConstants& c, double x0, double sigma,
                          double k0) {
  validate(c);
  if (!(sigma > 0.0)) fail(errc::config, "gaussian packet: sigma must be positive");
  WaveField w{g, 0.0, std::vector<cplx>(g.n)};
  for (long i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    const double d = x - x0;
    w.psi[i] = std::exp(cplx(-d * d / (4.0 * sigma * sigma), k0 * x));
  }
  return normalize(w);
}

WaveField coherent_packet(const Grid1D& g, const PhysicalConstants& c, double omega, double x0) {
  validate(c);
  if (!(omega > 0.0)) fail(errc::config, "coherent packet: omega must be positive");
  const double sigma = std::sqrt(c.hbar / (2.0 * c.mass * omega));
  return gaussian_packet(g, c, x0, sigma, 0.0);
}

WaveField double_slit_packet(const Grid1D& g, const PhysicalConstants& c, double separation,
                             double slit_sigma, double k0) {
  validate(c);
  if (!(separation > 0.0) || !(slit_sigma > 0.0))
    fail(errc::config, "double slit: separation and slit width must be positive");
  WaveField w{g, 0.0, std::vector<cplx>(g.n)};
  const double h = 0.5 * separation;
  for (long i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    const double a = x - h, b = x + h;
    const double env = std::exp(-a * a / (4.0 * slit_sigma * slit_sigma)) +
                       std::exp(-b * b / (4.0 * slit_sigma * slit_sigma));
    w.psi[i] = env * std::exp(cplx(0.0, k0 * x));
  }
  return normalize(w);
}

}  // namespace qflow
