#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "qflow/errors.hpp"
#include "qflow/grid.hpp"

namespace qflow {

/// Piecewise-linear interpolation of nodal values; x is clamped to the grid.
inline double linear_at(std::span<const double> f, const Grid1D& g, double x) {
  const double dx = g.dx();
  double s = (x - g.x_min) / dx;
  s = std::clamp(s, 0.0, double(g.n - 1));
  long j = std::min(long(s), g.n - 2);
  double xi = s - double(j);
  return f[j] * (1.0 - xi) + f[j + 1] * xi;
}

/// Four-point Lagrange cubic; exact on cubics, falls back toward the edges by
/// clamping the stencil. x is clamped to the grid.
inline double cubic_at(std::span<const double> f, const Grid1D& g, double x,
                       const std::vector<std::uint8_t>* mask = nullptr,
                       long* mask_touches = nullptr) {
  const double dx = g.dx();
  double s = (x - g.x_min) / dx;
  s = std::clamp(s, 0.0, double(g.n - 1));
  long j = std::min(long(s), g.n - 2);
  long base = std::clamp(j - 1, 0L, g.n - 4);
  double t = s - double(base + 1);
  if (mask != nullptr && mask_touches != nullptr) {
    for (long k = 0; k < 4; ++k)
      if ((*mask)[base + k]) {
        ++(*mask_touches);
        break;
      }
  }
  const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return w0 * f[base] + w1 * f[base + 1] + w2 * f[base + 2] + w3 * f[base + 3];
}

/// Cumulative distribution built from nodal densities by trapezoidal quadrature;
/// linear between nodes, so inversion within a cell solves a quadratic in the
/// stable 2m/(b + sqrt(b^2+4am)) form.
class PiecewiseLinearCdf {
 public:
  PiecewiseLinearCdf(std::span<const double> rho, const Grid1D& g) : grid_(g) {
    if (static_cast<long>(rho.size()) != g.n) fail(errc::config, "cdf: density size mismatch");
    rho_.assign(rho.begin(), rho.end());
    cum_.assign(g.n, 0.0);
    const double dx = g.dx();
    for (long i = 0; i + 1 < g.n; ++i) {
      if (!(rho_[i] >= 0.0) || !std::isfinite(rho_[i]))
        fail(errc::invalid_density, "cdf: density must be finite and non-negative");
      cum_[i + 1] = cum_[i] + 0.5 * dx * (rho_[i] + rho_[i + 1]);
    }
    total_ = cum_.back();
    if (!(total_ > 0.0)) fail(errc::degenerate_field, "cdf: density integrates to zero");
  }

  double total_mass() const { return total_; }

  double eval(double x) const {
    if (x <= grid_.x_min) return 0.0;
    if (x >= grid_.x_max) return 1.0;
    const double dx = grid_.dx();
    double s = (x - grid_.x_min) / dx;
    long j = std::min(long(s), grid_.n - 2);
    double xi = s - double(j);
    double seg = dx * (rho_[j] * xi + 0.5 * (rho_[j + 1] - rho_[j]) * xi * xi);
    return (cum_[j] + seg) / total_;
  }

  double sample(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    const double target = u * total_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    long j = std::clamp(long(it - cum_.begin()) - 1, 0L, grid_.n - 2);
    const double dx = grid_.dx();
    const double m = (target - cum_[j]) / dx;
    const double b = rho_[j];
    const double a = 0.5 * (rho_[j + 1] - rho_[j]);
    double xi;
    const double disc = b * b + 4.0 * a * m;
    if (std::abs(a) < 1e-300) {
      xi = b > 0.0 ? m / b : 0.0;
    } else {
      const double denom = b + std::sqrt(std::max(disc, 0.0));
      xi = denom > 0.0 ? 2.0 * m / denom : 0.0;
    }
    xi = std::clamp(xi, 0.0, 1.0);
    return grid_.x(j) + xi * dx;
  }

 private:
  Grid1D grid_;
  std::vector<double> rho_;
  std::vector<double> cum_;
  double total_ = 0.0;
};

}  // namespace qflow
