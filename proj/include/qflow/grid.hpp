#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "qflow/errors.hpp"

namespace qflow {

/// Uniform 1D grid; node i sits at x_min + i*dx with dx = (x_max - x_min)/(n - 1).
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  long n = 16;

  Grid1D() = default;
  Grid1D(double lo, double hi, long nodes) : x_min(lo), x_max(hi), n(nodes) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
      fail(errc::config, "grid: x_max must exceed x_min and both must be finite");
    if (nodes < 16) fail(errc::config, "grid: need at least 16 nodes");
  }

  double dx() const { return (x_max - x_min) / double(n - 1); }
  double x(long i) const { return x_min + double(i) * dx(); }
  bool contains(double xq) const { return xq >= x_min && xq <= x_max; }
  std::vector<double> nodes() const {
    std::vector<double> out(n);
    for (long i = 0; i < n; ++i) out[i] = x(i);
    return out;
  }
  bool operator==(const Grid1D&) const = default;
};

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
};

inline void validate(const PhysicalConstants& c) {
  if (!(std::isfinite(c.hbar) && c.hbar > 0.0) || !(std::isfinite(c.mass) && c.mass > 0.0))
    fail(errc::config, "constants: hbar and mass must be positive and finite");
}

inline double trapezoid(std::span<const double> f, double dx) {
  if (f.size() < 2) fail(errc::config, "trapezoid: need at least 2 samples");
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return acc * dx;
}

}  // namespace qflow
