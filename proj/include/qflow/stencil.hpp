#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qflow/errors.hpp"
#include "qflow/grid.hpp"

namespace qflow {

/// Second-order finite differences: central stencils in the interior, one-sided
/// second-order stencils at the two boundary nodes.
template <class T>
std::vector<T> derivative(std::span<const T> f, double dx, int order) {
  const long n = static_cast<long>(f.size());
  if (order != 1 && order != 2) fail(errc::config, "derivative: order must be 1 or 2");
  if (n < 5) fail(errc::grid_too_small, "derivative: need at least 5 nodes");
  std::vector<T> d(n);
  if (order == 1) {
    const double c = 1.0 / (2.0 * dx);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * c;
    for (long i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * c;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * c;
  } else {
    const double c = 1.0 / (dx * dx);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * c;
    for (long i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * c;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * c;
  }
  return d;
}

template <class T>
std::vector<T> derivative(const std::vector<T>& f, const Grid1D& g, int order) {
  if (static_cast<long>(f.size()) != g.n)
    fail(errc::config, "derivative: value count does not match grid");
  return derivative(std::span<const T>(f), g.dx(), order);
}

}  // namespace qflow
