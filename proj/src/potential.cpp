#include "qflow/potential.hpp"

#include <cmath>

#include "qflow/errors.hpp"

namespace qflow {

void validate(const Potential& p) {
  if (const auto* h = std::get_if<Harmonic>(&p)) {
    if (!(h->omega > 0.0) || !std::isfinite(h->omega))
      fail(errc::config, "potential: harmonic omega must be positive");
  } else if (const auto* b = std::get_if<Barrier>(&p)) {
    if (!(b->width > 0.0) || !std::isfinite(b->width) || !std::isfinite(b->height) ||
        !std::isfinite(b->center))
      fail(errc::config, "potential: barrier width must be positive and parameters finite");
  }
}

double potential_at(const Potential& p, const PhysicalConstants& c, double x, double /*t*/) {
  if (std::holds_alternative<Free>(p)) return 0.0;
  if (const auto* h = std::get_if<Harmonic>(&p))
    return 0.5 * c.mass * h->omega * h->omega * x * x;
  const auto& b = std::get<Barrier>(p);
  return std::abs(x - b.center) <= 0.5 * b.width ? b.height : 0.0;
}

std::vector<double> potential_values(const Potential& p, const Grid1D& g,
                                     const PhysicalConstants& c, double t) {
  validate(p);
  std::vector<double> out(g.n);
  for (long i = 0; i < g.n; ++i) out[i] = potential_at(p, c, g.x(i), t);
  return out;
}

double force_at(const Potential& p, const PhysicalConstants& c, double x, double /*t*/) {
  if (const auto* h = std::get_if<Harmonic>(&p)) return -c.mass * h->omega * h->omega * x;
  return 0.0;
}

}  // namespace qflow
