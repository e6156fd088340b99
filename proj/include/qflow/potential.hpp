#pragma once

#include <variant>
#include <vector>

#include "qflow/grid.hpp"

namespace qflow {

struct Free {};
struct Harmonic {
  double omega = 1.0;
};
struct Barrier {
  double height = 1.0;
  double center = 0.0;
  double width = 1.0;
};

/// All shipped variants are time-independent; evaluation accepts t so that
/// time-dependent potentials can slot in behind the same interface.
using Potential = std::variant<Free, Harmonic, Barrier>;

void validate(const Potential& p);

double potential_at(const Potential& p, const PhysicalConstants& c, double x, double t);

std::vector<double> potential_values(const Potential& p, const Grid1D& g,
                                     const PhysicalConstants& c, double t);

/// Analytic force -dV/dx. The barrier is piecewise constant, so the force is
/// zero away from the edges; the edge impulses are handled by the classical
/// stepper, not here.
double force_at(const Potential& p, const PhysicalConstants& c, double x, double t);

}  // namespace qflow
