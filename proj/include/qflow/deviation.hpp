#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qflow/classical.hpp"
#include "qflow/madelung.hpp"
#include "qflow/rng.hpp"
#include "qflow/scenario.hpp"
#include "qflow/trajectories.hpp"

namespace qflow {

/// One draw of the action-deviation law: exponential magnitude with mean
/// hbar/2 and an independent fair branch sign.
struct DeviationSample {
  double magnitude = 0.0;
  int sign = 1;
};

double deviation_magnitude_from_uniform(double u, const PhysicalConstants& c);
DeviationSample sample_deviation(Rng& rng, const PhysicalConstants& c);

struct DeviationHistogram {
  std::vector<double> edges;
  std::vector<long> counts;
  long total = 0;
  double fitted_rate = 0.0;
  double fitted_mean = 0.0;
  double sign_plus_fraction = 0.0;
  double ks_statistic = 0.0;  // against Exp(fitted_rate)
  long skipped_segments = 0;
};

/// MLE exponential fit (rate = N / sum) with a KS report and Freedman-Diaconis
/// binning unless bins_override > 0.
DeviationHistogram fit_exponential(std::span<const double> magnitudes, std::span<const int> signs,
                                   int bins_override = 0);

/// Right-hand side of the branch density equation:
/// -sign*(hbar/2m) rho'' - (rho v)' with the module's discrete operators.
std::vector<double> branch_rhs(const MadelungFields& m, const PhysicalConstants& c, int sign);

struct Residual {
  double abs_norm = 0.0;
  double scale = 0.0;
  double normalized = 0.0;
};

/// Half-sum of the two branch RHS minus the continuity RHS; an exact discrete
/// cancellation, so the normalized value sits at roundoff.
Residual branch_average_residual(const MadelungFields& m, const PhysicalConstants& c);

/// Centered-time continuity residual d_t rho + (rho v)' over bulk nodes.
Residual continuity_residual(const FrameSeries& frames, long k, const PhysicalConstants& c);

/// Pointwise identity (hbar^2/8m)(rho'/rho)^2 = -(hbar^2/2m) R''/R + (hbar^2/4m) rho''/rho.
Residual identity_residual(const MadelungFields& m, const PhysicalConstants& c);

/// Energy-rate residual d_t S + (S')^2/2m + V + Q over bulk nodes.
Residual madelung_residual(const FrameSeries& frames, long k, const Potential& p,
                           const PhysicalConstants& c);

/// Classical fields implied by the deviation relations at one frame:
/// dxSc = S' + sign*(hbar/2) rho'/rho,
/// dtSc = d_t S + sign*((hbar/2) branch_rhs(sign)/rho + (hbar/2m) S'').
struct BranchFields {
  std::vector<double> dxSc;
  std::vector<double> dtSc;
  int sign = 1;
  std::vector<std::uint8_t> bulk;
};

BranchFields implied_classical_fields(const FrameSeries& frames, long k,
                                      const PhysicalConstants& c, int sign);

/// Hamilton-Jacobi residual of the implied fields: dtSc + dxSc^2/2m + V.
/// Vanishes analytically when psi solves the evolution equation; discretely
/// second-order small.
Residual classical_hj_residual(const BranchFields& b, const MadelungFields& m, const Potential& p,
                               const PhysicalConstants& c);

/// Slices each trajectory into equal-time segments, accumulates the quantum
/// action per segment, solves the two-point classical action between the same
/// endpoints, and histograms |dS - dS_c| with branch-sign statistics.
DeviationHistogram measure_deviation_histogram(const TrajectoryEnsemble& ens,
                                               const FrameSeries& frames, const Potential& p,
                                               const PhysicalConstants& c, double segment_dt,
                                               long n_segments);

struct HbarLimitRow {
  double scale = 1.0;
  double hbar = 1.0;
  double q_fraction = 0.0;            // int |Q| rho / int ((S')^2/2m + |V|) rho at the final frame
  double trajectory_deviation = 0.0;  // |x_bohm(T) - x_classical(T)| from the packet center
};

struct HbarLimitReport {
  std::vector<HbarLimitRow> rows;
  bool q_fraction_decreasing = false;
  bool deviation_decreasing = false;
};

/// One classical-limit point: re-runs the scenario at scaled hbar (classical
/// momentum held fixed, packet width fixed in position space).
HbarLimitRow hbar_limit_point(const Scenario& s, const PhysicalConstants& base, double scale);

/// Full study across strictly decreasing scales, with monotonicity flags.
HbarLimitReport hbar_limit_study(const Scenario& s, const PhysicalConstants& base,
                                 std::span<const double> scales);

}  // namespace qflow
