#pragma once

// Ideal beampattern templates and the constrained least-squares fit of a
// transmit covariance to a template:
//
//   minimize    sum_m | eta P_d(theta_m) - a(theta_m)^H R a(theta_m) |^2
//   subject to  tr(R) = P0,  R PSD,  eta >= 0.

#include <vector>

#include "secbeam/conic.hpp"
#include "secbeam/scenario.hpp"

namespace secbeam {

struct IdealPattern {
  AngularGrid grid;
  RealVector gains;  // P_d(theta_m) >= 0, one per grid angle

  void validate() const;
};

struct DesiredCovariance {
  HermitianMatrix r;
  double eta = 0.0;
  double residual = 0.0;  // attained least-squares objective
  double relative_gap = 0.0;
  int solver_iterations = 0;
};

/// Unit gain on [theta0 - halfwidth, theta0 + halfwidth], zero elsewhere.
/// Throws std::invalid_argument if no grid angle falls in the mainlobe.
IdealPattern rect_pattern(const AngularGrid& grid, double theta0, double halfwidth);

/// Throws conic::SolveError if the solver does not reach optimality.
DesiredCovariance solve_desired_covariance(const IdealPattern& pattern, const UlaGeometry& geom,
                                           double power, const conic::SolverOptions& opts = {});

/// a(theta_m)^H R a(theta_m) for each grid angle (linear power).
RealVector beampattern_profile(const HermitianMatrix& r, const AngularGrid& grid,
                               const UlaGeometry& geom);

/// The least-squares objective at a given (R, eta).
double pattern_mismatch(const IdealPattern& pattern, const UlaGeometry& geom, const HermitianMatrix& r,
                        double eta);

}  // namespace secbeam
