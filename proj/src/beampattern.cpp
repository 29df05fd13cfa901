#include "secbeam/beampattern.hpp"

#include <cmath>
#include <stdexcept>

#include "secbeam/hermitian_sdp.hpp"

namespace secbeam {

void IdealPattern::validate() const {
  grid.validate();
  if (gains.size() != grid.size()) {
    throw std::invalid_argument("IdealPattern: gains and grid differ in length");
  }
  if (!gains.allFinite() || (gains.array() < 0.0).any()) {
    throw std::invalid_argument("IdealPattern: gains must be finite and nonnegative");
  }
  if (!(gains.maxCoeff() > 0.0)) throw std::invalid_argument("IdealPattern: all gains are zero");
}

IdealPattern rect_pattern(const AngularGrid& grid, double theta0, double halfwidth) {
  if (!(halfwidth > 0.0)) throw std::invalid_argument("rect_pattern: halfwidth must be positive");
  grid.validate();
  IdealPattern p{grid, RealVector::Zero(grid.size())};
  // Grid angles are rounded values, so allow a hair of slack at the edges.
  const double slack = 1e-9 * std::max(1.0, halfwidth);
  for (Index m = 0; m < grid.size(); ++m) {
    if (std::abs(grid.angles[static_cast<std::size_t>(m)] - theta0) <= halfwidth + slack) p.gains(m) = 1.0;
  }
  if (!(p.gains.maxCoeff() > 0.0)) throw std::invalid_argument("rect_pattern: mainlobe contains no grid angle");
  return p;
}

DesiredCovariance solve_desired_covariance(const IdealPattern& pattern, const UlaGeometry& geom,
                                           double power, const conic::SolverOptions& opts) {
  pattern.validate();
  geom.validate();
  if (!(power > 0.0)) throw std::invalid_argument("solve_desired_covariance: power must be positive");
  const Index n = geom.n_antennas;

  // Work with gains scaled to unit peak and power scaled to one; both are
  // undone on the way out (eta absorbs the gain scale).
  const double gain_scale = pattern.gains.maxCoeff();
  const RealVector gains = pattern.gains / gain_scale;

  conic::ConicProblem prob;
  const Index r = prob.add_block(2 * n);
  const Index eta = prob.add_scalar();
  const Index t = prob.add_scalar();
  prob.objective = conic::LinearFunctional::scalar(t);
  prob.add_equality(conic::LinearFunctional().add_block(r, trace_coef(n)), 1.0, "power");
  prob.add_inequality(conic::LinearFunctional::scalar(eta), conic::Sense::GreaterEqual, 0.0, "eta");

  std::vector<conic::LinearFunctional> residuals;
  for (Index m = 0; m < pattern.grid.size(); ++m) {
    const ComplexVector a = steering_vector(geom, pattern.grid.angles[static_cast<std::size_t>(m)]);
    conic::LinearFunctional f;
    f.add_scalar(eta, gains(m));
    f.add_block(r, -quadratic_coef(a));
    residuals.push_back(std::move(f));
  }
  prob.add_soc(std::move(residuals), conic::LinearFunctional::scalar(t), "residual");

  const auto sol = conic::solve(prob, opts);
  if (!sol.optimal()) throw conic::SolveError("solve_desired_covariance", sol);

  DesiredCovariance out;
  out.r = hermitian_block(sol.blocks[0]) * power;
  out.eta = std::max(0.0, sol.scalars(eta)) * power / gain_scale;
  out.relative_gap = sol.relative_gap;
  out.solver_iterations = sol.iterations;
  out.residual = pattern_mismatch(pattern, geom, out.r, out.eta);
  return out;
}

RealVector beampattern_profile(const HermitianMatrix& r, const AngularGrid& grid, const UlaGeometry& geom) {
  if (r.dim() != geom.n_antennas) throw DimensionError("beampattern_profile: covariance/array size mismatch");
  RealVector out(grid.size());
  for (Index m = 0; m < grid.size(); ++m) {
    out(m) = quadratic_form(steering_vector(geom, grid.angles[static_cast<std::size_t>(m)]), r);
  }
  return out;
}

double pattern_mismatch(const IdealPattern& pattern, const UlaGeometry& geom, const HermitianMatrix& r,
                        double eta) {
  const RealVector profile = beampattern_profile(r, pattern.grid, geom);
  return (eta * pattern.gains - profile).squaredNorm();
}

}  // namespace secbeam
