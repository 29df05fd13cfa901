#include <cmath>

#include "secbeam/conic.hpp"

namespace secbeam::conic {

CertificateReport check_certificate(const ConicProblem& problem, const ConicSolution& solution,
                                    double tol) {
  CertificateReport rep;
  const auto& xb = solution.blocks;
  const auto& xs = solution.scalars;
  auto add = [&](CertificateEntry::Kind kind, const std::string& label, double residual) {
    const bool ok = residual <= tol;
    rep.entries.push_back({kind, label, residual, ok});
    rep.max_residual = std::max(rep.max_residual, residual);
  };

  for (const auto& e : problem.equalities) {
    const double v = e.lhs.evaluate(xb, xs);
    add(CertificateEntry::Kind::Equality, e.label, std::abs(v - e.rhs) / std::max(1.0, std::abs(e.rhs)));
  }
  for (const auto& e : problem.inequalities) {
    const double v = e.lhs.evaluate(xb, xs);
    const double viol = e.sense == Sense::GreaterEqual ? e.rhs - v : v - e.rhs;
    add(CertificateEntry::Kind::Inequality, e.label, std::max(0.0, viol) / std::max(1.0, std::abs(e.rhs)));
  }
  for (const auto& c : problem.socs) {
    RealVector u(static_cast<Index>(c.vector.size()));
    for (std::size_t i = 0; i < c.vector.size(); ++i) u(static_cast<Index>(i)) = c.vector[i].evaluate(xb, xs);
    const double t = c.bound.evaluate(xb, xs);
    add(CertificateEntry::Kind::SecondOrderCone, c.label, std::max(0.0, u.norm() - t) / std::max(1.0, std::abs(t)));
  }
  for (std::size_t b = 0; b < xb.size(); ++b) {
    const double lmin = symmetric_min_eigenvalue(xb[b]);
    add(CertificateEntry::Kind::Psd, "block " + std::to_string(b), std::max(0.0, -lmin));
  }

  rep.gap = solution.gap;
  rep.relative_gap = solution.relative_gap;
  rep.pass = solution.status == Status::Optimal && rep.max_residual <= tol && rep.relative_gap <= tol;
  return rep;
}

}  // namespace secbeam::conic
