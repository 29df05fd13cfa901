#include "secbeam/secure_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "secbeam/beampattern.hpp"
#include "secbeam/hermitian_sdp.hpp"

namespace secbeam {

namespace {

using conic::LinearFunctional;
using conic::Sense;

constexpr double kAngleSlack = 1e-9;

struct Families {
  bool user_sinr = true;
  bool beampattern_match = true;
  bool sidelobe = true;
  bool mainlobe_ripple = true;
};

std::vector<Index> beam_blocks(Index k) {
  std::vector<Index> b(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) b[static_cast<std::size_t>(i)] = i;
  return b;
}

std::vector<Index> all_blocks(Index k) {
  auto b = beam_blocks(k);
  b.push_back(k);
  return b;
}

LinearFunctional quad_on(const std::vector<Index>& blocks, const ComplexVector& v, double scale = 1.0) {
  const RealMatrix coef = scale * quadratic_coef(v);
  LinearFunctional f;
  for (Index b : blocks) f.add_block(b, coef);
  return f;
}

LinearFunctional combine(const LinearFunctional& a, double sa, const LinearFunctional& b, double sb) {
  LinearFunctional f;
  for (const auto& t : a.blocks) f.add_block(t.block, sa * t.coef);
  for (const auto& t : b.blocks) f.add_block(t.block, sb * t.coef);
  for (const auto& t : a.scalars) f.add_scalar(t.var, sa * t.coef);
  for (const auto& t : b.scalars) f.add_scalar(t.var, sb * t.coef);
  f.constant = sa * a.constant + sb * b.constant;
  return f;
}

void require_target(const Scenario& scn) {
  if (!(scn.target.gain_power() > 0.0)) {
    throw std::invalid_argument("secure design: target gain is zero, the eavesdropper term is degenerate");
  }
}

// Constraint families shared by both designs plus the power budget; the
// caller supplies the objective and any auxiliary scalars.
conic::ConicProblem constraint_skeleton(const Scenario& scn, const Thresholds& thr, DesignMode mode,
                                        const HermitianMatrix* desired, const AngleSets* sets,
                                        const Families& fam, bool match_beampattern) {
  const Index n = scn.n_antennas();
  const Index k = scn.n_users();
  conic::ConicProblem p;
  for (Index i = 0; i <= k; ++i) p.add_block(2 * n);
  const auto all = all_blocks(k);

  LinearFunctional power;
  for (Index b : all) power.add_block(b, trace_coef(n));
  p.add_equality(power, scn.power_budget, "power");

  if (fam.user_sinr) {
    for (Index i = 0; i < k; ++i) p.inequalities.push_back(linearized_user_sinr_constraint(scn, i, thr.gamma_b));
  }

  if (mode == DesignMode::Precise) {
    if (fam.beampattern_match && match_beampattern && std::isfinite(thr.gamma_bp)) {
      if (desired == nullptr || desired->dim() != n) {
        throw DimensionError("precise design: desired covariance has the wrong size");
      }
      p.add_soc(frobenius_rows(all, *desired), LinearFunctional::constant_value(std::sqrt(thr.gamma_bp)),
                "beampattern_match");
    }
    return p;
  }

  const ComplexVector a0 = steering_vector(scn.geometry, scn.target.theta0);
  const LinearFunctional peak = quad_on(all, a0);
  if (fam.sidelobe) {
    for (double th : sets->sidelobe) {
      const LinearFunctional side = quad_on(all, steering_vector(scn.geometry, th));
      p.add_inequality(combine(peak, 1.0, side, -1.0), Sense::GreaterEqual, thr.gamma_s, "sidelobe");
    }
  }
  if (fam.mainlobe_ripple) {
    for (double th : sets->mainlobe) {
      if (std::abs(th - scn.target.theta0) <= kAngleSlack) continue;
      const LinearFunctional main = quad_on(all, steering_vector(scn.geometry, th));
      p.add_inequality(combine(main, 1.0, peak, -(1.0 + thr.ripple)), Sense::LessEqual, 0.0, "ripple_upper");
      p.add_inequality(combine(main, 1.0, peak, -(1.0 - thr.ripple)), Sense::GreaterEqual, 0.0, "ripple_lower");
    }
  }
  return p;
}

struct Iterate {
  std::vector<HermitianMatrix> beams;
  HermitianMatrix noise_cov;
};

Iterate unpack(const conic::ConicSolution& sol, Index k, double scale) {
  Iterate it;
  for (Index i = 0; i < k; ++i) it.beams.push_back(hermitian_block(sol.blocks[static_cast<std::size_t>(i)]) * scale);
  it.noise_cov = hermitian_block(sol.blocks[static_cast<std::size_t>(k)]) * scale;
  return it;
}

// Eavesdropper numerator and denominator at angle theta.
std::pair<double, double> eve_terms(const Scenario& scn, double theta, const Iterate& it) {
  const ComplexVector a = steering_vector(scn.geometry, theta);
  HermitianMatrix sum = HermitianMatrix::zero(scn.n_antennas());
  for (const auto& w : it.beams) sum = sum + w;
  const double g = scn.target.gain_power();
  return {g * quadratic_form(a, sum), g * quadratic_form(a, it.noise_cov) + scn.noise_power};
}

// Problems are solved with powers divided by P0 so the solver sees unit
// scale; results are scaled back.
struct Normalized {
  Scenario scn;
  Thresholds thr;
  double scale;
};

Normalized normalize(const Scenario& scn, const Thresholds& thr) {
  Normalized out{scn, thr, scn.power_budget};
  out.scn.noise_power /= out.scale;
  out.scn.power_budget = 1.0;
  out.thr.gamma_bp /= out.scale * out.scale;
  out.thr.gamma_s /= out.scale;
  return out;
}

std::vector<double> mainlobe_with_center(const Scenario& scn, const AngularGrid& grid) {
  std::vector<double> out{scn.target.theta0};
  for (double th : grid.angles) {
    if (std::abs(th - scn.target.theta0) <= scn.target.delta_theta + kAngleSlack &&
        std::abs(th - scn.target.theta0) > kAngleSlack) {
      out.push_back(th);
    }
  }
  return out;
}

void fill_record(IterationRecord& rec, const Scenario& scn, const AngleSets& sets, const Iterate& it) {
  const auto [m, n] = eve_terms(scn, scn.target.theta0, it);
  rec.sinr_eve = m / n;
  rec.sum_sinr_eve = 0.0;
  for (double th : sets.mainlobe) {
    const auto [mm, nn] = eve_terms(scn, th, it);
    rec.sum_sinr_eve += mm / nn;
  }
  const auto users = sinr_users(scn, it.beams, it.noise_cov);
  rec.min_user_sinr = users.empty() ? 0.0 : *std::min_element(users.begin(), users.end());
}

// Phase one: a feasibility solve with a zero objective. On failure, drops
// one family at a time to name the culprit.
Iterate phase_one(const Normalized& nz, DesignMode mode, const HermitianMatrix* desired, const AngleSets* sets,
                  const DesignOptions& opts, int* solver_iterations) {
  auto attempt = [&](const Families& fam) {
    return conic::solve(constraint_skeleton(nz.scn, nz.thr, mode, desired, sets, fam, opts.match_beampattern),
                        opts.solver);
  };
  const auto sol = attempt(Families{});
  if (sol.optimal()) {
    *solver_iterations = sol.iterations;
    return unpack(sol, nz.scn.n_users(), nz.scale);
  }

  std::vector<std::pair<std::string, Families>> trials;
  Families f;
  f.user_sinr = false;
  trials.emplace_back("user_sinr", f);
  if (mode == DesignMode::Precise) {
    f = Families{};
    f.beampattern_match = false;
    trials.emplace_back("beampattern_match", f);
  } else {
    f = Families{};
    f.sidelobe = false;
    trials.emplace_back("sidelobe", f);
    f = Families{};
    f.mainlobe_ripple = false;
    trials.emplace_back("mainlobe_ripple", f);
  }
  std::string family = "combined";
  for (const auto& [name, fam] : trials) {
    if (attempt(fam).optimal()) {
      family = name;
      break;
    }
  }
  std::ostringstream msg;
  msg << to_string(mode) << " design: phase one returned " << conic::to_string(sol.status)
      << "; binding constraint family: " << family;
  if (sol.status != conic::Status::Infeasible) msg << " (" << sol.message << ")";
  throw InfeasibleDesign(msg.str(), family);
}

DesignSolution finish(const Scenario& scn, DesignMode mode, const Iterate& it, IterationTrace trace,
                      const AngularGrid& grid, const HermitianMatrix& desired) {
  DesignSolution out;
  out.mode = mode;
  out.beams = it.beams;
  out.noise_cov = it.noise_cov;
  out.covariance = transmit_covariance(it.beams, it.noise_cov);
  out.desired = desired;
  for (const auto& w : it.beams) {
    const auto r1 = extract_rank1(w);
    out.beamformers.push_back(r1.w);
    out.rank1_defect.push_back(r1.defect);
  }
  out.trace = std::move(trace);

  auto& m = out.metrics;
  m.user_sinr = sinr_users(scn, it.beams, it.noise_cov);
  m.sinr_eve = sinr_eve(scn, scn.target.theta0, it.beams, it.noise_cov);
  m.worst_sinr_eve = m.sinr_eve;
  for (double th : mainlobe_with_center(scn, grid)) {
    m.worst_sinr_eve = std::max(m.worst_sinr_eve, sinr_eve(scn, th, it.beams, it.noise_cov));
  }
  m.secrecy_rate = secrecy_rate_from_sinr(m.user_sinr, m.sinr_eve);
  m.worst_secrecy_rate = secrecy_rate_from_sinr(m.user_sinr, m.worst_sinr_eve);
  out.grid = grid;
  out.beampattern = beampattern_profile(out.covariance, grid, scn.geometry);
  return out;
}

}  // namespace

void Thresholds::validate() const {
  if (!(gamma_b > 0.0) || !std::isfinite(gamma_b)) throw std::invalid_argument("Thresholds: gamma_b must be positive");
  if (!(gamma_bp >= 0.0)) throw std::invalid_argument("Thresholds: gamma_bp must be nonnegative");
  if (!std::isfinite(gamma_s)) throw std::invalid_argument("Thresholds: gamma_s must be finite");
  if (!(ripple > 0.0 && ripple < 1.0)) throw std::invalid_argument("Thresholds: ripple must lie in (0, 1)");
}

const char* to_string(DesignMode m) { return m == DesignMode::Precise ? "precise" : "uncertain"; }

AngleSets angle_sets(const Scenario& scn, const AngularGrid& grid, double guard) {
  grid.validate();
  AngleSets s;
  const double half = scn.target.delta_theta;
  for (double th : grid.angles) {
    const double d = std::abs(th - scn.target.theta0);
    if (d <= half + kAngleSlack) s.mainlobe.push_back(th);
    else if (d > half + guard + kAngleSlack) s.sidelobe.push_back(th);
  }
  if (s.mainlobe.empty()) throw std::invalid_argument("angle_sets: no grid angle inside the mainlobe interval");
  if (s.sidelobe.empty()) throw std::invalid_argument("angle_sets: no grid angle in the sidelobe region");
  return s;
}

conic::InequalityConstraint linearized_user_sinr_constraint(const Scenario& scn, Index i, double gamma_b) {
  if (!(gamma_b > 0.0)) throw std::invalid_argument("linearized_user_sinr_constraint: gamma_b must be positive");
  if (i < 0 || i >= scn.n_users()) throw DimensionError("linearized_user_sinr_constraint: user index out of range");
  const Index k = scn.n_users();
  const RealMatrix coef = quadratic_coef(scn.user_direction(i));
  LinearFunctional f;
  for (Index b = 0; b <= k; ++b) f.add_block(b, (b == i ? 1.0 : -gamma_b) * coef);
  return {std::move(f), Sense::GreaterEqual, gamma_b * scn.noise_power, "user_sinr " + std::to_string(i)};
}

double user_sinr_slack(const Scenario& scn, Index i, double gamma_b, const std::vector<HermitianMatrix>& beams,
                       const HermitianMatrix& noise_cov) {
  const ComplexVector v = scn.user_direction(i);
  double interference = quadratic_form(v, noise_cov);
  for (std::size_t b = 0; b < beams.size(); ++b) {
    if (static_cast<Index>(b) != i) interference += quadratic_form(v, beams[b]);
  }
  return quadratic_form(v, beams.at(static_cast<std::size_t>(i))) - gamma_b * (interference + scn.noise_power);
}

conic::ConicProblem assemble_p8_subproblem(const Scenario& scn, const HermitianMatrix& desired,
                                           const Thresholds& thr, double c, bool match_beampattern) {
  scn.validate();
  thr.validate();
  require_target(scn);
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("assemble_p8_subproblem: c must be >= 0");
  const Index k = scn.n_users();
  auto p = constraint_skeleton(scn, thr, DesignMode::Precise, &desired, nullptr, Families{}, match_beampattern);
  const ComplexVector a0 = steering_vector(scn.geometry, scn.target.theta0);
  const double g = scn.target.gain_power();
  LinearFunctional obj = quad_on(beam_blocks(k), a0, g);
  obj.add_block(k, -c * g * quadratic_coef(a0));
  obj.add_constant(-c * scn.noise_power);
  p.objective = std::move(obj);
  return p;
}

conic::ConicProblem assemble_p9_subproblem(const Scenario& scn, const AngleSets& sets, const Thresholds& thr,
                                           const RealVector& y) {
  scn.validate();
  thr.validate();
  require_target(scn);
  if (sets.mainlobe.empty()) throw std::invalid_argument("assemble_p9_subproblem: empty mainlobe set");
  if (y.size() != static_cast<Index>(sets.mainlobe.size())) {
    throw DimensionError("assemble_p9_subproblem: one weight per mainlobe angle expected");
  }
  if (!y.allFinite() || (y.array() <= 0.0).any()) {
    throw std::invalid_argument("assemble_p9_subproblem: weights must be positive and finite");
  }
  const Index k = scn.n_users();
  auto p = constraint_skeleton(scn, thr, DesignMode::Uncertain, nullptr, &sets, Families{}, false);
  const double g = scn.target.gain_power();
  LinearFunctional obj;
  for (std::size_t m = 0; m < sets.mainlobe.size(); ++m) {
    const ComplexVector a = steering_vector(scn.geometry, sets.mainlobe[m]);
    const double ym = y(static_cast<Index>(m));
    const Index t = p.add_scalar();
    // minimize y^2 B - 2 y t
    const RealMatrix coef = quadratic_coef(a);
    for (Index b = 0; b < k; ++b) obj.add_block(b, ym * ym * g * coef);
    obj.add_scalar(t, -2.0 * ym);
    LinearFunctional a_m;
    a_m.add_block(k, g * coef);
    a_m.add_constant(scn.noise_power);
    p.add_rotated_soc(LinearFunctional::scalar(t), a_m, LinearFunctional::constant_value(1.0),
                      "sqrt_a " + std::to_string(m));
  }
  p.objective = std::move(obj);
  return p;
}

double dinkelbach_update(double m_val, double n_val) {
  if (!(n_val > 0.0)) throw std::invalid_argument("dinkelbach_update: denominator must be positive");
  return m_val / n_val;
}

double quadratic_transform_update(double a_val, double b_val) {
  if (!(a_val >= 0.0)) throw std::invalid_argument("quadratic_transform_update: A must be nonnegative");
  if (!(b_val > 0.0)) {
    throw std::invalid_argument(
        "quadratic_transform_update: B is zero (beams vanish on this angle); reinitialize from another point");
  }
  return std::sqrt(a_val) / b_val;
}

DesignSolution solve_problem8(const Scenario& scn, const HermitianMatrix& desired, const Thresholds& thr,
                              const DesignOptions& opts) {
  scn.validate();
  thr.validate();
  require_target(scn);
  const Normalized nz = normalize(scn, thr);
  const HermitianMatrix desired_n = desired * (1.0 / nz.scale);
  const AngleSets sets{mainlobe_with_center(scn, AngularGrid::default_grid()), {}};

  IterationTrace trace;
  IterationRecord first;
  Iterate it = phase_one(nz, DesignMode::Precise, &desired_n, nullptr, opts, &first.solver_iterations);
  auto [m_val, n_val] = eve_terms(scn, scn.target.theta0, it);
  first.iteration = 0;
  first.c = 0.0;
  first.surrogate = m_val;
  fill_record(first, scn, sets, it);
  trace.records.push_back(first);

  // M is a nonnegative quadratic form; rounding can push a nulled value a
  // hair below zero, so the parameter is clamped at zero.
  double c = std::max(0.0, dinkelbach_update(m_val, n_val));
  for (int t = 1; t <= opts.max_iterations; ++t) {
    const auto sol = conic::solve(assemble_p8_subproblem(nz.scn, desired_n, nz.thr, c, opts.match_beampattern),
                                  opts.solver);
    IterationRecord rec;
    rec.iteration = t;
    rec.c = c;
    rec.status = sol.status;
    rec.solver_iterations = sol.iterations;
    if (!sol.optimal()) {
      trace.records.push_back(rec);
      trace.stop_reason = std::string("subproblem ") + conic::to_string(sol.status) + ": " + sol.message;
      const std::string what = "solve_problem8: " + trace.stop_reason;
      throw DesignFailure(what, std::move(trace));
    }
    it = unpack(sol, scn.n_users(), nz.scale);
    std::tie(m_val, n_val) = eve_terms(scn, scn.target.theta0, it);
    rec.surrogate = m_val - c * n_val;
    fill_record(rec, scn, sets, it);
    trace.records.push_back(rec);

    const double next = std::max(0.0, dinkelbach_update(m_val, n_val));
    const bool small_step = std::abs(next - c) < opts.epsilon;
    const bool at_root = std::abs(rec.surrogate) <= opts.root_tolerance * n_val;
    c = next;
    if (small_step && at_root) {
      trace.converged = true;
      trace.stop_reason = "converged";
      break;
    }
  }
  if (!trace.converged) trace.stop_reason = "iteration limit";
  trace.returned = static_cast<int>(trace.records.size()) - 1;
  return finish(scn, DesignMode::Precise, it, std::move(trace), AngularGrid::default_grid(), desired);
}

DesignSolution solve_problem9(const Scenario& scn, const AngularGrid& grid, const Thresholds& thr,
                              const DesignOptions& opts) {
  scn.validate();
  thr.validate();
  require_target(scn);
  const Normalized nz = normalize(scn, thr);
  const AngleSets sets = angle_sets(scn, grid, opts.sidelobe_guard);
  const auto n_main = static_cast<Index>(sets.mainlobe.size());
  const double root_scale = std::sqrt(nz.scale);
  // sqrt(A) / B <= 1 / (floor sqrt(A)) <= 1 / (floor sigma) once SINR_E >= floor.
  const double y_cap = 1.0 / (opts.sinr_floor * std::sqrt(scn.noise_power));

  auto weights = [&](const Iterate& it) {
    RealVector y(n_main);
    for (Index m = 0; m < n_main; ++m) {
      const auto [b, a] = eve_terms(scn, sets.mainlobe[static_cast<std::size_t>(m)], it);
      // Weights live in [0, y_cap]; the clipped value still maximizes the
      // surrogate over that interval, so the ascent stays monotone.
      y(m) = b > 0.0 ? std::min(quadratic_transform_update(a, b), y_cap) : y_cap;
    }
    return y;
  };
  auto surrogate = [&](const Iterate& it, const RealVector& y) {
    double v = 0.0;
    for (Index m = 0; m < n_main; ++m) {
      const auto [b, a] = eve_terms(scn, sets.mainlobe[static_cast<std::size_t>(m)], it);
      v += 2.0 * y(m) * std::sqrt(a) - y(m) * y(m) * b;
    }
    return v;
  };

  IterationTrace trace;
  IterationRecord first;
  Iterate it = phase_one(nz, DesignMode::Uncertain, nullptr, &sets, opts, &first.solver_iterations);
  RealVector y;
  try {
    y = weights(it);
  } catch (const std::invalid_argument& e) {
    trace.stop_reason = e.what();
    throw DesignFailure(std::string("solve_problem9: phase-one point unusable: ") + e.what(), std::move(trace));
  }
  first.iteration = 0;
  first.y = y;
  first.surrogate = surrogate(it, y);
  fill_record(first, scn, sets, it);
  trace.records.push_back(first);
  // The summed eavesdropper SINR is nonnegative, so a nulled mainlobe is
  // globally optimal and the weights would only diverge from here.
  auto nulled = [&](const IterationRecord& rec) {
    if (rec.sum_sinr_eve > opts.null_tolerance) return false;
    trace.converged = true;
    trace.stop_reason = "eavesdropper nulled over the mainlobe";
    return true;
  };
  if (nulled(first)) return finish(scn, DesignMode::Uncertain, it, std::move(trace), grid, HermitianMatrix());

  // The weight step ascends the sum of inverse SINRs, which can trade a
  // deeper null at one angle for a worse sum. Every iterate is feasible, so
  // the one with the smallest summed eavesdropper SINR is returned.
  Iterate best = it;
  double best_sum = first.sum_sinr_eve;

  for (int t = 1; t <= opts.max_iterations; ++t) {
    const auto sol = conic::solve(assemble_p9_subproblem(nz.scn, sets, nz.thr, y * root_scale), opts.solver);
    IterationRecord rec;
    rec.iteration = t;
    rec.y = y;
    rec.status = sol.status;
    rec.solver_iterations = sol.iterations;
    if (!sol.optimal()) {
      trace.records.push_back(rec);
      trace.stop_reason = std::string("subproblem ") + conic::to_string(sol.status) + ": " + sol.message;
      const std::string what = "solve_problem9: " + trace.stop_reason;
      throw DesignFailure(what, std::move(trace));
    }
    it = unpack(sol, scn.n_users(), nz.scale);
    rec.surrogate = surrogate(it, y);
    fill_record(rec, scn, sets, it);
    trace.records.push_back(rec);
    if (rec.sum_sinr_eve < best_sum) {
      best = it;
      best_sum = rec.sum_sinr_eve;
      trace.returned = static_cast<int>(trace.records.size()) - 1;
    }
    if (nulled(rec)) break;

    RealVector next;
    try {
      next = weights(it);
    } catch (const std::invalid_argument& e) {
      trace.stop_reason = e.what();
      throw DesignFailure(std::string("solve_problem9: ") + e.what(), std::move(trace));
    }
    const double step = (next - y).lpNorm<Eigen::Infinity>();
    y = next;
    if (step < opts.epsilon) {
      trace.converged = true;
      trace.stop_reason = "converged";
      break;
    }
  }
  if (trace.stop_reason.empty()) trace.stop_reason = "iteration limit";
  return finish(scn, DesignMode::Uncertain, best, std::move(trace), grid, HermitianMatrix());
}

RankOne extract_rank1(const HermitianMatrix& w) {
  const Index n = w.dim();
  RankOne out{ComplexVector::Zero(n), 0.0};
  const double tr = w.trace();
  if (!(tr > 0.0)) return out;
  const auto eig = hermitian_eig(w);
  const double lmax = std::max(0.0, eig.values(0));
  ComplexVector u = eig.vectors.col(0);
  const double floor = 1e-12 * u.norm();
  for (Index i = 0; i < n; ++i) {
    if (std::abs(u(i)) > floor) {
      u *= std::conj(u(i)) / std::abs(u(i));
      u(i) = std::abs(u(i));
      break;
    }
  }
  out.w = std::sqrt(lmax) * u;
  out.defect = std::clamp(1.0 - lmax / tr, 0.0, 1.0);
  return out;
}

std::optional<RandomizedBeams> gaussian_randomization(const DesignSolution& sol, const Scenario& scn,
                                                      const Thresholds& thr, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("gaussian_randomization: trials must be >= 1");
  const Index n = scn.n_antennas();
  std::vector<ComplexMatrix> roots;
  for (const auto& w : sol.beams) roots.push_back(psd_sqrt(w));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

  std::optional<RandomizedBeams> best;
  for (int t = 0; t < trials; ++t) {
    RandomizedBeams cand;
    std::vector<HermitianMatrix> beams;
    for (std::size_t i = 0; i < sol.beams.size(); ++i) {
      ComplexVector z(n);
      for (Index j = 0; j < n; ++j) z(j) = Complex(normal(rng), normal(rng));
      ComplexVector w = roots[i] * z;
      const double norm = w.norm();
      if (norm > 0.0) w *= std::sqrt(sol.beams[i].trace()) / norm;
      // Same phase convention as extract_rank1.
      for (Index j = 0; j < n; ++j) {
        if (std::abs(w(j)) > 1e-12 * w.norm()) {
          w *= std::conj(w(j)) / std::abs(w(j));
          w(j) = std::abs(w(j));
          break;
        }
      }
      beams.push_back(HermitianMatrix::outer(w));
      cand.beamformers.push_back(std::move(w));
    }
    cand.user_sinr = sinr_users(scn, beams, sol.noise_cov);
    const bool ok = std::all_of(cand.user_sinr.begin(), cand.user_sinr.end(),
                                [&](double s) { return s >= thr.gamma_b * (1.0 - 1e-9); });
    if (!ok) continue;
    cand.sinr_eve = sinr_eve(scn, scn.target.theta0, beams, sol.noise_cov);
    if (!best || cand.sinr_eve < best->sinr_eve) best = std::move(cand);
  }
  return best;
}

const ConstraintSlack& FeasibilityReport::worst() const {
  if (rows.empty()) throw std::logic_error("FeasibilityReport: no rows");
  return *std::min_element(rows.begin(), rows.end(),
                           [](const ConstraintSlack& a, const ConstraintSlack& b) { return a.slack < b.slack; });
}

FeasibilityReport check_design(const Scenario& scn, const AngularGrid& grid, const Thresholds& thr,
                               const std::vector<HermitianMatrix>& beams, const HermitianMatrix& noise_cov,
                               const HermitianMatrix& desired, DesignMode mode, const DesignOptions& opts) {
  FeasibilityReport rep;
  const double p0 = scn.power_budget;
  const HermitianMatrix rx = transmit_covariance(beams, noise_cov);
  auto add = [&](std::string family, std::string label, double slack) {
    rep.rows.push_back({std::move(family), std::move(label), slack});
  };

  rep.power_error = std::abs(rx.trace() - p0) / p0;
  add("power", "trace", -rep.power_error);
  for (std::size_t i = 0; i < beams.size(); ++i) {
    add("psd", "W " + std::to_string(i), min_eigenvalue(beams[i]) / p0);
  }
  add("psd", "R_N", min_eigenvalue(noise_cov) / p0);
  for (Index i = 0; i < scn.n_users(); ++i) {
    add("user_sinr", "user " + std::to_string(i), (sinr_user(scn, i, beams, noise_cov) - thr.gamma_b) / thr.gamma_b);
  }

  if (mode == DesignMode::Precise) {
    if (opts.match_beampattern && std::isfinite(thr.gamma_bp)) {
      const double mismatch = (rx.matrix() - desired.matrix()).norm();
      add("beampattern_match", "frobenius", (std::sqrt(thr.gamma_bp) - mismatch) / p0);
    }
  } else {
    const AngleSets sets = angle_sets(scn, grid, opts.sidelobe_guard);
    const double peak = quadratic_form(steering_vector(scn.geometry, scn.target.theta0), rx);
    for (double th : sets.sidelobe) {
      const double side = quadratic_form(steering_vector(scn.geometry, th), rx);
      std::ostringstream label;
      label << "theta " << rad2deg(th);
      add("sidelobe", label.str(), (peak - side - thr.gamma_s) / p0);
    }
    for (double th : sets.mainlobe) {
      const double main = quadratic_form(steering_vector(scn.geometry, th), rx);
      std::ostringstream label;
      label << "theta " << rad2deg(th);
      add("mainlobe_ripple", label.str() + " upper", ((1.0 + thr.ripple) * peak - main) / p0);
      add("mainlobe_ripple", label.str() + " lower", (main - (1.0 - thr.ripple) * peak) / p0);
    }
  }
  rep.min_slack = rep.worst().slack;
  return rep;
}

ValidationResult validate_solution(const Scenario& scn, const AngularGrid& grid, const Thresholds& thr,
                                   const DesignSolution& sol, DesignMode mode, const DesignOptions& opts) {
  ValidationResult out;
  out.relaxed = check_design(scn, grid, thr, sol.beams, sol.noise_cov, sol.desired, mode, opts);
  std::vector<HermitianMatrix> rank_one;
  for (const auto& w : sol.beamformers) rank_one.push_back(HermitianMatrix::outer(w));
  out.rank_one = check_design(scn, grid, thr, rank_one, sol.noise_cov, sol.desired, mode, opts);
  return out;
}

}  // namespace secbeam
