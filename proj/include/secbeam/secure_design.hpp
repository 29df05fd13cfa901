#pragma once

// Artificial-noise-aided secure beamforming over semidefinite relaxations.
//
// Precise target angle: minimize the eavesdropper SINR at theta0 subject to
// per-user SINR, a Frobenius mismatch bound against a desired covariance
// R_d and the power budget. The fractional objective M / N is handled by a
// Dinkelbach iteration on M - c N.
//
// Uncertain target angle: the mainlobe interval Phi around theta0 is
// covered by ripple constraints, the sidelobe region Omega by a power gap,
// and the sum over Phi is handled by a quadratic transform with auxiliary
// weights y.
//
// Variable layout of every assembled problem: PSD blocks 0..K-1 hold the
// beam covariances W_i, block K holds the artificial-noise covariance R_N,
// each as a 2N x 2N real embedding. The uncertain design appends one scalar
// t_m per mainlobe angle.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "secbeam/conic.hpp"
#include "secbeam/scenario.hpp"

namespace secbeam {

struct Thresholds {
  double gamma_b = 10.0;   // user SINR, linear
  double gamma_bp = 0.0;   // squared Frobenius mismatch bound (power^2); infinity disables
  double gamma_s = 0.0;    // sidelobe gap (power)
  double ripple = 0.1;     // mainlobe flatness tolerance, in (0, 1)

  void validate() const;
};

struct DesignOptions {
  double epsilon = 1e-3;         // |delta c| or max |delta y_m|
  int max_iterations = 20;
  double root_tolerance = 1e-5;  // |M - c N| <= root_tolerance * N at exit
  double sidelobe_guard = 10.0 * kPi / 180.0;
  // The uncertain design stops once the eavesdropper SINR summed over the
  // mainlobe falls below this (the objective's lower bound is zero).
  double null_tolerance = 1e-6;
  // Per-angle eavesdropper SINR below which the quadratic-transform weight
  // stops growing: y_m is clipped to 1 / (sinr_floor * sigma).
  double sinr_floor = 1e-3;
  bool match_beampattern = true;  // include the mismatch bound in the precise design
  conic::SolverOptions solver;
};

enum class DesignMode { Precise, Uncertain };

const char* to_string(DesignMode m);

/// Mainlobe angles Phi (grid angles within delta_theta of theta0) and
/// sidelobe angles Omega (grid angles farther than delta_theta + guard).
struct AngleSets {
  std::vector<double> mainlobe;
  std::vector<double> sidelobe;
};

AngleSets angle_sets(const Scenario& scn, const AngularGrid& grid, double guard);

struct IterationRecord {
  int iteration = 0;
  double surrogate = 0.0;  // optimal value of the subproblem solved at this step
  double c = 0.0;          // Dinkelbach parameter used at this step
  RealVector y;            // quadratic-transform weights used at this step
  double sinr_eve = 0.0;   // eavesdropper SINR at theta0 of this iterate
  double sum_sinr_eve = 0.0;  // sum over the mainlobe angles
  double min_user_sinr = 0.0;
  conic::Status status = conic::Status::Optimal;
  int solver_iterations = 0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  std::string stop_reason;
  int returned = 0;  // index of the record whose iterate the design returns
};

struct DesignMetrics {
  std::vector<double> user_sinr;
  double sinr_eve = 0.0;        // at theta0
  double worst_sinr_eve = 0.0;  // maximum over the mainlobe angles
  double secrecy_rate = 0.0;    // eavesdropper at theta0
  double worst_secrecy_rate = 0.0;
};

struct DesignSolution {
  DesignMode mode = DesignMode::Precise;
  std::vector<HermitianMatrix> beams;         // relaxed W_i
  std::vector<ComplexVector> beamformers;     // rank-one w_i
  std::vector<double> rank1_defect;           // 1 - lambda_max / tr per W_i
  HermitianMatrix noise_cov;                  // R_N
  HermitianMatrix covariance;                 // R_X
  HermitianMatrix desired;                    // R_d of the precise design, empty otherwise
  IterationTrace trace;
  DesignMetrics metrics;
  AngularGrid grid;                           // grid of the beampattern profile
  RealVector beampattern;
};

/// Thrown when a design has no feasible point; `family` names the first
/// constraint family whose removal restores feasibility.
class InfeasibleDesign : public std::runtime_error {
 public:
  InfeasibleDesign(const std::string& what, std::string family)
      : std::runtime_error(what), family_(std::move(family)) {}
  const std::string& family() const { return family_; }

 private:
  std::string family_;
};

/// Thrown when a subproblem fails after the loop has started; carries the
/// partial trace.
class DesignFailure : public std::runtime_error {
 public:
  DesignFailure(const std::string& what, IterationTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const { return trace_; }

 private:
  IterationTrace trace_;
};

/// h_i^T W_i h_i^* - gamma_b (sum_{k != i} h_i^T W_k h_i^* + h_i^T R_N h_i^*) >= gamma_b sigma^2
/// over the block layout above.
conic::InequalityConstraint linearized_user_sinr_constraint(const Scenario& scn, Index i, double gamma_b);

/// Slack of the linearized constraint at given covariances.
double user_sinr_slack(const Scenario& scn, Index i, double gamma_b, const std::vector<HermitianMatrix>& beams,
                       const HermitianMatrix& noise_cov);

/// Precise-angle subproblem with objective M - c N.
conic::ConicProblem assemble_p8_subproblem(const Scenario& scn, const HermitianMatrix& desired,
                                           const Thresholds& thr, double c, bool match_beampattern = true);

/// Uncertain-angle subproblem: maximize sum_m 2 y_m t_m - y_m^2 B_m with
/// t_m^2 <= A_m, posed as minimization of the negative.
conic::ConicProblem assemble_p9_subproblem(const Scenario& scn, const AngleSets& sets, const Thresholds& thr,
                                           const RealVector& y);

/// M / N. Throws std::invalid_argument when N <= 0.
double dinkelbach_update(double m_val, double n_val);

/// sqrt(A) / B. Throws std::invalid_argument when A < 0 or B <= 0; the
/// latter means the beams vanish on that angle and the loop must be
/// restarted from a different point.
double quadratic_transform_update(double a_val, double b_val);

DesignSolution solve_problem8(const Scenario& scn, const HermitianMatrix& desired, const Thresholds& thr,
                              const DesignOptions& opts = {});

DesignSolution solve_problem9(const Scenario& scn, const AngularGrid& grid, const Thresholds& thr,
                              const DesignOptions& opts = {});

struct RankOne {
  ComplexVector w;
  double defect = 0.0;
};

/// Principal eigenvector scaled by sqrt(lambda_max), first nonzero entry
/// made real and positive. The zero matrix maps to the zero vector.
RankOne extract_rank1(const HermitianMatrix& w);

struct RandomizedBeams {
  std::vector<ComplexVector> beamformers;
  std::vector<double> user_sinr;
  double sinr_eve = 0.0;
};

/// Draws each w_i from CN(0, W_i), rescales it to power tr(W_i) and keeps
/// the draw with the lowest eavesdropper SINR at theta0 among those meeting
/// every user SINR target (R_N kept as designed). Empty if none qualifies.
std::optional<RandomizedBeams> gaussian_randomization(const DesignSolution& sol, const Scenario& scn,
                                                      const Thresholds& thr, int trials, std::uint64_t seed);

struct ConstraintSlack {
  std::string family;  // power, psd, user_sinr, beampattern_match, sidelobe, mainlobe_ripple
  std::string label;
  double slack = 0.0;  // >= 0 when satisfied
};

/// Slacks are relative: SINR rows divide by gamma_b, every power-valued row
/// divides by the budget P0.
struct FeasibilityReport {
  std::vector<ConstraintSlack> rows;
  double min_slack = 0.0;
  double power_error = 0.0;  // |tr(R_X) - P0| / P0

  bool feasible(double tol = 1e-6) const { return min_slack >= -tol; }
  const ConstraintSlack& worst() const;
};

struct ValidationResult {
  FeasibilityReport relaxed;
  FeasibilityReport rank_one;  // W_i replaced by w_i w_i^H
};

ValidationResult validate_solution(const Scenario& scn, const AngularGrid& grid, const Thresholds& thr,
                                   const DesignSolution& sol, DesignMode mode, const DesignOptions& opts = {});

/// Feasibility report for explicit covariances.
FeasibilityReport check_design(const Scenario& scn, const AngularGrid& grid, const Thresholds& thr,
                               const std::vector<HermitianMatrix>& beams, const HermitianMatrix& noise_cov,
                               const HermitianMatrix& desired, DesignMode mode, const DesignOptions& opts = {});

}  // namespace secbeam
