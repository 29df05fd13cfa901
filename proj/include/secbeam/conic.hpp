#pragma once

// Small dense conic programs over real symmetric PSD block variables and
// free scalars, with linear equalities, linear inequalities and second-order
// cone constraints:
//
//   minimize    f0(X, t)
//   subject to  f_i(X, t) == b_i,   g_j(X, t) <= / >= d_j,
//               || u_k(X, t) ||_2 <= v_k(X, t),   X_b PSD for every block b,
//
// where every f, g, u, v is affine. Solved by a homogeneous self-dual
// primal-dual interior-point method with Nesterov-Todd scaling and a
// Mehrotra predictor-corrector.

#include <iosfwd>
#include <string>
#include <vector>

#include "secbeam/linalg.hpp"

namespace secbeam::conic {

/// Affine functional sum_b tr(C_b X_b) + sum_j a_j t_j + constant.
/// Block coefficients are symmetrized when the problem is compiled.
struct LinearFunctional {
  struct BlockTerm {
    Index block;
    RealMatrix coef;
  };
  struct ScalarTerm {
    Index var;
    double coef;
  };

  std::vector<BlockTerm> blocks;
  std::vector<ScalarTerm> scalars;
  double constant = 0.0;

  LinearFunctional& add_block(Index block, RealMatrix coef) {
    blocks.push_back({block, std::move(coef)});
    return *this;
  }
  LinearFunctional& add_scalar(Index var, double coef) {
    scalars.push_back({var, coef});
    return *this;
  }
  LinearFunctional& add_constant(double c) {
    constant += c;
    return *this;
  }

  static LinearFunctional scalar(Index var, double coef = 1.0) {
    LinearFunctional f;
    f.add_scalar(var, coef);
    return f;
  }
  static LinearFunctional constant_value(double c) {
    LinearFunctional f;
    f.constant = c;
    return f;
  }

  /// Value at the given block/scalar assignment.
  double evaluate(const std::vector<RealMatrix>& block_values, const RealVector& scalar_values) const;
};

enum class Sense { LessEqual, GreaterEqual };

struct EqualityConstraint {
  LinearFunctional lhs;
  double rhs = 0.0;
  std::string label;
};

struct InequalityConstraint {
  LinearFunctional lhs;
  Sense sense = Sense::GreaterEqual;
  double rhs = 0.0;
  std::string label;
};

/// || [f_1, ..., f_m] ||_2 <= bound
struct SocConstraint {
  std::vector<LinearFunctional> vector;
  LinearFunctional bound;
  std::string label;
};

struct ConicProblem {
  std::vector<Index> psd_blocks;
  Index scalar_vars = 0;
  LinearFunctional objective;  // minimized
  std::vector<EqualityConstraint> equalities;
  std::vector<InequalityConstraint> inequalities;
  std::vector<SocConstraint> socs;

  Index add_block(Index dim) {
    psd_blocks.push_back(dim);
    return static_cast<Index>(psd_blocks.size()) - 1;
  }
  Index add_scalar() { return scalar_vars++; }

  void add_equality(LinearFunctional lhs, double rhs, std::string label = {}) {
    equalities.push_back({std::move(lhs), rhs, std::move(label)});
  }
  void add_inequality(LinearFunctional lhs, Sense sense, double rhs, std::string label = {}) {
    inequalities.push_back({std::move(lhs), sense, rhs, std::move(label)});
  }
  void add_soc(std::vector<LinearFunctional> vec, LinearFunctional bound, std::string label = {}) {
    socs.push_back({std::move(vec), std::move(bound), std::move(label)});
  }
  /// Rotated cone w^2 <= x * y with x, y >= 0, encoded as
  /// || (w, (x - y) / 2) || <= (x + y) / 2.
  void add_rotated_soc(const LinearFunctional& w, const LinearFunctional& x,
                       const LinearFunctional& y, std::string label = {});

  /// Throws std::invalid_argument on inconsistent dimensions or indices.
  void validate() const;
};

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(Status s);

struct SolverOptions {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 100;
  double step_fraction = 0.99;
  // If the iteration breaks down, the best iterate is still reported as
  // optimal when its residuals and relative gap are all below this.
  double reduced_tol = 1e-6;
};

struct IterationLog {
  int iteration = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;  // complementarity s'z / tau^2
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double step = 0.0;
  double mu = 0.0;
};

struct ConicSolution {
  Status status = Status::NumericalFailure;
  std::vector<RealMatrix> blocks;
  RealVector scalars;

  // Multipliers. For Status::Infeasible these hold a Farkas certificate
  // normalized so that rhs' y + cone-offsets' z = -1.
  RealVector eq_duals;
  RealVector ineq_duals;
  std::vector<RealVector> soc_duals;
  std::vector<RealMatrix> block_duals;

  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double min_step = 1.0;
  std::vector<IterationLog> history;
  std::string message;

  bool optimal() const { return status == Status::Optimal; }
};

/// Raised by callers that need an optimal solve; carries the final status
/// and the per-iteration log.
class SolveError : public NumericalError {
 public:
  SolveError(const std::string& context, const ConicSolution& sol);

  Status status() const { return status_; }
  const std::vector<IterationLog>& history() const { return history_; }

 private:
  Status status_;
  std::vector<IterationLog> history_;
};

/// Deterministic: the same problem and options give the same iterates.
ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts = {});

struct CertificateEntry {
  enum class Kind { Equality, Inequality, SecondOrderCone, Psd };
  Kind kind;
  std::string label;
  double residual;  // |lhs - rhs| for equalities, violation (>= 0) otherwise
  bool ok;
};

struct CertificateReport {
  std::vector<CertificateEntry> entries;
  double gap = 0.0;
  double relative_gap = 0.0;
  double max_residual = 0.0;
  bool pass = false;
};

/// Re-evaluates every constraint at the returned primal point.
CertificateReport check_certificate(const ConicProblem& problem, const ConicSolution& solution,
                                    double tol = 1e-7);

/// Compiled form min c'x s.t. A x = b, s = h - G x in K, with
/// K = R_+^nonneg x SOC(soc[0]) x ... x PSD(psd[0]) x ....
/// x stacks svec(X_0), svec(X_1), ... followed by the scalar variables. Only
/// the nonnegative and second-order rows are stored in (g, h); the PSD part of
/// s is implicitly svec(X_b) itself (G = -I on the block columns, h = 0).
/// svec is the lower-triangular, column-major vectorization with
/// off-diagonals scaled by sqrt 2, so svec(A)'svec(B) = tr(AB).
struct StandardForm {
  RealVector c;
  double objective_offset = 0.0;
  RealMatrix a;
  RealVector b;
  RealMatrix g;
  RealVector h;
  Index nonneg = 0;
  std::vector<Index> soc;
  std::vector<Index> psd;
};

StandardForm compile(const ConicProblem& problem);

/// Raw iterate of the standard-form solve, already divided by tau.
struct StandardResult {
  Status status = Status::NumericalFailure;
  RealVector x, y, z, s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double min_step = 1.0;
  std::vector<IterationLog> history;
  std::string message;
};

StandardResult solve_standard(const StandardForm& sf, const SolverOptions& opts = {});

/// Plain-text debug dump of the compiled problem: a header line with the
/// dimensions, the cone description, then c, A, b, G, h as dense rows.
void write_standard_form(std::ostream& out, const StandardForm& sf);
StandardForm read_standard_form(std::istream& in);

/// svec helpers shared with tests.
Index svec_size(Index n);
RealVector svec(const RealMatrix& m);
RealMatrix smat(const Eigen::Ref<const RealVector>& v, Index n);

}  // namespace secbeam::conic
