#pragma once

// Complex Hermitian PSD variables inside the real conic solver. An N x N
// Hermitian W is carried as a real symmetric 2N x 2N block X whose structured
// part is real_embed(W). Every coefficient handed to the solver is itself an
// embedding, so the optimum can always be taken structured and real_unembed
// recovers W without loss.

#include "secbeam/conic.hpp"
#include "secbeam/linalg.hpp"

namespace secbeam {

/// Block coefficient K with <K, real_embed(W)> = Re tr(C W).
inline RealMatrix hermitian_coef(const HermitianMatrix& c) { return 0.5 * real_embed(c); }

/// Coefficient of v^H W v.
inline RealMatrix quadratic_coef(const ComplexVector& v) {
  return hermitian_coef(HermitianMatrix::outer(v));
}

/// Coefficient of tr(W).
inline RealMatrix trace_coef(Index n) { return hermitian_coef(HermitianMatrix::identity(n)); }

/// Coefficients of Re W_ij and Im W_ij (i != j), or of W_ii when i == j.
inline RealMatrix entry_real_coef(Index n, Index i, Index j) {
  ComplexMatrix c = ComplexMatrix::Zero(n, n);
  c(j, i) += 0.5;
  c(i, j) += 0.5;
  return hermitian_coef(HermitianMatrix(c));
}

inline RealMatrix entry_imag_coef(Index n, Index i, Index j) {
  ComplexMatrix c = ComplexMatrix::Zero(n, n);
  c(j, i) += Complex(0.0, -0.5);
  c(i, j) += Complex(0.0, 0.5);
  return hermitian_coef(HermitianMatrix(c));
}

/// Frobenius norm of (sum of `blocks`) - target, as the vector part of a
/// second-order cone: diagonal entries, then sqrt 2 times the real and
/// imaginary parts of each strictly upper entry.
inline std::vector<conic::LinearFunctional> frobenius_rows(const std::vector<Index>& blocks,
                                                           const HermitianMatrix& target) {
  const Index n = target.dim();
  const double r2 = std::sqrt(2.0);
  std::vector<conic::LinearFunctional> rows;
  rows.reserve(static_cast<std::size_t>(n * n));
  auto add = [&](const RealMatrix& coef, double scale, double offset) {
    conic::LinearFunctional f;
    for (Index b : blocks) f.add_block(b, scale * coef);
    f.add_constant(-scale * offset);
    rows.push_back(std::move(f));
  };
  for (Index i = 0; i < n; ++i) add(entry_real_coef(n, i, i), 1.0, target.matrix()(i, i).real());
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      add(entry_real_coef(n, i, j), r2, target.matrix()(i, j).real());
      add(entry_imag_coef(n, i, j), r2, target.matrix()(i, j).imag());
    }
  }
  return rows;
}

/// Hermitian matrix recovered from a solved block.
inline HermitianMatrix hermitian_block(const RealMatrix& x) { return real_unembed(x); }

}  // namespace secbeam
