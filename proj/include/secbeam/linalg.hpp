#pragma once

// Dense complex linear algebra used throughout secbeam: Hermitian matrices,
// Hermitian eigendecomposition, PSD tests and the real symmetric embedding
// that lets complex PSD constraints run through a real conic solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace secbeam {

using Index = Eigen::Index;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;
using RealMatrix = RMatrix<double>;
using RealVector = RVector<double>;

/// Raised when operand shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative numerical routine fails its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default absolute tolerance on the smallest eigenvalue for PSD checks.
inline constexpr double kPsdTolerance = 1e-8;

/// Complex Hermitian matrix. Symmetry is enforced on construction by
/// averaging A and A^H, so A(i,j) == conj(A(j,i)) holds bit-exactly and the
/// diagonal is real.
template <typename Real>
class Hermitian {
 public:
  using Matrix = CMatrix<Real>;
  using Vector = CVector<Real>;

  Hermitian() = default;

  explicit Hermitian(Index dim) : m_(Matrix::Zero(dim, dim)) {}

  explicit Hermitian(const Matrix& a) {
    if (a.rows() != a.cols()) {
      throw DimensionError("Hermitian: matrix is " + std::to_string(a.rows()) +
                           "x" + std::to_string(a.cols()));
    }
    if (!a.allFinite()) throw std::invalid_argument("Hermitian: non-finite entry");
    m_ = a;
    symmetrize();
  }

  static Hermitian zero(Index dim) { return Hermitian(dim); }

  static Hermitian identity(Index dim) {
    Hermitian h(dim);
    h.m_.setIdentity();
    return h;
  }

  /// v v^H
  static Hermitian outer(const Vector& v) {
    Hermitian h;
    h.m_ = v * v.adjoint();
    h.symmetrize();
    return h;
  }

  static Hermitian diagonal(const RVector<Real>& d) {
    Hermitian h(d.size());
    h.m_.diagonal() = d.template cast<std::complex<Real>>();
    return h;
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  std::complex<Real> operator()(Index i, Index j) const { return m_(i, j); }

  Real trace() const { return m_.diagonal().real().sum(); }
  Real norm() const { return m_.norm(); }

  Hermitian& operator+=(const Hermitian& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  Hermitian& operator-=(const Hermitian& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  Hermitian& operator*=(Real s) {
    m_ *= s;
    return *this;
  }

  friend Hermitian operator+(Hermitian a, const Hermitian& b) { return a += b; }
  friend Hermitian operator-(Hermitian a, const Hermitian& b) { return a -= b; }
  friend Hermitian operator*(Hermitian a, Real s) { return a *= s; }
  friend Hermitian operator*(Real s, Hermitian a) { return a *= s; }

 private:
  void symmetrize() {
    Matrix avg = (m_ + m_.adjoint()) * Real(0.5);
    const Index n = avg.rows();
    for (Index j = 0; j < n; ++j) {
      avg(j, j) = std::complex<Real>(avg(j, j).real(), Real(0));
      for (Index i = j + 1; i < n; ++i) avg(j, i) = std::conj(avg(i, j));
    }
    m_ = std::move(avg);
  }

  void check_same(const Hermitian& o) const {
    if (o.dim() != dim()) throw DimensionError("Hermitian: dimension mismatch");
  }

  Matrix m_;
};

using HermitianMatrix = Hermitian<double>;

template <typename Real>
struct HermitianEig {
  RVector<Real> values;  // descending
  CMatrix<Real> vectors;  // columns match values
};

/// Eigendecomposition A = U diag(values) U^H with eigenvalues sorted in
/// descending order. Throws NumericalError if the solver does not converge or
/// the relative reconstruction residual exceeds 1e-10.
template <typename Real>
HermitianEig<Real> hermitian_eig(const Hermitian<Real>& a) {
  HermitianEig<Real> out;
  const Index n = a.dim();
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(a.matrix());
  if (es.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();

  const CMatrix<Real> rebuilt =
      out.vectors * out.values.template cast<std::complex<Real>>().asDiagonal() *
      out.vectors.adjoint();
  const Real residual =
      (a.matrix() - rebuilt).norm() / std::max(Real(1), a.norm());
  if (!(residual <= Real(1e-10))) {
    std::ostringstream msg;
    msg << "hermitian_eig: reconstruction residual " << residual << " exceeds 1e-10";
    throw NumericalError(msg.str());
  }
  return out;
}

/// [[Re A, -Im A], [Im A, Re A]]. A is PSD iff the embedding is, and every
/// eigenvalue of A appears twice in the embedding.
template <typename Real>
RMatrix<Real> real_embed(const Hermitian<Real>& a) {
  const Index n = a.dim();
  RMatrix<Real> e(2 * n, 2 * n);
  const RMatrix<Real> re = a.matrix().real();
  const RMatrix<Real> im = a.matrix().imag();
  e.topLeftCorner(n, n) = re;
  e.bottomRightCorner(n, n) = re;
  e.topRightCorner(n, n) = -im;
  e.bottomLeftCorner(n, n) = im;
  return e;
}

/// Inverse of real_embed for matrices that are only approximately
/// structured: averages the two copies of the real and imaginary parts.
/// The average of X and its block-rotated copy stays PSD when X is PSD.
template <typename Derived>
Hermitian<typename Derived::Scalar> real_unembed(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::Scalar;
  if (x.rows() != x.cols() || x.rows() % 2 != 0) {
    throw DimensionError("real_unembed: expected a square matrix of even dimension");
  }
  const Index n = x.rows() / 2;
  const RMatrix<Real> re = (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n)) * Real(0.5);
  const RMatrix<Real> im = (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n)) * Real(0.5);
  CMatrix<Real> c(n, n);
  c.real() = re;
  c.imag() = im;
  return Hermitian<Real>(c);
}

/// a^H A a. The imaginary part is rounding noise for Hermitian A and is
/// dropped after a sanity check.
template <typename Real>
Real quadratic_form(const CVector<Real>& a, const Hermitian<Real>& m) {
  if (a.size() != m.dim()) {
    throw DimensionError("quadratic_form: vector length " + std::to_string(a.size()) +
                         " vs matrix dimension " + std::to_string(m.dim()));
  }
  const std::complex<Real> v = a.dot(m.matrix() * a);
  const Real scale = std::max(Real(1), std::abs(v));
  if (std::abs(v.imag()) > Real(1e-12) * scale * Real(a.size())) {
    throw NumericalError("quadratic_form: imaginary part above tolerance");
  }
  return v.real();
}

template <typename Real>
Real min_eigenvalue(const Hermitian<Real>& a) {
  if (a.dim() == 0) return Real(0);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(a.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// True iff the smallest eigenvalue is >= -tol.
template <typename Real>
bool is_psd(const Hermitian<Real>& a, Real tol = Real(kPsdTolerance)) {
  if (tol < Real(0)) throw std::invalid_argument("is_psd: negative tolerance");
  return min_eigenvalue(a) >= -tol;
}

/// Smallest eigenvalue of a real symmetric matrix.
template <typename Derived>
typename Derived::Scalar symmetric_min_eigenvalue(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::Scalar;
  if (x.rows() == 0) return Real(0);
  Eigen::SelfAdjointEigenSolver<RMatrix<Real>> es(x.eval(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Hermitian square root of a PSD matrix; negative eigenvalues are clipped.
template <typename Real>
CMatrix<Real> psd_sqrt(const Hermitian<Real>& a) {
  const auto eig = hermitian_eig(a);
  const RVector<Real> root = eig.values.cwiseMax(Real(0)).cwiseSqrt();
  return eig.vectors * root.template cast<std::complex<Real>>().asDiagonal() *
         eig.vectors.adjoint();
}

}  // namespace secbeam
