// Homogeneous self-dual interior-point method for
//
//   minimize c'x  s.t.  A x = b,  G x + s = h,  s in K
//
// with K a product of nonnegative orthants, second-order cones and PSD cones.
// The embedding
//
//   0     = A'y + G'z + c tau
//   0     = b tau - A x
//   s     = h tau - G x
//   kappa = -c'x - b'y - h'z
//
// is followed along the central path with Nesterov-Todd scaling; each step
// is a Mehrotra predictor-corrector pair sharing one factorization.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "secbeam/conic.hpp"

namespace secbeam::conic {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cones {
  Index nonneg = 0;
  std::vector<Index> soc;
  std::vector<Index> psd;
  std::vector<Index> soc_offset;
  std::vector<Index> psd_offset;  // offsets into the full s/z vector
  Index lin_rows = 0;             // nonneg + soc rows (stored in G)
  Index rows = 0;
  Index psd_cols = 0;  // leading x columns covered by PSD blocks
  double degree = 0.0;

  explicit Cones(const StandardForm& sf) : nonneg(sf.nonneg), soc(sf.soc), psd(sf.psd) {
    Index off = nonneg;
    for (Index d : soc) {
      soc_offset.push_back(off);
      off += d;
    }
    lin_rows = off;
    for (Index d : psd) {
      psd_offset.push_back(off);
      off += svec_size(d);
      psd_cols += svec_size(d);
    }
    rows = off;
    degree = static_cast<double>(nonneg + static_cast<Index>(soc.size()));
    for (Index d : psd) degree += static_cast<double>(d);
  }

  RealVector identity() const {
    RealVector e = RealVector::Zero(rows);
    e.head(nonneg).setOnes();
    for (Index off : soc_offset) e(off) = 1.0;
    for (std::size_t k = 0; k < psd.size(); ++k) {
      e.segment(psd_offset[k], svec_size(psd[k])) = svec(RealMatrix::Identity(psd[k], psd[k]));
    }
    return e;
  }

  // Smallest t such that v + t e lies in the cone (negative when v is interior).
  double max_violation(const RealVector& v) const {
    double t = -kInf;
    if (nonneg > 0) t = std::max(t, -v.head(nonneg).minCoeff());
    for (std::size_t k = 0; k < soc.size(); ++k) {
      const auto seg = v.segment(soc_offset[k], soc[k]);
      t = std::max(t, seg.tail(soc[k] - 1).norm() - seg(0));
    }
    for (std::size_t k = 0; k < psd.size(); ++k) {
      const RealMatrix m = smat(v.segment(psd_offset[k], svec_size(psd[k])), psd[k]);
      t = std::max(t, -symmetric_min_eigenvalue(m));
    }
    return t;
  }

  // u o v (Jordan product).
  RealVector product(const RealVector& u, const RealVector& v) const {
    RealVector out(rows);
    out.head(nonneg) = u.head(nonneg).cwiseProduct(v.head(nonneg));
    for (std::size_t k = 0; k < soc.size(); ++k) {
      const Index off = soc_offset[k];
      const Index d = soc[k];
      out(off) = u.segment(off, d).dot(v.segment(off, d));
      out.segment(off + 1, d - 1) = u(off) * v.segment(off + 1, d - 1) + v(off) * u.segment(off + 1, d - 1);
    }
    for (std::size_t k = 0; k < psd.size(); ++k) {
      const Index n = psd[k];
      const RealMatrix a = smat(u.segment(psd_offset[k], svec_size(n)), n);
      const RealMatrix b = smat(v.segment(psd_offset[k], svec_size(n)), n);
      out.segment(psd_offset[k], svec_size(n)) = svec(0.5 * (a * b + b * a));
    }
    return out;
  }
};

struct SocScale {
  double beta = 1.0;
  RealVector q;  // W = beta (2 q q' - J), q'Jq = 1
};

struct PsdScale {
  RealMatrix r;      // W(Z) = R' Z R
  RealMatrix r_inv;  // W^{-T}(S) = R^{-1} S R^{-T}
};

double j_dot(const Eigen::Ref<const RealVector>& u, const Eigen::Ref<const RealVector>& v) {
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

// Nesterov-Todd scaling at an interior pair (s, z), plus the scaled point
// lambda = W z = W^{-T} s. PSD blocks of lambda are diagonal.
class Scaling {
 public:
  Scaling(const Cones& cones, const RealVector& s, const RealVector& z) : cones_(cones) {
    const Index nn = cones.nonneg;
    d_ = (s.head(nn).array() / z.head(nn).array()).sqrt();
    lambda_ = RealVector::Zero(cones.rows);
    lambda_.head(nn) = (s.head(nn).array() * z.head(nn).array()).sqrt();
    for (std::size_t k = 0; k < cones.soc.size(); ++k) {
      const Index off = cones.soc_offset[k];
      const Index dim = cones.soc[k];
      const RealVector sk = s.segment(off, dim);
      const RealVector zk = z.segment(off, dim);
      const double s_norm = std::sqrt(j_dot(sk, sk));
      const double z_norm = std::sqrt(j_dot(zk, zk));
      if (!(s_norm > 0.0) || !(z_norm > 0.0)) throw NumericalError("SOC iterate left the cone interior");
      const RealVector sb = sk / s_norm;
      const RealVector zb = zk / z_norm;
      const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
      RealVector wb = sb;
      wb(0) += zb(0);
      wb.tail(dim - 1) -= zb.tail(dim - 1);
      wb /= 2.0 * gamma;
      SocScale sc;
      sc.beta = std::sqrt(s_norm / z_norm);
      sc.q = wb;
      sc.q(0) += 1.0;
      sc.q /= std::sqrt(2.0 * (wb(0) + 1.0));
      soc_.push_back(std::move(sc));
    }
    for (std::size_t k = 0; k < cones.psd.size(); ++k) {
      const Index n = cones.psd[k];
      const Index off = cones.psd_offset[k];
      const RealMatrix sm = smat(s.segment(off, svec_size(n)), n);
      const RealMatrix zm = smat(z.segment(off, svec_size(n)), n);
      Eigen::LLT<RealMatrix> ls(sm), lz(zm);
      if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
        throw NumericalError("PSD iterate lost positive definiteness");
      }
      const RealMatrix l_s = ls.matrixL();
      const RealMatrix l_z = lz.matrixL();
      Eigen::JacobiSVD<RealMatrix> svd(l_z.transpose() * l_s, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const RealVector sv = svd.singularValues();
      if (!(sv.minCoeff() > 0.0)) throw NumericalError("degenerate PSD scaling");
      const RealVector inv_root = sv.cwiseSqrt().cwiseInverse();
      PsdScale ps;
      ps.r = l_s * svd.matrixV() * inv_root.asDiagonal();
      ps.r_inv = inv_root.asDiagonal() * svd.matrixU().transpose() * l_z.transpose();
      psd_.push_back(std::move(ps));
      lambda_.segment(off, svec_size(n)) = svec(RealMatrix(sv.asDiagonal()));
    }
    // For SOC blocks lambda = W z.
    for (std::size_t k = 0; k < cones.soc.size(); ++k) {
      const Index off = cones.soc_offset[k];
      lambda_.segment(off, cones.soc[k]) = soc_w(k, z.segment(off, cones.soc[k]));
    }
  }

  const RealVector& lambda() const { return lambda_; }

  enum class Op { W, WT, WinvT, Winv };

  RealVector apply(Op op, const RealVector& v) const {
    RealVector out(v.size());
    const Index nn = cones_.nonneg;
    if (op == Op::W || op == Op::WT) {
      out.head(nn) = d_.cwiseProduct(v.head(nn));
    } else {
      out.head(nn) = v.head(nn).cwiseQuotient(d_);
    }
    for (std::size_t k = 0; k < cones_.soc.size(); ++k) {
      const Index off = cones_.soc_offset[k];
      const Index dim = cones_.soc[k];
      out.segment(off, dim) = (op == Op::W || op == Op::WT) ? soc_w(k, v.segment(off, dim))
                                                            : soc_winv(k, v.segment(off, dim));
    }
    for (std::size_t k = 0; k < cones_.psd.size(); ++k) {
      const Index n = cones_.psd[k];
      const Index off = cones_.psd_offset[k];
      const RealMatrix m = smat(v.segment(off, svec_size(n)), n);
      const auto& ps = psd_[k];
      RealMatrix res;
      switch (op) {
        case Op::W: res = ps.r.transpose() * m * ps.r; break;
        case Op::WT: res = ps.r * m * ps.r.transpose(); break;
        case Op::WinvT: res = ps.r_inv * m * ps.r_inv.transpose(); break;
        case Op::Winv: res = ps.r_inv.transpose() * m * ps.r_inv; break;
      }
      out.segment(off, svec_size(n)) = svec(res);
    }
    return out;
  }

  /// (W'W)^{-1} v
  RealVector apply_q(const RealVector& v) const { return apply(Op::Winv, apply(Op::WinvT, v)); }
  /// W'W v
  RealVector apply_wtw(const RealVector& v) const { return apply(Op::WT, apply(Op::W, v)); }

  /// lambda \ v: the x solving lambda o x = v.
  RealVector lambda_solve(const RealVector& v) const {
    RealVector out(v.size());
    const Index nn = cones_.nonneg;
    out.head(nn) = v.head(nn).cwiseQuotient(lambda_.head(nn));
    for (std::size_t k = 0; k < cones_.soc.size(); ++k) {
      const Index off = cones_.soc_offset[k];
      const Index dim = cones_.soc[k];
      const auto l = lambda_.segment(off, dim);
      const auto w = v.segment(off, dim);
      const double det = j_dot(l, l);
      const double x0 = (l(0) * w(0) - l.tail(dim - 1).dot(w.tail(dim - 1))) / det;
      out(off) = x0;
      out.segment(off + 1, dim - 1) = (w.tail(dim - 1) - x0 * l.tail(dim - 1)) / l(0);
    }
    for (std::size_t k = 0; k < cones_.psd.size(); ++k) {
      const Index n = cones_.psd[k];
      const Index off = cones_.psd_offset[k];
      const RealMatrix m = smat(v.segment(off, svec_size(n)), n);
      const RealVector l = diag_lambda(k);
      RealMatrix x(n, n);
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) x(i, j) = 2.0 * m(i, j) / (l(i) + l(j));
      }
      out.segment(off, svec_size(n)) = svec(x);
    }
    return out;
  }

  /// Largest alpha with lambda + alpha * dir in the cone.
  double max_step(const RealVector& dir) const {
    double alpha = kInf;
    const Index nn = cones_.nonneg;
    for (Index i = 0; i < nn; ++i) {
      if (dir(i) < 0.0) alpha = std::min(alpha, -lambda_(i) / dir(i));
    }
    for (std::size_t k = 0; k < cones_.soc.size(); ++k) {
      const Index off = cones_.soc_offset[k];
      const Index dim = cones_.soc[k];
      alpha = std::min(alpha, soc_max_step(lambda_.segment(off, dim), dir.segment(off, dim)));
    }
    for (std::size_t k = 0; k < cones_.psd.size(); ++k) {
      const Index n = cones_.psd[k];
      const Index off = cones_.psd_offset[k];
      const RealMatrix m = smat(dir.segment(off, svec_size(n)), n);
      const RealVector inv_root = diag_lambda(k).cwiseSqrt().cwiseInverse();
      const RealMatrix scaled = inv_root.asDiagonal() * m * inv_root.asDiagonal();
      const double lmin = symmetric_min_eigenvalue(scaled);
      if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
  }

  // Scaled rows W^{-T} G for the nonnegative and SOC parts.
  RealMatrix scale_linear_rows(const RealMatrix& g) const {
    RealMatrix out(g.rows(), g.cols());
    const Index nn = cones_.nonneg;
    out.topRows(nn) = d_.head(nn).cwiseInverse().asDiagonal() * g.topRows(nn);
    for (std::size_t k = 0; k < cones_.soc.size(); ++k) {
      const Index off = cones_.soc_offset[k];
      const Index dim = cones_.soc[k];
      const auto& sc = soc_[k];
      // W^{-1} = (2 Jq q'J - J) / beta
      RealVector jq = sc.q;
      jq.tail(dim - 1) *= -1.0;
      const RealMatrix blk = g.middleRows(off, dim);
      RealMatrix jb = blk;
      jb.bottomRows(dim - 1) *= -1.0;
      out.middleRows(off, dim) = (2.0 * jq * (jq.transpose() * blk) - jb) / sc.beta;
    }
    return out;
  }

  // (W'W)^{-1} restricted to PSD block k, as a matrix on svec coordinates.
  RealMatrix psd_q_matrix(std::size_t k) const {
    const Index n = cones_.psd[k];
    const Index s = svec_size(n);
    const RealMatrix p = psd_[k].r_inv.transpose() * psd_[k].r_inv;
    std::vector<Index> row(static_cast<std::size_t>(s)), col(static_cast<std::size_t>(s));
    std::vector<double> f(static_cast<std::size_t>(s));
    Index idx = 0;
    for (Index j = 0; j < n; ++j) {
      for (Index i = j; i < n; ++i) {
        row[static_cast<std::size_t>(idx)] = i;
        col[static_cast<std::size_t>(idx)] = j;
        f[static_cast<std::size_t>(idx)] = (i == j) ? 1.0 : kSqrt2;
        ++idx;
      }
    }
    RealMatrix q(s, s);
    for (Index b = 0; b < s; ++b) {
      const Index k1 = row[static_cast<std::size_t>(b)], l1 = col[static_cast<std::size_t>(b)];
      const double fb = f[static_cast<std::size_t>(b)];
      for (Index a = b; a < s; ++a) {
        const Index i = row[static_cast<std::size_t>(a)], j = col[static_cast<std::size_t>(a)];
        const double v = 0.5 * f[static_cast<std::size_t>(a)] * fb *
                         (p(i, k1) * p(j, l1) + p(i, l1) * p(j, k1));
        q(a, b) = v;
        q(b, a) = v;
      }
    }
    return q;
  }

 private:
  RealVector soc_w(std::size_t k, const Eigen::Ref<const RealVector>& v) const {
    const auto& sc = soc_[k];
    RealVector jv = v;
    jv.tail(v.size() - 1) *= -1.0;
    return sc.beta * (2.0 * sc.q * sc.q.dot(v) - jv);
  }

  RealVector soc_winv(std::size_t k, const Eigen::Ref<const RealVector>& v) const {
    const auto& sc = soc_[k];
    RealVector jq = sc.q;
    jq.tail(v.size() - 1) *= -1.0;
    RealVector jv = v;
    jv.tail(v.size() - 1) *= -1.0;
    return (2.0 * jq * jq.dot(v) - jv) / sc.beta;
  }

  static double soc_max_step(const Eigen::Ref<const RealVector>& l, const Eigen::Ref<const RealVector>& d) {
    // Smallest positive root of (l0 + a d0)^2 - ||l1 + a d1||^2.
    const double qa = j_dot(d, d);
    const double qb = j_dot(l, d);
    const double qc = j_dot(l, l);
    double alpha = kInf;
    if (d(0) < 0.0) alpha = -l(0) / d(0);
    if (std::abs(qa) < 1e-300) {
      if (qb < 0.0) alpha = std::min(alpha, -qc / (2.0 * qb));
      return alpha;
    }
    const double disc = qb * qb - qa * qc;
    if (disc < 0.0) return alpha;
    const double root = std::sqrt(disc);
    const double t = -(qb + std::copysign(root, qb));
    for (double r : {t / qa, (t != 0.0 ? qc / t : kInf)}) {
      if (r > 0.0) alpha = std::min(alpha, r);
    }
    return alpha;
  }

  RealVector diag_lambda(std::size_t k) const {
    const Index n = cones_.psd[k];
    return smat(lambda_.segment(cones_.psd_offset[k], svec_size(n)), n).diagonal();
  }

  const Cones& cones_;
  RealVector d_;
  std::vector<SocScale> soc_;
  std::vector<PsdScale> psd_;
  RealVector lambda_;
};

// G x with the implicit PSD rows (-I on the leading block columns).
RealVector g_times(const StandardForm& sf, const Cones& cones, const RealVector& x) {
  RealVector out(cones.rows);
  out.head(cones.lin_rows) = sf.g * x;
  out.tail(cones.psd_cols) = -x.head(cones.psd_cols);
  return out;
}

RealVector gt_times(const StandardForm& sf, const Cones& cones, const RealVector& z) {
  RealVector out = sf.g.transpose() * z.head(cones.lin_rows);
  out.head(cones.psd_cols) -= z.tail(cones.psd_cols);
  return out;
}

RealVector full_h(const StandardForm& sf, const Cones& cones) {
  RealVector h = RealVector::Zero(cones.rows);
  h.head(cones.lin_rows) = sf.h;
  return h;
}

// Solves  [0 A' G'; A 0 0; G 0 -W'W] [dx; dy; dz] = [p1; p2; p3].
class KktSolver {
 public:
  KktSolver(const StandardForm& sf, const Cones& cones, const Scaling& w)
      : sf_(sf), cones_(cones), w_(w) {
    const RealMatrix b = w.scale_linear_rows(sf.g);
    RealMatrix h = b.transpose() * b;
    Index col = 0;
    for (std::size_t k = 0; k < cones.psd.size(); ++k) {
      const Index s = svec_size(cones.psd[k]);
      h.block(col, col, s, s) += w.psd_q_matrix(k);
      col += s;
    }
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    double reg = 1e-14 * scale;
    for (int attempt = 0; attempt < 8; ++attempt) {
      RealMatrix hr = h;
      hr.diagonal().array() += reg;
      llt_.compute(hr);
      if (llt_.info() == Eigen::Success) break;
      reg *= 100.0;
    }
    if (llt_.info() != Eigen::Success) throw NumericalError("KKT: reduced matrix not positive definite");
    if (sf.a.rows() > 0) {
      h_inv_at_ = llt_.solve(sf.a.transpose());
      RealMatrix schur = sf.a * h_inv_at_;
      const double sreg = 1e-13 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += sreg;
      ldlt_.compute(schur);
      if (ldlt_.info() != Eigen::Success) throw NumericalError("KKT: equality Schur complement failed");
    }
  }

  void solve(const RealVector& p1, const RealVector& p2, const RealVector& p3, RealVector& dx,
             RealVector& dy, RealVector& dz) const {
    solve_once(p1, p2, p3, dx, dy, dz);
    const double ref = std::max({1.0, p1.lpNorm<Eigen::Infinity>(), p2.size() ? p2.lpNorm<Eigen::Infinity>() : 0.0,
                                 p3.lpNorm<Eigen::Infinity>()});
    for (int it = 0; it < 3; ++it) {
      const RealVector e1 = p1 - sf_.a.transpose() * dy - gt_times(sf_, cones_, dz);
      const RealVector e2 = p2 - sf_.a * dx;
      const RealVector e3 = p3 - (g_times(sf_, cones_, dx) - w_.apply_wtw(dz));
      const double err = std::max({e1.lpNorm<Eigen::Infinity>(), e2.size() ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                   e3.lpNorm<Eigen::Infinity>()});
      if (!(err > 1e-14 * ref)) break;
      RealVector cx, cy, cz;
      solve_once(e1, e2, e3, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

 private:
  void solve_once(const RealVector& p1, const RealVector& p2, const RealVector& p3, RealVector& dx,
                  RealVector& dy, RealVector& dz) const {
    const RealVector r1 = p1 + gt_times(sf_, cones_, w_.apply_q(p3));
    const RealVector u = llt_.solve(r1);
    if (sf_.a.rows() > 0) {
      dy = ldlt_.solve(sf_.a * u - p2);
      dx = u - h_inv_at_ * dy;
    } else {
      dy = RealVector(0);
      dx = u;
    }
    dz = w_.apply_q(g_times(sf_, cones_, dx) - p3);
  }

  const StandardForm& sf_;
  const Cones& cones_;
  const Scaling& w_;
  Eigen::LLT<RealMatrix> llt_;
  Eigen::LDLT<RealMatrix> ldlt_;
  RealMatrix h_inv_at_;
};

// Same system with W = I, used for the starting point.
struct IdentityStart {
  RealVector x, y, z;
};

IdentityStart solve_identity(const StandardForm& sf, const Cones& cones, const RealVector& p1,
                             const RealVector& p2, const RealVector& p3) {
  // With W = I: H = G'G.
  RealMatrix h = sf.g.transpose() * sf.g;
  h.topLeftCorner(cones.psd_cols, cones.psd_cols).diagonal().array() += 1.0;
  const double reg = 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
  h.diagonal().array() += reg;
  Eigen::LLT<RealMatrix> llt(h);
  if (llt.info() != Eigen::Success) throw NumericalError("initial point: G'G not positive definite");
  const RealVector r1 = p1 + gt_times(sf, cones, p3);
  const RealVector u = llt.solve(r1);
  IdentityStart out;
  if (sf.a.rows() > 0) {
    const RealMatrix hat = llt.solve(sf.a.transpose());
    RealMatrix schur = sf.a * hat;
    schur.diagonal().array() += 1e-13 * std::max(1.0, schur.diagonal().maxCoeff());
    Eigen::LDLT<RealMatrix> ldlt(schur);
    out.y = ldlt.solve(sf.a * u - p2);
    out.x = u - hat * out.y;
  } else {
    out.y = RealVector(0);
    out.x = u;
  }
  out.z = g_times(sf, cones, out.x) - p3;
  return out;
}

}  // namespace

StandardResult solve_standard(const StandardForm& sf, const SolverOptions& opts) {
  const Cones cones(sf);
  const Index n = sf.c.size();
  const Index p = sf.a.rows();
  if (sf.a.cols() != n && p > 0) throw DimensionError("solve_standard: A has wrong column count");
  if (sf.g.rows() != cones.lin_rows || sf.g.cols() != n || sf.h.size() != cones.lin_rows) {
    throw DimensionError("solve_standard: G/h do not match the cone description");
  }
  if (cones.psd_cols > n) throw DimensionError("solve_standard: PSD blocks exceed variable count");

  StandardResult res;
  const RealVector h = full_h(sf, cones);
  const RealVector e = cones.identity();

  // Objective normalization; duals and objective are rescaled on exit.
  const double cscale = std::max(1.0, sf.c.lpNorm<Eigen::Infinity>());
  const RealVector c = sf.c / cscale;

  const double b_norm = std::max(1.0, sf.b.size() ? sf.b.norm() : 0.0);
  const double h_norm = std::max(1.0, h.norm());
  const double c_norm = std::max(1.0, c.norm());

  RealVector x, y, z, s;
  double tau = 1.0, kappa = 1.0;
  try {
    const IdentityStart primal = solve_identity(sf, cones, RealVector::Zero(n), sf.b, h);
    x = primal.x;
    s = -primal.z;
    const IdentityStart dual = solve_identity(sf, cones, -c, RealVector::Zero(p), RealVector::Zero(cones.rows));
    y = dual.y;
    z = dual.z;
  } catch (const NumericalError& err) {
    res.message = err.what();
    return res;
  }
  const double ts = cones.max_violation(s);
  if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
  const double tz = cones.max_violation(z);
  if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;

  // Best iterate seen so far, returned if the method breaks down after
  // getting within opts.reduced_tol.
  struct Snapshot {
    RealVector x, y, z, s;
    double tau = 1.0;
    IterationLog log;
    double rel_gap = 0.0, pres = 0.0, dres = 0.0;
    int iter = 0;
    double merit = kInf;
  } best;

  int small_steps = 0;
  for (int iter = 0;; ++iter) {
    // Residuals of the embedding.
    const RealVector gx = g_times(sf, cones, x);
    const RealVector gtz = gt_times(sf, cones, z);
    const RealVector aty = p > 0 ? RealVector(sf.a.transpose() * y) : RealVector::Zero(n);
    const RealVector ax = p > 0 ? RealVector(sf.a * x) : RealVector(0);
    const RealVector rx = aty + gtz + c * tau;
    const RealVector ry = sf.b * tau - ax;
    const RealVector rz = s + gx - h * tau;
    const double cx = c.dot(x);
    const double by_hz = (p > 0 ? sf.b.dot(y) : 0.0) + h.dot(z);
    const double rt = kappa + cx + by_hz;

    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pres = std::max(p > 0 ? ry.norm() / tau / b_norm : 0.0, rz.norm() / tau / h_norm);
    const double dres = rx.norm() / tau / c_norm;
    const double rel_gap = gap / std::max(1.0, std::abs(pcost));
    const double mu = (s.dot(z) + tau * kappa) / (cones.degree + 1.0);

    IterationLog log;
    log.iteration = iter;
    log.primal_objective = pcost * cscale + sf.objective_offset;
    log.dual_objective = dcost * cscale + sf.objective_offset;
    log.gap = gap * cscale;
    log.primal_residual = pres;
    log.dual_residual = dres;
    log.mu = mu;
    res.history.push_back(log);

    auto finish = [&](Status st, double scale_primal, double scale_dual) {
      res.status = st;
      res.x = x * scale_primal;
      res.s = s * scale_primal;
      res.y = y * scale_dual * cscale;
      res.z = z * scale_dual * cscale;
      res.primal_objective = log.primal_objective;
      res.dual_objective = log.dual_objective;
      res.gap = log.gap;
      res.relative_gap = rel_gap;
      res.primal_residual = pres;
      res.dual_residual = dres;
      res.iterations = iter;
    };
    const double merit = std::max({pres, dres, rel_gap});
    if (merit < best.merit) best = Snapshot{x, y, z, s, tau, log, rel_gap, pres, dres, iter, merit};
    // On breakdown, fall back to the best iterate when it is close enough.
    auto fall_back = [&](const std::string& why) {
      if (best.merit > opts.reduced_tol) return false;
      res.status = Status::Optimal;
      res.x = best.x / best.tau;
      res.s = best.s / best.tau;
      res.y = best.y / best.tau * cscale;
      res.z = best.z / best.tau * cscale;
      res.primal_objective = best.log.primal_objective;
      res.dual_objective = best.log.dual_objective;
      res.gap = best.log.gap;
      res.relative_gap = best.rel_gap;
      res.primal_residual = best.pres;
      res.dual_residual = best.dres;
      res.iterations = iter;
      std::ostringstream msg;
      msg << "optimal to reduced accuracy " << best.merit << " (iterate " << best.iter << "; " << why << ")";
      res.message = msg.str();
      return true;
    };

    if (pres <= opts.feasibility_tol && dres <= opts.feasibility_tol && rel_gap <= opts.gap_tol) {
      finish(Status::Optimal, 1.0 / tau, 1.0 / tau);
      res.message = "optimal";
      return res;
    }
    if (by_hz < 0.0) {
      const double pinf = (aty + gtz).norm() / c_norm / (-by_hz);
      if (pinf <= opts.feasibility_tol) {
        finish(Status::Infeasible, 0.0, 1.0 / (-by_hz) / cscale);
        res.x.setZero();
        res.s.setZero();
        res.message = "primal infeasible: Farkas certificate in the multipliers";
        return res;
      }
    }
    if (cx < 0.0) {
      const double dinf = std::max(p > 0 ? ax.norm() / b_norm : 0.0, (gx + s).norm() / h_norm) / (-cx);
      if (dinf <= opts.feasibility_tol) {
        finish(Status::Unbounded, 1.0 / (-cx * cscale), 0.0);
        res.message = "dual infeasible: primal improving ray in x";
        return res;
      }
    }
    if (iter >= opts.max_iterations || small_steps >= 5) {
      const char* why = small_steps >= 5 ? "stalled" : "iteration cap reached";
      if (fall_back(why)) return res;
      finish(Status::NumericalFailure, 1.0 / tau, 1.0 / tau);
      std::ostringstream msg;
      msg << why << " after " << iter << " iterations; min step " << res.min_step << "; last pres " << pres
          << " dres " << dres << " gap " << gap;
      res.message = msg.str();
      return res;
    }

    try {
      const Scaling w(cones, s, z);
      const RealVector& lambda = w.lambda();
      const KktSolver kkt(sf, cones, w);

      RealVector vx, vy, vz;
      kkt.solve(-c, sf.b, h, vx, vy, vz);
      const double v_den = c.dot(vx) + (p > 0 ? sf.b.dot(vy) : 0.0) + h.dot(vz) - kappa / tau;

      struct Direction {
        RealVector dx, dy, dz, ds_scaled, dz_scaled;
        double dtau = 0.0, dkappa = 0.0;
      };

      auto direction = [&](double eta, const RealVector& d_s, double d_kappa) {
        Direction d;
        const RealVector ls = w.lambda_solve(d_s);
        RealVector ux, uy, uz;
        kkt.solve(-eta * rx, eta * ry, -eta * rz + w.apply(Scaling::Op::WT, ls), ux, uy, uz);
        const double u_dot = c.dot(ux) + (p > 0 ? sf.b.dot(uy) : 0.0) + h.dot(uz);
        d.dtau = (-eta * rt + d_kappa / tau - u_dot) / v_den;
        d.dx = ux + d.dtau * vx;
        d.dy = uy + d.dtau * vy;
        d.dz = uz + d.dtau * vz;
        d.dz_scaled = w.apply(Scaling::Op::W, d.dz);
        d.ds_scaled = -ls - d.dz_scaled;
        d.dkappa = -(d_kappa + kappa * d.dtau) / tau;
        return d;
      };

      auto step_to_boundary = [&](const Direction& d) {
        double a = std::min(w.max_step(d.ds_scaled), w.max_step(d.dz_scaled));
        if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
        if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
        return a;
      };

      // Predictor.
      const Direction aff = direction(1.0, cones.product(lambda, lambda), tau * kappa);
      const double alpha_aff = std::min(1.0, step_to_boundary(aff));
      const double sigma = std::pow(1.0 - alpha_aff, 3);

      // Corrector.
      const RealVector d_s = cones.product(lambda, lambda) + cones.product(aff.ds_scaled, aff.dz_scaled) -
                             sigma * mu * e;
      const double d_k = tau * kappa + aff.dtau * aff.dkappa - sigma * mu;
      const Direction cor = direction(1.0 - sigma, d_s, d_k);
      const double alpha = std::min(1.0, opts.step_fraction * step_to_boundary(cor));
      if (!std::isfinite(alpha) || !cor.dx.allFinite()) throw NumericalError("non-finite search direction");

      x += alpha * cor.dx;
      y += alpha * cor.dy;
      z += alpha * cor.dz;
      s += alpha * w.apply(Scaling::Op::WT, cor.ds_scaled);
      tau += alpha * cor.dtau;
      kappa += alpha * cor.dkappa;
      res.history.back().step = alpha;
      res.min_step = std::min(res.min_step, alpha);
      small_steps = alpha < 1e-8 ? small_steps + 1 : 0;
    } catch (const NumericalError& err) {
      if (fall_back(err.what())) return res;
      finish(Status::NumericalFailure, 1.0 / tau, 1.0 / tau);
      std::ostringstream msg;
      msg << err.what() << " at iteration " << iter << "; pres " << pres << " dres " << dres << " gap "
          << gap;
      res.message = msg.str();
      return res;
    }
  }
}

ConicSolution solve(const ConicProblem& problem, const SolverOptions& opts) {
  const StandardForm sf = compile(problem);
  const StandardResult raw = solve_standard(sf, opts);

  ConicSolution sol;
  sol.status = raw.status;
  sol.primal_objective = raw.primal_objective;
  sol.dual_objective = raw.dual_objective;
  sol.gap = raw.gap;
  sol.relative_gap = raw.relative_gap;
  sol.primal_residual = raw.primal_residual;
  sol.dual_residual = raw.dual_residual;
  sol.iterations = raw.iterations;
  sol.min_step = raw.min_step;
  sol.history = raw.history;
  sol.message = raw.message;

  Index off = 0;
  for (Index d : problem.psd_blocks) {
    const Index s = svec_size(d);
    sol.blocks.push_back(raw.x.size() ? smat(raw.x.segment(off, s), d) : RealMatrix::Zero(d, d));
    off += s;
  }
  sol.scalars = raw.x.size() ? RealVector(raw.x.segment(off, problem.scalar_vars))
                             : RealVector::Zero(problem.scalar_vars);
  sol.eq_duals = raw.y;

  const auto n_ineq = static_cast<Index>(problem.inequalities.size());
  sol.ineq_duals = raw.z.size() ? RealVector(raw.z.head(n_ineq)) : RealVector::Zero(n_ineq);
  Index row = n_ineq;
  for (const auto& c : problem.socs) {
    const auto dim = 1 + static_cast<Index>(c.vector.size());
    sol.soc_duals.push_back(raw.z.size() ? RealVector(raw.z.segment(row, dim)) : RealVector::Zero(dim));
    row += dim;
  }
  for (Index d : problem.psd_blocks) {
    const Index s = svec_size(d);
    sol.block_duals.push_back(raw.z.size() ? smat(raw.z.segment(row, s), d) : RealMatrix::Zero(d, d));
    row += s;
  }
  return sol;
}

}  // namespace secbeam::conic
